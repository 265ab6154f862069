#pragma once

#include <cstdint>
#include <vector>

#include "alphadisc/discrepancy.hpp"

namespace alphadisc::detail {

// Stream ids for make_stream; distinct per use of a run seed.
inline constexpr std::uint64_t kNeighborStream = 0x4e454947ULL;

/// m reference points from the prior, one per row.
inline Matrix draw_references(const LatentPrior& prior, std::size_t m, std::uint64_t seed) {
  PriorSampler sampler(prior, seed);
  return sampler.draw(m);
}

/// Fills value and std_error from per-point values.
void summarize(DiscrepancyEstimate& est, std::vector<double> values);

void check_reference_count(std::size_t m);

}  // namespace alphadisc::detail
