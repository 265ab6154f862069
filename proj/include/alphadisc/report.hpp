#pragma once

// Machine-readable reports. JSON objects keep insertion order so that
// identical runs serialize to identical bytes.

#include <iosfwd>
#include <string>
#include <vector>

#include <json.hpp>

#include "alphadisc/discrepancy.hpp"
#include "alphadisc/theorem6.hpp"

namespace alphadisc {

using Json = nlohmann::ordered_json;

/// {value, std_error, m, n, alpha, variant, seed, skipped_points}; a +inf
/// value is written as the string "inf".
Json to_json(const DiscrepancyEstimate& est);

/// min, max, mean and median of the per-point lambdas.
Json lambda_summary(const std::vector<double>& lambdas);

Json to_json(const std::vector<double>& values);

/// Two-space indent and a trailing newline.
std::string dump(const Json& j);

/// Columns n, sne_cost_fitted_residual, closed_form_value, seed, then the
/// fit details.
void write_theorem6_csv(std::ostream& out, const std::vector<Theorem6Row>& rows);

}  // namespace alphadisc
