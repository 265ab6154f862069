#include "alphadisc/report.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

#include "alphadisc/csv.hpp"
#include "alphadisc/errors.hpp"

namespace alphadisc {

namespace {

Json number(double v) {
  if (std::isfinite(v)) return v;
  if (std::isnan(v)) return "nan";
  return v > 0 ? "inf" : "-inf";
}

}  // namespace

Json to_json(const DiscrepancyEstimate& est) {
  Json j;
  j["value"] = number(est.value);
  j["std_error"] = number(est.std_error);
  j["m"] = est.m;
  j["n"] = est.n;
  j["alpha"] = est.alpha;
  j["variant"] = to_string(est.variant);
  j["seed"] = est.seed;
  j["skipped_points"] = est.skipped_points;
  return j;
}

Json lambda_summary(const std::vector<double>& lambdas) {
  if (lambdas.empty()) throw DomainError("no lambdas to summarize");
  std::vector<double> sorted = lambdas;
  std::sort(sorted.begin(), sorted.end());
  double sum = 0.0;
  for (double l : sorted) sum += l;
  const std::size_t h = sorted.size() / 2;
  Json j;
  j["min"] = sorted.front();
  j["max"] = sorted.back();
  j["mean"] = sum / static_cast<double>(sorted.size());
  j["median"] = sorted.size() % 2 ? sorted[h] : 0.5 * (sorted[h - 1] + sorted[h]);
  return j;
}

Json to_json(const std::vector<double>& values) {
  Json j = Json::array();
  for (double v : values) j.push_back(number(v));
  return j;
}

std::string dump(const Json& j) { return j.dump(2) + "\n"; }

void write_theorem6_csv(std::ostream& out, const std::vector<Theorem6Row>& rows) {
  out << "n,sne_cost_fitted_residual,closed_form_value,seed,slope,offset,"
         "calibrated_closed_form_mean,sne_cost_mean,reference_count\n";
  for (const auto& r : rows) {
    out << r.n << ',' << format_double(r.residual) << ',' << format_double(r.closed_form_value) << ','
        << r.seed << ',' << format_double(r.slope) << ',' << format_double(r.offset) << ','
        << format_double(r.calibrated_closed_form_mean) << ',' << format_double(r.sne_cost_mean) << ','
        << r.reference_count << '\n';
  }
}

}  // namespace alphadisc
