#pragma once

// Built-in smooth maps and the tanh multilayer perceptron loaded from a
// plain-text weights file.

#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "alphadisc/geometry.hpp"

namespace alphadisc {

struct MapInfo {
  std::string name;
  std::string description;
  int dim_in;
  int dim_out;
  bool isometric;  // J^T J = I everywhere
};

const std::vector<MapInfo>& builtin_map_catalog();

/// Throws DomainError for an unknown name.
SmoothMap builtin_map(std::string_view name);

/// A builtin name, or "mlp:<path>" for a weights file.
SmoothMap resolve_map(std::string_view spec);

SmoothMap make_identity_map(int dim);
SmoothMap make_linear_map(Matrix a, std::string name = "linear");
/// y -> c Q y with Q orthogonal.
SmoothMap make_conformal_map(double c, const Matrix& q);
/// (y1, y2) -> (t cos t, y2, t sin t) with t = y1 + offset.
SmoothMap make_swiss_roll_map(double offset);
/// (y1, y2) -> (r cos y2, r sin y2) with r = y1 + radial_offset.
SmoothMap make_polar_chart(double radial_offset);
/// (y1, y2) -> (cos y1, sin y1, y2); a curved isometric embedding.
SmoothMap make_cylinder_map();

struct MlpLayer {
  Matrix weights;  // rows = outputs, cols = inputs
  Vector bias;
};

/// tanh on every hidden layer, identity on the last.
struct MlpWeights {
  std::vector<MlpLayer> layers;
};

/// Format:
///   layers: k
///   then per layer a `rows cols` line, `rows` lines of `cols` weights and
///   one bias line of `rows` values.
/// Blank lines and lines starting with '#' are ignored. Throws ParseError
/// with the line number and field index.
MlpWeights parse_mlp_weights(std::istream& in, const std::string& source = "<stream>");
MlpWeights load_mlp_weights(const std::filesystem::path& path);
std::string format_mlp_weights(const MlpWeights& w);

/// Throws DomainError if consecutive layer shapes do not chain.
SmoothMap make_mlp_map(MlpWeights weights, std::string name = "mlp");

}  // namespace alphadisc
