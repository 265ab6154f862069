#include "alphadisc/maps.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <numbers>
#include <sstream>

#include "alphadisc/errors.hpp"

namespace alphadisc {

namespace {

constexpr double kSwissRollOffset = 2.0 * std::numbers::pi;
constexpr double kPolarOffset = 4.0;

Matrix rotation(double angle) {
  Matrix r(2, 2);
  r << std::cos(angle), -std::sin(angle), std::sin(angle), std::cos(angle);
  return r;
}

Matrix isometric_curve_frame() {
  Matrix a = Matrix::Zero(2, 1);
  a(0, 0) = 1.0;
  return a;
}

Matrix isometric_plane_frame() {
  Matrix a = Matrix::Zero(3, 2);
  a(0, 0) = 1.0;
  a(1, 1) = 1.0;
  return a;
}

// Orthonormal columns spanning a tilted plane in R^3.
Matrix tilted_plane_frame() {
  Matrix a(3, 2);
  a << 1.0, 2.0, 2.0, -1.0, 0.5, 1.5;
  return Eigen::HouseholderQR<Matrix>(a).householderQ() * Matrix::Identity(3, 2);
}

Matrix fixed_random_matrix() {
  Matrix a(3, 2);
  a << 0.8, -0.3, 0.4, 1.2, -0.5, 0.7;
  return a;
}

MlpWeights demo_mlp_weights() {
  MlpWeights w;
  Matrix w1(6, 2);
  w1 << 0.9, -0.2, 0.3, 0.7, -0.5, 0.4, 0.2, -0.8, 0.6, 0.1, -0.3, -0.6;
  Vector b1(6);
  b1 << 0.1, -0.2, 0.05, 0.0, 0.3, -0.1;
  Matrix w2(3, 6);
  w2 << 0.7, -0.4, 0.2, 0.5, -0.3, 0.6, -0.2, 0.8, 0.4, -0.6, 0.1, 0.3, 0.5, 0.2, -0.7, 0.3, 0.6, -0.4;
  Vector b2(3);
  b2 << 0.0, 0.1, -0.1;
  w.layers.push_back({w1, b1});
  w.layers.push_back({w2, b2});
  return w;
}

struct Entry {
  MapInfo info;
  SmoothMap (*make)();
};

const std::vector<Entry>& registry() {
  static const std::vector<Entry> entries = {
      {{"identity-1d", "identity on R", 1, 1, true}, [] { return make_identity_map(1); }},
      {{"identity-2d", "identity on R^2", 2, 2, true}, [] { return make_identity_map(2); }},
      {{"rotation-2d", "rotation of R^2 by 0.7 rad", 2, 2, true},
       [] { return make_linear_map(rotation(0.7), "rotation-2d"); }},
      {{"isometric-curve", "y -> (y, 0)", 1, 2, true},
       [] { return make_linear_map(isometric_curve_frame(), "isometric-curve"); }},
      {{"isometric-plane", "(y1, y2) -> (y1, y2, 0)", 2, 3, true},
       [] { return make_linear_map(isometric_plane_frame(), "isometric-plane"); }},
      {{"tilted-plane", "orthonormal 3x2 frame", 2, 3, true},
       [] { return make_linear_map(tilted_plane_frame(), "tilted-plane"); }},
      {{"cylinder", "(y1, y2) -> (cos y1, sin y1, y2)", 2, 3, true}, [] { return make_cylinder_map(); }},
      {{"scale2-1d", "y -> sqrt(2) y on R; pull-back metric 2", 1, 1, false},
       [] { return make_linear_map(std::sqrt(2.0) * Matrix::Identity(1, 1), "scale2-1d"); }},
      {{"scale2-2d", "y -> 2 y on R^2; pull-back metric 4 I", 2, 2, false},
       [] { return make_linear_map(2.0 * Matrix::Identity(2, 2), "scale2-2d"); }},
      {{"conformal-3", "y -> 3 R(0.7) y", 2, 2, false},
       [] { return make_conformal_map(3.0, rotation(0.7)); }},
      {{"anisotropic-1-4", "y -> diag(1, 4) y", 2, 2, false},
       [] {
         Matrix a = Matrix::Zero(2, 2);
         a(0, 0) = 1.0;
         a(1, 1) = 4.0;
         return make_linear_map(a, "anisotropic-1-4");
       }},
      {{"linear-random", "fixed full-rank 3x2 linear map", 2, 3, false},
       [] { return make_linear_map(fixed_random_matrix(), "linear-random"); }},
      {{"polar", "polar chart (r, theta) with r = y1 + 4", 2, 2, false},
       [] { return make_polar_chart(kPolarOffset); }},
      {{"swiss-roll", "(t cos t, y2, t sin t) with t = y1 + 2 pi", 2, 3, false},
       [] { return make_swiss_roll_map(kSwissRollOffset); }},
      {{"mlp-demo", "tanh MLP 2 -> 6 -> 3 with fixed weights", 2, 3, false},
       [] { return make_mlp_map(demo_mlp_weights(), "mlp-demo"); }},
  };
  return entries;
}

[[noreturn]] void parse_fail(const std::string& source, std::size_t line, const std::string& what) {
  throw ParseError(source + ":" + std::to_string(line) + ": " + what);
}

struct LineReader {
  std::istream& in;
  const std::string& source;
  std::size_t line_no = 0;

  // Next non-blank, non-comment line; false at end of input.
  bool next(std::string& line) {
    while (std::getline(in, line)) {
      ++line_no;
      const auto first = line.find_first_not_of(" \t\r");
      if (first == std::string::npos || line[first] == '#') continue;
      return true;
    }
    return false;
  }

  std::string require(const char* what) {
    std::string line;
    if (!next(line)) parse_fail(source, line_no + 1, std::string("unexpected end of file, expected ") + what);
    return line;
  }
};

std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t' || line[i] == '\r')) ++i;
    std::size_t j = i;
    while (j < line.size() && line[j] != ' ' && line[j] != '\t' && line[j] != '\r') ++j;
    if (j > i) out.push_back(line.substr(i, j - i));
    i = j;
  }
  return out;
}

template <typename T>
T parse_number(std::string_view field, const std::string& source, std::size_t line, std::size_t index) {
  T value{};
  const auto* end = field.data() + field.size();
  const auto res = std::from_chars(field.data(), end, value);
  if (res.ec != std::errc() || res.ptr != end) {
    parse_fail(source, line, "field " + std::to_string(index + 1) + " ('" + std::string(field) +
                                 "') is not a valid number");
  }
  return value;
}

Vector parse_row(const std::string& line, Eigen::Index expected, const std::string& source,
                 std::size_t line_no, const char* what) {
  const auto fields = split_fields(line);
  if (static_cast<Eigen::Index>(fields.size()) != expected) {
    parse_fail(source, line_no, std::string(what) + " has " + std::to_string(fields.size()) +
                                    " fields, expected " + std::to_string(expected));
  }
  Vector v(expected);
  for (std::size_t k = 0; k < fields.size(); ++k) {
    v[static_cast<Eigen::Index>(k)] = parse_number<double>(fields[k], source, line_no, k);
  }
  return v;
}

}  // namespace

const std::vector<MapInfo>& builtin_map_catalog() {
  static const std::vector<MapInfo> catalog = [] {
    std::vector<MapInfo> out;
    for (const auto& e : registry()) out.push_back(e.info);
    return out;
  }();
  return catalog;
}

SmoothMap builtin_map(std::string_view name) {
  for (const auto& e : registry()) {
    if (e.info.name == name) return e.make();
  }
  throw DomainError("unknown builtin map '" + std::string(name) + "'");
}

SmoothMap resolve_map(std::string_view spec) {
  constexpr std::string_view prefix = "mlp:";
  if (spec.substr(0, prefix.size()) == prefix) {
    const std::string path(spec.substr(prefix.size()));
    return make_mlp_map(load_mlp_weights(path), std::string(spec));
  }
  return builtin_map(spec);
}

SmoothMap make_identity_map(int dim) {
  return make_linear_map(Matrix::Identity(dim, dim), "identity-" + std::to_string(dim) + "d");
}

SmoothMap make_linear_map(Matrix a, std::string name) {
  const int d = static_cast<int>(a.cols());
  const int big_d = static_cast<int>(a.rows());
  return SmoothMap(
      std::move(name), d, big_d, [a](const Vector& y) -> Vector { return a * y; },
      [a](const Vector&) -> Matrix { return a; });
}

SmoothMap make_conformal_map(double c, const Matrix& q) {
  if (!(c > 0.0)) throw DomainError("conformal factor must be positive");
  if (!(q.transpose() * q).isIdentity(1e-12)) throw DomainError("conformal map needs an orthogonal Q");
  std::ostringstream os;
  os << "conformal-" << c;
  return make_linear_map(c * q, os.str());
}

SmoothMap make_swiss_roll_map(double offset) {
  return SmoothMap(
      "swiss-roll", 2, 3,
      [offset](const Vector& y) -> Vector {
        const double t = y[0] + offset;
        Vector x(3);
        x << t * std::cos(t), y[1], t * std::sin(t);
        return x;
      },
      [offset](const Vector& y) -> Matrix {
        const double t = y[0] + offset;
        Matrix j = Matrix::Zero(3, 2);
        j(0, 0) = std::cos(t) - t * std::sin(t);
        j(2, 0) = std::sin(t) + t * std::cos(t);
        j(1, 1) = 1.0;
        return j;
      });
}

SmoothMap make_polar_chart(double radial_offset) {
  return SmoothMap(
      "polar", 2, 2,
      [radial_offset](const Vector& y) -> Vector {
        const double r = y[0] + radial_offset;
        Vector x(2);
        x << r * std::cos(y[1]), r * std::sin(y[1]);
        return x;
      },
      [radial_offset](const Vector& y) -> Matrix {
        const double r = y[0] + radial_offset;
        Matrix j(2, 2);
        j << std::cos(y[1]), -r * std::sin(y[1]), std::sin(y[1]), r * std::cos(y[1]);
        return j;
      });
}

SmoothMap make_cylinder_map() {
  return SmoothMap(
      "cylinder", 2, 3,
      [](const Vector& y) -> Vector {
        Vector x(3);
        x << std::cos(y[0]), std::sin(y[0]), y[1];
        return x;
      },
      [](const Vector& y) -> Matrix {
        Matrix j = Matrix::Zero(3, 2);
        j(0, 0) = -std::sin(y[0]);
        j(1, 0) = std::cos(y[0]);
        j(2, 1) = 1.0;
        return j;
      });
}

MlpWeights parse_mlp_weights(std::istream& in, const std::string& source) {
  LineReader reader{in, source};
  const std::string header = reader.require("'layers: k' header");
  const auto header_fields = split_fields(header);
  if (header_fields.size() != 2 || header_fields[0] != "layers:") {
    parse_fail(source, reader.line_no, "expected header 'layers: k'");
  }
  const auto count = parse_number<std::size_t>(header_fields[1], source, reader.line_no, 1);
  if (count == 0) parse_fail(source, reader.line_no, "an MLP needs at least one layer");

  MlpWeights out;
  for (std::size_t l = 0; l < count; ++l) {
    const std::string shape = reader.require("'rows cols' layer shape");
    const auto fields = split_fields(shape);
    if (fields.size() != 2) parse_fail(source, reader.line_no, "layer shape must be 'rows cols'");
    const auto rows = parse_number<std::size_t>(fields[0], source, reader.line_no, 0);
    const auto cols = parse_number<std::size_t>(fields[1], source, reader.line_no, 1);
    if (rows == 0 || cols == 0) parse_fail(source, reader.line_no, "layer shape must be positive");

    MlpLayer layer;
    layer.weights.resize(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
    for (std::size_t r = 0; r < rows; ++r) {
      const std::string line = reader.require("weight row");
      layer.weights.row(static_cast<Eigen::Index>(r)) =
          parse_row(line, static_cast<Eigen::Index>(cols), source, reader.line_no, "weight row").transpose();
    }
    const std::string bias = reader.require("bias line");
    layer.bias = parse_row(bias, static_cast<Eigen::Index>(rows), source, reader.line_no, "bias line");
    out.layers.push_back(std::move(layer));
  }
  std::string extra;
  if (reader.next(extra)) parse_fail(source, reader.line_no, "unexpected content after the last layer");
  return out;
}

MlpWeights load_mlp_weights(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open weights file '" + path.string() + "'");
  return parse_mlp_weights(in, path.string());
}

std::string format_mlp_weights(const MlpWeights& w) {
  std::ostringstream os;
  os.precision(17);
  os << "layers: " << w.layers.size() << '\n';
  for (const auto& layer : w.layers) {
    os << layer.weights.rows() << ' ' << layer.weights.cols() << '\n';
    for (Eigen::Index r = 0; r < layer.weights.rows(); ++r) {
      for (Eigen::Index c = 0; c < layer.weights.cols(); ++c) os << (c ? " " : "") << layer.weights(r, c);
      os << '\n';
    }
    for (Eigen::Index r = 0; r < layer.bias.size(); ++r) os << (r ? " " : "") << layer.bias[r];
    os << '\n';
  }
  return os.str();
}

SmoothMap make_mlp_map(MlpWeights weights, std::string name) {
  if (weights.layers.empty()) throw DomainError("MLP has no layers");
  for (std::size_t l = 0; l < weights.layers.size(); ++l) {
    const auto& layer = weights.layers[l];
    if (layer.bias.size() != layer.weights.rows()) throw DomainError("MLP bias does not match its layer");
    if (l > 0 && layer.weights.cols() != weights.layers[l - 1].weights.rows()) {
      throw DomainError("MLP layer " + std::to_string(l) + " does not chain with the previous one");
    }
  }
  const int d = static_cast<int>(weights.layers.front().weights.cols());
  const int big_d = static_cast<int>(weights.layers.back().weights.rows());
  auto shared = std::make_shared<const MlpWeights>(std::move(weights));
  return SmoothMap(
      std::move(name), d, big_d,
      [shared](const Vector& y) -> Vector {
        Vector h = y;
        const auto& layers = shared->layers;
        for (std::size_t l = 0; l < layers.size(); ++l) {
          h = layers[l].weights * h + layers[l].bias;
          if (l + 1 < layers.size()) h = h.array().tanh().matrix();
        }
        return h;
      },
      [shared](const Vector& y) -> Matrix {
        Vector h = y;
        Matrix jac = Matrix::Identity(y.size(), y.size());
        const auto& layers = shared->layers;
        for (std::size_t l = 0; l < layers.size(); ++l) {
          h = layers[l].weights * h + layers[l].bias;
          jac = layers[l].weights * jac;
          if (l + 1 < layers.size()) {
            h = h.array().tanh().matrix();
            jac = (1.0 - h.array().square()).matrix().asDiagonal() * jac;
          }
        }
        return jac;
      });
}

}  // namespace alphadisc
