#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <nlohmann/json.hpp>
#include <sstream>

#include "cli.hpp"

namespace fs = std::filesystem;
using alphadisc::cli::run;

namespace {

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result invoke(const std::vector<std::string>& args) {
  std::ostringstream out;
  std::ostringstream err;
  const int code = run(args, out, err);
  return {code, out.str(), err.str()};
}

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / "alphadisc_cli_test";
  fs::create_directories(dir);
  return dir / name;
}

void write_file(const fs::path& path, const std::string& text) {
  std::ofstream(path) << text;
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path);
  return {std::istreambuf_iterator<char>(in), {}};
}

double value_of(const std::string& json_text) { return nlohmann::json::parse(json_text).at("value").get<double>(); }

}  // namespace

TEST_CASE("discrepancy examples") {
  auto r = invoke({"discrepancy", "--map", "isometric-plane", "--alpha", "0.5", "--variant", "closed", "--m", "64",
                   "--seed", "7"});
  REQUIRE(r.code == 0);
  CHECK(std::abs(value_of(r.out)) < 1e-10);
  CHECK(r.err.find("value=") != std::string::npos);

  r = invoke({"discrepancy", "--map", "scale2-1d", "--alpha", "1", "--variant", "closed"});
  REQUIRE(r.code == 0);
  CHECK(value_of(r.out) == doctest::Approx(0.096574).epsilon(1e-5));

  r = invoke({"discrepancy", "--map", "scale2-1d", "--alpha", "1", "--variant", "empirical-rp", "--m", "100", "--n",
              "2000", "--seed", "3"});
  REQUIRE(r.code == 0);
  const auto j = nlohmann::json::parse(r.out);
  CHECK(std::abs(j["value"].get<double>() - 0.0965736) <= 3.0 * j["std_error"].get<double>());
  CHECK(j["config"]["seed"] == 3);
  CHECK(j["config"]["n"] == 2000);
}

TEST_CASE("conformal examples") {
  auto r = invoke({"conformal", "--map", "conformal-3", "--m", "16"});
  REQUIRE(r.code == 0);
  auto j = nlohmann::json::parse(r.out);
  CHECK(std::abs(j["value"].get<double>()) < 1e-8);
  CHECK(j["lambda"]["median"].get<double>() == doctest::Approx(9.0).epsilon(1e-8));

  r = invoke({"conformal", "--map", "isometric-plane", "--m", "16", "--alpha", "0.5"});
  REQUIRE(r.code == 0);
  j = nlohmann::json::parse(r.out);
  CHECK(std::abs(j["value"].get<double>()) < 1e-8);
  CHECK(j["lambda"]["mean"].get<double>() == doctest::Approx(1.0).epsilon(1e-6));

  r = invoke({"conformal", "--map", "anisotropic-1-4", "--m", "4"});
  REQUIRE(r.code == 0);
  CHECK(value_of(r.out) > 0.1);
}

TEST_CASE("exit codes") {
  CHECK(invoke({"discrepancy", "--map", "no-such-map", "--variant", "closed"}).code == 2);
  CHECK(invoke({"discrepancy", "--variant", "closed"}).code == 2);
  CHECK(invoke({"discrepancy", "--map", "scale2-1d", "--variant", "empirical-rq"}).code == 2);
  const auto indefinite = invoke({"discrepancy", "--map", "scale2-1d", "--variant", "closed", "--alpha", "-5"});
  CHECK(indefinite.code == 1);
  CHECK(indefinite.err.find("y0 = ") != std::string::npos);
  CHECK(invoke({"frobnicate"}).code == 2);

  auto r = invoke({"embed", "--input", scratch("missing.csv").string(), "--perplexity", "2", "--seed", "1"});
  CHECK(r.code == 2);
  CHECK(r.err.find("missing.csv") != std::string::npos);

  const fs::path bad = scratch("bad.csv");
  write_file(bad, "a,b\n1,2\n3,x\n5,6\n");
  r = invoke({"embed", "--input", bad.string(), "--perplexity", "1.5", "--seed", "1"});
  CHECK(r.code == 2);
  CHECK(r.err.find("row 2") != std::string::npos);

  const fs::path good = scratch("good.csv");
  write_file(good, "0,0\n1,0\n0,1\n");
  CHECK(invoke({"embed", "--input", good.string(), "--perplexity", "2"}).code == 2);
  CHECK(invoke({"embed", "--input", good.string(), "--perplexity", "3", "--seed", "1"}).code == 2);
  CHECK(invoke({"theorem6", "--map", "swiss-roll"}).code == 2);
}

TEST_CASE("embedding of three symmetric points is equilateral") {
  const fs::path input = scratch("triangle.csv");
  write_file(input, "x1,x2,x3\n1,0,0\n0,1,0\n0,0,1\n");
  const fs::path output = scratch("triangle_out.csv");
  const fs::path trace = scratch("triangle_trace.json");
  const auto r = invoke({"embed", "--input", input.string(), "--perplexity", "2", "--seed", "5", "--iterations",
                         "300", "--output", output.string(), "--trace", trace.string()});
  REQUIRE(r.code == 0);
  std::istringstream in(read_file(output));
  std::string line;
  std::getline(in, line);
  CHECK(line == "y1,y2");
  std::vector<std::array<double, 2>> y;
  while (std::getline(in, line)) {
    std::array<double, 2> p{};
    CHECK(std::sscanf(line.c_str(), "%lf,%lf", &p[0], &p[1]) == 2);
    y.push_back(p);
  }
  REQUIRE(y.size() == 3);
  auto dist = [&](int a, int b) { return std::hypot(y[a][0] - y[b][0], y[a][1] - y[b][1]); };
  const double d01 = dist(0, 1);
  const double d02 = dist(0, 2);
  const double d12 = dist(1, 2);
  const double lo = std::min({d01, d02, d12});
  const double hi = std::max({d01, d02, d12});
  CHECK(hi / lo < 1.05);

  const auto t = nlohmann::json::parse(read_file(trace));
  CHECK(t["config"]["perplexity"] == 2.0);
  const auto costs = t["cost_trace"].get<std::vector<double>>();
  for (std::size_t k = 1; k < costs.size(); ++k) CHECK(costs[k] <= costs[k - 1]);
}

TEST_CASE("theorem6 report columns and determinism") {
  const fs::path a = scratch("t6_a.csv");
  const fs::path b = scratch("t6_b.csv");
  const std::vector<std::string> base = {"theorem6", "--map", "isometric-plane", "--n-list", "64,128",
                                         "--replicates", "2", "--perplexity", "10", "--seed", "4"};
  auto args = base;
  args.insert(args.end(), {"--out", a.string()});
  REQUIRE(invoke(args).code == 0);
  args = base;
  args.insert(args.end(), {"--out", b.string(), "--threads", "1"});
  REQUIRE(invoke(args).code == 0);
  const std::string text = read_file(a);
  CHECK(text == read_file(b));
  CHECK(text.rfind("n,sne_cost_fitted_residual,closed_form_value,seed", 0) == 0);
  std::istringstream in(text);
  std::string line;
  std::getline(in, line);
  int rows = 0;
  while (std::getline(in, line)) {
    ++rows;
    std::vector<std::string> fields;
    std::istringstream ls(line);
    for (std::string f; std::getline(ls, f, ',');) fields.push_back(f);
    REQUIRE(fields.size() >= 4);
    CHECK(std::abs(std::stod(fields[2])) < 1e-12);
  }
  CHECK(rows == 4);
}

TEST_CASE("repeated runs give byte-identical reports") {
  const std::vector<std::vector<std::string>> commands = {
      {"discrepancy", "--map", "swiss-roll", "--alpha", "0.5", "--variant", "empirical-rq", "--m", "20", "--n",
       "200", "--seed", "11"},
      {"discrepancy", "--map", "swiss-roll", "--alpha", "1", "--variant", "empirical-rp", "--m", "20", "--n", "200",
       "--seed", "11", "--threads", "3"},
      {"conformal", "--map", "anisotropic-1-4", "--alpha", "0.5", "--m", "5", "--search", "golden"},
      {"oracle"},
  };
  for (const auto& cmd : commands) {
    const auto first = invoke(cmd);
    const auto second = invoke(cmd);
    REQUIRE(first.code == 0);
    CHECK(first.out == second.out);
    CHECK(!first.out.empty());
  }
}

TEST_CASE("oracle passes and fails on its threshold") {
  auto r = invoke({"oracle"});
  CHECK(r.code == 0);
  const auto j = nlohmann::json::parse(r.out);
  CHECK(j["max_abs_difference"].get<double>() < 1e-6);
  r = invoke({"oracle", "--points", "11", "--tolerance", "1e-12"});
  CHECK(r.code == 1);
}
