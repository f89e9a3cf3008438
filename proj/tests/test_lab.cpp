#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "endslab/lab.hpp"

using namespace endslab;

namespace {

const char* kBasicScenario = R"({
  "ends": [
    {"alpha": "3", "betas": [], "dim": 3},
    {"alpha": "3", "betas": [], "dim": 3}
  ],
  "discretization": {"r0": 8.0, "r_splice": 30.0, "R_max": 2000.0, "delta": 1.0},
  "sweep": {"quantity": "gap", "points": {"from": 100.0, "to": 2000.0, "per_decade": 4}},
  "output": "out/test-basic"
})";

}  // namespace

TEST_CASE("synthetic fits") {
  std::vector<double> xs, ys_sq, ys_sqlog, ys_const;
  for (double x = 1e2; x <= 1e6 + 1; x *= 2) {
    xs.push_back(x);
    ys_sq.push_back(x * x);
    ys_sqlog.push_back(x * x * std::log(x));
    ys_const.push_back(4.2);
  }
  auto f1 = lab::fit_exponents(xs, ys_sq, false);
  CHECK(f1.a == doctest::Approx(2.0).epsilon(1e-9));
  CHECK(f1.b == 0.0);
  CHECK(f1.rms < 1e-9);

  auto f2 = lab::fit_exponents(xs, ys_sqlog, true);
  CHECK(f2.a > 1.9);
  CHECK(f2.a < 2.1);
  CHECK(f2.b > 0.7);
  CHECK(f2.b < 1.3);

  auto f3 = lab::fit_exponents(xs, ys_const, false);
  CHECK(f3.a == doctest::Approx(0.0).epsilon(1e-9));

  // refuse the log log term over a sliver of a window
  std::vector<double> tx, ty;
  for (double x = 1000.0; x <= 1012.0; x += 3.0) {
    tx.push_back(x);
    ty.push_back(x * x);
  }
  CHECK_THROWS(lab::fit_exponents(tx, ty, true));
  // fewer than 4 points
  CHECK_THROWS(lab::fit_exponents({1e2, 1e3, 1e4}, {1.0, 2.0, 3.0}, false));
}

TEST_CASE("scenario parsing is strict") {
  CHECK_THROWS_WITH(lab::load_scenario(R"({"endz": []})"),
                    doctest::Contains("unknown key"));
  CHECK_THROWS(lab::load_scenario(R"({"ends": []})"));
  CHECK_THROWS_WITH(
      lab::load_scenario(
          R"({"ends": [{"alpha": "3", "dim": 3, "color": "red"}]})"),
      doctest::Contains("unknown key"));
  // inadmissible volume class for the dimension
  CHECK_THROWS_WITH(
      lab::load_scenario(R"({"ends": [{"alpha": "3", "dim": 2}]})"),
      doctest::Contains("dimension bound"));

  auto s = lab::load_scenario(kBasicScenario);
  CHECK(s.ends.size() == 2);
  CHECK(s.disc.grading == 0);
  CHECK(lab::grid_points(s.grid).size() == 6);  // 1.3 decades at 4/decade

  // resolved scenario and hash are stable
  CHECK(lab::config_hash(s) == lab::config_hash(lab::load_scenario(kBasicScenario)));
  CHECK(lab::resolved_json(s).find("\"quantity\": \"gap\"") != std::string::npos);
}

TEST_CASE("gap sweep end to end") {
  auto s = lab::load_scenario(kBasicScenario);
  s.output = "out/test-gap";
  auto table = lab::run_sweep(s, 2);
  REQUIRE(table.rows.size() >= 5);
  double prev = 1e300;
  for (const auto& row : table.rows) {
    REQUIRE(row.error.empty());
    CHECK(row.value > 0);
    CHECK(row.value < prev);
    prev = row.value;
  }
  auto fit = lab::fit_exponents(s, table);
  auto verdict = lab::compare(s, fit);
  CHECK(verdict.prediction.supported);
  CHECK(verdict.prediction.a == doctest::Approx(-3.0));
  // short desk-scale sweep: the slope is near the prediction
  CHECK(fit.a == doctest::Approx(-3.0).epsilon(0.15));

  lab::write_outputs(s, table, verdict);
  namespace fs = std::filesystem;
  CHECK(fs::exists(fs::path(s.output) / "sweep.csv"));
  CHECK(fs::exists(fs::path(s.output) / "report.json"));
  CHECK(fs::exists(fs::path(s.output) / "scenario.resolved.json"));

  // byte-for-byte reproducibility of the whole pipeline
  auto table2 = lab::run_sweep(s, 1);
  lab::Scenario s2 = s;
  s2.output = "out/test-gap-2";
  lab::write_outputs(s2, table2, lab::compare(s2, lab::fit_exponents(s2, table2)));
  auto slurp = [](const std::string& p) {
    std::ifstream in(p);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
  };
  CHECK(slurp(s.output + "/sweep.csv") == slurp(s2.output + "/sweep.csv"));
}

TEST_CASE("prediction targets per quantity") {
  auto s = lab::load_scenario(kBasicScenario);
  s.quantity = lab::Quantity::Gap;
  auto p = lab::predict(s);
  CHECK(p.a == doctest::Approx(-3.0));
  CHECK(p.b == doctest::Approx(0.0));
  s.quantity = lab::Quantity::Whitney;
  auto pw = lab::predict(s);
  CHECK(pw.a == doctest::Approx(3.0));
  s.quantity = lab::Quantity::Heat;
  auto ph = lab::predict(s);
  CHECK(ph.a == doctest::Approx(-1.5));

  // unsupported families are skipped, not failed
  lab::Scenario u = s;
  u.quantity = lab::Quantity::Gap;
  u.ends.clear();
  lab::EndConfig e1;
  e1.alpha = asym::parse_rational("2");
  e1.betas = {asym::parse_rational("1"), asym::parse_rational("1"),
              asym::parse_rational("1")};
  e1.dim = 3;
  u.ends.push_back(e1);
  u.ends.push_back(e1);
  auto pu = lab::predict(u);
  if (!pu.supported) {
    lab::FitResult dummy;
    auto v = lab::compare(u, dummy);
    CHECK(v.status == lab::Verdict::Status::Skipped);
  }
}

TEST_CASE("heat sweep covers the requested range") {
  auto s = lab::load_scenario(kBasicScenario);
  s.quantity = lab::Quantity::Heat;
  s.grid = {1.0, 1e4, 4};
  s.output = "out/test-heat";
  auto table = lab::run_sweep(s, 1);
  REQUIRE(!table.rows.empty());
  CHECK(table.rows.front().x == doctest::Approx(1.0));
  CHECK(table.rows.back().x == doctest::Approx(1e4).epsilon(1e-6));
  for (const auto& row : table.rows) {
    REQUIRE(row.error.empty());
    CHECK(row.value > 0);
  }
}
