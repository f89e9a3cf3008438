#include <doctest.h>

#include <cmath>
#include <random>

#include "endslab/whitney.hpp"

using namespace endslab;

namespace {

asym::ExponentTuple et(const std::string& a, std::vector<std::string> bs = {}) {
  asym::ExponentTuple e;
  e.alpha = asym::parse_rational(a);
  for (const auto& b : bs) e.betas.push_back(asym::parse_rational(b));
  return e;
}

}  // namespace

TEST_CASE("parameter constraints") {
  CHECK(whitney::WhitneyParams{1.0 / 200, 2.0}.valid());
  CHECK(whitney::WhitneyParams{1.0 / 50, 1.0}.valid());
  CHECK_FALSE(whitney::WhitneyParams{1.0 / 19, 1.0}.valid());  // above 1/20
  CHECK_FALSE(whitney::WhitneyParams{1.0 / 100, 2.0}.valid()); // eta >= 1/(k(36k+6))
  CHECK_THROWS(whitney::build_whitney(1e4, {1.0 / 19, 1.0}, 2));

  // The string-inclusion dilation 6(1/eta + 4)/(1/eta - 4) + 3 drops below 12
  // exactly on the admissible side of eta = 1/20.
  auto factor = [](double eta) {
    return 6.0 * (1.0 / eta + 4.0) / (1.0 / eta - 4.0) + 3.0;
  };
  CHECK(factor(1.0 / 21) < 12.0);
  CHECK(factor(1.0 / 19) > 12.0);
}

TEST_CASE("ball radii arithmetic") {
  whitney::WhitneyParams p{1.0 / 200, 2.0};
  auto c = whitney::build_whitney(1e4, p, 2);
  CHECK(c.b0_radius == doctest::Approx(1200.0));
  CHECK(c.b1_radius == doctest::Approx(3900.0));
  CHECK(p.kappa * c.b1_radius < 1e4);
  auto rep = whitney::verify_covering(c);
  CHECK(rep.pass);
  // consecutive radii follow the tangent-packing ratio
  const auto& ray = c.per_ray[0];
  for (size_t i = 1; i < std::min<size_t>(ray.size(), 40); ++i) {
    double ratio = c.balls[ray[i]].radius / c.balls[ray[i - 1]].radius;
    CHECK(ratio == doctest::Approx(1.0 / (1 + 2 * p.eta)).epsilon(1e-12));
  }
}

TEST_CASE("random parameter triples verify") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  for (int it = 0; it < 30; ++it) {
    double kappa = 1.0 + 2.0 * uni(rng);
    double eta_max = std::min(1.0 / 20, 1.0 / (kappa * (36 * kappa + 6)));
    double eta = eta_max * (0.2 + 0.75 * uni(rng));
    double r = std::pow(10.0, 2 + 3 * uni(rng));
    whitney::WhitneyParams p{eta, kappa};
    REQUIRE(p.valid());
    auto c = whitney::build_whitney(r, p, 1 + (it % 3));
    auto rep = whitney::verify_covering(c);
    CHECK(rep.pass);
    CHECK(rep.max_overlap_12k <= 64);
    CHECK(rep.max_balls_per_ray <= 10.0 / eta * std::log(r));
  }
}

TEST_CASE("mutations are caught") {
  whitney::WhitneyParams p{1.0 / 100, 1.0};
  auto c = whitney::build_whitney(5e3, p, 2);
  REQUIRE(whitney::verify_covering(c).pass);

  auto inflated = c;
  inflated.balls[inflated.per_ray[0][3]].radius *= 1.1;
  CHECK_FALSE(whitney::verify_covering(inflated).pass);

  auto shifted = c;
  shifted.balls[shifted.per_ray[1][2]].center *= 1.05;
  CHECK_FALSE(whitney::verify_covering(shifted).pass);

  auto shrunk = c;
  shrunk.balls[shrunk.per_ray[0][5]].radius *= 0.9;
  CHECK_FALSE(whitney::verify_covering(shrunk).pass);
}

TEST_CASE("combined bound on a two-end graph") {
  auto plane = model::VolumeProfile::make(et("2"), 2, 1.0, 1.0);
  auto g = mesh::build_connected_sum({plane, plane}, 4.0, {1.0, 0}, 2100.0);
  whitney::WhitneyParams p{1.0 / 200, 2.0};
  double r = 2000.0;
  auto c = whitney::build_whitney(r, p, 2);
  CHECK(whitney::verify_covering(c, &g).pass);

  spectral::SolverOptions opt;
  opt.dense_couple_threshold = 700;
  double bound = whitney::combined_upper_bound(g, c, opt, 2);
  CHECK(bound > 0);

  // the bound dominates each of its summands: check against the B1 couple
  auto B1 = mesh::ball_subgraph(g, c.b1_radius);
  auto kB1 = mesh::ball_subgraph(g, p.kappa * c.b1_radius);
  CHECK(bound >= spectral::couple_poincare(B1, kB1, opt).value * (1 - 1e-9));

  // same growth order as the direct constant, up to a bounded ratio
  double direct = 1.0 / spectral::neumann_gap(mesh::ball_subgraph(g, r)).lambda;
  CHECK(bound / direct > 1.0 / 10);
  CHECK(bound / direct < 1e4);
}

TEST_CASE("covering dump") {
  whitney::WhitneyParams p{1.0 / 150, 1.5};
  auto c = whitney::build_whitney(1e3, p, 2);
  std::ostringstream os;
  whitney::dump(c, os);
  std::istringstream is(os.str());
  std::string tag;
  size_t count = 0;
  while (is >> tag) {
    REQUIRE(tag == "F");
    int end;
    double center, radius;
    size_t slen;
    is >> end >> center >> radius >> slen;
    ++count;
  }
  CHECK(count == c.balls.size());
}
