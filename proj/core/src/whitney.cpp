#include "endslab/whitney.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <stdexcept>
#include <thread>

namespace endslab::whitney {

bool WhitneyParams::valid() const {
  return kappa >= 1.0 && eta > 0 && eta < 1.0 / 20 &&
         eta < 1.0 / (kappa * (36.0 * kappa + 6.0));
}

std::vector<int> WhitneyCovering::string_of(int ball_index) const {
  const Ball& b = balls.at(ball_index);
  std::vector<int> out;
  for (int id : per_ray.at(b.end)) {
    out.push_back(id);
    if (id == ball_index) return out;
  }
  throw std::logic_error("ball missing from its ray");
}

WhitneyCovering build_whitney(double r, const WhitneyParams& p, int num_ends,
                              double stop_scale) {
  if (!p.valid()) throw std::invalid_argument("whitney parameters out of range");
  if (!(r > 0) || num_ends < 1) throw std::invalid_argument("bad covering request");
  if (stop_scale <= 0) stop_scale = r * 1e-9;

  WhitneyCovering c;
  c.r = r;
  c.params = p;
  c.num_ends = num_ends;
  c.b0_radius = 12.0 * p.kappa * p.eta * r;
  c.b1_radius = (36.0 * p.kappa + 6.0) * p.eta * r;
  c.stop_scale = stop_scale;

  const double eta = p.eta;
  // First radius solves tangency to B0 together with the Whitney radius law;
  // each following ball is tangent to the previous one, ratio 1/(1+2 eta).
  double s = eta * r * (1.0 - 12.0 * p.kappa * eta) / (1.0 + 2.0 * eta);
  double x = c.b0_radius + s;
  if (!(s > 0)) throw std::invalid_argument("r too small for the covering");

  c.per_ray.resize(num_ends);
  const size_t cap = 1u << 22;
  std::vector<Ball> ray;
  while (true) {
    ray.push_back({0, x, s});
    if (x + 3.0 * s >= r - stop_scale) break;
    double s_next = s / (1.0 + 2.0 * eta);
    x = x + s + s_next;
    s = s_next;
    if (ray.size() > cap) throw std::runtime_error("covering too fine; raise stop scale");
  }
  for (int e = 0; e < num_ends; ++e) {
    for (const Ball& b : ray) {
      int id = static_cast<int>(c.balls.size());
      c.balls.push_back({e, b.center, b.radius});
      c.per_ray[e].push_back(id);
    }
  }
  return c;
}

namespace {

struct Checker {
  CoveringReport rep;
  bool ok = true;
  void fail(const std::string& what) {
    if (ok) rep.first_failure = what;
    ok = false;
  }
  void check(bool cond, const std::string& what) {
    if (!cond) fail(what);
  }
};

}  // namespace

CoveringReport verify_covering(const WhitneyCovering& c, const mesh::WeightedGraph* g) {
  Checker ck;
  const double eta = c.params.eta;
  const double kappa = c.params.kappa;
  const double r = c.r;
  const double tol = 1e-9 * r;

  ck.check(c.params.valid(), "parameters out of range");
  // 3k B0 inside k B1 inside B(o,r).
  ck.check(3.0 * kappa * c.b0_radius <= kappa * c.b1_radius + tol, "3kB0 exceeds kB1");
  ck.check(kappa * c.b1_radius <= r + tol, "kB1 exceeds the ball");

  double reach = 0;
  for (const auto& ray : c.per_ray) {
    ck.rep.max_balls_per_ray =
        std::max(ck.rep.max_balls_per_ray, static_cast<int>(ray.size()));
    for (size_t p = 0; p < ray.size(); ++p) {
      const Ball& F = c.balls[ray[p]];
      // Exact radius law s = eta * (r - x - s).
      ck.check(std::abs(F.radius - eta * (r - F.center - F.radius)) <= tol,
               "radius law violated");
      // Tangent to or separated from B0 and from the previous ball.
      ck.check(F.center - F.radius >= c.b0_radius - tol, "ball overlaps B0");
      if (p > 0) {
        const Ball& P = c.balls[ray[p - 1]];
        ck.check(F.center - F.radius >= P.center + P.radius - tol,
                 "consecutive balls overlap");
        double lhs = 1.0 / eta - 4.0, rhs = 4.0 + 1.0 / eta;
        ck.check(lhs * P.radius <= rhs * F.radius + tol, "string ratio (forward)");
        ck.check(lhs * F.radius <= rhs * P.radius + tol, "string ratio (backward)");
        // 3F_{j+1} inside 12F_j along the string.
        ck.check(F.center + 3 * F.radius <= P.center + 12 * P.radius + tol &&
                     F.center - 3 * F.radius >= P.center - 12 * P.radius - tol,
                 "string dilation inclusion");
      } else {
        ck.check(F.center + 3 * F.radius <= 12.0 * c.b0_radius + tol,
                 "first ball escapes 12B0");
      }
      // Never reaches the center, even at the largest dilation in use.
      ck.check(F.center - 12.0 * kappa * F.radius > 0, "12kF touches the center");
      ck.check(F.center + 12.0 * kappa * F.radius <= r + tol, "12kF escapes the ball");
      // If 3F meets 3B0 then 3F sits inside B1.
      if (F.center - 3 * F.radius <= 3.0 * c.b0_radius + tol)
        ck.check(F.center + 3 * F.radius <= c.b1_radius + tol, "3F escapes B1");
      reach = std::max(reach, F.center + 3 * F.radius);
    }

    // Radii decrease and x - 3s increases outward, so the balls whose triple
    // dilation reaches back to a given center form a prefix; its last member
    // has the smallest radius, which settles the comparability condition.
    for (size_t a = 0; a < ray.size(); ++a) {
      const Ball& F = c.balls[ray[a]];
      size_t hi = a;
      while (hi + 1 < ray.size() &&
             c.balls[ray[hi + 1]].center - 3 * c.balls[ray[hi + 1]].radius <=
                 F.center + tol)
        ++hi;
      const Ball& last = c.balls[ray[hi]];
      ck.check(last.radius >= F.radius / (4.0 * eta + 1.0) - tol, "PW1 violated");
    }
  }
  ck.rep.reach = reach;
  ck.check(reach >= r - 2.0 * c.stop_scale, "triple dilations stop short of r");

  // Coverage and bounded overlap on probe points per ray.
  double alphas[3] = {1.0, 3.0, 12.0 * kappa};
  int* max_over[3] = {&ck.rep.max_overlap_1, &ck.rep.max_overlap_3,
                      &ck.rep.max_overlap_12k};
  for (size_t e = 0; e < c.per_ray.size(); ++e) {
    const auto& ray = c.per_ray[e];
    if (ray.empty()) continue;
    std::vector<double> centers(ray.size());
    for (size_t i = 0; i < ray.size(); ++i) centers[i] = c.balls[ray[i]].center;
    double s_max = c.balls[ray[0]].radius;  // radii decrease outward

    std::vector<double> probes;
    if (g && e < g->chains.size()) {
      // The covering covers the open ball; grid shells within the stopping
      // sliver of the boundary belong to its closure and are exempt.
      for (int id : g->chains[e]) {
        double rad = g->vertices[id].radius;
        if (rad <= r - 4.0 * c.stop_scale) probes.push_back(rad);
      }
    } else {
      for (int id : ray) {
        const Ball& F = c.balls[id];
        probes.push_back(F.center - F.radius);
        probes.push_back(F.center);
        probes.push_back(F.center + 0.5 * F.radius);
      }
      probes.push_back(reach);
    }

    for (double x : probes) {
      double w = 12.0 * kappa * s_max;
      size_t lo = std::lower_bound(centers.begin(), centers.end(), x - w) -
                  centers.begin();
      size_t hi = std::upper_bound(centers.begin(), centers.end(), x + w) -
                  centers.begin();
      double round_tol = 1e-12 * (1.0 + x);  // boundary points sit on shared floats
      bool covered = x <= 3.0 * c.b0_radius;
      int cnt[3] = {0, 0, 0};
      for (size_t i = lo; i < hi; ++i) {
        const Ball& F = c.balls[ray[i]];
        double d = std::abs(x - F.center);
        if (d <= 3 * F.radius + round_tol) covered = true;
        for (int a = 0; a < 3; ++a)
          if (d <= alphas[a] * F.radius + round_tol) ++cnt[a];
      }
      ck.check(covered, "W2: probe not covered at x=" + std::to_string(x));
      for (int a = 0; a < 3; ++a) *max_over[a] = std::max(*max_over[a], cnt[a]);
    }
  }
  ck.rep.pass = ck.ok;
  return ck.rep;
}

double combined_upper_bound(const mesh::WeightedGraph& g, const WhitneyCovering& c,
                            const spectral::SolverOptions& opt, int threads) {
  if (c.num_ends != static_cast<int>(g.chains.size()))
    throw std::invalid_argument("covering and graph disagree on the number of ends");
  const double k = c.params.kappa;
  auto central = [&](double rad) { return mesh::ball_subgraph(g, rad); };

  auto lam = [&](const mesh::GraphView& U, const mesh::GraphView& Up) {
    if (Up.size() == 0 || U.size() <= 1) return 0.0;
    auto res = spectral::couple_poincare(U, Up, opt);
    if (res.infinite) throw std::domain_error("degenerate couple solve in whitney bound");
    return res.value;
  };

  double term_b0 = lam(central(3.0 * c.b0_radius), central(3.0 * k * c.b0_radius));
  double term_b1 = lam(central(c.b1_radius), central(k * c.b1_radius));

  int nb = static_cast<int>(c.balls.size());
  std::vector<double> per_ball(nb, 0.0);
  auto work = [&](int lo, int hi) {
    for (int i = lo; i < hi; ++i) {
      const Ball& F = c.balls[i];
      auto ring = [&](double dil) {
        return mesh::metric_ball_view(g, F.end, F.center, dil * F.radius);
      };
      double a = lam(ring(3.0), ring(3.0 * k));
      double b = lam(ring(12.0), ring(12.0 * k));
      per_ball[i] = std::max(a, b);
    }
  };
  threads = std::max(1, threads);
  if (threads == 1 || nb < 2 * threads) {
    work(0, nb);
  } else {
    std::vector<std::thread> pool;
    int chunk = (nb + threads - 1) / threads;
    for (int t = 0; t < threads; ++t) {
      int lo = t * chunk, hi = std::min(nb, lo + chunk);
      if (lo < hi) pool.emplace_back(work, lo, hi);
    }
    for (auto& th : pool) th.join();
  }
  double term_f = 0;
  for (double v : per_ball) term_f = std::max(term_f, v);
  return term_b0 + term_b1 + term_f;
}

void dump(const WhitneyCovering& c, std::ostream& os) {
  for (size_t i = 0; i < c.balls.size(); ++i) {
    const Ball& b = c.balls[i];
    os << "F " << b.end << " " << b.center << " " << b.radius << " "
       << c.string_of(static_cast<int>(i)).size() << "\n";
  }
}

}  // namespace endslab::whitney
