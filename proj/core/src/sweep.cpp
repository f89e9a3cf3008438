#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <stdexcept>
#include <thread>

#include <json.hpp>

#include "endslab/lab.hpp"
#include "endslab/spectral.hpp"

namespace endslab::lab {

using json = nlohmann::ordered_json;

namespace {

// Couple solves inside sweeps cap the dense path lower than the library
// default; the residual contracts do not depend on the route taken.
constexpr int kSweepDenseCouple = 700;

void parallel_rows(int n, int threads, const std::function<void(int)>& fn) {
  threads = std::max(1, threads);
  if (threads == 1 || n < 2) {
    for (int i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<int> next{0};
  auto worker = [&] {
    for (int i = next.fetch_add(1); i < n; i = next.fetch_add(1)) fn(i);
  };
  std::vector<std::thread> pool;
  for (int t = 0; t < std::min(threads, n); ++t) pool.emplace_back(worker);
  for (auto& th : pool) th.join();
}

}  // namespace

SweepTable run_sweep(const Scenario& s, int threads) {
  SweepTable table;
  std::vector<double> xs = grid_points(s.grid);
  table.rows.resize(xs.size());
  for (size_t i = 0; i < xs.size(); ++i) table.rows[i].x = xs[i];

  mesh::WeightedGraph g = build_graph(s);

  switch (s.quantity) {
    case Quantity::Gap: {
      parallel_rows(static_cast<int>(xs.size()), threads, [&](int i) {
        SweepRow& row = table.rows[i];
        try {
          auto view = mesh::ball_subgraph(g, row.x);
          auto res = spectral::neumann_gap(view);
          row.value = res.lambda;
          row.stderr_estimate = res.residual * res.lambda;
        } catch (const std::exception& e) {
          row.error = e.what();
        }
      });
      break;
    }
    case Quantity::Heat: {
      try {
        auto trace = spectral::heat_trace(g, g.center, xs);
        for (size_t i = 0; i < xs.size(); ++i) {
          table.rows[i].value = trace.values[i];
          table.rows[i].stderr_estimate = trace.max_mass_error * trace.values[i];
        }
      } catch (const std::exception& e) {
        for (auto& row : table.rows) row.error = e.what();
      }
      break;
    }
    case Quantity::Whitney: {
      whitney::WhitneyParams wp{s.whitney.eta, s.whitney.kappa};
      if (!wp.valid())
        throw std::invalid_argument("whitney parameters violate the eta constraint");
      spectral::SolverOptions opt;
      opt.dense_couple_threshold = kSweepDenseCouple;
      parallel_rows(static_cast<int>(xs.size()), threads, [&](int i) {
        SweepRow& row = table.rows[i];
        try {
          auto cov = whitney::build_whitney(row.x, wp,
                                            static_cast<int>(g.chains.size()));
          row.value = whitney::combined_upper_bound(g, cov, opt, 1);
        } catch (const std::exception& e) {
          row.error = e.what();
        }
      });
      break;
    }
    case Quantity::LowerBound: {
      auto ord = asym::end_ordering(end_specs(s));
      parallel_rows(static_cast<int>(xs.size()), threads, [&](int i) {
        SweepRow& row = table.rows[i];
        try {
          row.value = spectral::rayleigh_lower(g, ord.n, row.x);
        } catch (const std::exception& e) {
          row.error = e.what();
        }
      });
      break;
    }
  }
  return table;
}

Prediction predict(const Scenario& s) {
  Prediction out;
  auto ends = end_specs(s);
  if (ends.size() < 2) {
    out.reason = "predictions need at least two ends";
    return out;
  }
  if (s.quantity == Quantity::Heat) {
    auto hp = asym::predict_heat_center(ends);
    out.supported = true;
    out.conjecture_only = hp.conjecture_only;
    out.a = asym::to_double(hp.law.exps.alpha);
    out.b = hp.law.exps.betas.empty() ? 0.0 : asym::to_double(hp.law.exps.betas[0]);
    out.text = "p(t,o,o) ~ " + asym::to_string(hp.law);
    return out;
  }
  auto lam = asym::predict_poincare(ends);
  if (!lam) {
    out.reason = "neither the non-parabolic nor the ordered-ends hypotheses certify";
    return out;
  }
  out.supported = true;
  asym::GrowthLaw law = *lam;
  if (s.quantity == Quantity::Gap) law = asym::growth_inv(law);
  out.a = asym::to_double(law.exps.alpha);
  out.b = law.exps.betas.empty() ? 0.0 : asym::to_double(law.exps.betas[0]);
  const char* name = s.quantity == Quantity::Gap ? "lambda(B(o,r)) ~ "
                     : s.quantity == Quantity::Whitney
                         ? "Lambda(B(o,r)) ~ "
                         : "Lambda lower bound ~ ";
  out.text = name + asym::to_string(law);
  return out;
}

FitResult fit_exponents(const Scenario& s, const SweepTable& table) {
  std::vector<double> xs, ys;
  for (const auto& row : table.rows) {
    if (!row.error.empty()) continue;
    xs.push_back(row.x);
    ys.push_back(row.value);
  }
  bool loglog = false;
  switch (s.fit.loglog) {
    case FitConfig::LogLog::On: loglog = true; break;
    case FitConfig::LogLog::Off: loglog = false; break;
    case FitConfig::LogLog::Auto: {
      Prediction p = predict(s);
      loglog = p.supported && p.b != 0.0;
      break;
    }
  }
  auto window = s.fit.window;
  if (!window) window = std::make_pair(std::max(s.grid.from, s.grid.to / 100.0), s.grid.to);
  return fit_exponents(xs, ys, loglog, window);
}

Verdict compare(const Scenario& s, const FitResult& fit) {
  Verdict v;
  v.fit = fit;
  v.prediction = predict(s);
  if (!v.prediction.supported) {
    v.status = Verdict::Status::Skipped;
    v.detail = v.prediction.reason;
    return v;
  }
  double da = std::abs(fit.a - v.prediction.a);
  bool ok = da <= s.fit.tol_a;
  std::string detail = "|a - a_pred| = " + std::to_string(da);
  if (fit.used_loglog) {
    double db = std::abs(fit.b - v.prediction.b);
    ok = ok && db <= s.fit.tol_b;
    detail += ", |b - b_pred| = " + std::to_string(db);
  }
  v.status = ok ? Verdict::Status::Pass : Verdict::Status::Fail;
  v.detail = detail;
  return v;
}

void write_outputs(const Scenario& s, const SweepTable& table, const Verdict& v) {
  namespace fs = std::filesystem;
  fs::create_directories(s.output);

  {
    std::ofstream csv(fs::path(s.output) / "sweep.csv");
    csv << "abscissa,value,stderr_estimate\n";
    char buf[128];
    for (const auto& row : table.rows) {
      if (!row.error.empty()) {
        csv << "# x=" << row.x << " error: " << row.error << "\n";
        continue;
      }
      std::snprintf(buf, sizeof buf, "%.12g,%.12g,%.12g\n", row.x, row.value,
                    row.stderr_estimate);
      csv << buf;
    }
  }
  {
    std::ofstream out(fs::path(s.output) / "scenario.resolved.json");
    out << resolved_json(s) << "\n";
  }
  {
    json rep;
    rep["config_hash"] = config_hash(s);
    rep["quantity"] = to_string(s.quantity);
    rep["prediction"] = {{"supported", v.prediction.supported},
                         {"conjecture_only", v.prediction.conjecture_only},
                         {"text", v.prediction.text},
                         {"a", v.prediction.a},
                         {"b", v.prediction.b}};
    if (!v.prediction.supported) rep["prediction"]["reason"] = v.prediction.reason;
    rep["fit"] = {{"a", v.fit.a},       {"b", v.fit.b},
                  {"c", v.fit.c},       {"rms", v.fit.rms},
                  {"cov", {v.fit.cov[0], v.fit.cov[1], v.fit.cov[2]}},
                  {"used_loglog", v.fit.used_loglog}};
    rep["verdict"] = {{"status", v.status == Verdict::Status::Pass     ? "PASS"
                                 : v.status == Verdict::Status::Fail ? "FAIL"
                                                                     : "SKIPPED"},
                      {"tol_a", s.fit.tol_a},
                      {"tol_b", s.fit.tol_b},
                      {"detail", v.detail}};
    std::ofstream out(fs::path(s.output) / "report.json");
    out << rep.dump(2) << "\n";
  }
}

}  // namespace endslab::lab
