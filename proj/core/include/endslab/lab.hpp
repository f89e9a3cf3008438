#pragma once

// Scenario ingestion, sweep orchestration, exponent fitting, and the
// predicted-versus-measured comparison behind the command line interface.

#include <optional>
#include <string>
#include <vector>

#include "endslab/asym.hpp"
#include "endslab/mesh.hpp"
#include "endslab/whitney.hpp"

namespace endslab::lab {

enum class Quantity { Gap, Heat, Whitney, LowerBound };

struct EndConfig {
  asym::Rational alpha;
  std::vector<asym::Rational> betas;
  int dim = 2;
  double scale = 1.0;
};

struct DiscretizationConfig {
  double r0 = 8.0;
  double r_splice = 30.0;
  double R_max = 1e5;
  double delta = 1.0;     // uniform step when grading == 0
  double grading = 256.0; // geometric steps delta_j = r_j / grading when > 0
};

struct GridConfig {
  double from = 1e2;
  double to = 1e5;
  int per_decade = 4;
};

struct FitConfig {
  enum class LogLog { Auto, On, Off };
  LogLog loglog = LogLog::Auto;
  std::optional<std::pair<double, double>> window;  // default: top two decades
  double tol_a = 0.15;
  double tol_b = 0.35;
};

struct WhitneyConfig {
  double eta = 1.0 / 200;
  double kappa = 2.0;
};

struct Scenario {
  std::vector<EndConfig> ends;
  DiscretizationConfig disc;
  Quantity quantity = Quantity::Gap;
  GridConfig grid;
  FitConfig fit;
  WhitneyConfig whitney;
  std::string output = "out";
};

// Strict JSON loader: unknown keys are rejected with their path.
Scenario load_scenario(const std::string& json_text);
Scenario load_scenario_file(const std::string& path);
// Resolved scenario with every default expanded, serialized deterministically.
std::string resolved_json(const Scenario& s);
// FNV-1a hash of the resolved scenario text.
std::string config_hash(const Scenario& s);

std::vector<asym::EndSpec> end_specs(const Scenario& s);
std::vector<model::VolumeProfile> profiles(const Scenario& s);
mesh::WeightedGraph build_graph(const Scenario& s);
std::vector<double> grid_points(const GridConfig& g);

struct SweepRow {
  double x = 0;
  double value = 0;
  double stderr_estimate = 0;
  std::string error;  // per-row failure; the run continues
};

struct SweepTable {
  std::vector<SweepRow> rows;
};

// Runs the scenario's quantity over its grid. Deterministic; rows sorted by
// abscissa; individual solver failures land in the row's error field.
SweepTable run_sweep(const Scenario& s, int threads = 1);

struct FitResult {
  double a = 0;    // coefficient of log r
  double b = 0;    // coefficient of log log r (0 when disabled)
  double c = 0;    // intercept
  double rms = 0;  // residual
  double cov[3] = {0, 0, 0};  // covariance diagonal (a, b, c)
  bool used_loglog = false;
};

// Ordinary least squares of log y on [log x, log log x, 1] over the window.
// Needs >= 4 positive points in the window; refuses singular designs.
FitResult fit_exponents(const std::vector<double>& xs, const std::vector<double>& ys,
                        bool use_loglog,
                        std::optional<std::pair<double, double>> window = {});

FitResult fit_exponents(const Scenario& s, const SweepTable& table);

struct Prediction {
  bool supported = false;
  bool conjecture_only = false;
  double a = 0, b = 0;       // predicted slope targets for the fitted model
  std::string text;          // rendered growth law
  std::string reason;        // when unsupported
};

// Prediction targets for the scenario's quantity from the symbolic engine.
Prediction predict(const Scenario& s);

struct Verdict {
  enum class Status { Pass, Fail, Skipped };
  Status status = Status::Skipped;
  Prediction prediction;
  FitResult fit;
  std::string detail;
};

Verdict compare(const Scenario& s, const FitResult& fit);

// Writes sweep.csv, report.json and scenario.resolved.json under s.output.
void write_outputs(const Scenario& s, const SweepTable& table, const Verdict& v);

std::string to_string(Quantity q);

}  // namespace endslab::lab
