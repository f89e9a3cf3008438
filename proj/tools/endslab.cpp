// Command line driver: symbolic predictions, scaling sweeps, coverings and
// exponent fits for connected sums of model manifolds.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "endslab/lab.hpp"
#include "endslab/spectral.hpp"

namespace {

using json = nlohmann::ordered_json;
using namespace endslab;

struct CommonOpts {
  std::string scenario_path;
  std::string out_override;
  int threads = 1;
  double delta_override = 0;
  double rmax_override = 0;
};

lab::Scenario load_with_overrides(const CommonOpts& o, lab::Quantity q) {
  lab::Scenario s = lab::load_scenario_file(o.scenario_path);
  s.quantity = q;
  if (!o.out_override.empty()) s.output = o.out_override;
  if (o.delta_override > 0) {
    s.disc.delta = o.delta_override;
    s.disc.grading = 0;
  }
  if (o.rmax_override > 0) s.disc.R_max = o.rmax_override;
  return s;
}

int run_quantity(const CommonOpts& o, lab::Quantity q) {
  lab::Scenario s = load_with_overrides(o, q);
  auto table = lab::run_sweep(s, o.threads);
  lab::Verdict v;
  try {
    auto fit = lab::fit_exponents(s, table);
    v = lab::compare(s, fit);
  } catch (const std::exception& e) {
    v.status = lab::Verdict::Status::Skipped;
    v.detail = e.what();
    v.prediction = lab::predict(s);
  }
  lab::write_outputs(s, table, v);
  const char* st = v.status == lab::Verdict::Status::Pass     ? "PASS"
                   : v.status == lab::Verdict::Status::Fail ? "FAIL"
                                                            : "SKIPPED";
  std::cout << lab::to_string(s.quantity) << ": " << st
            << "  fit a=" << v.fit.a << " b=" << v.fit.b
            << "  pred a=" << v.prediction.a << " b=" << v.prediction.b << "\n"
            << "outputs in " << s.output << "\n";
  return v.status == lab::Verdict::Status::Fail ? 1 : 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"scaling laboratory for connected sums of model manifolds"};
  app.require_subcommand(1);

  CommonOpts opts;
  auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("scenario", opts.scenario_path, "scenario JSON file")->required();
    cmd->add_option("--out", opts.out_override, "output directory override");
    cmd->add_option("--threads", opts.threads, "worker threads");
    cmd->add_option("--delta", opts.delta_override, "force a uniform step");
    cmd->add_option("--rmax", opts.rmax_override, "override R_max");
  };

  auto* predict_cmd = app.add_subcommand("predict", "symbolic predictions only");
  add_common(predict_cmd);
  auto* spectrum_cmd = app.add_subcommand("spectrum", "spectral gap sweep");
  add_common(spectrum_cmd);
  auto* heat_cmd = app.add_subcommand("heat", "central heat trace sweep");
  add_common(heat_cmd);
  auto* whitney_cmd = app.add_subcommand("whitney", "combined covering bound sweep");
  add_common(whitney_cmd);
  auto* lower_cmd = app.add_subcommand("lower", "variational lower bound sweep");
  add_common(lower_cmd);
  auto* validate_cmd = app.add_subcommand("validate", "model conditions and graph stats");
  add_common(validate_cmd);
  bool dump_graph = false;
  validate_cmd->add_flag("--dump-graph", dump_graph, "write the graph dump");

  std::string fit_csv;
  bool fit_loglog = false;
  auto* fit_cmd = app.add_subcommand("fit", "fit exponents on a sweep CSV");
  fit_cmd->add_option("csv", fit_csv, "CSV with header abscissa,value,...")->required();
  fit_cmd->add_flag("--loglog", fit_loglog, "include the log log term");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*fit_cmd) {
      std::ifstream in(fit_csv);
      if (!in) throw std::runtime_error("cannot open " + fit_csv);
      std::string line;
      std::getline(in, line);  // header
      std::vector<double> xs, ys;
      while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        std::stringstream ss(line);
        std::string a, b;
        std::getline(ss, a, ',');
        std::getline(ss, b, ',');
        xs.push_back(std::stod(a));
        ys.push_back(std::stod(b));
      }
      auto fit = lab::fit_exponents(xs, ys, fit_loglog);
      json out = {{"a", fit.a}, {"b", fit.b}, {"c", fit.c},
                  {"rms", fit.rms}, {"used_loglog", fit.used_loglog}};
      std::cout << out.dump(2) << "\n";
      return 0;
    }
    if (*predict_cmd) {
      lab::Scenario s = load_with_overrides(opts, lab::Quantity::Gap);
      auto ends = lab::end_specs(s);
      json out;
      auto ord = asym::end_ordering(ends);
      out["largest_end"] = ord.m;
      out["second_largest_end"] = ord.n;
      if (ord.crossover_note) out["crossover_radius_estimate"] = *ord.crossover_note;
      auto lam = asym::predict_poincare(ends);
      out["poincare"] =
          lam ? json(asym::to_string(*lam)) : json("unsupported");
      if (lam) out["gap"] = asym::to_string(asym::growth_inv(*lam));
      auto hp = asym::predict_heat_center(ends);
      out["heat_center"] = asym::to_string(hp.law);
      out["heat_conjecture_only"] = hp.conjecture_only;
      auto coe = asym::classify_coe_auto(ends);
      if (coe) {
        out["coe"] = {{"super", coe->super}, {"middle", coe->middle},
                      {"sub", coe->sub}};
      } else {
        out["coe"] = "none";
      }
      auto doe = asym::check_doe(ends);
      out["doe"] = doe ? json(*doe) : json("none");
      std::cout << out.dump(2) << "\n";
      return 0;
    }
    if (*validate_cmd) {
      lab::Scenario s = load_with_overrides(opts, lab::Quantity::Gap);
      auto profs = lab::profiles(s);
      json out;
      out["ends"] = json::array();
      bool all_pass = true;
      for (size_t i = 0; i < profs.size(); ++i) {
        auto rep = model::validate_model_conditions(profs[i], s.disc.R_max);
        all_pass = all_pass && rep.pass;
        out["ends"].push_back({{"pass", rep.pass},
                               {"max_v_over_rn", rep.max_v_over_rn},
                               {"min_rvp_over_v", rep.min_rvp_over_v},
                               {"max_rvp_over_v", rep.max_rvp_over_v},
                               {"detail", rep.detail}});
      }
      auto g = lab::build_graph(s);
      out["graph"] = {{"vertices", g.vertices.size()},
                      {"edges", g.edges.size()},
                      {"total_measure", g.total_measure()}};
      out["config_hash"] = lab::config_hash(s);
      std::cout << out.dump(2) << "\n";
      if (dump_graph) {
        std::filesystem::create_directories(s.output);
        std::ofstream gd(std::filesystem::path(s.output) / "graph.txt");
        mesh::dump(g, gd);
        std::cout << "graph dump in " << s.output << "/graph.txt\n";
      }
      return all_pass ? 0 : 1;
    }
    if (*spectrum_cmd) return run_quantity(opts, lab::Quantity::Gap);
    if (*heat_cmd) return run_quantity(opts, lab::Quantity::Heat);
    if (*whitney_cmd) return run_quantity(opts, lab::Quantity::Whitney);
    if (*lower_cmd) return run_quantity(opts, lab::Quantity::LowerBound);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
