#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "endslab/lab.hpp"

namespace endslab::lab {

using json = nlohmann::ordered_json;

namespace {

[[noreturn]] void bad(const std::string& path, const std::string& why) {
  throw std::invalid_argument("scenario: " + path + ": " + why);
}

void reject_unknown(const json& obj, const std::string& path,
                    std::initializer_list<const char*> allowed) {
  for (const auto& item : obj.items()) {
    bool ok = false;
    for (const char* k : allowed)
      if (item.key() == k) ok = true;
    if (!ok) bad(path + "." + item.key(), "unknown key");
  }
}

asym::Rational rational_field(const json& v, const std::string& path) {
  try {
    if (v.is_string()) return asym::parse_rational(v.get<std::string>());
    if (v.is_number_integer()) return asym::Rational(v.get<long long>());
    if (v.is_number_float()) {
      char buf[64];
      std::snprintf(buf, sizeof buf, "%.9f", v.get<double>());
      return asym::parse_rational(buf);
    }
  } catch (const std::exception& e) {
    bad(path, e.what());
  }
  bad(path, "expected a rational (number or \"p/q\" string)");
}

double number_field(const json& v, const std::string& path) {
  if (v.is_string()) return asym::to_double(rational_field(v, path));
  if (!v.is_number()) bad(path, "expected a number");
  return v.get<double>();
}

}  // namespace

std::string to_string(Quantity q) {
  switch (q) {
    case Quantity::Gap: return "gap";
    case Quantity::Heat: return "heat";
    case Quantity::Whitney: return "whitney";
    case Quantity::LowerBound: return "lower_bound";
  }
  return "?";
}

Scenario load_scenario(const std::string& json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const std::exception& e) {
    throw std::invalid_argument(std::string("scenario: invalid JSON: ") + e.what());
  }
  if (!j.is_object()) throw std::invalid_argument("scenario: top level must be an object");
  reject_unknown(j, "$", {"ends", "discretization", "sweep", "fit", "whitney", "output"});

  Scenario s;
  if (!j.contains("ends") || !j["ends"].is_array() || j["ends"].empty())
    bad("$.ends", "required non-empty array");
  for (size_t i = 0; i < j["ends"].size(); ++i) {
    const json& je = j["ends"][i];
    std::string path = "$.ends[" + std::to_string(i) + "]";
    if (!je.is_object()) bad(path, "expected an object");
    reject_unknown(je, path, {"alpha", "betas", "dim", "scale"});
    EndConfig e;
    if (!je.contains("alpha")) bad(path + ".alpha", "required");
    e.alpha = rational_field(je["alpha"], path + ".alpha");
    if (je.contains("betas")) {
      if (!je["betas"].is_array()) bad(path + ".betas", "expected an array");
      for (size_t b = 0; b < je["betas"].size(); ++b)
        e.betas.push_back(rational_field(je["betas"][b],
                                         path + ".betas[" + std::to_string(b) + "]"));
    }
    if (je.contains("dim")) e.dim = je["dim"].get<int>();
    if (je.contains("scale")) e.scale = number_field(je["scale"], path + ".scale");
    s.ends.push_back(std::move(e));
  }

  if (j.contains("discretization")) {
    const json& jd = j["discretization"];
    reject_unknown(jd, "$.discretization",
                   {"r0", "r_splice", "R_max", "delta", "grading"});
    if (jd.contains("r0")) s.disc.r0 = number_field(jd["r0"], "$.discretization.r0");
    if (jd.contains("r_splice"))
      s.disc.r_splice = number_field(jd["r_splice"], "$.discretization.r_splice");
    if (jd.contains("R_max"))
      s.disc.R_max = number_field(jd["R_max"], "$.discretization.R_max");
    if (jd.contains("delta") && jd.contains("grading"))
      bad("$.discretization", "give either delta (uniform) or grading, not both");
    if (jd.contains("delta")) {
      s.disc.delta = number_field(jd["delta"], "$.discretization.delta");
      s.disc.grading = 0;
    }
    if (jd.contains("grading"))
      s.disc.grading = number_field(jd["grading"], "$.discretization.grading");
  }

  if (j.contains("sweep")) {
    const json& js = j["sweep"];
    reject_unknown(js, "$.sweep", {"quantity", "points"});
    if (js.contains("quantity")) {
      std::string q = js["quantity"].get<std::string>();
      if (q == "gap") s.quantity = Quantity::Gap;
      else if (q == "heat") s.quantity = Quantity::Heat;
      else if (q == "whitney") s.quantity = Quantity::Whitney;
      else if (q == "lower_bound") s.quantity = Quantity::LowerBound;
      else bad("$.sweep.quantity", "one of gap|heat|whitney|lower_bound");
    }
    if (js.contains("points")) {
      const json& jp = js["points"];
      reject_unknown(jp, "$.sweep.points", {"from", "to", "per_decade"});
      if (jp.contains("from")) s.grid.from = number_field(jp["from"], "$.sweep.points.from");
      if (jp.contains("to")) s.grid.to = number_field(jp["to"], "$.sweep.points.to");
      if (jp.contains("per_decade")) s.grid.per_decade = jp["per_decade"].get<int>();
    }
  }

  if (j.contains("fit")) {
    const json& jf = j["fit"];
    reject_unknown(jf, "$.fit", {"use_loglog_term", "window", "tol_a", "tol_b"});
    if (jf.contains("use_loglog_term")) {
      const json& v = jf["use_loglog_term"];
      if (v.is_boolean())
        s.fit.loglog = v.get<bool>() ? FitConfig::LogLog::On : FitConfig::LogLog::Off;
      else if (v.is_string() && v.get<std::string>() == "auto")
        s.fit.loglog = FitConfig::LogLog::Auto;
      else
        bad("$.fit.use_loglog_term", "expected true, false or \"auto\"");
    }
    if (jf.contains("window")) {
      const json& v = jf["window"];
      if (v.is_string() && v.get<std::string>() == "auto") {
        s.fit.window.reset();
      } else if (v.is_array() && v.size() == 2) {
        s.fit.window = std::make_pair(number_field(v[0], "$.fit.window[0]"),
                                      number_field(v[1], "$.fit.window[1]"));
      } else {
        bad("$.fit.window", "expected [lo, hi] or \"auto\"");
      }
    }
    if (jf.contains("tol_a")) s.fit.tol_a = number_field(jf["tol_a"], "$.fit.tol_a");
    if (jf.contains("tol_b")) s.fit.tol_b = number_field(jf["tol_b"], "$.fit.tol_b");
  }

  if (j.contains("whitney")) {
    const json& jw = j["whitney"];
    reject_unknown(jw, "$.whitney", {"eta", "kappa"});
    if (jw.contains("eta")) s.whitney.eta = number_field(jw["eta"], "$.whitney.eta");
    if (jw.contains("kappa"))
      s.whitney.kappa = number_field(jw["kappa"], "$.whitney.kappa");
  }

  if (j.contains("output")) s.output = j["output"].get<std::string>();

  // Structural validation.
  if (s.ends.size() < 1) bad("$.ends", "need at least one end");
  for (size_t i = 0; i < s.ends.size(); ++i) {
    if (s.ends[i].dim < 2) bad("$.ends[" + std::to_string(i) + "].dim", "dim >= 2");
    asym::EndSpec es{static_cast<int>(i), s.ends[i].dim,
                     {s.ends[i].alpha, s.ends[i].betas}};
    if (!es.is_model_admissible())
      bad("$.ends[" + std::to_string(i) + "]",
          "volume class exceeds the dimension bound (alpha, betas) <= (N, 0, ...)");
  }
  if (!(s.grid.from > 0 && s.grid.to > s.grid.from)) bad("$.sweep.points", "empty grid");
  if (s.grid.per_decade < 1) bad("$.sweep.points.per_decade", ">= 1");
  if (s.fit.window && !(s.fit.window->first >= s.grid.from * (1 - 1e-12) &&
                        s.fit.window->second <= s.grid.to * (1 + 1e-12)))
    bad("$.fit.window", "window must sit inside the sweep range");
  if (s.quantity != Quantity::Heat && s.grid.to > s.disc.R_max)
    bad("$.sweep.points.to", "grid exceeds R_max");
  if (s.quantity == Quantity::Heat && s.grid.to > s.disc.R_max * s.disc.R_max)
    bad("$.sweep.points.to", "heat sweep must stay within [1, R_max^2]");
  return s;
}

Scenario load_scenario_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("scenario: cannot open " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return load_scenario(ss.str());
}

std::string resolved_json(const Scenario& s) {
  json j;
  j["ends"] = json::array();
  for (const auto& e : s.ends) {
    json je;
    je["alpha"] = asym::to_string(e.alpha);
    je["betas"] = json::array();
    for (const auto& b : e.betas) je["betas"].push_back(asym::to_string(b));
    je["dim"] = e.dim;
    je["scale"] = e.scale;
    j["ends"].push_back(je);
  }
  j["discretization"] = {{"r0", s.disc.r0},
                         {"r_splice", s.disc.r_splice},
                         {"R_max", s.disc.R_max}};
  if (s.disc.grading > 0)
    j["discretization"]["grading"] = s.disc.grading;
  else
    j["discretization"]["delta"] = s.disc.delta;
  j["sweep"] = {{"quantity", to_string(s.quantity)},
                {"points",
                 {{"from", s.grid.from}, {"to", s.grid.to},
                  {"per_decade", s.grid.per_decade}}}};
  j["fit"] = json::object();
  switch (s.fit.loglog) {
    case FitConfig::LogLog::Auto: j["fit"]["use_loglog_term"] = "auto"; break;
    case FitConfig::LogLog::On: j["fit"]["use_loglog_term"] = true; break;
    case FitConfig::LogLog::Off: j["fit"]["use_loglog_term"] = false; break;
  }
  if (s.fit.window)
    j["fit"]["window"] = {s.fit.window->first, s.fit.window->second};
  else
    j["fit"]["window"] = "auto";
  j["fit"]["tol_a"] = s.fit.tol_a;
  j["fit"]["tol_b"] = s.fit.tol_b;
  j["whitney"] = {{"eta", s.whitney.eta}, {"kappa", s.whitney.kappa}};
  j["output"] = s.output;
  return j.dump(2);
}

std::string config_hash(const Scenario& s) {
  std::string text = resolved_json(s);
  unsigned long long h = 1469598103934665603ull;
  for (unsigned char c : text) {
    h ^= c;
    h *= 1099511628211ull;
  }
  char buf[32];
  std::snprintf(buf, sizeof buf, "%016llx", h);
  return buf;
}

std::vector<asym::EndSpec> end_specs(const Scenario& s) {
  std::vector<asym::EndSpec> out;
  for (size_t i = 0; i < s.ends.size(); ++i)
    out.push_back({static_cast<int>(i), s.ends[i].dim,
                   {s.ends[i].alpha, s.ends[i].betas}});
  return out;
}

std::vector<model::VolumeProfile> profiles(const Scenario& s) {
  std::vector<model::VolumeProfile> out;
  for (const auto& e : s.ends)
    out.push_back(model::VolumeProfile::make({e.alpha, e.betas}, e.dim, e.scale,
                                             s.disc.r_splice));
  return out;
}

mesh::WeightedGraph build_graph(const Scenario& s) {
  mesh::Discretization d;
  d.delta = s.disc.delta;
  d.grading = s.disc.grading;
  return mesh::build_connected_sum(profiles(s), s.disc.r0, d, s.disc.R_max);
}

std::vector<double> grid_points(const GridConfig& g) {
  std::vector<double> out;
  double ratio = std::pow(10.0, 1.0 / g.per_decade);
  for (double x = g.from; x <= g.to * (1 + 1e-9); x *= ratio) out.push_back(x);
  if (out.empty()) throw std::invalid_argument("empty grid");
  return out;
}

}  // namespace endslab::lab
