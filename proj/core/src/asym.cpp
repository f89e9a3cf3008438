#include "endslab/asym.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace endslab::asym {

namespace {

long long parse_ll(const std::string& s) {
  size_t pos = 0;
  long long v = std::stoll(s, &pos);
  if (pos != s.size()) throw std::invalid_argument("bad integer: " + s);
  return v;
}

// Pads the shorter beta vector with zeros.
Ordering cmp_rational(const Rational& a, const Rational& b) {
  if (a < b) return Ordering::Less;
  if (b < a) return Ordering::Greater;
  return Ordering::Equal;
}

std::vector<Rational> ones(size_t n) { return std::vector<Rational>(n, Rational(1)); }

void trim_trailing_zeros(std::vector<Rational>& v) {
  while (!v.empty() && v.back() == Rational(0)) v.pop_back();
}

}  // namespace

Rational parse_rational(const std::string& s) {
  if (s.empty()) throw std::invalid_argument("empty rational");
  auto slash = s.find('/');
  if (slash != std::string::npos) {
    long long num = parse_ll(s.substr(0, slash));
    long long den = parse_ll(s.substr(slash + 1));
    if (den == 0) throw std::invalid_argument("zero denominator: " + s);
    return Rational(num, den);
  }
  auto dot = s.find('.');
  if (dot != std::string::npos) {
    std::string head = s.substr(0, dot), tail = s.substr(dot + 1);
    if (tail.empty()) return Rational(parse_ll(head));
    if (tail.size() > 12) throw std::invalid_argument("too many decimals: " + s);
    long long den = 1;
    for (size_t i = 0; i < tail.size(); ++i) den *= 10;
    bool neg = !head.empty() && head[0] == '-';
    long long whole = head.empty() || head == "-" ? 0 : std::llabs(parse_ll(head));
    long long frac = parse_ll(tail);
    long long num = whole * den + frac;
    return Rational(neg ? -num : num, den);
  }
  return Rational(parse_ll(s));
}

std::string to_string(const Rational& q) {
  if (q.denominator() == 1) return std::to_string(q.numerator());
  return std::to_string(q.numerator()) + "/" + std::to_string(q.denominator());
}

double to_double(const Rational& q) {
  return static_cast<double>(q.numerator()) / static_cast<double>(q.denominator());
}

bool ExponentTuple::operator==(const ExponentTuple& o) const {
  return lex_cmp(*this, o) == Ordering::Equal;
}

Ordering lex_cmp(const ExponentTuple& a, const ExponentTuple& b) {
  Ordering c = cmp_rational(a.alpha, b.alpha);
  if (c != Ordering::Equal) return c;
  size_t n = std::max(a.betas.size(), b.betas.size());
  for (size_t j = 0; j < n; ++j) {
    Rational aj = j < a.betas.size() ? a.betas[j] : Rational(0);
    Rational bj = j < b.betas.size() ? b.betas[j] : Rational(0);
    c = cmp_rational(aj, bj);
    if (c != Ordering::Equal) return c;
  }
  return Ordering::Equal;
}

bool GrowthLaw::operator==(const GrowthLaw& o) const {
  return var == o.var && lex_cmp(exps, o.exps) == Ordering::Equal;
}

Ordering lex_cmp(const GrowthLaw& a, const GrowthLaw& b) {
  if (a.var != b.var) throw std::invalid_argument("growth laws over different variables");
  return lex_cmp(a.exps, b.exps);
}

GrowthLaw growth_mul(const GrowthLaw& u, const GrowthLaw& v) {
  if (u.var != v.var) throw std::invalid_argument("growth_mul: variable mismatch");
  GrowthLaw out;
  out.var = u.var;
  out.exps.alpha = u.exps.alpha + v.exps.alpha;
  size_t n = std::max(u.exps.betas.size(), v.exps.betas.size());
  out.exps.betas.resize(n, Rational(0));
  for (size_t j = 0; j < n; ++j) {
    if (j < u.exps.betas.size()) out.exps.betas[j] += u.exps.betas[j];
    if (j < v.exps.betas.size()) out.exps.betas[j] += v.exps.betas[j];
  }
  trim_trailing_zeros(out.exps.betas);
  return out;
}

GrowthLaw growth_pow(const GrowthLaw& u, const Rational& k) {
  GrowthLaw out = u;
  out.exps.alpha *= k;
  for (auto& b : out.exps.betas) b *= k;
  trim_trailing_zeros(out.exps.betas);
  return out;
}

GrowthLaw substitute_sqrt_t(const GrowthLaw& in_r) {
  if (in_r.var != Var::R) throw std::invalid_argument("substitute_sqrt_t expects a law in r");
  GrowthLaw out = in_r;
  out.exps.alpha /= 2;
  out.var = Var::T;
  return out;
}

double iterated_log(int j, double x) {
  double v = x;
  for (int i = 0; i < j; ++i) {
    v = std::log(v);
    if (!(v > 1.0)) v = 1.0;
  }
  return v;
}

double eval_growth(const GrowthLaw& g, double x) {
  double out = std::pow(x, to_double(g.exps.alpha));
  for (size_t j = 0; j < g.exps.betas.size(); ++j) {
    if (g.exps.betas[j] == Rational(0)) continue;
    out *= std::pow(iterated_log(static_cast<int>(j) + 1, x), to_double(g.exps.betas[j]));
  }
  return out;
}

std::string to_string(const ExponentTuple& e) {
  return to_string(GrowthLaw{e, Var::R});
}

std::string to_string(const GrowthLaw& g) {
  const char* v = g.var == Var::R ? "r" : "t";
  std::string out;
  if (g.exps.alpha != Rational(0)) {
    out = std::string(v);
    if (g.exps.alpha != Rational(1)) out += "^" + to_string(g.exps.alpha);
  }
  for (size_t j = 0; j < g.exps.betas.size(); ++j) {
    if (g.exps.betas[j] == Rational(0)) continue;
    std::string lg;
    if (j < 3) {
      for (size_t i = 0; i <= j; ++i) lg += "log";
      lg += " ";
      lg += v;
    } else {
      lg = "log_[" + std::to_string(j + 1) + "] " + v;
    }
    std::string factor = "(" + lg + ")";
    if (g.exps.betas[j] != Rational(1)) factor += "^" + to_string(g.exps.betas[j]);
    if (!out.empty()) out += " ";
    out += factor;
  }
  return out.empty() ? "1" : out;
}

bool is_parabolic(const ExponentTuple& v) {
  if (v.alpha <= Rational(0)) throw std::invalid_argument("volume class needs alpha > 0");
  ExponentTuple critical{Rational(2), ones(v.betas.size())};
  return lex_cmp(v, critical) != Ordering::Greater;
}

bool is_subcritical(const ExponentTuple& v) {
  if (v.alpha <= Rational(0)) throw std::invalid_argument("volume class needs alpha > 0");
  return v.alpha < Rational(2);
}

bool is_regular(const ExponentTuple& v, const Rational& g1, const Rational& g2) {
  if (!(g1 > Rational(0) && g2 > Rational(0) && Rational(2) * g1 + g2 < Rational(2)))
    throw std::invalid_argument("regularity parameters violate 2*g1 + g2 < 2");
  Rational lo = Rational(2) - g2, hi = Rational(2) + g1;
  if (lo < v.alpha && v.alpha < hi) return true;
  ExponentTuple zero{v.alpha, {}};
  if (v.alpha == lo) return lex_cmp(v, zero) != Ordering::Less;     // betas >= 0
  if (v.alpha == hi) return lex_cmp(v, zero) != Ordering::Greater;  // betas <= 0
  return false;
}

GrowthLaw h_sym(const ExponentTuple& v) {
  if (v.alpha <= Rational(0)) throw std::invalid_argument("volume class needs alpha > 0");
  if (!is_parabolic(v)) return GrowthLaw{{Rational(0), {}}, Var::R};
  if (v.alpha < Rational(2)) {
    ExponentTuple e{Rational(2) - v.alpha, v.betas};
    for (auto& b : e.betas) b = -b;
    trim_trailing_zeros(e.betas);
    return GrowthLaw{e, Var::R};
  }
  // alpha == 2: J_i is the first level with beta < 1 (one past the end when
  // every beta equals 1; parabolicity forbids beta > 1 before that level).
  size_t J = v.betas.size();
  size_t Ji = J + 1;
  for (size_t j = 0; j < J; ++j) {
    if (v.betas[j] < Rational(1)) { Ji = j + 1; break; }
  }
  ExponentTuple e{Rational(0), std::vector<Rational>(std::max(J, Ji), Rational(0))};
  e.betas[Ji - 1] = Rational(1);
  for (size_t j = Ji - 1; j < J; ++j) e.betas[j] -= v.betas[j];
  trim_trailing_zeros(e.betas);
  return GrowthLaw{e, Var::R};
}

GrowthLaw vh_sym(const ExponentTuple& v) {
  return growth_mul(GrowthLaw{v, Var::R}, h_sym(v));
}

GrowthLaw vtilde_sym(const ExponentTuple& v) {
  GrowthLaw h = h_sym(v);
  return growth_mul(GrowthLaw{v, Var::R}, growth_mul(h, h));
}

EndLabel EndSpec::label() const {
  if (volume.alpha > Rational(2)) return EndLabel::Super;
  if (volume.alpha < Rational(2)) return EndLabel::Sub;
  return EndLabel::Middle;
}

bool EndSpec::is_model_admissible() const {
  ExponentTuple top{Rational(dim), {}};
  return lex_cmp(volume, top) != Ordering::Greater;
}

bool CoeParams::valid() const {
  return epsilon > Rational(0) && delta > Rational(0) && gamma1 > Rational(0) &&
         gamma2 > Rational(0) && gamma1 < epsilon && gamma1 + gamma2 < delta &&
         delta < Rational(2) && Rational(2) * gamma1 + gamma2 < Rational(2);
}

CoeResult classify_coe(const std::vector<EndSpec>& ends, const CoeParams& params) {
  if (!params.valid()) return CoeViolation{'p', "parameter constraints violated"};
  CoeCertificate cert;
  cert.params = params;
  for (size_t i = 0; i < ends.size(); ++i) {
    switch (ends[i].label()) {
      case EndLabel::Super: cert.super.push_back(static_cast<int>(i)); break;
      case EndLabel::Middle: cert.middle.push_back(static_cast<int>(i)); break;
      case EndLabel::Sub: cert.sub.push_back(static_cast<int>(i)); break;
    }
  }

  // (a) super ends dominate r^{2+eps}
  ExponentTuple super_floor{Rational(2) + params.epsilon, {}};
  for (int i : cert.super) {
    const auto& v = ends[i].volume;
    bool ok = v.alpha > super_floor.alpha ||
              (v.alpha == super_floor.alpha &&
               lex_cmp(v, ExponentTuple{v.alpha, {}}) != Ordering::Less);
    if (!ok)
      return CoeViolation{'a', "end " + std::to_string(i) + " not >~ r^{2+eps}"};
  }

  // (b) sub ends are subcritical and bounded by r^{2-delta}
  Rational sub_ceil = Rational(2) - params.delta;
  for (int i : cert.sub) {
    const auto& v = ends[i].volume;
    if (!is_subcritical(v))
      return CoeViolation{'b', "end " + std::to_string(i) + " not subcritical"};
    bool ok = v.alpha < sub_ceil ||
              (v.alpha == sub_ceil &&
               lex_cmp(v, ExponentTuple{v.alpha, {}}) != Ordering::Greater);
    if (!ok)
      return CoeViolation{'b', "end " + std::to_string(i) + " not <~ r^{2-delta}"};
  }

  // (c) middle ends: regularity, total volume order, and order consistency
  // of V*h (plus reversed order of V*h^2 when every end is parabolic).
  for (int i : cert.middle) {
    if (!is_regular(ends[i].volume, params.gamma1, params.gamma2))
      return CoeViolation{'c', "end " + std::to_string(i) + " not regular"};
  }
  bool all_parabolic = std::all_of(ends.begin(), ends.end(),
                                   [](const EndSpec& e) { return e.parabolic(); });
  for (int i : cert.middle) {
    for (int j : cert.middle) {
      if (i == j) continue;
      if (lex_cmp(ends[i].volume, ends[j].volume) == Ordering::Less) continue;
      // V_i >= V_j here
      if (lex_cmp(vh_sym(ends[i].volume), vh_sym(ends[j].volume)) == Ordering::Less)
        return CoeViolation{'c', "V*h order inconsistent for middle ends " +
                                     std::to_string(i) + "," + std::to_string(j)};
      if (all_parabolic &&
          lex_cmp(vtilde_sym(ends[i].volume), vtilde_sym(ends[j].volume)) ==
              Ordering::Greater)
        return CoeViolation{'c', "V*h^2 order inconsistent for middle ends " +
                                     std::to_string(i) + "," + std::to_string(j)};
    }
  }
  return cert;
}

std::optional<CoeCertificate> classify_coe_auto(const std::vector<EndSpec>& ends) {
  for (long long e = 1; e <= 15; ++e)
    for (long long d = 1; d <= 15; ++d)
      for (long long g1 = 1; g1 <= 15; ++g1)
        for (long long g2 = 1; g2 <= 15; ++g2) {
          CoeParams p{Rational(e, 8), Rational(d, 8), Rational(g1, 8), Rational(g2, 8)};
          if (!p.valid()) continue;
          auto res = classify_coe(ends, p);
          if (std::holds_alternative<CoeCertificate>(res))
            return std::get<CoeCertificate>(res);
        }
  return std::nullopt;
}

std::optional<int> check_doe(const std::vector<EndSpec>& ends) {
  if (ends.empty()) throw std::invalid_argument("check_doe needs at least one end");
  std::vector<GrowthLaw> vt;
  vt.reserve(ends.size());
  for (const auto& e : ends) vt.push_back(vtilde_sym(e.volume));
  for (size_t l = 0; l < ends.size(); ++l) {
    bool ok = true;
    for (size_t i = 0; i < ends.size() && ok; ++i) {
      if (lex_cmp(ends[l].volume, ends[i].volume) == Ordering::Less) ok = false;
      if (lex_cmp(vt[l], vt[i]) == Ordering::Greater) ok = false;
    }
    if (ok) return static_cast<int>(l);
  }
  return std::nullopt;
}

EndOrdering end_ordering(const std::vector<EndSpec>& ends) {
  if (ends.size() < 2) throw std::invalid_argument("end_ordering needs >= 2 ends");
  std::vector<int> idx(ends.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(), [&](int a, int b) {
    return lex_cmp(ends[a].volume, ends[b].volume) == Ordering::Greater;
  });
  EndOrdering out;
  out.m = idx[0];
  out.n = idx[1];

  // Detect a finite radius below which the numeric order of the top pair
  // differs from the eventual one (unit scale constants).
  auto value = [&](int i, double r) {
    return eval_growth(GrowthLaw{ends[i].volume, Var::R}, r);
  };
  for (double r = 1e12; r >= 4.0; r /= 2.0) {
    double vm = value(out.m, r);
    bool misordered = false;
    for (size_t i = 0; i < ends.size(); ++i)
      if (static_cast<int>(i) != out.m && value(static_cast<int>(i), r) > vm)
        misordered = true;
    if (misordered) { out.crossover_note = r; break; }
  }
  return out;
}

std::optional<GrowthLaw> predict_poincare(const std::vector<EndSpec>& ends) {
  if (ends.size() < 2) throw std::invalid_argument("predict_poincare needs >= 2 ends");
  EndOrdering ord = end_ordering(ends);
  bool all_nonparabolic = std::none_of(ends.begin(), ends.end(),
                                       [](const EndSpec& e) { return e.parabolic(); });
  if (all_nonparabolic) return vh_sym(ends[ord.n].volume);
  if (classify_coe_auto(ends)) return vh_sym(ends[ord.n].volume);
  return std::nullopt;
}

namespace {

bool regular_for_some_params(const ExponentTuple& v) {
  for (long long g1 = 1; g1 <= 15; ++g1)
    for (long long g2 = 1; g2 <= 15; ++g2) {
      Rational r1(g1, 8), r2(g2, 8);
      if (!(Rational(2) * r1 + r2 < Rational(2))) continue;
      if (is_regular(v, r1, r2)) return true;
    }
  return false;
}

}  // namespace

HeatPrediction predict_heat_center(const std::vector<EndSpec>& ends) {
  if (ends.empty()) throw std::invalid_argument("predict_heat_center needs ends");
  std::vector<GrowthLaw> vt;
  vt.reserve(ends.size());
  for (const auto& e : ends) vt.push_back(vtilde_sym(e.volume));
  GrowthLaw min_vt = vt[0];
  for (const auto& g : vt)
    if (lex_cmp(g, min_vt) == Ordering::Less) min_vt = g;

  bool any_nonparabolic = std::any_of(ends.begin(), ends.end(),
                                      [](const EndSpec& e) { return !e.parabolic(); });
  if (any_nonparabolic)
    return {growth_inv(substitute_sqrt_t(min_vt)), false};

  // All ends parabolic.
  bool each_regular_or_sub = std::all_of(ends.begin(), ends.end(), [](const EndSpec& e) {
    return e.subcritical() || regular_for_some_params(e.volume);
  });
  bool has_nonsub_regular = std::any_of(ends.begin(), ends.end(), [](const EndSpec& e) {
    return !e.subcritical() && regular_for_some_params(e.volume);
  });
  if (each_regular_or_sub && (!has_nonsub_regular || check_doe(ends))) {
    GrowthLaw vm{ends[0].volume, Var::R};
    for (const auto& e : ends) {
      GrowthLaw g{e.volume, Var::R};
      if (lex_cmp(g, vm) == Ordering::Greater) vm = g;
    }
    return {growth_inv(substitute_sqrt_t(vm)), false};
  }

  // Conjectured formula min h_i^2 / min Vtilde_i, flagged as unproven.
  GrowthLaw min_h = h_sym(ends[0].volume);
  for (const auto& e : ends) {
    GrowthLaw h = h_sym(e.volume);
    if (lex_cmp(h, min_h) == Ordering::Less) min_h = h;
  }
  GrowthLaw conj = growth_mul(growth_mul(min_h, min_h), growth_inv(min_vt));
  return {substitute_sqrt_t(conj), true};
}

}  // namespace endslab::asym
