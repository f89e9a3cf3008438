#pragma once

// Exact algebra of log-polynomial growth classes r^a * prod_j (log_[j] r)^b(j),
// end classification for connected sums, and closed-form predictions of the
// central Poincare constant and heat kernel decay.
//
// Growth classes carry exact rational exponents and drop all multiplicative
// constants; comparisons are the eventual (lexicographic) domination order.

#include <optional>
#include <string>
#include <variant>
#include <vector>

#include <boost/rational.hpp>

namespace endslab::asym {

using Rational = boost::rational<long long>;

// Accepts "3", "-2", "3/4" and plain decimals like "1.25".
Rational parse_rational(const std::string& s);
std::string to_string(const Rational& q);
double to_double(const Rational& q);

enum class Var { R, T };
enum class Ordering { Less, Equal, Greater };

// Exponents of r^alpha * prod_{j=1..J} (log_[j] r)^{betas[j-1]}.
// Absent beta entries count as zero; depth J is finite and explicit.
struct ExponentTuple {
  Rational alpha{0};
  std::vector<Rational> betas;

  bool operator==(const ExponentTuple& o) const;
};

// Total lexicographic order on (alpha, betas), shorter side padded with zeros.
Ordering lex_cmp(const ExponentTuple& a, const ExponentTuple& b);

// A growth class together with the variable it lives in (radius r or time t).
struct GrowthLaw {
  ExponentTuple exps;
  Var var = Var::R;

  bool operator==(const GrowthLaw& o) const;
};

Ordering lex_cmp(const GrowthLaw& a, const GrowthLaw& b);  // throws on var mismatch

GrowthLaw growth_mul(const GrowthLaw& u, const GrowthLaw& v);
GrowthLaw growth_pow(const GrowthLaw& u, const Rational& k);
inline GrowthLaw growth_inv(const GrowthLaw& u) { return growth_pow(u, Rational(-1)); }

// Substitutes r = sqrt(t): (a, b) in r becomes (a/2, b) in t. Constant factors
// such as log sqrt(t) = (1/2) log t are dropped with the rest of the constants.
GrowthLaw substitute_sqrt_t(const GrowthLaw& in_r);

// Numeric evaluation with log_[j] clamped at 1 below its domain threshold.
double eval_growth(const GrowthLaw& g, double x);
double iterated_log(int j, double x);  // clamped, j >= 1

std::string to_string(const GrowthLaw& g);
std::string to_string(const ExponentTuple& e);

// --- classification of a single volume class (requires alpha > 0) ---

// (alpha, betas) <= (2, 1, 1, ...) lexicographically.
bool is_parabolic(const ExponentTuple& v);

// h ~ r^2/V, which for log-polynomial classes happens exactly when alpha < 2.
bool is_subcritical(const ExponentTuple& v);

// Eventual two-sided power sandwich (R/r)^{2-g2} <~ V(R)/V(r) <~ (R/r)^{2+g1}.
bool is_regular(const ExponentTuple& v, const Rational& g1, const Rational& g2);

// Growth class of h = 1 + int_1^r s ds / V(s).
GrowthLaw h_sym(const ExponentTuple& v);
// Growth class of V*h.
GrowthLaw vh_sym(const ExponentTuple& v);
// Growth class of V*h^2.
GrowthLaw vtilde_sym(const ExponentTuple& v);

// --- ends of a connected sum ---

enum class EndLabel { Super, Middle, Sub };  // alpha > 2 / = 2 / < 2

struct EndSpec {
  int id = 0;          // index in the family
  int dim = 2;         // model dimension N >= 2
  ExponentTuple volume;

  EndLabel label() const;
  bool parabolic() const { return is_parabolic(volume); }
  bool subcritical() const { return is_subcritical(volume); }
  // Admissible as a model manifold: (alpha, betas) <= (N, 0, ..., 0).
  bool is_model_admissible() const;
};

struct CoeParams {
  Rational epsilon, delta, gamma1, gamma2;
  // gamma1 < epsilon, gamma1 + gamma2 < delta < 2, 2*gamma1 + gamma2 < 2.
  bool valid() const;
};

struct CoeCertificate {
  std::vector<int> super, middle, sub;  // indices into the end family
  CoeParams params;
};

struct CoeViolation {
  char clause;         // 'a', 'b', 'c' or 'p' for parameter problems
  std::string detail;
};

using CoeResult = std::variant<CoeCertificate, CoeViolation>;

// Checks the critically-ordered-ends decomposition for the given parameters.
CoeResult classify_coe(const std::vector<EndSpec>& ends, const CoeParams& params);

// Searches parameters over the grid {k/8 : 1 <= k <= 15} subject to the
// parameter constraints; the theorems only assert existence of some choice.
std::optional<CoeCertificate> classify_coe_auto(const std::vector<EndSpec>& ends);

// Smallest index l with V_l >~ V_i and Vtilde_l <~ Vtilde_i for all i.
std::optional<int> check_doe(const std::vector<EndSpec>& ends);

struct EndOrdering {
  int m = -1;  // eventually largest volume
  int n = -1;  // eventually second largest
  // Finite radius below which the numeric order differs, when detectable.
  std::optional<double> crossover_note;
};

EndOrdering end_ordering(const std::vector<EndSpec>& ends);

// Central Poincare constant Lambda(B(o,r)) as a growth class in r, or nullopt
// when neither the all-non-parabolic nor the ordered-ends hypotheses can be
// certified (caller falls back to numeric-only mode).
std::optional<GrowthLaw> predict_poincare(const std::vector<EndSpec>& ends);

struct HeatPrediction {
  GrowthLaw law;               // growth class of p(t,o,o) in t
  bool conjecture_only = false;  // true when only the conjectured formula applies
};

// Central heat kernel decay p(t,o,o) as a growth class in t.
HeatPrediction predict_heat_center(const std::vector<EndSpec>& ends);

}  // namespace endslab::asym
