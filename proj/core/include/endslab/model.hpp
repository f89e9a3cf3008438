#pragma once

// Concrete volume profiles for model manifolds: a log-polynomial tail spliced
// onto an exactly Euclidean core, with analytic derivatives, quadrature of the
// h function, admissibility validation, and the off-diagonal heat envelopes.

#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <vector>

#include "endslab/asym.hpp"

namespace endslab::model {

// V(r) = scale * r^alpha * prod_j (log_[j] r)^{beta_j}   for r >= r_splice,
// V(r) = V(r_splice) * (r / r_splice)^N                  for 0 < r < r_splice.
//
// Continuous at the splice; the derivative may jump there. The sphere-measure
// constant is folded into the scale so the core is exactly Euclidean.
class VolumeProfile {
 public:
  static VolumeProfile make(asym::ExponentTuple tail, int dim, double scale = 1.0,
                            double r_splice = 30.0);

  double value(double r) const;       // V(r)
  double derivative(double r) const;  // V'(r), analytic per branch

  // h(r) = 1 + (int_1^r s ds / V(s))_+ by adaptive quadrature, memoized.
  // Relative accuracy 1e-6; safe for concurrent callers.
  double h(double r) const;

  int dim() const { return dim_; }
  double splice_radius() const { return r_splice_; }
  double scale() const { return scale_; }
  const asym::ExponentTuple& tail() const { return tail_; }

  VolumeProfile(const VolumeProfile&);
  VolumeProfile& operator=(const VolumeProfile&);
  VolumeProfile(VolumeProfile&&) noexcept;
  VolumeProfile& operator=(VolumeProfile&&) noexcept;
  ~VolumeProfile();

 private:
  VolumeProfile() = default;

  double tail_value(double r) const;
  double integrand(double r) const;  // r / V(r)

  asym::ExponentTuple tail_;
  int dim_ = 2;
  double scale_ = 1.0;
  double r_splice_ = 30.0;
  double v_splice_ = 0.0;

  // Monotone cache of (r, h(r)) breakpoints; integration resumes from the
  // nearest cached radius below.
  mutable std::map<double, double> h_cache_;
  mutable std::unique_ptr<std::mutex> h_mutex_;
};

// Warp radius psi(r) = (V'(r) / omega_N)^{1/(N-1)} with omega_N normalized so
// the core gives psi(r) = r exactly.
double psi_from_v(const VolumeProfile& p, double r);

struct ModelConditionsReport {
  bool pass = false;
  double max_v_over_rn = 0;       // max of V(r) / (scale * r^N)
  double min_rvp_over_v = 0;      // min of r V'(r) / V(r)
  double max_rvp_over_v = 0;      // max of r V'(r) / V(r)
  std::string detail;
};

// Samples a geometric grid on [r_splice, r_max] and checks the model-manifold
// conditions: r V'/V within [1/20, 20] and V(r) <= 10 * scale * r^N. The slack
// constants are separating thresholds, not sharp ones.
ModelConditionsReport validate_model_conditions(const VolumeProfile& p, double r_max);

struct Envelope {
  double H = 0;
  double D = 0;
};

// H(r,t) = r^2/(V(r) h(r)) + (h(sqrt t) - h(r))_+ / h(sqrt t)
// D(r,t) = h(r) / (h(r) + h(sqrt t))
Envelope envelope_hd(const VolumeProfile& end, double r, double t);

// Sampled center trace p(t,o,o) with its running time integral, interpolated
// log-log between samples.
class CenterTrace {
 public:
  CenterTrace() = default;
  CenterTrace(std::vector<double> times, std::vector<double> values);

  double value_at(double t) const;
  double integral_1_to(double t) const;  // int_1^t p(s,o,o) ds, trapezoid
  double t_min() const { return times_.empty() ? 0 : times_.front(); }
  double t_max() const { return times_.empty() ? 0 : times_.back(); }

 private:
  std::vector<double> times_, values_, cumint_;
};

struct EnvelopeInputs {
  std::vector<VolumeProfile> ends;
  CenterTrace center;
};

// Right-hand side of the two-sided off-diagonal heat bound with all constants
// set to one, on the radialized star metric: d(x,y) = x_r + y_r across ends
// and |x_r - y_r| within an end. Radii are measured with the offset x = d+3.
double offdiag_envelope(const EnvelopeInputs& in, int i, int j, double x_r,
                        double y_r, double t);

}  // namespace endslab::model
