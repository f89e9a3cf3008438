#include "endslab/model.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <boost/math/quadrature/gauss_kronrod.hpp>

namespace endslab::model {

using asym::Rational;
using asym::to_double;

namespace {

// True iterated log, valid only where every level is positive.
double raw_iterated_log(int j, double x) {
  double v = x;
  for (int i = 0; i < j; ++i) v = std::log(v);
  return v;
}

}  // namespace

VolumeProfile::VolumeProfile(const VolumeProfile& o)
    : tail_(o.tail_), dim_(o.dim_), scale_(o.scale_), r_splice_(o.r_splice_),
      v_splice_(o.v_splice_), h_mutex_(std::make_unique<std::mutex>()) {
  std::lock_guard<std::mutex> lk(*o.h_mutex_);
  h_cache_ = o.h_cache_;
}

VolumeProfile& VolumeProfile::operator=(const VolumeProfile& o) {
  if (this == &o) return *this;
  VolumeProfile tmp(o);
  *this = std::move(tmp);
  return *this;
}

VolumeProfile::VolumeProfile(VolumeProfile&&) noexcept = default;
VolumeProfile& VolumeProfile::operator=(VolumeProfile&&) noexcept = default;
VolumeProfile::~VolumeProfile() = default;

VolumeProfile VolumeProfile::make(asym::ExponentTuple tail, int dim, double scale,
                                  double r_splice) {
  if (dim < 2) throw std::invalid_argument("model dimension must be >= 2");
  if (!(scale > 0)) throw std::invalid_argument("scale must be positive");
  if (!(r_splice >= 1.0)) throw std::invalid_argument("splice radius must be >= 1");
  if (tail.alpha <= Rational(0)) throw std::invalid_argument("tail needs alpha > 0");

  VolumeProfile p;
  p.tail_ = std::move(tail);
  p.dim_ = dim;
  p.scale_ = scale;
  p.r_splice_ = r_splice;
  p.h_mutex_ = std::make_unique<std::mutex>();

  // All iterated-log levels must be positive from the splice on, and the tail
  // must be strictly increasing throughout.
  size_t J = p.tail_.betas.size();
  for (size_t j = 1; j <= J; ++j) {
    if (!(raw_iterated_log(static_cast<int>(j), r_splice) > 0))
      throw std::invalid_argument("splice radius too small for iterated-log depth");
  }
  for (double r = r_splice; r <= 1e12; r *= 1.25) {
    if (!(p.derivative(r) > 0))
      throw std::invalid_argument("tail not increasing at r=" + std::to_string(r) +
                                  "; raise the splice radius");
  }
  p.v_splice_ = p.tail_value(r_splice);
  return p;
}

double VolumeProfile::tail_value(double r) const {
  double out = scale_ * std::pow(r, to_double(tail_.alpha));
  for (size_t j = 0; j < tail_.betas.size(); ++j) {
    if (tail_.betas[j] == Rational(0)) continue;
    out *= std::pow(raw_iterated_log(static_cast<int>(j) + 1, r),
                    to_double(tail_.betas[j]));
  }
  return out;
}

double VolumeProfile::value(double r) const {
  if (!(r > 0)) throw std::invalid_argument("radius must be positive");
  if (r < r_splice_) return v_splice_ * std::pow(r / r_splice_, dim_);
  return tail_value(r);
}

double VolumeProfile::derivative(double r) const {
  if (!(r > 0)) throw std::invalid_argument("radius must be positive");
  if (r < r_splice_)
    return v_splice_ * dim_ * std::pow(r / r_splice_, dim_ - 1) / r_splice_;
  // V'/V = (alpha + sum_j beta_j / prod_{i<=j} log_[i] r) / r
  double bracket = to_double(tail_.alpha);
  double logprod = 1.0;
  for (size_t j = 0; j < tail_.betas.size(); ++j) {
    logprod *= raw_iterated_log(static_cast<int>(j) + 1, r);
    bracket += to_double(tail_.betas[j]) / logprod;
  }
  return tail_value(r) * bracket / r;
}

double VolumeProfile::integrand(double r) const { return r / value(r); }

double VolumeProfile::h(double r) const {
  if (r <= 1.0) return 1.0;
  std::lock_guard<std::mutex> lk(*h_mutex_);

  double base_r = 1.0, base_h = 1.0;
  auto it = h_cache_.upper_bound(r);
  if (it != h_cache_.begin()) {
    --it;
    base_r = it->first;
    base_h = it->second;
  }
  if (base_r == r) return base_h;

  // Integrate in u = log s; split at the splice kink.
  auto piece = [&](double a, double b) {
    if (b <= a) return 0.0;
    auto f = [&](double u) {
      double s = std::exp(u);
      return s * integrand(s);
    };
    return boost::math::quadrature::gauss_kronrod<double, 31>::integrate(
        f, std::log(a), std::log(b), 12, 1e-9);
  };

  double acc = 0.0;
  if (base_r < r_splice_ && r > r_splice_) {
    acc += piece(base_r, r_splice_);
    acc += piece(r_splice_, r);
  } else {
    acc += piece(base_r, r);
  }
  double out = base_h + acc;
  h_cache_[r] = out;
  return out;
}

double psi_from_v(const VolumeProfile& p, double r) {
  if (!(r > 0)) throw std::invalid_argument("radius must be positive");
  int n = p.dim();
  // omega_N chosen so the core branch is exactly psi(r) = r.
  double omega = n * p.value(p.splice_radius()) /
                 std::pow(p.splice_radius(), n);
  return std::pow(p.derivative(r) / omega, 1.0 / (n - 1));
}

ModelConditionsReport validate_model_conditions(const VolumeProfile& p, double r_max) {
  if (!(r_max > 10.0 * p.splice_radius()))
    throw std::invalid_argument("r_max must exceed 10 * splice radius");

  ModelConditionsReport rep;
  rep.max_v_over_rn = 0;
  rep.min_rvp_over_v = std::numeric_limits<double>::infinity();
  rep.max_rvp_over_v = 0;

  double prev_v = 0;
  const double step = std::pow(10.0, 1.0 / 64.0);
  for (double r = p.splice_radius(); r <= r_max * (1 + 1e-12); r *= step) {
    double v = p.value(r);
    double dv = p.derivative(r);
    if (!(v > prev_v) || !(dv > 0))
      throw std::domain_error("profile not strictly increasing at r=" + std::to_string(r));
    prev_v = v;
    rep.max_v_over_rn = std::max(rep.max_v_over_rn,
                                 v / (p.scale() * std::pow(r, p.dim())));
    double q = r * dv / v;
    rep.min_rvp_over_v = std::min(rep.min_rvp_over_v, q);
    rep.max_rvp_over_v = std::max(rep.max_rvp_over_v, q);
  }

  bool vol_ok = rep.max_v_over_rn <= 10.0;
  bool slope_ok = rep.min_rvp_over_v >= 1.0 / 20 && rep.max_rvp_over_v <= 20.0;
  rep.pass = vol_ok && slope_ok;
  if (!vol_ok) rep.detail = "V(r)/r^N exceeds slack bound";
  else if (!slope_ok) rep.detail = "r V'/V outside [1/20, 20]";
  return rep;
}

Envelope envelope_hd(const VolumeProfile& end, double r, double t) {
  if (!(r > 0 && t > 0)) throw std::invalid_argument("envelope needs r, t > 0");
  double hr = end.h(r);
  double ht = end.h(std::sqrt(t));
  Envelope e;
  e.H = r * r / (end.value(r) * hr) + std::max(ht - hr, 0.0) / ht;
  e.D = hr / (hr + ht);
  return e;
}

CenterTrace::CenterTrace(std::vector<double> times, std::vector<double> values)
    : times_(std::move(times)), values_(std::move(values)) {
  if (times_.size() != values_.size() || times_.size() < 2)
    throw std::invalid_argument("trace needs matching times/values, >= 2 samples");
  for (size_t k = 0; k + 1 < times_.size(); ++k)
    if (!(times_[k] < times_[k + 1]))
      throw std::invalid_argument("trace times must increase");
  cumint_.resize(times_.size(), 0.0);
  for (size_t k = 1; k < times_.size(); ++k)
    cumint_[k] = cumint_[k - 1] +
                 0.5 * (values_[k] + values_[k - 1]) * (times_[k] - times_[k - 1]);
}

double CenterTrace::value_at(double t) const {
  if (times_.empty()) throw std::logic_error("empty trace");
  if (t < times_.front() || t > times_.back() * (1 + 1e-12))
    throw std::out_of_range("trace does not cover requested time");
  auto it = std::lower_bound(times_.begin(), times_.end(), t);
  size_t k = it - times_.begin();
  if (k == 0) return values_.front();
  if (k >= times_.size()) return values_.back();
  double w = (std::log(t) - std::log(times_[k - 1])) /
             (std::log(times_[k]) - std::log(times_[k - 1]));
  return std::exp((1 - w) * std::log(values_[k - 1]) + w * std::log(values_[k]));
}

double CenterTrace::integral_1_to(double t) const {
  if (times_.empty()) throw std::logic_error("empty trace");
  if (times_.front() > 1.0 || t > times_.back() * (1 + 1e-12))
    throw std::out_of_range("trace does not cover [1, t]");
  auto upto = [&](double s) {
    auto it = std::lower_bound(times_.begin(), times_.end(), s);
    size_t k = it - times_.begin();
    if (k == 0) return 0.0;
    if (k >= times_.size()) return cumint_.back();
    double left = cumint_[k - 1];
    double p = value_at(s);
    return left + 0.5 * (p + values_[k - 1]) * (s - times_[k - 1]);
  };
  return upto(t) - upto(1.0);
}

double offdiag_envelope(const EnvelopeInputs& in, int i, int j, double x_r,
                        double y_r, double t) {
  if (i < 0 || j < 0 || i >= static_cast<int>(in.ends.size()) ||
      j >= static_cast<int>(in.ends.size()))
    throw std::out_of_range("end index");
  if (!(x_r >= 3 && y_r >= 3)) throw std::invalid_argument("radii use the |x| = d+3 offset");
  if (!(t >= 1)) throw std::invalid_argument("t >= 1");

  const VolumeProfile& ei = in.ends[i];
  const VolumeProfile& ej = in.ends[j];
  double st = std::sqrt(t);
  double d = i == j ? std::abs(x_r - y_r) : x_r + y_r;

  Envelope Ei = envelope_hd(ei, x_r, t);
  Envelope Ej = envelope_hd(ej, y_r, t);

  // Radial shell measure of the ball at a point, the star analogue of V(x, sqrt t);
  // symmetrized over the two points (equivalent up to constants under doubling).
  auto point_volume = [&](const VolumeProfile& e, double rr) {
    double lo = std::max(rr - st, 0.0);
    return e.value(rr + st) - (lo > 0 ? e.value(lo) : 0.0);
  };
  double out = 0.0;
  if (i == j) {
    double vxy = std::sqrt(point_volume(ei, x_r) * point_volume(ej, y_r));
    out += (1.0 / vxy) * Ei.D * Ej.D * std::exp(-d * d / t);
  }
  double gauss = std::exp(-(x_r * x_r + y_r * y_r) / t);
  out += in.center.value_at(t) * Ei.H * Ej.H * gauss;
  double acc = in.center.integral_1_to(t);
  out += acc *
         (Ei.D * Ej.H / (ei.value(st) * ei.h(st)) +
          Ej.D * Ei.H / (ej.value(st) * ej.h(st))) *
         gauss;
  return out;
}

}  // namespace endslab::model
