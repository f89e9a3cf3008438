#include <cmath>
#include <stdexcept>

#include <Eigen/Dense>

#include "endslab/lab.hpp"

namespace endslab::lab {

FitResult fit_exponents(const std::vector<double>& xs, const std::vector<double>& ys,
                        bool use_loglog,
                        std::optional<std::pair<double, double>> window) {
  if (xs.size() != ys.size()) throw std::invalid_argument("fit: size mismatch");

  std::vector<double> x, y;
  for (size_t i = 0; i < xs.size(); ++i) {
    if (window && (xs[i] < window->first * (1 - 1e-12) ||
                   xs[i] > window->second * (1 + 1e-12)))
      continue;
    if (!(ys[i] > 0) || !std::isfinite(ys[i]))
      throw std::invalid_argument("fit: values must be positive and finite");
    x.push_back(xs[i]);
    y.push_back(ys[i]);
  }
  if (x.size() < 4) throw std::invalid_argument("fit: fewer than 4 points in window");

  int n = static_cast<int>(x.size());
  int p = use_loglog ? 3 : 2;
  Eigen::MatrixXd X(n, p);
  Eigen::VectorXd Y(n);
  for (int i = 0; i < n; ++i) {
    double lx = std::log(x[i]);
    X(i, 0) = lx;
    if (use_loglog) {
      if (!(lx > 0)) throw std::invalid_argument("fit: log log term needs x > e");
      X(i, 1) = std::log(lx);
      X(i, 2) = 1.0;
    } else {
      X(i, 1) = 1.0;
    }
    Y(i) = std::log(y[i]);
  }

  Eigen::MatrixXd G = X.transpose() * X;
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(X, Eigen::ComputeThinU | Eigen::ComputeThinV);
  double cond = svd.singularValues()(0) / svd.singularValues()(p - 1);
  if (!(cond < 1e6))
    throw std::invalid_argument(
        "fit: singular design (log log r is collinear with log r over this "
        "window; widen the window or disable the log log term)");
  Eigen::VectorXd beta = svd.solve(Y);

  FitResult out;
  out.used_loglog = use_loglog;
  out.a = beta(0);
  out.b = use_loglog ? beta(1) : 0.0;
  out.c = beta(p - 1);
  Eigen::VectorXd resid = Y - X * beta;
  out.rms = std::sqrt(resid.squaredNorm() / n);
  double sigma2 = n > p ? resid.squaredNorm() / (n - p) : 0.0;
  Eigen::MatrixXd Ginv = G.inverse();
  out.cov[0] = sigma2 * Ginv(0, 0);
  out.cov[1] = use_loglog ? sigma2 * Ginv(1, 1) : 0.0;
  out.cov[2] = sigma2 * Ginv(p - 1, p - 1);
  return out;
}

}  // namespace endslab::lab
