#pragma once

// Generalized symmetric eigenproblems and heat semigroups on weighted graphs:
// Neumann spectral gaps, couple Poincare constants, heat traces, Dirichlet
// kernels, the heat-kernel upper bound for couple constants, and the
// cut-off-test-function lower bound for the central ball.

#include <string>
#include <vector>

#include <Eigen/Dense>

#include "endslab/mesh.hpp"

namespace endslab::spectral {

struct SolverOptions {
  double residual_tol = 1e-10;    // target; the contract is 1e-8
  int dense_gap_threshold = 600;
  int dense_couple_threshold = 4000;
  int max_lanczos = 400;
};

struct SpectralResult {
  double lambda = 0;        // smallest positive generalized eigenvalue
  Eigen::VectorXd eigvec;   // on view-local indices, M-orthogonal to constants
  double residual = 0;      // ||L f - lambda M f|| / (lambda ||M f||)
  std::string method;
};

// Smallest positive eigenvalue of L f = lambda M f on the induced subgraph,
// constants deflated by explicit projection. Throws on a disconnected view
// (the gap would be zero).
SpectralResult neumann_gap(const mesh::GraphView& view, const SolverOptions& opt = {});

struct CoupleConstant {
  double value = 0;
  bool infinite = false;    // disconnected U'
  Eigen::VectorXd extremal; // on U'-local indices
  std::string method;
};

// Best constant in int_U |f - f_U|^2 dmu <= Lambda int_{U'} |grad f|^2 dmu,
// computed as the largest eigenvalue of the pencil (mean-centered mass on U,
// Laplacian of U') on the complement of constants. Dense solve below the
// threshold, L-inner-product Lanczos with grounded solves above it.
CoupleConstant couple_poincare(const mesh::GraphView& U, const mesh::GraphView& Uprime,
                               const SolverOptions& opt = {});

struct HeatTrace {
  std::vector<double> times;   // increasing, positive
  std::vector<double> values;  // p(t, source, source)
  double max_mass_error = 0;   // worst |sum mu u - 1| over the solve
};

// Spectral representation of the semigroup exp(t M^{-1} L) on a view, with
// optional killing at removed vertices (Dirichlet restriction). Exact in time;
// intended for views up to a few thousand vertices.
class HeatEngine {
 public:
  enum class Bc { Neumann, Dirichlet };

  HeatEngine(const mesh::GraphView& view, Bc bc);

  int size() const { return static_cast<int>(mu_.size()); }
  // Heat kernel p(t, x, y) with respect to mu, view-local indices.
  double kernel(double t, int x, int y) const;
  // u(t) with u(0) = e_source / mu_source, as a vector over the view.
  Eigen::VectorXd evolve_delta(int local_source, double t) const;
  double mass(const Eigen::VectorXd& u) const;
  int local_index(int global_id) const;  // -1 when absent
  const std::vector<int>& globals() const { return global_; }

  // Rows of the factor G(t) with p(t,x,y) = (G(t) G(t)^T)_{xy}; used for
  // batched kernel minima.
  Eigen::MatrixXd kernel_factor(double t, const std::vector<int>& local_rows) const;

 private:
  Eigen::VectorXd mu_, inv_sqrt_mu_, theta_;
  Eigen::MatrixXd q_;
  std::vector<int> global_;
  std::vector<int> local_of_;
};

// u' = -M^{-1} L u from a unit point mass at `source`; values of u_source at
// the requested times.
HeatTrace heat_trace(const mesh::WeightedGraph& g, int source,
                     const std::vector<double>& times);

// Dirichlet kernel columns p^D_{U'}(t, x, .) for each source x (global ids);
// rows follow U'-local indexing.
Eigen::MatrixXd dirichlet_heat(const mesh::WeightedGraph& g,
                               const mesh::GraphView& Uprime, double t,
                               const std::vector<int>& sources);

// 2t / (mu(A) * inf_{x in A, y in U} p^D_{U'}(t,x,y)); +infinity when the
// infimum vanishes numerically.
double ks_upper_bound(const mesh::WeightedGraph& g, const mesh::GraphView& U,
                      const mesh::GraphView& Uprime, const mesh::GraphView& A,
                      double t);

// Certified variational lower bound for Lambda(B(o,R)): Rayleigh quotient of
// the cut-off test function built from h along chain i, zero elsewhere.
// Requires end i not to carry the largest ball mass at scale R.
double rayleigh_lower(const mesh::WeightedGraph& g, int end, double R);

// Trapezoid integral of p(s,o,o) over [1, r^2] on the trace's grid.
double heat_time_integral(const HeatTrace& trace, double r);

// Convenience view over the entire graph.
mesh::GraphView whole_graph_view(const mesh::WeightedGraph& g);

}  // namespace endslab::spectral
