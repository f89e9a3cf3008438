#include "endslab/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "lapack_sym.hpp"

namespace endslab::spectral {

using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

constexpr int kMaxHeatVertices = 6000;
constexpr double kExpUnderflow = 745.0;  // exp(-x) underflows past this

}  // namespace

HeatEngine::HeatEngine(const mesh::GraphView& view, Bc bc) {
  const auto& g = *view.g;
  int n = static_cast<int>(view.verts.size());
  if (n < 1) throw std::invalid_argument("heat engine needs a nonempty view");
  if (n > kMaxHeatVertices)
    throw std::invalid_argument(
        "heat engine: view too large for a spectral solve; coarsen the mesh");

  global_ = view.verts;
  local_of_.assign(g.vertices.size(), -1);
  mu_.resize(n);
  for (int i = 0; i < n; ++i) {
    local_of_[global_[i]] = i;
    mu_(i) = g.vertices[global_[i]].mu;
  }
  inv_sqrt_mu_ = mu_.cwiseSqrt().cwiseInverse();

  MatrixXd C = MatrixXd::Zero(n, n);
  for (int eid : view.edge_ids) {
    const auto& e = g.edges[eid];
    int u = local_of_[e.u], v = local_of_[e.v];
    C(u, u) += e.c;
    C(v, v) += e.c;
    C(u, v) -= e.c;
    C(v, u) -= e.c;
  }
  if (bc == Bc::Dirichlet) {
    for (const auto& e : g.edges) {
      int lu = e.u < static_cast<int>(local_of_.size()) ? local_of_[e.u] : -1;
      int lv = e.v < static_cast<int>(local_of_.size()) ? local_of_[e.v] : -1;
      if (lu >= 0 && lv < 0) C(lu, lu) += e.c;
      if (lv >= 0 && lu < 0) C(lv, lv) += e.c;
    }
  }
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) C(i, j) *= inv_sqrt_mu_(i) * inv_sqrt_mu_(j);

  detail::sym_eig_inplace(C, theta_);
  q_ = std::move(C);

  if (bc == Bc::Neumann) {
    // The exact nullspace is known (constants); pin near-zero modes so mass
    // is conserved over arbitrarily long horizons.
    double scale = std::max(1.0, std::abs(theta_(n - 1)));
    for (int i = 0; i < n; ++i)
      if (std::abs(theta_(i)) < 1e-12 * scale) theta_(i) = 0.0;
  }
}

int HeatEngine::local_index(int global_id) const {
  if (global_id < 0 || global_id >= static_cast<int>(local_of_.size())) return -1;
  return local_of_[global_id];
}

double HeatEngine::kernel(double t, int x, int y) const {
  long double acc = 0;
  int n = size();
  for (int q = 0; q < n; ++q) {
    double a = theta_(q) * t;
    if (a > kExpUnderflow) break;  // ascending spectrum
    acc += static_cast<long double>(q_(x, q)) * q_(y, q) * std::exp(-a);
  }
  return static_cast<double>(acc) * inv_sqrt_mu_(x) * inv_sqrt_mu_(y);
}

Eigen::VectorXd HeatEngine::evolve_delta(int local_source, double t) const {
  int n = size();
  VectorXd w = q_.row(local_source).transpose() * inv_sqrt_mu_(local_source);
  for (int q = 0; q < n; ++q) {
    double a = theta_(q) * t;
    w(q) = a > kExpUnderflow ? 0.0 : w(q) * std::exp(-a);
  }
  return inv_sqrt_mu_.cwiseProduct(q_ * w);
}

double HeatEngine::mass(const Eigen::VectorXd& u) const { return mu_.dot(u); }

Eigen::MatrixXd HeatEngine::kernel_factor(double t, const std::vector<int>& rows) const {
  int n = size();
  MatrixXd out(static_cast<int>(rows.size()), n);
  for (size_t r = 0; r < rows.size(); ++r) {
    int x = rows[r];
    for (int q = 0; q < n; ++q) {
      double a = 0.5 * theta_(q) * t;
      out(static_cast<int>(r), q) =
          a > kExpUnderflow ? 0.0 : q_(x, q) * std::exp(-a) * inv_sqrt_mu_(x);
    }
  }
  return out;
}

HeatTrace heat_trace(const mesh::WeightedGraph& g, int source,
                     const std::vector<double>& times) {
  if (times.empty()) throw std::invalid_argument("heat_trace: empty time grid");
  for (size_t k = 0; k + 1 < times.size(); ++k)
    if (!(times[k] < times[k + 1]))
      throw std::invalid_argument("heat_trace: times must increase");
  if (!(times.front() > 0)) throw std::invalid_argument("heat_trace: times must be positive");

  mesh::GraphView view = whole_graph_view(g);
  HeatEngine eng(view, HeatEngine::Bc::Neumann);
  int src = eng.local_index(source);
  if (src < 0) throw std::out_of_range("heat_trace: source not in graph");

  HeatTrace tr;
  tr.times = times;
  tr.values.reserve(times.size());
  for (double t : times) tr.values.push_back(eng.kernel(t, src, src));

  // Mass audit at a subsample of times.
  for (size_t k = 0; k < times.size(); k += std::max<size_t>(1, times.size() / 8)) {
    VectorXd u = eng.evolve_delta(src, times[k]);
    tr.max_mass_error = std::max(tr.max_mass_error, std::abs(eng.mass(u) - 1.0));
  }
  return tr;
}

Eigen::MatrixXd dirichlet_heat(const mesh::WeightedGraph& g,
                               const mesh::GraphView& Uprime, double t,
                               const std::vector<int>& sources) {
  if (Uprime.g != &g) throw std::invalid_argument("dirichlet_heat: view of another graph");
  HeatEngine eng(Uprime, HeatEngine::Bc::Dirichlet);
  MatrixXd out(eng.size(), static_cast<int>(sources.size()));
  for (size_t s = 0; s < sources.size(); ++s) {
    int ls = eng.local_index(sources[s]);
    if (ls < 0) throw std::invalid_argument("dirichlet_heat: source outside U'");
    for (int v = 0; v < eng.size(); ++v)
      out(v, static_cast<int>(s)) = eng.kernel(t, v, ls);
  }
  return out;
}

double ks_upper_bound(const mesh::WeightedGraph& g, const mesh::GraphView& U,
                      const mesh::GraphView& Uprime, const mesh::GraphView& A,
                      double t) {
  if (!Uprime.contains_all(U) || !Uprime.contains_all(A))
    throw std::invalid_argument("ks_upper_bound: U and A must sit inside U'");
  HeatEngine eng(Uprime, HeatEngine::Bc::Dirichlet);

  auto locals = [&](const mesh::GraphView& v) {
    std::vector<int> out;
    out.reserve(v.verts.size());
    for (int gid : v.verts) out.push_back(eng.local_index(gid));
    return out;
  };
  MatrixXd GA = eng.kernel_factor(t, locals(A));
  MatrixXd GU = eng.kernel_factor(t, locals(U));
  MatrixXd P = GA * GU.transpose();
  double inf = P.minCoeff();
  if (!(inf > 0)) return std::numeric_limits<double>::infinity();
  return 2.0 * t / (A.measure() * inf);
}

}  // namespace endslab::spectral
