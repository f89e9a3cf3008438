#include "endslab/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>
#include <random>
#include <stdexcept>

#include <Eigen/SparseCholesky>

#include "lapack_sym.hpp"

namespace endslab::spectral {

using Eigen::MatrixXd;
using Eigen::VectorXd;
using SparseMat = Eigen::SparseMatrix<double>;

namespace {

struct LocalSystem {
  int n = 0;
  VectorXd mu;
  SparseMat L;              // graph Laplacian of the induced edges
  VectorXd kill;            // conductance into removed vertices (Dirichlet)
  std::vector<int> global;  // local -> global
  std::vector<std::pair<int, std::pair<int, double>>> edges;  // (u, (v, c)) local
  bool connected = false;
};

LocalSystem assemble(const mesh::GraphView& view) {
  const auto& g = *view.g;
  LocalSystem s;
  s.n = static_cast<int>(view.verts.size());
  s.global = view.verts;
  s.mu.resize(s.n);
  std::vector<int> loc(g.vertices.size(), -1);
  for (int i = 0; i < s.n; ++i) {
    loc[view.verts[i]] = i;
    s.mu(i) = g.vertices[view.verts[i]].mu;
  }
  s.kill = VectorXd::Zero(s.n);

  std::vector<Eigen::Triplet<double>> trips;
  trips.reserve(view.edge_ids.size() * 4 + s.n);
  std::vector<std::vector<int>> adj(s.n);
  for (int eid : view.edge_ids) {
    const auto& e = g.edges[eid];
    int u = loc[e.u], v = loc[e.v];
    trips.emplace_back(u, u, e.c);
    trips.emplace_back(v, v, e.c);
    trips.emplace_back(u, v, -e.c);
    trips.emplace_back(v, u, -e.c);
    adj[u].push_back(v);
    adj[v].push_back(u);
    s.edges.push_back({u, {v, e.c}});
  }
  // Edges leaving the view contribute killing terms under Dirichlet restriction.
  for (const auto& e : g.edges) {
    int lu = loc[e.u], lv = loc[e.v];
    if (lu >= 0 && lv < 0) s.kill(lu) += e.c;
    if (lv >= 0 && lu < 0) s.kill(lv) += e.c;
  }
  s.L.resize(s.n, s.n);
  s.L.setFromTriplets(trips.begin(), trips.end());

  std::vector<char> seen(s.n, 0);
  std::queue<int> q;
  q.push(0);
  seen[0] = 1;
  int cnt = 1;
  while (!q.empty()) {
    int u = q.front();
    q.pop();
    for (int v : adj[u])
      if (!seen[v]) {
        seen[v] = 1;
        ++cnt;
        q.push(v);
      }
  }
  s.connected = cnt == s.n;
  return s;
}

double energy(const LocalSystem& s, const VectorXd& f) {
  long double acc = 0;
  for (const auto& e : s.edges) {
    long double d = f(e.first) - f(e.second.first);
    acc += static_cast<long double>(e.second.second) * d * d;
  }
  return static_cast<double>(acc);
}

// ||L f - lambda M f|| / (lambda ||M f||), accumulated in extended precision.
double pencil_residual(const LocalSystem& s, const VectorXd& f, double lambda) {
  std::vector<long double> lf(s.n, 0.0L);
  for (const auto& e : s.edges) {
    int u = e.first, v = e.second.first;
    long double c = e.second.second;
    long double d = static_cast<long double>(f(u)) - static_cast<long double>(f(v));
    lf[u] += c * d;
    lf[v] -= c * d;
  }
  long double num = 0, den = 0;
  for (int i = 0; i < s.n; ++i) {
    long double mf = static_cast<long double>(s.mu(i)) * f(i);
    long double r = lf[i] - static_cast<long double>(lambda) * mf;
    num += r * r;
    den += mf * mf;
  }
  return static_cast<double>(sqrtl(num) / (lambda * sqrtl(den)));
}

void deflate_constants(const LocalSystem& s, VectorXd& f) {
  double mean = s.mu.dot(f) / s.mu.sum();
  f.array() -= mean;
}

VectorXd deterministic_noise(int n, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> uni(-1.0, 1.0);
  VectorXd v(n);
  for (int i = 0; i < n; ++i) v(i) = uni(rng);
  return v;
}

// Rayleigh quotient of a radial ramp, sign-split across ends; an order-of-
// magnitude estimate of the gap used only to place the spectral shift.
double gap_scale_estimate(const mesh::GraphView& view, const LocalSystem& s) {
  const auto& g = *view.g;
  VectorXd f(s.n);
  for (int i = 0; i < s.n; ++i) {
    const auto& v = g.vertices[s.global[i]];
    f(i) = v.end == mesh::kCenter ? 0.0 : (v.end == 0 ? v.radius : -v.radius);
  }
  if (f.norm() == 0) f = deterministic_noise(s.n, 17);
  deflate_constants(s, f);
  double m = f.cwiseProduct(s.mu.cwiseProduct(f)).sum();
  double e = energy(s, f);
  if (!(m > 0) || !(e > 0)) return 1.0;
  return e / m;
}

struct TridiagRitz {
  double theta = 0;
  VectorXd y;
  double bound = 0;  // |beta_m * last component|
};

TridiagRitz largest_ritz(const std::vector<double>& alpha, const std::vector<double>& beta) {
  int m = static_cast<int>(alpha.size());
  MatrixXd T = MatrixXd::Zero(m, m);
  for (int i = 0; i < m; ++i) {
    T(i, i) = alpha[i];
    if (i + 1 < m) T(i, i + 1) = T(i + 1, i) = beta[i];
  }
  Eigen::SelfAdjointEigenSolver<MatrixXd> es(T);
  TridiagRitz r;
  r.theta = es.eigenvalues()(m - 1);
  r.y = es.eigenvectors().col(m - 1);
  return r;
}

// Lanczos with full reorthogonalization for the largest eigenvalue of a
// symmetric operator given by `apply`; basis vectors kept orthonormal in the
// inner product given by `dot`.
template <typename Apply, typename Dot>
std::pair<double, VectorXd> lanczos_largest(int n, Apply apply, Dot dot,
                                            const VectorXd& start, int max_iter,
                                            double rel_tol) {
  std::vector<VectorXd> basis;
  std::vector<double> alpha, beta;
  VectorXd q = start;
  double nrm = std::sqrt(std::max(dot(q, q), 0.0));
  if (!(nrm > 0)) throw std::domain_error("lanczos: degenerate start vector");
  q /= nrm;
  basis.push_back(q);
  double theta_prev = 0;
  for (int m = 0; m < max_iter; ++m) {
    VectorXd w = apply(basis[m]);
    double a = dot(w, basis[m]);
    alpha.push_back(a);
    w -= a * basis[m];
    if (m > 0) w -= beta[m - 1] * basis[m - 1];
    for (const auto& b : basis) w -= dot(w, b) * b;  // full reorthogonalization
    double bnorm = std::sqrt(std::max(dot(w, w), 0.0));
    TridiagRitz ritz = largest_ritz(alpha, beta);
    double resid = bnorm * std::abs(ritz.y(static_cast<int>(alpha.size()) - 1));
    bool stable = m > 2 && std::abs(ritz.theta - theta_prev) <= rel_tol * std::abs(ritz.theta);
    theta_prev = ritz.theta;
    if (resid <= rel_tol * std::abs(ritz.theta) && stable) {
      VectorXd z = VectorXd::Zero(n);
      for (size_t j = 0; j < basis.size(); ++j) z += ritz.y(static_cast<int>(j)) * basis[j];
      return {ritz.theta, z};
    }
    if (!(bnorm > 1e-300)) {  // invariant subspace exhausted
      VectorXd z = VectorXd::Zero(n);
      for (size_t j = 0; j < basis.size(); ++j) z += ritz.y(static_cast<int>(j)) * basis[j];
      return {ritz.theta, z};
    }
    beta.push_back(bnorm);
    basis.push_back(w / bnorm);
  }
  TridiagRitz ritz = largest_ritz(alpha, beta);
  VectorXd z = VectorXd::Zero(n);
  for (int j = 0; j < static_cast<int>(alpha.size()); ++j) z += ritz.y(j) * basis[j];
  return {ritz.theta, z};
}

}  // namespace

SpectralResult neumann_gap(const mesh::GraphView& view, const SolverOptions& opt) {
  LocalSystem s = assemble(view);
  if (s.n < 2) throw std::invalid_argument("neumann_gap needs >= 2 vertices");
  if (!s.connected)
    throw std::domain_error("neumann_gap: view disconnected, gap would be 0");

  VectorXd sqrt_mu = s.mu.cwiseSqrt();
  VectorXd f;
  double lambda = 0;
  std::string method;

  if (s.n <= opt.dense_gap_threshold) {
    MatrixXd C = MatrixXd(s.L);
    for (int i = 0; i < s.n; ++i)
      for (int j = 0; j < s.n; ++j) C(i, j) /= sqrt_mu(i) * sqrt_mu(j);
    VectorXd w;
    detail::sym_eig_inplace(C, w);
    lambda = w(1);
    f = C.col(1).cwiseQuotient(sqrt_mu);
    method = "dense";
  } else {
    double scale = gap_scale_estimate(view, s);
    double shift = scale / 50.0;
    SparseMat K = s.L;
    for (int i = 0; i < s.n; ++i) K.coeffRef(i, i) += shift * s.mu(i);
    Eigen::SimplicialLDLT<SparseMat> ldlt(K);
    if (ldlt.info() != Eigen::Success)
      throw std::runtime_error("neumann_gap: factorization failed");

    VectorXd q0 = sqrt_mu / sqrt_mu.norm();
    auto project = [&](VectorXd& y) { y -= q0.dot(y) * q0; };
    auto apply = [&](const VectorXd& y) {
      VectorXd z = y;
      project(z);
      VectorXd w = sqrt_mu.cwiseProduct(ldlt.solve(sqrt_mu.cwiseProduct(z)));
      project(w);
      return w;
    };
    auto dot = [](const VectorXd& a, const VectorXd& b) { return a.dot(b); };
    VectorXd start = deterministic_noise(s.n, 20240u + static_cast<unsigned>(s.n));
    project(start);
    auto [theta, y] = lanczos_largest(s.n, apply, dot, start, opt.max_lanczos, 1e-12);
    if (!(theta > 0)) throw std::runtime_error("neumann_gap: lanczos failed");
    lambda = 1.0 / theta - shift;
    f = y.cwiseQuotient(sqrt_mu);
    method = "shift-invert lanczos";
  }

  // Inverse-iteration polish against the pencil until the residual contract
  // holds; the factorization shift sits just below the computed eigenvalue.
  deflate_constants(s, f);
  f /= std::sqrt(f.cwiseProduct(s.mu.cwiseProduct(f)).sum());
  double res = pencil_residual(s, f, lambda);
  if (res > opt.residual_tol) {
    double shift = lambda * 0.25;
    SparseMat K = s.L;
    for (int i = 0; i < s.n; ++i) K.coeffRef(i, i) += shift * s.mu(i);
    Eigen::SimplicialLDLT<SparseMat> ldlt(K);
    for (int it = 0; it < 30 && res > opt.residual_tol; ++it) {
      VectorXd g = ldlt.solve(s.mu.cwiseProduct(f));
      deflate_constants(s, g);
      double m = g.cwiseProduct(s.mu.cwiseProduct(g)).sum();
      if (!(m > 0)) break;
      f = g / std::sqrt(m);
      lambda = energy(s, f);  // Rayleigh quotient; f is M-normalized
      res = pencil_residual(s, f, lambda);
    }
  }

  SpectralResult out;
  out.lambda = lambda;
  out.eigvec = f;
  out.residual = res;
  out.method = method;
  return out;
}

CoupleConstant couple_poincare(const mesh::GraphView& U, const mesh::GraphView& Uprime,
                               const SolverOptions& opt) {
  if (U.g != Uprime.g) throw std::invalid_argument("couple_poincare: views of different graphs");
  if (!Uprime.contains_all(U)) throw std::invalid_argument("couple_poincare: U not inside U'");

  LocalSystem s = assemble(Uprime);
  CoupleConstant out;
  if (!s.connected) {
    out.value = std::numeric_limits<double>::infinity();
    out.infinite = true;
    out.method = "disconnected";
    return out;
  }
  if (U.size() <= 1) {
    out.value = 0;
    out.method = "trivial";
    return out;
  }

  // Local indices of U inside U'.
  std::vector<int> loc(Uprime.g->vertices.size(), -1);
  for (int i = 0; i < s.n; ++i) loc[s.global[i]] = i;
  std::vector<int> u_local;
  u_local.reserve(U.size());
  double mu_u = 0;
  for (int gid : U.verts) {
    u_local.push_back(loc[gid]);
    mu_u += Uprime.g->vertices[gid].mu;
  }

  // Mean-centered mass on U, extended by zero: A f = M_U (f - mean_U f).
  auto apply_A = [&](const VectorXd& f) {
    double mean = 0;
    for (int i : u_local) mean += s.mu(i) * f(i);
    mean /= mu_u;
    VectorXd g = VectorXd::Zero(s.n);
    for (int i : u_local) g(i) = s.mu(i) * (f(i) - mean);
    return g;
  };

  if (s.n <= opt.dense_couple_threshold) {
    MatrixXd L = MatrixXd(s.L);
    VectorXd w = VectorXd::Zero(s.n);
    for (int i : u_local) w(i) = s.mu(i);
    MatrixXd A = MatrixXd::Zero(s.n, s.n);
    for (int i : u_local) A(i, i) = s.mu(i);
    A -= (w * w.transpose()) / mu_u;
    // Rank-one regularization along constants keeps the pencil definite
    // without touching the quotient on the complement.
    VectorXd mu_dir = s.mu / s.mu.norm();
    double tau = L.trace() / s.n;
    MatrixXd Lreg = L + tau * (mu_dir * mu_dir.transpose());
    VectorXd vals;
    detail::sym_gen_eig_inplace(A, Lreg, vals);
    int last = s.n - 1;
    out.value = vals(last);
    out.extremal = A.col(last);
    deflate_constants(s, out.extremal);
    out.method = "dense";
    return out;
  }

  // Grounded factorization: with the last vertex pinned, the reduced Laplacian
  // is positive definite and solves represent L^+ modulo constants.
  SparseMat Lred = s.L.topLeftCorner(s.n - 1, s.n - 1);
  Eigen::SimplicialLDLT<SparseMat> ldlt(Lred);
  if (ldlt.info() != Eigen::Success)
    throw std::runtime_error("couple_poincare: factorization failed");
  auto solve_mod_const = [&](const VectorXd& b) {
    VectorXd x(s.n);
    x.head(s.n - 1) = ldlt.solve(b.head(s.n - 1));
    x(s.n - 1) = 0;
    x.array() -= x.mean();
    return x;
  };
  auto apply = [&](const VectorXd& y) { return solve_mod_const(apply_A(y)); };
  auto dot_L = [&](const VectorXd& a, const VectorXd& b) {
    // <a, b>_L through the edge set; exact on the complement of constants.
    long double acc = 0;
    for (const auto& e : s.edges)
      acc += static_cast<long double>(e.second.second) *
             (a(e.first) - a(e.second.first)) * (b(e.first) - b(e.second.first));
    return static_cast<double>(acc);
  };
  VectorXd start = solve_mod_const(apply_A(deterministic_noise(s.n, 7u)));
  auto [theta, z] = lanczos_largest(s.n, apply, dot_L, start, opt.max_lanczos, 1e-12);
  out.value = theta;
  out.extremal = z;
  out.method = "grounded lanczos";
  return out;
}

double rayleigh_lower(const mesh::WeightedGraph& g, int end, double R) {
  if (g.profiles.empty())
    throw std::invalid_argument("rayleigh_lower needs profile-backed graphs");
  if (end < 0 || end >= static_cast<int>(g.chains.size()))
    throw std::out_of_range("end index");
  mesh::GraphView B = ball_subgraph(g, R);
  LocalSystem s = assemble(B);

  // The test function must vanish on the dominant mass; reject the strictly
  // largest end at this scale.
  std::vector<double> chain_mass(g.chains.size(), 0.0);
  for (int i = 0; i < s.n; ++i) {
    const auto& v = g.vertices[s.global[i]];
    if (v.end != mesh::kCenter) chain_mass[v.end] += v.mu;
  }
  bool has_geq = false;
  for (size_t j = 0; j < chain_mass.size(); ++j)
    if (static_cast<int>(j) != end && chain_mass[j] >= chain_mass[end] * (1 - 1e-12))
      has_geq = true;
  if (!has_geq)
    throw std::invalid_argument("rayleigh_lower: end carries the largest mass at this scale");

  const auto& prof = g.profiles[end];
  double h0 = prof.h(g.r0);
  VectorXd f = VectorXd::Zero(s.n);
  for (int i = 0; i < s.n; ++i) {
    const auto& v = g.vertices[s.global[i]];
    if (v.end == end) f(i) = prof.h(v.radius) - h0;
  }
  double mu_tot = s.mu.sum();
  double mf = s.mu.dot(f);
  double num = f.cwiseProduct(s.mu.cwiseProduct(f)).sum() - mf * mf / mu_tot;
  double den = energy(s, f);
  if (!(den > 0)) throw std::domain_error("rayleigh_lower: empty chain");
  return num / den;
}

double heat_time_integral(const HeatTrace& trace, double r) {
  model::CenterTrace ct(trace.times, trace.values);
  return ct.integral_1_to(r * r);
}

mesh::GraphView whole_graph_view(const mesh::WeightedGraph& g) {
  mesh::GraphView view;
  view.g = &g;
  view.verts.resize(g.vertices.size());
  for (size_t i = 0; i < g.vertices.size(); ++i) view.verts[i] = static_cast<int>(i);
  view.edge_ids.resize(g.edges.size());
  for (size_t e = 0; e < g.edges.size(); ++e) view.edge_ids[e] = static_cast<int>(e);
  double rmax = 0;
  for (const auto& v : g.vertices) rmax = std::max(rmax, v.radius);
  view.radius = rmax;
  return view;
}

}  // namespace endslab::spectral
