#pragma once

// Dense brute-force references for the solver tests. These deliberately take
// different algorithmic routes than the library: full eigendecompositions of
// the reduced pencil and a Taylor scaling-and-squaring matrix exponential.

#include <random>
#include <vector>

#include <Eigen/Dense>

#include "endslab/mesh.hpp"

namespace oracles {

inline Eigen::MatrixXd dense_laplacian(const endslab::mesh::GraphView& view) {
  const auto& g = *view.g;
  int n = static_cast<int>(view.verts.size());
  std::vector<int> loc(g.vertices.size(), -1);
  for (int i = 0; i < n; ++i) loc[view.verts[i]] = i;
  Eigen::MatrixXd L = Eigen::MatrixXd::Zero(n, n);
  for (int eid : view.edge_ids) {
    const auto& e = g.edges[eid];
    int u = loc[e.u], v = loc[e.v];
    L(u, u) += e.c;
    L(v, v) += e.c;
    L(u, v) -= e.c;
    L(v, u) -= e.c;
  }
  return L;
}

inline Eigen::VectorXd masses(const endslab::mesh::GraphView& view) {
  Eigen::VectorXd mu(view.verts.size());
  for (size_t i = 0; i < view.verts.size(); ++i)
    mu(static_cast<int>(i)) = view.g->vertices[view.verts[i]].mu;
  return mu;
}

// Householder basis of the orthogonal complement of `dir`.
inline Eigen::MatrixXd complement_basis(const Eigen::VectorXd& dir) {
  int n = static_cast<int>(dir.size());
  Eigen::VectorXd v = dir.normalized();
  v(0) += v(0) >= 0 ? 1.0 : -1.0;
  v.normalize();
  Eigen::MatrixXd H = Eigen::MatrixXd::Identity(n, n) - 2.0 * v * v.transpose();
  return H.rightCols(n - 1);
}

// Second-smallest eigenvalue of L f = lambda M f by full decomposition of the
// pencil reduced to the complement of constants in the M inner product.
inline double gap_bruteforce(const endslab::mesh::GraphView& view) {
  Eigen::MatrixXd L = dense_laplacian(view);
  Eigen::VectorXd mu = masses(view);
  Eigen::VectorXd half = mu.cwiseSqrt();
  int n = static_cast<int>(mu.size());
  Eigen::MatrixXd C(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) C(i, j) = L(i, j) / (half(i) * half(j));
  Eigen::MatrixXd Q = complement_basis(half);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(Q.transpose() * C * Q);
  return es.eigenvalues()(0);
}

// Largest eigenvalue of (mean-centered mass on U, Laplacian of U') on the
// complement of constants, via an explicit congruence with the inverse
// Cholesky factor of the reduced Laplacian.
inline double couple_bruteforce(const endslab::mesh::GraphView& U,
                                const endslab::mesh::GraphView& Uprime) {
  Eigen::MatrixXd L = dense_laplacian(Uprime);
  Eigen::VectorXd mu = masses(Uprime);
  int n = static_cast<int>(mu.size());
  std::vector<int> loc(Uprime.g->vertices.size(), -1);
  for (int i = 0; i < n; ++i) loc[Uprime.verts[i]] = i;
  Eigen::VectorXd w = Eigen::VectorXd::Zero(n);
  double mu_u = 0;
  for (int gid : U.verts) {
    w(loc[gid]) = Uprime.g->vertices[gid].mu;
    mu_u += Uprime.g->vertices[gid].mu;
  }
  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(n, n);
  for (int gid : U.verts) {
    int i = loc[gid];
    A(i, i) = Uprime.g->vertices[gid].mu;
  }
  A -= (w * w.transpose()) / mu_u;

  Eigen::MatrixXd Q = complement_basis(Eigen::VectorXd::Ones(n));
  Eigen::MatrixXd Lr = Q.transpose() * L * Q;
  Eigen::MatrixXd Ar = Q.transpose() * A * Q;
  Eigen::LLT<Eigen::MatrixXd> llt(Lr);
  Eigen::MatrixXd R = llt.matrixL();
  Eigen::MatrixXd S =
      R.triangularView<Eigen::Lower>().solve(Ar).transpose();
  Eigen::MatrixXd T = R.triangularView<Eigen::Lower>().solve(S);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(T);
  return es.eigenvalues()(n - 2);
}

// exp(t A) v by Taylor series with scaling and squaring; A is small and dense.
inline Eigen::VectorXd expm_multiply(const Eigen::MatrixXd& A, const Eigen::VectorXd& v,
                                     double t) {
  int s = 0;
  double norm = (A * t).cwiseAbs().rowwise().sum().maxCoeff();
  while (norm > 0.5) {
    norm /= 2;
    ++s;
  }
  int n = static_cast<int>(A.rows());
  Eigen::MatrixXd B = A * (t / std::pow(2.0, s));
  Eigen::MatrixXd E = Eigen::MatrixXd::Identity(n, n);
  Eigen::MatrixXd term = Eigen::MatrixXd::Identity(n, n);
  for (int k = 1; k <= 40; ++k) {
    term = term * B / k;
    E += term;
    if (term.cwiseAbs().maxCoeff() < 1e-22) break;
  }
  for (int k = 0; k < s; ++k) E = E * E;
  return E * v;
}

// Random connected weighted graph with up to max_n vertices: a random spanning
// tree plus a few chords, log-uniform masses and conductances.
inline endslab::mesh::WeightedGraph random_graph(std::mt19937_64& rng, int max_n) {
  using endslab::mesh::WeightedGraph;
  std::uniform_int_distribution<int> nd(2, max_n);
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  auto logu = [&](double lo, double hi) {
    return lo * std::pow(hi / lo, uni(rng));
  };
  int n = nd(rng);
  WeightedGraph g;
  g.center = 0;
  g.r0 = 1.0;
  for (int i = 0; i < n; ++i) {
    endslab::mesh::Vertex v;
    v.end = i == 0 ? endslab::mesh::kCenter : 0;
    v.radius = static_cast<double>(i);
    v.mu = logu(0.1, 10.0);
    g.vertices.push_back(v);
  }
  g.chains.push_back({});
  for (int i = 1; i < n; ++i) {
    g.chains[0].push_back(i);
    std::uniform_int_distribution<int> pd(0, i - 1);
    g.edges.push_back({pd(rng), i, logu(0.1, 10.0)});
  }
  int extra = static_cast<int>(uni(rng) * n);
  for (int k = 0; k < extra; ++k) {
    std::uniform_int_distribution<int> pd(0, n - 1);
    int a = pd(rng), b = pd(rng);
    if (a == b) continue;
    g.edges.push_back({a, b, logu(0.1, 10.0)});
  }
  return g;
}

}  // namespace oracles
