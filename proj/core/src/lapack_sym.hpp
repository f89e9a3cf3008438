#pragma once

// Thin LAPACKE wrappers for dense symmetric eigenproblems, pinned to one BLAS
// thread so runs stay deterministic.

#include <stdexcept>

#include <Eigen/Dense>
#include <lapacke.h>

extern "C" void openblas_set_num_threads(int);

namespace endslab::detail {

inline void ensure_single_thread_blas() {
  struct Once {
    Once() { openblas_set_num_threads(1); }
  };
  static Once once;
}

// A is overwritten with the eigenvectors (columns), w with ascending values.
inline void sym_eig_inplace(Eigen::MatrixXd& A, Eigen::VectorXd& w) {
  ensure_single_thread_blas();
  int n = static_cast<int>(A.rows());
  w.resize(n);
  int info = LAPACKE_dsyevd(LAPACK_COL_MAJOR, 'V', 'L', n, A.data(), n, w.data());
  if (info != 0) throw std::runtime_error("dsyevd failed");
}

// Generalized A x = lambda B x with B positive definite; A is overwritten with
// B-orthonormal eigenvectors, w ascending. B is overwritten too.
inline void sym_gen_eig_inplace(Eigen::MatrixXd& A, Eigen::MatrixXd& B,
                                Eigen::VectorXd& w) {
  ensure_single_thread_blas();
  int n = static_cast<int>(A.rows());
  w.resize(n);
  int info = LAPACKE_dsygvd(LAPACK_COL_MAJOR, 1, 'V', 'L', n, A.data(), n, B.data(),
                            n, w.data());
  if (info != 0) throw std::runtime_error("dsygvd failed");
}

}  // namespace endslab::detail
