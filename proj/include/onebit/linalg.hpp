#pragma once

#include "onebit/common.hpp"

#include <limits>

namespace onebit {

struct SingularTriple {
  double sigma = 0.0;
  CVector u;  // left, unit norm
  CVector v;  // right, unit norm; m ~ sigma * u * v^H
  int iterations = 0;
};

struct PowerIterationOptions {
  int max_iters = 5000;
  double tol = 1e-12;
};

namespace detail {

// Start vector: the column of largest norm, which cannot be orthogonal to the
// dominant left subspace unless the matrix is zero.
inline CVector power_start(const CMatrix& m) {
  Eigen::Index best = 0;
  m.colwise().squaredNorm().maxCoeff(&best);
  CVector u = m.col(best);
  const double n = u.norm();
  if (n > 0.0) u /= n;
  return u;
}

}  // namespace detail

/// Leading singular triple of m by power iteration on m m^H, applied as two
/// matrix-vector products per step so the Gram matrix is never formed.
inline SingularTriple leading_singular_triple(const CMatrix& m,
                                              PowerIterationOptions opts = {}) {
  SingularTriple out;
  out.u = CVector::Zero(m.rows());
  out.v = CVector::Zero(m.cols());
  if (m.size() == 0) return out;

  CVector u = detail::power_start(m);
  if (u.norm() == 0.0) return out;

  CVector w(m.cols());
  for (int it = 1; it <= opts.max_iters; ++it) {
    w.noalias() = m.adjoint() * u;
    CVector next = m * w;
    const double lambda = next.norm();
    if (lambda == 0.0) break;
    next /= lambda;
    // align the arbitrary phase with the previous iterate
    const cd overlap = u.dot(next);
    if (std::abs(overlap) > 0.0) next *= std::conj(overlap) / std::abs(overlap);
    const double change = (next - u).norm();
    u = std::move(next);
    out.iterations = it;
    if (change < opts.tol) break;
  }

  w.noalias() = m.adjoint() * u;
  out.sigma = w.norm();
  out.u = u;
  if (out.sigma > 0.0) out.v = w / out.sigma;
  return out;
}

/// Largest and second-largest singular values plus the leading vectors.
/// The second value comes from power iteration on the rank-1 deflated matrix.
struct TopTwoSingular {
  SingularTriple first;
  double sigma2 = 0.0;
};

inline TopTwoSingular top_two_singular(const CMatrix& m, PowerIterationOptions opts = {}) {
  TopTwoSingular out;
  out.first = leading_singular_triple(m, opts);
  if (out.first.sigma == 0.0) return out;
  const CMatrix residual = m - out.first.sigma * out.first.u * out.first.v.adjoint();
  PowerIterationOptions loose = opts;
  loose.max_iters = std::min(opts.max_iters, 500);
  loose.tol = std::max(opts.tol, 1e-8);
  out.sigma2 = leading_singular_triple(residual, loose).sigma;
  return out;
}

}  // namespace onebit
