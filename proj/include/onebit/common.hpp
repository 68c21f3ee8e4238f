#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <stdexcept>
#include <string>

namespace onebit {

using cd = std::complex<double>;
using CVector = Eigen::VectorXcd;
using CMatrix = Eigen::MatrixXcd;
using RVector = Eigen::VectorXd;
using RMatrix = Eigen::MatrixXd;

inline constexpr double kPi = std::numbers::pi;
inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

/// Thrown for zero or inconsistent array/block dimensions.
class DimensionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Thrown when an estimate carries no information (all-zero input).
class DegenerateEstimate : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

inline void require_dim(bool ok, const std::string& what) {
  if (!ok) throw DimensionError(what);
}

/// Wraps an angle into [0, 2*pi).
inline double wrap_2pi(double w) {
  double r = std::fmod(w, kTwoPi);
  if (r < 0.0) r += kTwoPi;
  if (r >= kTwoPi) r = 0.0;
  return r;
}

/// Wraps an angle into [-pi, pi).
inline double wrap_pi(double w) {
  double r = wrap_2pi(w + kPi) - kPi;
  return r;
}

/// Unnormalized DFT matrix, U(k, l) = exp(-j 2 pi k l / n) with 0-based k, l.
inline CMatrix dft_matrix(Eigen::Index n) {
  require_dim(n >= 1, "dft_matrix: n must be >= 1");
  CMatrix u(n, n);
  for (Eigen::Index k = 0; k < n; ++k) {
    for (Eigen::Index l = 0; l < n; ++l) {
      // reduce k*l mod n first so large products keep full phase accuracy
      const auto kl = static_cast<double>((k * l) % n);
      u(k, l) = std::polar(1.0, -kTwoPi * kl / static_cast<double>(n));
    }
  }
  return u;
}

/// Kronecker product of two dense complex matrices.
inline CMatrix kron(const CMatrix& a, const CMatrix& b) {
  CMatrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j)
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

/// Column-stacking vec().
inline CVector vec(const CMatrix& m) {
  return Eigen::Map<const CVector>(m.data(), m.size());
}

inline CMatrix unvec(const CVector& v, Eigen::Index rows, Eigen::Index cols) {
  require_dim(v.size() == rows * cols, "unvec: length does not match shape");
  return Eigen::Map<const CMatrix>(v.data(), rows, cols);
}

}  // namespace onebit
