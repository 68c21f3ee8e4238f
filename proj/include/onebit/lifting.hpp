#pragma once

// Vectorized measurement model y = Q1(diag(G b) J c + n) and its lifted form
// z = A x + n with x = vec(b c^T) and A^(i) = J^(i) kron G^(i).
//
// Row ordering follows y = vec(Y^T): row i = n + Np * r for time index n and
// receive antenna r. Column ordering follows vec of the Np x (Nrx Ntx)
// matrix X = b c^T, i.e. column j = k + Np * l.

#include "onebit/common.hpp"
#include "onebit/frontend.hpp"

#include <cstddef>

namespace onebit::lifting {

/// b = (1/Np) U_Np a_Np(omega_e), so that U_Np^H b = a_Np(omega_e).
inline CVector cfo_spectrum(double omega_e, int n_p) {
  require_dim(n_p >= 2, "cfo_spectrum: n_p must be >= 2");
  CVector a(n_p);
  for (int n = 0; n < n_p; ++n) a(n) = std::polar(1.0, omega_e * n);
  return dft_matrix(n_p) * a / static_cast<double>(n_p);
}

struct OperatorBudget {
  std::size_t max_stored_entries = std::size_t{1} << 26;  // storage for J and |J|^2
  std::size_t max_dense_entries = std::size_t{1} << 22;   // explicit A, oracle use only
};

class BudgetExceeded : public std::length_error {
 public:
  using std::length_error::length_error;
};

class LiftedOperator {
 public:
  LiftedOperator(const frontend::TrainingBlock& t, int n_rx, OperatorBudget budget = {})
      : n_rx_(n_rx),
        n_tx_(static_cast<int>(t.symbols.rows())),
        n_p_(static_cast<int>(t.symbols.cols())),
        budget_(budget) {
    require_dim(n_rx_ >= 1 && n_tx_ >= 1 && n_p_ >= 1, "LiftedOperator: empty dimensions");
    const auto stored = static_cast<std::size_t>(rows()) * static_cast<std::size_t>(n_rx_ * n_tx_);
    if (stored > budget_.max_stored_entries)
      throw BudgetExceeded("LiftedOperator: J would exceed the configured memory budget");

    const CMatrix u_np_h = dft_matrix(n_p_).adjoint();
    dft_np_ = dft_matrix(n_p_);
    dft_np_h_ = u_np_h;
    g_ = kron(CMatrix::Ones(n_rx_, 1), u_np_h);
    j_ = kron(dft_matrix(n_rx_), dft_matrix(n_tx_).adjoint() * t.symbols).transpose();
    j_sq_ = j_.cwiseAbs2();
    frob_sq_ = static_cast<double>(n_p_) * j_sq_.sum();
  }

  Eigen::Index rows() const { return static_cast<Eigen::Index>(n_rx_) * n_p_; }
  Eigen::Index cols() const { return static_cast<Eigen::Index>(n_rx_) * n_tx_ * n_p_; }
  int n_rx() const { return n_rx_; }
  int n_tx() const { return n_tx_; }
  int n_p() const { return n_p_; }

  const CMatrix& g() const { return g_; }
  const CMatrix& j() const { return j_; }

  /// ||A||_F^2.
  double frobenius_sq() const { return frob_sq_; }

  /// z_i = G^(i) X J^(i)^T without forming A.
  CVector apply(const CVector& x) const {
    require_dim(x.size() == cols(), "LiftedOperator::apply: length mismatch");
    const Eigen::Map<const CMatrix> xm(x.data(), n_p_, n_rx_ * n_tx_);
    const CMatrix w = dft_np_h_ * xm;  // row n = G^(i) X for every i with time index n
    return (j_.array() * w.replicate(n_rx_, 1).array()).rowwise().sum();
  }

  /// Exact A^H z.
  CVector apply_adjoint(const CVector& z) const {
    require_dim(z.size() == rows(), "LiftedOperator::apply_adjoint: length mismatch");
    CMatrix v = CMatrix::Zero(n_p_, n_rx_ * n_tx_);
    for (int r = 0; r < n_rx_; ++r) {
      const auto zr = z.segment(static_cast<Eigen::Index>(r) * n_p_, n_p_);
      v.array() += j_.middleRows(static_cast<Eigen::Index>(r) * n_p_, n_p_).conjugate().array() *
                   zr.replicate(1, n_rx_ * n_tx_).array();
    }
    const CMatrix xm = dft_np_ * v;
    return vec(xm);
  }

  /// |A|^2 v for a nonnegative vector v of length d.
  RVector apply_squared(const RVector& v) const {
    require_dim(v.size() == cols(), "LiftedOperator::apply_squared: length mismatch");
    const Eigen::Map<const RMatrix> vm(v.data(), n_p_, n_rx_ * n_tx_);
    const RVector col_sums = vm.colwise().sum().transpose();
    return j_sq_ * col_sums;
  }

  /// (|A|^2)^T u for a nonnegative vector u of length m.
  RVector apply_squared_adjoint(const RVector& u) const {
    require_dim(u.size() == rows(), "LiftedOperator::apply_squared_adjoint: length mismatch");
    const RVector per_col = j_sq_.transpose() * u;
    RMatrix out = per_col.transpose().replicate(n_p_, 1);
    return Eigen::Map<const RVector>(out.data(), out.size());
  }

  /// |A^(i)|^2 = |J^(i)|^2 kron 1_Np, with i 0-based.
  RVector row_power(Eigen::Index i) const {
    if (i < 0 || i >= rows()) throw std::out_of_range("LiftedOperator::row_power: row out of range");
    RMatrix out = j_sq_.row(i).replicate(n_p_, 1);
    return Eigen::Map<const RVector>(out.data(), out.size());
  }

  /// Explicit A, allowed only within the dense budget.
  CMatrix dense() const {
    const auto entries = static_cast<std::size_t>(rows()) * static_cast<std::size_t>(cols());
    if (entries > budget_.max_dense_entries)
      throw BudgetExceeded("LiftedOperator::dense: exceeds dense materialization budget");
    CMatrix a(rows(), cols());
    for (Eigen::Index i = 0; i < rows(); ++i)
      a.row(i) = kron(j_.row(i), g_.row(i));
    return a;
  }

 private:
  int n_rx_;
  int n_tx_;
  int n_p_;
  OperatorBudget budget_;
  CMatrix dft_np_;
  CMatrix dft_np_h_;
  CMatrix g_;
  CMatrix j_;
  RMatrix j_sq_;
  double frob_sq_ = 0.0;
};

/// x = vec(b c^T).
inline CVector lift(const CVector& b, const CVector& c) {
  const CMatrix outer = b * c.transpose();
  return vec(outer);
}

/// c = vec(C^T) for a beamspace matrix C.
inline CVector beamspace_vector(const CMatrix& c) {
  const CMatrix ct = c.transpose();
  return vec(ct);
}

/// Measurement vector y = vec(Y^T) for a received block Y (Nrx x Np).
inline CVector measurement_vector(const CMatrix& y) {
  const CMatrix yt = y.transpose();
  return vec(yt);
}

/// diag(G b) J c, the bilinear (unlifted) form of the noiseless measurements.
inline CVector bilinear_measurements(const LiftedOperator& op, const CVector& b, const CVector& c) {
  require_dim(b.size() == op.n_p() && c.size() == op.n_rx() * op.n_tx(),
              "bilinear_measurements: factor lengths do not match operator");
  return (op.g() * b).cwiseProduct(op.j() * c);
}

}  // namespace onebit::lifting
