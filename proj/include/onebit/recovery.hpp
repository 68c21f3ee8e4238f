#pragma once

// Splits a lifted estimate x ~ vec(b c^T) into its CFO and channel factors and
// turns them into a channel matrix and a CFO estimate.

#include "onebit/common.hpp"
#include "onebit/linalg.hpp"

#include <limits>

namespace onebit::recovery {

struct Rank1Factors {
  CVector b_hat;  // sigma1 * u1
  CVector c_hat;  // conj(v1)
  double sigma1_ratio = 0.0;
};

/// Leading singular triple of reshape(x_hat, Np, Nrx Ntx).
inline Rank1Factors rank1_decompose(const CVector& x_hat, int n_p, int n_rx_n_tx,
                                    PowerIterationOptions opts = {}) {
  require_dim(n_p >= 1 && n_rx_n_tx >= 1 && x_hat.size() == static_cast<Eigen::Index>(n_p) * n_rx_n_tx,
              "rank1_decompose: length does not match Np * Nrx * Ntx");
  if (!x_hat.allFinite()) throw std::invalid_argument("rank1_decompose: non-finite input");
  if (x_hat.squaredNorm() == 0.0) throw DegenerateEstimate("rank1_decompose: all-zero lifted estimate");

  const CMatrix x = unvec(x_hat, n_p, n_rx_n_tx);
  const TopTwoSingular svd = top_two_singular(x, opts);
  Rank1Factors f;
  f.b_hat = svd.first.sigma * svd.first.u;
  f.c_hat = svd.first.v.conjugate();
  f.sigma1_ratio = svd.sigma2 > 0.0 ? svd.first.sigma / svd.sigma2 : std::numeric_limits<double>::infinity();
  return f;
}

/// H_hat = U_rx C_hat U_tx^H with vec(C_hat^T) = c_hat.
inline CMatrix reconstruct_channel(const CVector& c_hat, int n_rx, int n_tx) {
  require_dim(n_rx >= 1 && n_tx >= 1 && c_hat.size() == static_cast<Eigen::Index>(n_rx) * n_tx,
              "reconstruct_channel: length does not match Nrx * Ntx");
  const CMatrix c = unvec(c_hat, n_tx, n_rx).transpose();
  return dft_matrix(n_rx) * c * dft_matrix(n_tx).adjoint();
}

namespace detail {

inline void require_nonzero(const CVector& b, const char* what) {
  if (b.size() == 0 || b.cwiseAbs2().maxCoeff() == 0.0) throw DegenerateEstimate(what);
}

// first index of the largest magnitude; ties go to the smaller index
inline Eigen::Index peak_index(const CVector& v) {
  Eigen::Index best = 0;
  double best_mag = -1.0;
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    const double mag = std::norm(v(i));
    if (mag > best_mag) {
      best_mag = mag;
      best = i;
    }
  }
  return best;
}

}  // namespace detail

/// Grid estimate 2 pi j / Np at the peak of |b_hat|.
inline double coarse_cfo(const CVector& b_hat) {
  detail::require_nonzero(b_hat, "coarse_cfo: all-zero spectrum");
  const auto n_p = static_cast<double>(b_hat.size());
  return wrap_2pi(kTwoPi * static_cast<double>(detail::peak_index(b_hat)) / n_p);
}

/// Refined estimate from a 2Np-point DFT of a_hat = U^H b_hat followed by a
/// three-bin interpolator with tan(pi/N)/(pi/N) bias correction.
inline double fine_cfo(const CVector& b_hat) {
  detail::require_nonzero(b_hat, "fine_cfo: all-zero spectrum");
  const auto n_p = static_cast<Eigen::Index>(b_hat.size());
  const Eigen::Index n = 2 * n_p;

  const CVector a_hat = dft_matrix(n_p).adjoint() * b_hat;
  CVector padded = CVector::Zero(n);
  padded.head(n_p) = a_hat;
  const CVector spectrum = dft_matrix(n) * padded;

  const Eigen::Index k = detail::peak_index(spectrum);
  const cd left = spectrum((k + n - 1) % n);
  const cd right = spectrum((k + 1) % n);
  const cd denom = 2.0 * spectrum(k) - left - right;
  double delta = 0.0;
  if (std::abs(denom) > 0.0) {
    const double w = kPi / static_cast<double>(n);
    delta = ((left - right) / denom).real() * std::tan(w) / w;
  }
  return wrap_2pi(kTwoPi / static_cast<double>(n) * (static_cast<double>(k) + delta));
}

struct JointEstimate {
  CVector b_hat;
  CVector c_hat;
  CMatrix h_hat;
  double omega_hat = 0.0;
  double omega_coarse = 0.0;
  double sigma1_ratio = 0.0;
};

inline JointEstimate recover(const CVector& x_hat, int n_rx, int n_tx, int n_p) {
  JointEstimate est;
  const Rank1Factors f = rank1_decompose(x_hat, n_p, n_rx * n_tx);
  est.b_hat = f.b_hat;
  est.c_hat = f.c_hat;
  est.sigma1_ratio = f.sigma1_ratio;
  est.h_hat = reconstruct_channel(f.c_hat, n_rx, n_tx);
  est.omega_coarse = coarse_cfo(f.b_hat);
  est.omega_hat = fine_cfo(f.b_hat);
  return est;
}

}  // namespace onebit::recovery
