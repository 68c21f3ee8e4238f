#pragma once

#include "onebit/common.hpp"
#include "onebit/linalg.hpp"

namespace onebit::metrics {

struct NmseResult {
  double nmse_linear = 0.0;  // ||H - gamma H_hat||_F / ||H||_F
  double nmse_db = 0.0;      // 20 log10 of the ratio
  cd gamma;
};

/// Norm-ratio NMSE after the least-squares complex scale gamma = <H_hat, H> / ||H_hat||^2.
inline NmseResult channel_nmse(const CMatrix& h, const CMatrix& h_hat) {
  require_dim(h.rows() == h_hat.rows() && h.cols() == h_hat.cols(), "channel_nmse: shape mismatch");
  const double h_norm = h.norm();
  if (!(h_norm > 0.0)) throw std::invalid_argument("channel_nmse: true channel is zero");

  NmseResult r;
  const double est_sq = h_hat.squaredNorm();
  r.gamma = est_sq > 0.0 ? (h_hat.conjugate().cwiseProduct(h)).sum() / est_sq : cd(0.0, 0.0);
  r.nmse_linear = (h - r.gamma * h_hat).norm() / h_norm;
  r.nmse_db = 20.0 * std::log10(r.nmse_linear);
  return r;
}

/// Squared minimal circular distance between two angles.
inline double cfo_squared_error(double omega_true, double omega_hat) {
  const double a = std::fmod(std::abs(omega_true - omega_hat), kTwoPi);
  const double d = std::min(a, kTwoPi - a);
  return d * d;
}

inline constexpr double kBussgangGain = 2.0 / kPi;  // squared gain of the one-bit quantizer

/// Achievable-rate lower bound with one-bit receivers under the additive
/// quantization noise linearization. The transmitter beamforms with total
/// power 10^(snr_db/10) along the dominant right singular vector of h_hat; the
/// true channel h carries the signal. Each receive antenna sees gain^2 S_i
/// signal against gain^2 thermal noise plus (1 - gain^2)(S_i + 1) distortion.
inline double rate_lower_bound(const CMatrix& h, const CMatrix& h_hat, double snr_db) {
  require_dim(h.rows() == h_hat.rows() && h.cols() == h_hat.cols(), "rate_lower_bound: shape mismatch");
  if (h.squaredNorm() == 0.0) return 0.0;

  CVector f;
  const SingularTriple lead = leading_singular_triple(h_hat);
  if (lead.sigma > 0.0) {
    f = lead.v;
  } else {
    f = CVector::Constant(h.cols(), cd(1.0 / std::sqrt(static_cast<double>(h.cols())), 0.0));
  }

  const double power = std::pow(10.0, snr_db / 10.0);
  const RVector signal = power * (h * f).cwiseAbs2();
  double effective_snr = 0.0;
  for (Eigen::Index i = 0; i < signal.size(); ++i) {
    const double distortion = (1.0 - kBussgangGain) * (signal(i) + 1.0);
    effective_snr += kBussgangGain * signal(i) / (kBussgangGain + distortion);
  }
  return std::log2(1.0 + effective_snr);
}

}  // namespace onebit::metrics
