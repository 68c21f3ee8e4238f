#pragma once

// Transmit training, CFO rotation, receiver noise and one-bit quantization.

#include "onebit/common.hpp"

#include <array>
#include <random>

namespace onebit::frontend {

/// QPSK radius r such that 10 log10(Ntx r^2) equals snr_db (unit noise variance).
inline double snr_to_radius(double snr_db, int n_tx) {
  require_dim(n_tx >= 1, "snr_to_radius: n_tx must be >= 1");
  return std::sqrt(std::pow(10.0, snr_db / 10.0) / static_cast<double>(n_tx));
}

struct TrainingBlock {
  CMatrix symbols;  // Ntx x Np
  double radius = 0.0;
};

/// The four constellation points r e^{j (pi/4 + k pi/2)}.
inline std::array<cd, 4> qpsk_points(double radius) {
  const double a = radius / std::sqrt(2.0);
  return {cd(a, a), cd(-a, a), cd(-a, -a), cd(a, -a)};
}

template <class Rng>
TrainingBlock gen_training(int n_tx, int n_p, double radius, Rng& rng) {
  require_dim(n_tx >= 1 && n_p >= 1, "gen_training: dimensions must be >= 1");
  if (!(radius > 0.0)) throw std::invalid_argument("gen_training: radius must be positive");
  const auto pts = qpsk_points(radius);
  std::uniform_int_distribution<int> pick(0, 3);
  TrainingBlock t;
  t.radius = radius;
  t.symbols.resize(n_tx, n_p);
  for (Eigen::Index n = 0; n < n_p; ++n)
    for (Eigen::Index k = 0; k < n_tx; ++k) t.symbols(k, n) = pts[static_cast<std::size_t>(pick(rng))];
  return t;
}

struct CfoParams {
  double omega_e = 0.0;  // radians per sample, in [0, 2 pi)

  static CfoParams from_radians(double omega) { return {wrap_2pi(omega)}; }

  /// omega_e = 2 pi delta_f T.
  static CfoParams from_frequency(double delta_f_hz, double symbol_period_s) {
    return from_radians(kTwoPi * delta_f_hz * symbol_period_s);
  }
};

/// Offset expressed in DFT bins of width 1/(Np T).
inline double cfo_in_bins(double delta_f_hz, int n_p, double symbol_period_s) {
  return delta_f_hz * static_cast<double>(n_p) * symbol_period_s;
}

inline double sgn_nonneg(double v) { return v >= 0.0 ? 1.0 : -1.0; }

/// Elementwise sgn(Re) + j sgn(Im) with sgn(0) = +1.
inline CMatrix quantize_onebit(const CMatrix& x) {
  CMatrix out(x.rows(), x.cols());
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    const cd v = x.data()[i];
    if (std::isnan(v.real()) || std::isnan(v.imag()))
      throw std::domain_error("quantize_onebit: NaN input");
    out.data()[i] = cd(sgn_nonneg(v.real()), sgn_nonneg(v.imag()));
  }
  return out;
}

inline bool is_onebit(const CMatrix& y) {
  for (Eigen::Index i = 0; i < y.size(); ++i) {
    const cd v = y.data()[i];
    if (std::abs(v.real()) != 1.0 || std::abs(v.imag()) != 1.0) return false;
  }
  return true;
}

struct RxOptions {
  bool quantize = true;
  bool add_noise = true;
};

/// Y = Q1(H T diag(a_Np(omega_e)) + N), N_ij ~ CN(0, 1).
template <class Rng>
CMatrix simulate_rx(const CMatrix& h, const TrainingBlock& t, const CfoParams& cfo, Rng& rng,
                    RxOptions opts = {}) {
  require_dim(h.cols() == t.symbols.rows(), "simulate_rx: H columns must equal training rows");
  require_dim(h.rows() >= 1 && t.symbols.cols() >= 1, "simulate_rx: empty block");
  CMatrix y = h * t.symbols;
  for (Eigen::Index n = 0; n < y.cols(); ++n)
    y.col(n) *= std::polar(1.0, cfo.omega_e * static_cast<double>(n));
  if (opts.add_noise) {
    std::normal_distribution<double> gauss(0.0, std::sqrt(0.5));
    for (Eigen::Index n = 0; n < y.cols(); ++n)
      for (Eigen::Index r = 0; r < y.rows(); ++r) {
        const double re = gauss(rng);
        const double im = gauss(rng);
        y(r, n) += cd(re, im);
      }
  }
  return opts.quantize ? quantize_onebit(y) : y;
}

}  // namespace onebit::frontend
