#pragma once

// Clustered narrowband mmWave MIMO channel with ULAs at both ends, and the
// angle-domain (beamspace) representation H = U_rx C U_tx^H.

#include "onebit/common.hpp"

#include <random>
#include <vector>

namespace onebit::channel {

struct ChannelModelConfig {
  int n_tx = 16;
  int n_rx = 16;
  int n_clusters = 2;
  int rays_per_cluster = 15;
  double angle_spread_deg = 10.0;     // standard deviation of the Laplacian ray offsets
  double antenna_spacing_ratio = 0.5;  // d / lambda

  void validate() const {
    require_dim(n_tx >= 1 && n_rx >= 1, "channel config: antenna counts must be >= 1");
    require_dim(n_clusters >= 1 && rays_per_cluster >= 1,
                "channel config: cluster and ray counts must be >= 1");
    if (!(angle_spread_deg > 0.0) || !(antenna_spacing_ratio > 0.0))
      throw std::invalid_argument(
          "channel config: angle spread and antenna spacing must be positive");
  }
};

struct Ray {
  cd gain;
  int cluster = 0;
  double aoa = 0.0;  // physical angles, radians
  double aod = 0.0;
  double aoa_spatial_freq = 0.0;  // 2 pi (d/lambda) sin(angle), wrapped to [-pi, pi)
  double aod_spatial_freq = 0.0;
};

struct ClusterCenter {
  double aoa = 0.0;
  double aod = 0.0;
};

struct RaySet {
  std::vector<ClusterCenter> centers;
  std::vector<Ray> rays;
};

/// Vandermonde array response [1, e^{j theta}, ..., e^{j (n-1) theta}]^T.
inline CVector array_response(Eigen::Index n, double theta) {
  require_dim(n >= 1, "array_response: n must be >= 1");
  CVector a(n);
  for (Eigen::Index k = 0; k < n; ++k) a(k) = std::polar(1.0, static_cast<double>(k) * theta);
  return a;
}

inline double spatial_frequency(double angle, double spacing_ratio) {
  return wrap_pi(kTwoPi * spacing_ratio * std::sin(angle));
}

/// Zero-mean Laplacian draw with the given standard deviation (scale = std / sqrt 2).
template <class Rng>
double laplacian(Rng& rng, double std_dev) {
  std::exponential_distribution<double> expo(std::sqrt(2.0) / std_dev);
  std::bernoulli_distribution sign(0.5);
  const double mag = expo(rng);
  return sign(rng) ? mag : -mag;
}

template <class Rng>
RaySet sample_rays(const ChannelModelConfig& cfg, Rng& rng) {
  cfg.validate();
  std::uniform_real_distribution<double> center(-kPi / 2.0, kPi / 2.0);
  std::normal_distribution<double> gauss(0.0, std::sqrt(0.5));
  const double spread = cfg.angle_spread_deg * kPi / 180.0;

  RaySet set;
  set.centers.reserve(static_cast<std::size_t>(cfg.n_clusters));
  set.rays.reserve(static_cast<std::size_t>(cfg.n_clusters * cfg.rays_per_cluster));
  for (int n = 0; n < cfg.n_clusters; ++n) {
    ClusterCenter cc;
    cc.aoa = center(rng);
    cc.aod = center(rng);
    set.centers.push_back(cc);
    for (int m = 0; m < cfg.rays_per_cluster; ++m) {
      Ray r;
      r.cluster = n;
      r.aoa = cc.aoa + laplacian(rng, spread);
      r.aod = cc.aod + laplacian(rng, spread);
      const double re = gauss(rng);
      const double im = gauss(rng);
      r.gain = cd(re, im);
      r.aoa_spatial_freq = spatial_frequency(r.aoa, cfg.antenna_spacing_ratio);
      r.aod_spatial_freq = spatial_frequency(r.aod, cfg.antenna_spacing_ratio);
      set.rays.push_back(r);
    }
  }
  return set;
}

/// H = 1/sqrt(Nc) sum_n 1/sqrt(K_n) sum_m gain * a_rx(w_r) a_tx(w_t)^H.
/// Per-cluster ray counts are taken from the ray set itself.
inline CMatrix assemble_channel(const RaySet& rays, const ChannelModelConfig& cfg) {
  cfg.validate();
  CMatrix h = CMatrix::Zero(cfg.n_rx, cfg.n_tx);
  if (rays.rays.empty()) return h;

  int n_clusters = 0;
  for (const auto& r : rays.rays) n_clusters = std::max(n_clusters, r.cluster + 1);
  std::vector<int> per_cluster(static_cast<std::size_t>(n_clusters), 0);
  for (const auto& r : rays.rays) ++per_cluster[static_cast<std::size_t>(r.cluster)];

  for (const auto& r : rays.rays) {
    if (!std::isfinite(r.aoa_spatial_freq) || !std::isfinite(r.aod_spatial_freq))
      throw std::invalid_argument("assemble_channel: non-finite spatial frequency");
    const double k = per_cluster[static_cast<std::size_t>(r.cluster)];
    const cd w = r.gain / std::sqrt(static_cast<double>(n_clusters) * k);
    h.noalias() += w * array_response(cfg.n_rx, r.aoa_spatial_freq) *
                   array_response(cfg.n_tx, r.aod_spatial_freq).adjoint();
  }
  return h;
}

/// C = U_rx^H H U_tx / (Nrx Ntx), the exact inverse of from_beamspace.
inline CMatrix to_beamspace(const CMatrix& h) {
  require_dim(h.rows() >= 1 && h.cols() >= 1, "to_beamspace: empty matrix");
  const CMatrix urx = dft_matrix(h.rows());
  const CMatrix utx = dft_matrix(h.cols());
  return urx.adjoint() * h * utx / static_cast<double>(h.rows() * h.cols());
}

inline CMatrix from_beamspace(const CMatrix& c) {
  require_dim(c.rows() >= 1 && c.cols() >= 1, "from_beamspace: empty matrix");
  return dft_matrix(c.rows()) * c * dft_matrix(c.cols()).adjoint();
}

template <class Rng>
CMatrix sample_channel(const ChannelModelConfig& cfg, Rng& rng) {
  return assemble_channel(sample_rays(cfg, rng), cfg);
}

}  // namespace onebit::channel
