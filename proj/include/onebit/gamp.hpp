#pragma once

// Sum-product GAMP with a Bernoulli-Gaussian input prior whose parameters are
// learned by EM, for y = Q1(A x + n) with one-bit complex outputs.
//
// Complex variables are circular: a "variance" tau of a complex quantity is
// E|z - mean|^2, i.e. tau/2 per real dimension.
//
// The solver is generic over the linear operator. An operator type must provide
//   rows(), cols(), frobenius_sq(),
//   apply(CVector), apply_adjoint(CVector),
//   apply_squared(RVector), apply_squared_adjoint(RVector).
// The output channel type must provide
//   OutputEstimate estimate(cd p_hat, double tau_p, cd y) const.

#include "onebit/common.hpp"

#include <algorithm>
#include <cmath>
#include <concepts>
#include <limits>
#include <optional>
#include <vector>

namespace onebit::gamp {

struct BernoulliGaussianPrior {
  double lambda = 0.1;  // probability of the active component
  cd theta{0.0, 0.0};   // active mean
  double phi = 1.0;     // active variance

  void validate() const {
    if (!(lambda > 0.0 && lambda <= 1.0))
      throw std::invalid_argument("BernoulliGaussianPrior: lambda must be in (0, 1]");
    if (!(phi > 0.0)) throw std::invalid_argument("BernoulliGaussianPrior: phi must be positive");
  }
};

enum class VarianceMode { kScalar, kVector };

struct GampConfig {
  int max_iters = 100;
  double tol = 1e-6;
  double damping = 0.2;  // step on s_hat, tau_s, tau_p and the x average fed to r_hat
  double variance_floor = 1e-12;
  bool em_enabled = true;
  int em_start_iter = 1;  // 1-based iteration at which EM updates begin
  VarianceMode variance_mode = VarianceMode::kScalar;
  double divergence_factor = 1e6;

  void validate() const {
    if (max_iters < 1) throw std::invalid_argument("GampConfig: max_iters must be >= 1");
    if (!(tol > 0.0)) throw std::invalid_argument("GampConfig: tol must be positive");
    if (!(damping > 0.0 && damping <= 1.0))
      throw std::invalid_argument("GampConfig: damping must be in (0, 1]");
    if (!(variance_floor > 0.0))
      throw std::invalid_argument("GampConfig: variance_floor must be positive");
    if (em_start_iter < 1) throw std::invalid_argument("GampConfig: em_start_iter must be >= 1");
  }
};

struct Diagnostics {
  int iterations = 0;
  double final_residual = std::numeric_limits<double>::quiet_NaN();
  bool converged = false;
  BernoulliGaussianPrior prior;
  std::vector<double> residual_history;
};

class Divergence : public std::runtime_error {
 public:
  Divergence(const std::string& what, Diagnostics d)
      : std::runtime_error(what), diagnostics_(std::move(d)) {}
  const Diagnostics& diagnostics() const { return diagnostics_; }

 private:
  Diagnostics diagnostics_;
};

// ---------------------------------------------------------------------------
// Scalar Gaussian helpers

inline constexpr double kInvSqrt2Pi = 0.398942280401432677939946059934;

inline double normal_pdf(double x) { return kInvSqrt2Pi * std::exp(-0.5 * x * x); }

inline double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

/// phi(x) / Phi(x), stable for very negative x.
inline double inverse_mills(double x) {
  if (x > -30.0) return normal_pdf(x) / normal_cdf(x);
  // asymptotic series of Phi(x)/phi(x) = (1/|x|)(1 - 1/x^2 + 3/x^4 - 15/x^6 + 105/x^8)
  const double x2 = x * x;
  const double series = 1.0 - 1.0 / x2 + 3.0 / (x2 * x2) - 15.0 / (x2 * x2 * x2) +
                        105.0 / (x2 * x2 * x2 * x2);
  return -x / series;
}

// ---------------------------------------------------------------------------
// Input side

struct InputEstimate {
  cd mean;
  double var = 0.0;
  double support = 0.0;  // posterior probability of the active component
  cd active_mean;        // posterior mean given active
  double active_var = 0.0;
};

/// Posterior of X ~ lambda CN(theta, phi) + (1 - lambda) delta_0 given R = X + CN(0, tau_r).
inline InputEstimate input_denoiser(cd r_hat, double tau_r, const BernoulliGaussianPrior& prior) {
  InputEstimate e;
  const double s = prior.phi + tau_r;
  e.active_mean = (r_hat * prior.phi + prior.theta * tau_r) / s;
  e.active_var = prior.phi * tau_r / s;

  if (prior.lambda >= 1.0) {
    e.support = 1.0;
  } else {
    // log-likelihood ratio of spike versus active explanations of r_hat
    const double log_active = std::log(prior.lambda) - std::log(s) - std::norm(r_hat - prior.theta) / s;
    const double log_spike = std::log1p(-prior.lambda) - std::log(tau_r) - std::norm(r_hat) / tau_r;
    const double llr = log_spike - log_active;
    e.support = llr > 0.0 ? std::exp(-llr) / (1.0 + std::exp(-llr)) : 1.0 / (1.0 + std::exp(llr));
  }
  e.mean = e.support * e.active_mean;
  e.var = e.support * (e.active_var + std::norm(e.active_mean)) - std::norm(e.mean);
  e.var = std::max(e.var, 0.0);
  return e;
}

/// Closed-form EM update of (lambda, theta, phi) from per-component posteriors.
inline BernoulliGaussianPrior em_update(const std::vector<InputEstimate>& post,
                                        const BernoulliGaussianPrior& prior) {
  if (post.empty()) return prior;
  double sum_pi = 0.0;
  cd sum_mean{0.0, 0.0};
  for (const auto& p : post) {
    sum_pi += p.support;
    sum_mean += p.support * p.active_mean;
  }
  BernoulliGaussianPrior next = prior;
  next.lambda = std::clamp(sum_pi / static_cast<double>(post.size()), 1e-6, 1.0);
  if (sum_pi <= 0.0) return next;
  next.theta = sum_mean / sum_pi;
  double sum_var = 0.0;
  for (const auto& p : post) sum_var += p.support * (std::norm(next.theta - p.active_mean) + p.active_var);
  const double phi = sum_var / sum_pi;
  if (phi > 0.0 && std::isfinite(phi)) next.phi = phi;
  return next;
}

/// EM update computed from GAMP's pseudo-measurements r_hat, tau_r.
inline BernoulliGaussianPrior em_update(const CVector& r_hat, const RVector& tau_r,
                                        const BernoulliGaussianPrior& prior) {
  require_dim(r_hat.size() == tau_r.size(), "em_update: length mismatch");
  std::vector<InputEstimate> post(static_cast<std::size_t>(r_hat.size()));
  for (Eigen::Index j = 0; j < r_hat.size(); ++j)
    post[static_cast<std::size_t>(j)] = input_denoiser(r_hat(j), tau_r(j), prior);
  return em_update(post, prior);
}

// ---------------------------------------------------------------------------
// Output side

struct OutputEstimate {
  cd mean;
  double var = 0.0;
};

struct RealPosterior {
  double mean = 0.0;
  double var = 0.0;
};

/// Posterior of z ~ N(p, v) given sign(z + w) = y, w ~ N(0, noise_var).
inline RealPosterior probit_posterior(double p, double v, double y, double noise_var) {
  const double scale = std::sqrt(v + noise_var);
  const double eta = y * p / scale;
  const double ratio = inverse_mills(eta);
  RealPosterior r;
  r.mean = p + y * v / scale * ratio;
  r.var = v - v * v / (v + noise_var) * ratio * (eta + ratio);
  r.var = std::clamp(r.var, 0.0, v);
  return r;
}

/// One-bit complex output channel with CN(0, noise_var) noise before quantization.
struct OneBitOutput {
  double noise_var = 1.0;

  OutputEstimate estimate(cd p_hat, double tau_p, cd y) const {
    const double v = 0.5 * tau_p;
    const double nv = 0.5 * noise_var;
    const RealPosterior re = probit_posterior(p_hat.real(), v, y.real(), nv);
    const RealPosterior im = probit_posterior(p_hat.imag(), v, y.imag(), nv);
    return {cd(re.mean, im.mean), re.var + im.var};
  }
};

/// Linear output y = z + CN(0, noise_var). Testing hook for unquantized instances.
struct LinearOutput {
  double noise_var = 1.0;

  OutputEstimate estimate(cd p_hat, double tau_p, cd y) const {
    const double s = tau_p + noise_var;
    return {(tau_p * y + noise_var * p_hat) / s, tau_p * noise_var / s};
  }
};

inline OutputEstimate output_denoiser(cd p_hat, double tau_p, cd y) {
  if (std::abs(std::abs(y.real()) - 1.0) > 0.0 || std::abs(std::abs(y.imag()) - 1.0) > 0.0)
    throw std::invalid_argument("output_denoiser: y must have real and imaginary parts in {-1, +1}");
  return OneBitOutput{}.estimate(p_hat, tau_p, y);
}

template <class Op>
concept LinearOperator = requires(const Op& op, const CVector& c, const RVector& r) {
  { op.rows() } -> std::convertible_to<Eigen::Index>;
  { op.cols() } -> std::convertible_to<Eigen::Index>;
  { op.frobenius_sq() } -> std::convertible_to<double>;
  { op.apply(c) } -> std::convertible_to<CVector>;
  { op.apply_adjoint(c) } -> std::convertible_to<CVector>;
  { op.apply_squared(r) } -> std::convertible_to<RVector>;
  { op.apply_squared_adjoint(r) } -> std::convertible_to<RVector>;
};

template <class Ch>
concept OutputChannel = requires(const Ch& ch, cd p, double t) {
  { ch.estimate(p, t, p) } -> std::convertible_to<OutputEstimate>;
};

/// Dense operator wrapper, used for generic compressed-sensing instances.
class DenseOperator {
 public:
  explicit DenseOperator(CMatrix a) : a_(std::move(a)), a_sq_(a_.cwiseAbs2()) {}

  Eigen::Index rows() const { return a_.rows(); }
  Eigen::Index cols() const { return a_.cols(); }
  double frobenius_sq() const { return a_sq_.sum(); }
  CVector apply(const CVector& x) const { return a_ * x; }
  CVector apply_adjoint(const CVector& z) const { return a_.adjoint() * z; }
  RVector apply_squared(const RVector& v) const { return a_sq_ * v; }
  RVector apply_squared_adjoint(const RVector& u) const { return a_sq_.transpose() * u; }
  const CMatrix& matrix() const { return a_; }

 private:
  CMatrix a_;
  RMatrix a_sq_;
};

struct GampResult {
  CVector x_hat;
  RVector tau_x;
  BernoulliGaussianPrior prior;
  Diagnostics diagnostics;
};

/// Default prior: lambda0 = 0.1, theta0 = 0 and phi0 chosen so that the
/// prior energy through A matches the measurement energy ||y||^2.
template <LinearOperator Op>
BernoulliGaussianPrior initial_prior(const Op& op, const CVector& y, double lambda0 = 0.1) {
  BernoulliGaussianPrior p;
  p.lambda = lambda0;
  p.theta = cd(0.0, 0.0);
  const double energy = y.squaredNorm();
  const double denom = lambda0 * op.frobenius_sq();
  p.phi = (energy > 0.0 && denom > 0.0) ? energy / denom : 1.0;
  return p;
}

template <LinearOperator Op, OutputChannel Ch>
GampResult gamp_solve(const Op& op, const CVector& y, const BernoulliGaussianPrior& prior0,
                      const GampConfig& cfg, const Ch& channel) {
  cfg.validate();
  prior0.validate();
  const Eigen::Index m = op.rows();
  const Eigen::Index d = op.cols();
  require_dim(y.size() == m, "gamp_solve: measurement length does not match operator rows");
  const bool scalar = cfg.variance_mode == VarianceMode::kScalar;
  const double floor = cfg.variance_floor;
  const double beta = cfg.damping;
  const double row_avg = op.frobenius_sq() / static_cast<double>(m);
  const double col_avg = op.frobenius_sq() / static_cast<double>(d);

  BernoulliGaussianPrior prior = prior0;
  Diagnostics diag;

  CVector x_hat = CVector::Constant(d, prior.lambda * prior.theta);
  RVector tau_x = RVector::Constant(
      d, std::max(prior.lambda * (std::norm(prior.theta) + prior.phi) - std::norm(prior.lambda * prior.theta),
                  floor));
  CVector x_bar = x_hat;  // damped average of the posterior means, used for r_hat
  CVector s_hat = CVector::Zero(m);
  RVector tau_s = RVector::Zero(m);
  RVector tau_p_bar = RVector::Zero(m);
  const double initial_scale =
      std::max(x_hat.norm(), std::sqrt(static_cast<double>(d) * prior.lambda * prior.phi));

  RVector tau_p(m);
  RVector tau_r(d);
  CVector p_hat(m);
  CVector r_hat(d);
  CVector s_new(m);
  RVector tau_s_new(m);
  std::vector<InputEstimate> post(static_cast<std::size_t>(d));

  for (int it = 1; it <= cfg.max_iters; ++it) {
    // output linear step
    if (scalar) {
      tau_p.setConstant(std::max(row_avg * tau_x.mean(), floor));
    } else {
      tau_p = op.apply_squared(tau_x).cwiseMax(floor);
    }
    tau_p_bar = it == 1 ? tau_p : RVector(beta * tau_p + (1.0 - beta) * tau_p_bar);
    tau_p = tau_p_bar;
    p_hat = op.apply(x_hat) - tau_p.cwiseProduct(s_hat);

    // output nonlinear step
    for (Eigen::Index i = 0; i < m; ++i) {
      const OutputEstimate oe = channel.estimate(p_hat(i), tau_p(i), y(i));
      s_new(i) = (oe.mean - p_hat(i)) / tau_p(i);
      tau_s_new(i) = std::max((1.0 - oe.var / tau_p(i)) / tau_p(i), 0.0);
    }
    if (it == 1) {
      s_hat = s_new;
      tau_s = tau_s_new;
    } else {
      s_hat = beta * s_new + (1.0 - beta) * s_hat;
      tau_s = beta * tau_s_new + (1.0 - beta) * tau_s;
    }

    // input linear step
    if (scalar) {
      tau_r.setConstant(1.0 / std::max(col_avg * tau_s.mean(), floor));
    } else {
      tau_r = op.apply_squared_adjoint(tau_s).cwiseMax(floor).cwiseInverse();
    }
    tau_r = tau_r.cwiseMax(floor);
    x_bar = it == 1 ? x_hat : CVector(beta * x_hat + (1.0 - beta) * x_bar);
    r_hat = x_bar + tau_r.cwiseProduct(op.apply_adjoint(s_hat));

    // input nonlinear step
    for (Eigen::Index j = 0; j < d; ++j) post[static_cast<std::size_t>(j)] = input_denoiser(r_hat(j), tau_r(j), prior);

    const CVector x_prev = x_hat;
    for (Eigen::Index j = 0; j < d; ++j) {
      const auto& e = post[static_cast<std::size_t>(j)];
      x_hat(j) = e.mean;
      tau_x(j) = std::max(e.var, floor);
    }

    if (cfg.em_enabled && it >= cfg.em_start_iter) prior = em_update(post, prior);

    const double prev_norm = x_prev.norm();
    const double residual = prev_norm > 0.0 ? (x_hat - x_prev).norm() / prev_norm
                                            : (x_hat.norm() > 0.0 ? 1.0 : 0.0);
    diag.iterations = it;
    diag.final_residual = residual;
    diag.residual_history.push_back(residual);
    diag.prior = prior;

    const double xn = x_hat.norm();
    if (!std::isfinite(xn) || !std::isfinite(residual) || xn > cfg.divergence_factor * initial_scale)
      throw Divergence("gamp_solve: iterate diverged", diag);
    if (it > 1 && residual < cfg.tol) {
      diag.converged = true;
      break;
    }
  }

  GampResult res;
  res.x_hat = std::move(x_hat);
  res.tau_x = std::move(tau_x);
  res.prior = prior;
  res.diagnostics = std::move(diag);
  return res;
}

/// One-bit measurements with unit-variance complex noise.
template <LinearOperator Op>
GampResult gamp_solve(const Op& op, const CVector& y, const BernoulliGaussianPrior& prior0,
                      const GampConfig& cfg) {
  for (Eigen::Index i = 0; i < y.size(); ++i)
    if (std::abs(y(i).real()) != 1.0 || std::abs(y(i).imag()) != 1.0)
      throw std::invalid_argument("gamp_solve: y must be one-bit valued");
  return gamp_solve(op, y, prior0, cfg, OneBitOutput{});
}

}  // namespace onebit::gamp
