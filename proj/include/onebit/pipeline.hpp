#pragma once

// One realization of the joint CFO/channel problem and its end-to-end estimate.

#include "onebit/channel.hpp"
#include "onebit/frontend.hpp"
#include "onebit/gamp.hpp"
#include "onebit/lifting.hpp"
#include "onebit/recovery.hpp"

namespace onebit {

struct ProblemInstance {
  CMatrix h;                       // true channel, Nrx x Ntx
  frontend::TrainingBlock training;
  frontend::CfoParams cfo;
  CMatrix y;                       // received block, Nrx x Np
};

template <class Rng>
ProblemInstance simulate_instance(const channel::ChannelModelConfig& ch, int n_p, double snr_db,
                                  frontend::CfoParams cfo, Rng& rng, frontend::RxOptions rx = {}) {
  ProblemInstance inst;
  inst.h = channel::sample_channel(ch, rng);
  inst.training = frontend::gen_training(ch.n_tx, n_p, frontend::snr_to_radius(snr_db, ch.n_tx), rng);
  inst.cfo = cfo;
  inst.y = frontend::simulate_rx(inst.h, inst.training, cfo, rng, rx);
  return inst;
}

struct EstimationOutput {
  recovery::JointEstimate estimate;
  gamp::GampResult solver;
};

/// Lifts, solves for x = vec(b c^T) and splits the result. The output channel
/// defaults to the one-bit model; LinearOutput is accepted for unquantized
/// test instances.
template <gamp::OutputChannel Ch = gamp::OneBitOutput>
EstimationOutput estimate_joint(const frontend::TrainingBlock& training, const CMatrix& y,
                                const gamp::GampConfig& cfg, const Ch& out = Ch{},
                                double lambda0 = 0.1) {
  const auto n_rx = static_cast<int>(y.rows());
  const lifting::LiftedOperator op(training, n_rx);
  const CVector yv = lifting::measurement_vector(y);
  const gamp::BernoulliGaussianPrior prior0 = gamp::initial_prior(op, yv, lambda0);

  EstimationOutput res;
  res.solver = gamp::gamp_solve(op, yv, prior0, cfg, out);
  res.estimate = recovery::recover(res.solver.x_hat, n_rx, op.n_tx(), op.n_p());
  return res;
}

}  // namespace onebit
