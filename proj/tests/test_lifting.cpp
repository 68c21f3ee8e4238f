#include "onebit/lifting.hpp"

#include <gtest/gtest.h>

#include "onebit/channel.hpp"
#include "oracles.hpp"

#include <random>

namespace {

using namespace onebit;
using namespace onebit::lifting;

TEST(CfoSpectrum, OnGridToneIsUnitVector) {
  const CVector b = cfo_spectrum(kTwoPi * 3.0 / 8.0, 8);
  for (Eigen::Index k = 0; k < 8; ++k) EXPECT_NEAR(std::abs(b(k) - (k == 3 ? cd(1.0, 0.0) : cd(0.0, 0.0))), 0.0, 1e-12);
  const CVector dc = cfo_spectrum(0.0, 16);
  EXPECT_NEAR(std::abs(dc(0) - 1.0), 0.0, 1e-12);
  EXPECT_NEAR(dc.tail(15).norm(), 0.0, 1e-12);
}

TEST(CfoSpectrum, ReconstructsToneForRandomOffsets) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(0.0, kTwoPi);
  for (int rep = 0; rep < 100; ++rep) {
    const double w = u(rng);
    const CVector b = cfo_spectrum(w, 32);
    CVector a(32);
    for (int n = 0; n < 32; ++n) a(n) = std::exp(cd(0.0, w * n));
    // U^H b written out as a sum
    CVector rec = CVector::Zero(32);
    for (int n = 0; n < 32; ++n)
      for (int k = 0; k < 32; ++k) rec(n) += std::exp(cd(0.0, kTwoPi * n * k / 32.0)) * b(k);
    EXPECT_LT((rec - a).norm(), 1e-10);
  }
  EXPECT_THROW(cfo_spectrum(0.1, 1), DimensionError);
}

struct Instance {
  frontend::TrainingBlock t;
  int n_rx;
};

Instance make_instance(int n_rx, int n_tx, int n_p, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  return {frontend::gen_training(n_tx, n_p, 0.7, rng), n_rx};
}

TEST(Operator, Dimensions) {
  const Instance small = make_instance(2, 2, 4, 1);
  const LiftedOperator op(small.t, small.n_rx);
  EXPECT_EQ(op.g().rows(), 8);
  EXPECT_EQ(op.g().cols(), 4);
  EXPECT_LT((op.g().topRows(4) - op.g().bottomRows(4)).norm(), 1e-15);
  EXPECT_LT((op.g().cwiseAbs() - RMatrix::Ones(8, 4)).cwiseAbs().maxCoeff(), 1e-15);

  const Instance paper = make_instance(16, 16, 64, 2);
  const LiftedOperator big(paper.t, 16);
  EXPECT_EQ(big.rows(), 1024);
  EXPECT_EQ(big.cols(), 16384);
}

TEST(Operator, BudgetGuards) {
  const Instance paper = make_instance(16, 16, 64, 2);
  OperatorBudget tiny;
  tiny.max_stored_entries = 1000;
  EXPECT_THROW(LiftedOperator(paper.t, 16, tiny), BudgetExceeded);
  const LiftedOperator big(paper.t, 16);
  EXPECT_THROW(big.dense(), BudgetExceeded);
}

TEST(Operator, DenseMatchesDefinitionOracle) {
  const Instance inst = make_instance(2, 3, 4, 7);
  const LiftedOperator op(inst.t, inst.n_rx);
  const CMatrix ref = oracle::dense_lifted(inst.t.symbols, inst.n_rx);
  EXPECT_LT((op.dense() - ref).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Operator, ApplyMatchesDense) {
  std::mt19937_64 rng(8);
  const Instance inst = make_instance(2, 2, 4, 8);
  const LiftedOperator op(inst.t, inst.n_rx);
  const CMatrix a = oracle::dense_lifted(inst.t.symbols, inst.n_rx);
  for (int rep = 0; rep < 10; ++rep) {
    const CVector x = oracle::random_cvector(op.cols(), rng);
    EXPECT_LT((op.apply(x) - a * x).cwiseAbs().maxCoeff(), 1e-12);
    const CVector z = oracle::random_cvector(op.rows(), rng);
    EXPECT_LT((op.apply_adjoint(z) - a.adjoint() * z).cwiseAbs().maxCoeff(), 1e-12);
  }
  EXPECT_EQ(op.apply(CVector::Zero(op.cols())).norm(), 0.0);
  EXPECT_EQ(op.apply_adjoint(CVector::Zero(op.rows())).norm(), 0.0);
  EXPECT_THROW(op.apply(CVector::Zero(3)), DimensionError);
  EXPECT_THROW(op.apply_adjoint(CVector::Zero(3)), DimensionError);
}

TEST(Operator, AdjointInnerProductIdentity) {
  std::mt19937_64 rng(10);
  const Instance inst = make_instance(4, 4, 8, 10);
  const LiftedOperator op(inst.t, inst.n_rx);
  for (int rep = 0; rep < 20; ++rep) {
    const CVector x = oracle::random_cvector(op.cols(), rng);
    const CVector z = oracle::random_cvector(op.rows(), rng);
    const cd lhs = z.dot(op.apply(x));
    const cd rhs = op.apply_adjoint(z).dot(x);
    EXPECT_LT(std::abs(lhs - rhs), 1e-10 * std::abs(lhs));
  }
}

TEST(Operator, LiftingIdentity) {
  std::mt19937_64 rng(12);
  for (auto [nr, nt, np] : {std::tuple{2, 2, 4}, std::tuple{4, 4, 8}, std::tuple{3, 2, 5}}) {
    const Instance inst = make_instance(nr, nt, np, 100 + nr);
    const LiftedOperator op(inst.t, nr);
    for (int rep = 0; rep < 10; ++rep) {
      const CVector b = oracle::random_cvector(np, rng);
      const CVector c = oracle::random_cvector(nr * nt, rng);
      const CVector lhs = op.apply(lift(b, c));
      const CVector rhs = bilinear_measurements(op, b, c);
      EXPECT_LT((lhs - rhs).cwiseAbs().maxCoeff(), 1e-10);
    }
  }
}

TEST(Operator, SquaredProductsMatchDense) {
  std::mt19937_64 rng(13);
  const Instance inst = make_instance(2, 3, 4, 13);
  const LiftedOperator op(inst.t, inst.n_rx);
  const RMatrix a2 = op.dense().cwiseAbs2();
  std::uniform_real_distribution<double> u(0.0, 1.0);
  RVector v(op.cols());
  for (Eigen::Index j = 0; j < v.size(); ++j) v(j) = u(rng);
  RVector w(op.rows());
  for (Eigen::Index i = 0; i < w.size(); ++i) w(i) = u(rng);
  EXPECT_LT((op.apply_squared(v) - a2 * v).cwiseAbs().maxCoeff(), 1e-10);
  EXPECT_LT((op.apply_squared_adjoint(w) - a2.transpose() * w).cwiseAbs().maxCoeff(), 1e-10);
  EXPECT_NEAR(op.frobenius_sq(), a2.sum(), 1e-9 * a2.sum());
}

TEST(Operator, RowPower) {
  const Instance inst = make_instance(2, 2, 4, 14);
  const LiftedOperator op(inst.t, inst.n_rx);
  const RMatrix a2 = op.dense().cwiseAbs2();
  for (Eigen::Index i = 0; i < op.rows(); ++i) {
    const RVector p = op.row_power(i);
    EXPECT_LT((p.transpose() - a2.row(i)).cwiseAbs().maxCoeff(), 1e-12);
    EXPECT_NEAR(p.sum(), op.n_p() * op.j().row(i).squaredNorm(), 1e-10);
    EXPECT_GE(p.minCoeff(), 0.0);
  }
  EXPECT_THROW(op.row_power(op.rows()), std::out_of_range);
  EXPECT_THROW(op.row_power(-1), std::out_of_range);
}

TEST(Operator, SparsityTransfer) {
  std::mt19937_64 rng(15);
  const int np = 8;
  const int nrnt = 16;
  CVector c = CVector::Zero(nrnt);
  c(2) = cd(1.0, 0.5);
  c(9) = cd(-0.3, 0.2);
  c(14) = cd(0.0, 2.0);
  const CVector dense_b = oracle::random_cvector(np, rng);
  const CVector x = lift(dense_b, c);
  EXPECT_EQ((x.array() != cd(0.0, 0.0)).count(), 3 * np);

  CVector onehot = CVector::Zero(np);
  onehot(5) = 1.0;
  const CVector x2 = lift(onehot, c);
  EXPECT_EQ((x2.array() != cd(0.0, 0.0)).count(), 3);
}

// The unquantized received block, vectorized as vec(Y^T), equals
// diag(G b) J c with b the CFO spectrum and c = vec(C^T).
TEST(Operator, AgreesWithSimulatedReceiver) {
  std::mt19937_64 rng(16);
  channel::ChannelModelConfig ch;
  ch.n_rx = 4;
  ch.n_tx = 3;
  const CMatrix h = channel::sample_channel(ch, rng);
  const frontend::TrainingBlock t = frontend::gen_training(3, 8, 1.2, rng);
  const double w = 0.77;
  const CMatrix y = frontend::simulate_rx(h, t, frontend::CfoParams{w}, rng, {false, false});

  const LiftedOperator op(t, 4);
  const CVector b = cfo_spectrum(w, 8);
  const CVector c = beamspace_vector(channel::to_beamspace(h));
  const CVector yv = measurement_vector(y);
  EXPECT_LT((bilinear_measurements(op, b, c) - yv).cwiseAbs().maxCoeff(), 1e-10);
  EXPECT_LT((op.apply(lift(b, c)) - yv).cwiseAbs().maxCoeff(), 1e-10);
}

TEST(LiftedVector, ReshapesToRankOne) {
  std::mt19937_64 rng(18);
  const CVector b = oracle::random_cvector(8, rng);
  const CVector c = oracle::random_cvector(12, rng);
  const CMatrix x = unvec(lift(b, c), 8, 12);
  const Eigen::JacobiSVD<CMatrix> svd(x);
  EXPECT_LT(svd.singularValues()(1), 1e-12 * svd.singularValues()(0));
  EXPECT_LT((x - b * c.transpose()).norm(), 1e-14);
}

}  // namespace
