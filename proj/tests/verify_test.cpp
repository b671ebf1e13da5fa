#include "tncp/verify.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "support/generators.hpp"
#include "tncp/solve.hpp"

using Eigen::MatrixXd;
using Eigen::VectorXd;
using tncp::ProblemInstance;
using tncp::Tensor;

namespace {

VectorXd vec2(double a, double b) {
  VectorXd v(2);
  v << a, b;
  return v;
}

ProblemInstance<double> identity_ncp(const VectorXd& q) {
  return ProblemInstance<double>::ncp(Tensor<double>::identity(4, 2), q);
}

// ===========================================================================
// feasibility
// ===========================================================================

TEST(Feasibility, Examples) {
  EXPECT_TRUE(tncp::feasibility(identity_ncp(vec2(1, 1)), VectorXd::Zero(2), 1e-12));
  // F(0) = q has negative components
  EXPECT_FALSE(tncp::feasibility(identity_ncp(vec2(-1, -1)), VectorXd::Zero(2), 1e-12));
  // F(2,2) = (7,7)
  EXPECT_TRUE(tncp::feasibility(identity_ncp(vec2(-1, -1)), vec2(2, 2), 1e-12));
  EXPECT_FALSE(tncp::feasibility(identity_ncp(vec2(-1, -1)), vec2(-0.1, 2), 1e-12));
}

// ===========================================================================
// complementarity_residual
// ===========================================================================

TEST(Residual, ExactSolutionIsZero) {
  EXPECT_DOUBLE_EQ(tncp::complementarity_residual(identity_ncp(vec2(-1, -1)), vec2(1, 1)), 0.0);
}

TEST(Residual, InteriorNonSolution) {
  // x = (2,2): F = (7,7), min-component 2, gap 28/(1+|q|_1) = 28/3
  const double r = tncp::complementarity_residual(identity_ncp(vec2(-1, -1)), vec2(2, 2));
  EXPECT_NEAR(r, 28.0 / 3.0, 1e-12);
}

TEST(Residual, ZeroSolvesNonnegativeQ) {
  EXPECT_DOUBLE_EQ(tncp::complementarity_residual(identity_ncp(vec2(1, 1)), VectorXd::Zero(2)),
                   0.0);
}

TEST(Residual, ZeroExactlyWhenFeasibleWithZeroGap) {
  const auto p = identity_ncp(vec2(-1, -1));
  const VectorXd candidates[] = {vec2(1, 1), vec2(2, 0), vec2(1 + 1e-9, 1), vec2(0.5, 1),
                                 vec2(-1e-3, 1)};
  for (const auto& x : candidates) {
    const bool zero_residual = tncp::complementarity_residual(p, x) == 0.0;
    const bool exact = tncp::feasibility(p, x, 0.0) && x.dot(p.F(x)) == 0.0;
    EXPECT_EQ(zero_residual, exact) << x.transpose();
  }
}

// ===========================================================================
// kkt_check
// ===========================================================================

TEST(Kkt, SelfMultiplierAtSolution) {
  const auto p = identity_ncp(vec2(-1, -1));
  const auto cert = tncp::kkt_check(p, vec2(1, 1), vec2(1, 1), 1e-10);
  EXPECT_TRUE(cert.passed);
  // q + 4 x^3 - 3 x^3 = q + x^3 = (0,0) at x = (1,1)
  EXPECT_TRUE(cert.stationarity.isZero(1e-14));
  EXPECT_NEAR(cert.stationarity_comp, 0.0, 1e-14);
  EXPECT_NEAR(cert.multiplier_comp, 0.0, 1e-14);
  for (Eigen::Index i = 0; i < 2; ++i) EXPECT_LE(cert.curvature_products[i], 1e-14);
}

TEST(Kkt, ZeroMultiplierFailsComplementarity) {
  const auto p = identity_ncp(vec2(-1, -1));
  const auto cert = tncp::kkt_check(p, vec2(1, 1), VectorXd::Zero(2), 1e-10);
  // stationarity = q + 4 x^3 = (3,3) >= 0, but x . stationarity = 6 != 0
  EXPECT_TRUE(cert.stationarity.isApprox(vec2(3, 3)));
  EXPECT_NEAR(cert.stationarity_comp, 6.0, 1e-14);
  EXPECT_NEAR(cert.multiplier_comp, 0.0, 1e-14);
  EXPECT_FALSE(cert.passed);
}

TEST(Kkt, SplitIdentityHoldsOnRandomPairs) {
  // curvature_products must equal primal_products + multiplier_products
  std::mt19937_64 rng(97);
  for (int trial = 0; trial < 100; ++trial) {
    const int n = 2 + (trial % 3);
    const auto p = ProblemInstance<double>::ncp(gen::random_tensor(rng, 4, n),
                                                gen::mixed_sign_vector(rng, n));
    const VectorXd x = gen::gaussian_vector(rng, n);
    const VectorXd u = gen::gaussian_vector(rng, n);
    const auto cert = tncp::kkt_check(p, x, u, 1e-8);
    const VectorXd sum = cert.primal_products + cert.multiplier_products;
    const double scale = 1.0 + cert.curvature_products.cwiseAbs().maxCoeff();
    EXPECT_LE((cert.curvature_products - sum).cwiseAbs().maxCoeff() / scale, 1e-12);
  }
}

TEST(Kkt, GradedInstanceRejected) {
  const std::vector<Tensor<double>> terms = {Tensor<double>::identity(4, 2),
                                             Tensor<double>::identity(2, 2)};
  const auto g = ProblemInstance<double>::gncp(terms, vec2(-2, -2));
  EXPECT_THROW(tncp::kkt_check(g, vec2(1, 1), vec2(1, 1), 1e-8), std::invalid_argument);
}

TEST(Kkt, ShapeMismatchRejected) {
  const auto p = identity_ncp(vec2(-1, -1));
  EXPECT_THROW(tncp::kkt_check(p, VectorXd::Ones(3), vec2(1, 1), 1e-8), std::invalid_argument);
  EXPECT_THROW(tncp::kkt_check(p, vec2(1, 1), VectorXd::Ones(3), 1e-8), std::invalid_argument);
}

TEST(Kkt, EquivalentToResidualUnderSelfMultiplier) {
  // solutions pass both tests; clear non-solutions fail both
  std::mt19937_64 rng(103);
  const double tol = 1e-9;
  for (int trial = 0; trial < 10; ++trial) {
    const int n = 2 + (trial % 3);
    const Tensor<double> a = gen::random_symmetric_tensor(rng, 4, n, 0.1, 1.0);
    const auto p = ProblemInstance<double>::ncp(a, gen::mixed_sign_vector(rng, n));
    tncp::SolveOptions opts;
    opts.tol = tol;
    const auto report = tncp::solve(p, opts);
    ASSERT_EQ(report.status, tncp::SolveStatus::Solved);
    EXPECT_TRUE(tncp::kkt_check(p, report.x, report.x, 10.0 * tol).passed);

    for (int k = 0; k < 100; ++k) {
      const VectorXd x = gen::uniform_vector(rng, n, 0.0, 2.0);
      if (tncp::complementarity_residual(p, x) <= 100.0 * tol) continue;  // too close to a solution
      EXPECT_FALSE(tncp::kkt_check(p, x, x, 10.0 * tol).passed);
      EXPECT_GT(tncp::complementarity_residual(p, x), tol);
    }
  }
}

// ===========================================================================
// contraction_matrix_pd
// ===========================================================================

TEST(ContractionMatrixPd, IdentityCases) {
  const auto p = identity_ncp(vec2(-1, -1));
  EXPECT_TRUE(tncp::contraction_matrix_pd(p, vec2(1, 1), 1e-8));   // diag(1,1)
  EXPECT_FALSE(tncp::contraction_matrix_pd(p, vec2(1, 0), 1e-8));  // diag(1,0)
  EXPECT_THROW(tncp::contraction_matrix_pd(p, VectorXd::Zero(2), 1e-8), std::invalid_argument);
}

// ===========================================================================
// feasibility_probe
// ===========================================================================

TEST(FeasibilityProbe, LadderFindsScaledOnes) {
  const auto p = identity_ncp(vec2(-1, -1));
  const auto hit = tncp::feasibility_probe(p);
  ASSERT_TRUE(hit.has_value());
  EXPECT_TRUE(tncp::feasibility(p, *hit, 0.0));
}

TEST(FeasibilityProbe, NonnegativeQReturnsOrigin) {
  const auto hit = tncp::feasibility_probe(identity_ncp(vec2(1, 1)));
  ASSERT_TRUE(hit.has_value());
  EXPECT_TRUE(hit->isZero(0.0));
}

TEST(FeasibilityProbe, PositiveTensorAlwaysFeasibleSomewhere) {
  std::mt19937_64 rng(107);
  for (int trial = 0; trial < 5; ++trial) {
    const Tensor<double> a = gen::random_symmetric_tensor(rng, 4, 3, 0.1, 1.0);
    const auto p = ProblemInstance<double>::ncp(a, gen::mixed_sign_vector(rng, 3));
    const auto hit = tncp::feasibility_probe(p);
    ASSERT_TRUE(hit.has_value());
    EXPECT_TRUE(tncp::feasibility(p, *hit, 0.0));
  }
}

}  // namespace
