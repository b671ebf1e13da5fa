#include "tncp/structure.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "support/generators.hpp"
#include "support/oracles.hpp"
#include "tncp/diagonalizable.hpp"

using Eigen::MatrixXd;
using Eigen::VectorXd;
using tncp::CopositivityClass;
using tncp::DefinitenessClass;
using tncp::DRegularityVerdict;
using tncp::MappingClass;
using tncp::Tensor;

namespace {

std::vector<double> to_std(const VectorXd& v) { return {v.data(), v.data() + v.size()}; }

// Order-4, dim-2 identity with every entry on the {1,1,2,2} index pattern set
// to -1; A x^4 = x1^4 + x2^4 - 6 x1^2 x2^2, which dips to -2 on the
// constraint set at equal weights.
Tensor<double> indefinite_example() {
  Tensor<double> eye = Tensor<double>::identity(4, 2);
  VectorXd e = eye.entries();
  std::vector<int> idx(4);
  for (Eigen::Index lin = 0; lin < e.size(); ++lin) {
    eye.unravel(lin, idx);
    if (idx[0] + idx[1] + idx[2] + idx[3] == 2) e[lin] = -1.0;
  }
  return Tensor<double>(4, 2, e);
}

// ===========================================================================
// simplex_min
// ===========================================================================

TEST(SimplexMin, ConstantOnIdentity) {
  // A x^4 = sum x_i^4 = 1 on the whole constraint set
  const auto res = tncp::simplex_min(Tensor<double>::identity(4, 2));
  EXPECT_NEAR(res.value, 1.0, 1e-9);
  EXPECT_GE(res.argmin.minCoeff(), 0.0);
  EXPECT_NEAR(res.argmin.array().pow(4).sum(), 1.0, 1e-10);
}

TEST(SimplexMin, DiagonalMatrixPicksSmallestDiagonal) {
  VectorXd d(2);
  d << 2, 3;
  const auto res = tncp::simplex_min(Tensor<double>::diagonal(2, d));
  EXPECT_NEAR(res.value, 2.0, 1e-9);
  EXPECT_NEAR(res.argmin[0], 1.0, 1e-5);
  EXPECT_NEAR(res.argmin[1], 0.0, 1e-5);
}

TEST(SimplexMin, NegativePatternGoesBelowZero) {
  const auto res = tncp::simplex_min(indefinite_example());
  EXPECT_LT(res.value, 0.0);
  // grid oracle: exhaustive scan of the constraint set
  const auto grid = oracle::simplex_grid_min(to_std(indefinite_example().entries()), 4, 2);
  EXPECT_NEAR(res.value, grid.value, 1e-3);
  EXPECT_NEAR(res.value, -2.0, 1e-6);
}

TEST(SimplexMin, OrderOneRejected) {
  EXPECT_THROW(tncp::simplex_min(Tensor<double>(1, 2, {1, 2})), std::invalid_argument);
}

TEST(SimplexMin, MatchesGridOracleOnRandomTensors) {
  // smaller render of the acceptance sweep for quick feedback
  std::mt19937_64 rng(2024);
  for (int trial = 0; trial < 20; ++trial) {
    const int n = 2 + (trial % 2);
    const Tensor<double> a = gen::random_symmetric_tensor(rng, 4, n);
    tncp::OptimizerOptions opts;
    opts.seed = trial;
    const auto res = tncp::simplex_min(a, opts);
    const auto grid = oracle::simplex_grid_min(to_std(a.entries()), 4, n);
    EXPECT_NEAR(res.value, grid.value, 1e-3) << "trial " << trial;
    EXPECT_LE(res.value, grid.value + 1e-9) << "descent should not be worse than the grid";
  }
}

TEST(SimplexMin, ShiftByIdentityIsMonotone) {
  std::mt19937_64 rng(77);
  for (int trial = 0; trial < 10; ++trial) {
    const Tensor<double> a = gen::random_symmetric_tensor(rng, 4, 3);
    const double base = tncp::simplex_min(a).value;
    for (double c : {0.1, 1.0}) {
      const Tensor<double> shifted = a + c * Tensor<double>::identity(4, 3);
      EXPECT_GE(tncp::simplex_min(shifted).value, base - 1e-9);
    }
  }
}

// ===========================================================================
// copositivity_verdict
// ===========================================================================

TEST(Copositivity, IdentityIsStrict) {
  const auto v = tncp::copositivity_verdict(Tensor<double>::identity(4, 3));
  EXPECT_EQ(v.cls, CopositivityClass::StrictlyCopositive);
  EXPECT_NEAR(v.simplex_min, 1.0, 1e-8);
  EXPECT_FALSE(v.witness.has_value());
}

TEST(Copositivity, AllOnesIsStrict) {
  // A x^4 = (x1 + x2)^4 > 0 on the constraint set
  const Tensor<double> ones(4, 2, VectorXd::Ones(16));
  const auto v = tncp::copositivity_verdict(ones);
  EXPECT_EQ(v.cls, CopositivityClass::StrictlyCopositive);
}

TEST(Copositivity, NegativePatternHasWitness) {
  const Tensor<double> a = indefinite_example();
  const auto v = tncp::copositivity_verdict(a);
  ASSERT_EQ(v.cls, CopositivityClass::NotCopositive);
  ASSERT_TRUE(v.witness.has_value());
  EXPECT_GE(v.witness->minCoeff(), 0.0);
  EXPECT_LT(tncp::contract_all(a, *v.witness), -1e-8);
}

TEST(Copositivity, AllPositiveEntriesClassifyStrict) {
  std::mt19937_64 rng(99);
  for (int trial = 0; trial < 10; ++trial) {
    const Tensor<double> a = gen::random_symmetric_tensor(rng, 4, 3, 0.1, 1.0);
    EXPECT_EQ(tncp::copositivity_verdict(a).cls, CopositivityClass::StrictlyCopositive);
  }
}

TEST(Copositivity, ZeroTensorIsWeaklyCopositive) {
  const auto v = tncp::copositivity_verdict(Tensor<double>::zero(4, 2));
  EXPECT_EQ(v.cls, CopositivityClass::Copositive);
}

TEST(Copositivity, ClassAgreesWithGridOracle) {
  std::mt19937_64 rng(555);
  const double tol = 1e-8;
  for (int trial = 0; trial < 20; ++trial) {
    const int n = 2 + (trial % 2);
    const Tensor<double> a = gen::random_symmetric_tensor(rng, 4, n);
    const auto v = tncp::copositivity_verdict(a, tol);
    const auto grid = oracle::simplex_grid_min(to_std(a.entries()), 4, n);
    CopositivityClass expected;
    if (grid.value > tol) {
      expected = CopositivityClass::StrictlyCopositive;
    } else if (grid.value >= -tol) {
      expected = CopositivityClass::Copositive;
    } else {
      expected = CopositivityClass::NotCopositive;
    }
    EXPECT_EQ(v.cls, expected) << "trial " << trial << " grid " << grid.value << " got "
                               << v.simplex_min;
  }
}

// ===========================================================================
// definiteness_verdict
// ===========================================================================

TEST(Definiteness, IdentityTensorIsPd) {
  const auto v = tncp::definiteness_verdict(Tensor<double>::identity(4, 2));
  EXPECT_EQ(v.cls, DefinitenessClass::PositiveDefinite);
  // on sum x_i^4 = 1 the form is identically 1
  EXPECT_NEAR(v.lambda_min_h, 1.0, 1e-8);
  // on the euclidean sphere the min is 1/2 at equal magnitudes
  EXPECT_NEAR(v.lambda_min_z, 0.5, 1e-6);
}

TEST(Definiteness, DiagonalizablePositiveDiagonalIsPd) {
  std::mt19937_64 rng(31337);
  for (int trial = 0; trial < 50; ++trial) {
    const int n = 2 + (trial % 3);
    const auto form = gen::random_pd_form(rng, n);
    const Tensor<double> a = realize(form, 4);
    tncp::OptimizerOptions opts;
    opts.starts = 16;
    opts.sphere_samples = 2000;
    opts.seed = trial;
    const auto v = tncp::definiteness_verdict(a, 1e-8, opts);
    EXPECT_EQ(v.cls, DefinitenessClass::PositiveDefinite) << "trial " << trial;
    EXPECT_GT(v.lambda_min_z, 0.0);
  }
}

TEST(Definiteness, NegativeDiagonalEntryGivesWitness) {
  VectorXd d(2);
  d << 1, -1;
  const Tensor<double> a = Tensor<double>::diagonal(4, d);
  const auto v = tncp::definiteness_verdict(a);
  ASSERT_EQ(v.cls, DefinitenessClass::NotPositiveDefinite);
  ASSERT_TRUE(v.witness.has_value());
  EXPECT_GT(v.witness->norm(), 0.0);
  EXPECT_LE(tncp::contract_all(a, *v.witness), 0.0);
  EXPECT_NEAR(v.lambda_min_h, -1.0, 1e-6);  // attained at e2
}

TEST(Definiteness, OddOrderRejected) {
  EXPECT_THROW(tncp::definiteness_verdict(Tensor<double>::identity(3, 2)),
               std::invalid_argument);
}

// ===========================================================================
// mapping_class
// ===========================================================================

TEST(MappingClass, IdentityIsStronglyCopositive) {
  const VectorXd q = VectorXd::Constant(2, -1.0);
  const auto c = tncp::mapping_class(Tensor<double>::identity(4, 2), q);
  EXPECT_EQ(c.cls, MappingClass::StronglyCopositive);
  ASSERT_TRUE(c.alpha.has_value());
  EXPECT_NEAR(*c.alpha, 0.5, 1e-6);  // = lambda_min_z estimate
}

TEST(MappingClass, NotCopositiveTensorIsUnknown) {
  const auto c = tncp::mapping_class(indefinite_example(), VectorXd::Ones(2));
  EXPECT_EQ(c.cls, MappingClass::Unknown);
  EXPECT_FALSE(c.alpha.has_value());
}

TEST(MappingClass, AllOnesIsStrictlyButNotStrongly) {
  // (x1 + x2)^4 vanishes at (1,-1), so the tensor is not positive definite,
  // yet it is strictly copositive on the orthant.
  const Tensor<double> ones(4, 2, VectorXd::Ones(16));
  EXPECT_NEAR(tncp::contract_all(ones, VectorXd(Eigen::Vector2d(1, -1))), 0.0, 1e-12);
  const auto c = tncp::mapping_class(ones, VectorXd::Ones(2));
  EXPECT_EQ(c.cls, MappingClass::StrictlyCopositive);
}

// ===========================================================================
// d_regularity_falsifier
// ===========================================================================

TEST(DRegularity, IdentityHasNoCounterexample) {
  // G_i(x) = x_i^3 >= 0 and t >= 0 force x = 0 on any support
  const auto r = tncp::d_regularity_falsifier(Tensor<double>::identity(4, 2),
                                              VectorXd::Ones(2), 256);
  EXPECT_EQ(r.verdict, DRegularityVerdict::NoCounterexampleFound);
  EXPECT_FALSE(r.witness.has_value());
  EXPECT_EQ(r.budget_used, 256);
}

TEST(DRegularity, NegativeDiagonalYieldsWitness) {
  VectorXd diag(2);
  diag << -1, -1;
  const Tensor<double> a = Tensor<double>::diagonal(4, diag);
  const VectorXd d = VectorXd::Ones(2);
  const auto r = tncp::d_regularity_falsifier(a, d, 256);
  ASSERT_EQ(r.verdict, DRegularityVerdict::CounterexampleFound);
  ASSERT_TRUE(r.witness.has_value());
  const auto& w = *r.witness;
  EXPECT_GT(w.x.maxCoeff(), 0.0);
  EXPECT_GE(w.x.minCoeff(), 0.0);
  EXPECT_GE(w.t, 0.0);
  // re-verify the system the witness claims to satisfy
  const VectorXd g = tncp::contract_to_vector(a, w.x);
  for (int i = 0; i < 2; ++i) {
    const double r_i = g[i] + w.t * d[i];
    if (w.x[i] > 0.0) {
      EXPECT_NEAR(r_i, 0.0, 1e-10);
    } else {
      EXPECT_GE(r_i, -1e-10);
    }
  }
}

TEST(DRegularity, NonPositiveDirectionRejected) {
  VectorXd d(2);
  d << 1, 0;
  EXPECT_THROW(
      tncp::d_regularity_falsifier(Tensor<double>::identity(4, 2), d, 16),
      std::invalid_argument);
}

// ===========================================================================
// principal_minors
// ===========================================================================

TEST(PrincipalMinors, IdentityHasAllOnes) {
  const auto minors = tncp::principal_minors(MatrixXd(MatrixXd::Identity(3, 3)));
  ASSERT_EQ(minors.size(), 7u);
  for (const auto& m : minors) EXPECT_DOUBLE_EQ(m.value, 1.0);
}

TEST(PrincipalMinors, DiagonalCase) {
  MatrixXd m(2, 2);
  m << 2, 0, 0, 3;
  const auto minors = tncp::principal_minors(m);
  ASSERT_EQ(minors.size(), 3u);
  EXPECT_DOUBLE_EQ(minors[0].value, 2.0);  // {1}
  EXPECT_DOUBLE_EQ(minors[1].value, 3.0);  // {2}
  EXPECT_DOUBLE_EQ(minors[2].value, 6.0);  // {1,2}
}

TEST(PrincipalMinors, GeneralTwoByTwo) {
  MatrixXd m(2, 2);
  m << 1, 2, 3, 4;
  const auto minors = tncp::principal_minors(m);
  EXPECT_DOUBLE_EQ(minors[0].value, 1.0);
  EXPECT_DOUBLE_EQ(minors[1].value, 4.0);
  EXPECT_DOUBLE_EQ(minors[2].value, -2.0);  // 1*4 - 2*3
}

TEST(PrincipalMinors, SizeGuard) {
  EXPECT_THROW(tncp::principal_minors(MatrixXd(MatrixXd::Identity(13, 13))),
               std::invalid_argument);
  EXPECT_THROW(tncp::principal_minors(MatrixXd(MatrixXd::Zero(2, 3))), std::invalid_argument);
}

// ===========================================================================
// minor_bounds_probe
// ===========================================================================

TEST(MinorProbe, IdentityEscapesAtBothScales) {
  // jacobian-style matrix is 3 diag(x1^2, x2^2): minors shrink near 0 and
  // blow up at large scale, so violations must appear on both sides.
  const auto report = tncp::minor_bounds_probe(Tensor<double>::identity(4, 2), 0.5, 64, 7);
  EXPECT_FALSE(report.violations.empty());
  bool small_side = false, large_side = false;
  for (const auto& v : report.violations) {
    if (v.value < report.delta) small_side = true;
    if (v.value > 1.0 / report.delta) large_side = true;
  }
  EXPECT_TRUE(small_side);
  EXPECT_TRUE(large_side);
}

TEST(MinorProbe, ViolationsAreReproducible) {
  std::mt19937_64 rng(3);
  const Tensor<double> a = gen::random_symmetric_tensor(rng, 4, 3);
  const auto report = tncp::minor_bounds_probe(a, 0.5, 32, 11);
  const Tensor<double> at = tncp::symmetrize_tail(a);
  for (const auto& v : report.violations) {
    const MatrixXd jac = 3.0 * tncp::contract_to_matrix(at, v.x);
    const auto idx = tncp::mask_indices(v.subset_mask);
    MatrixXd sub(idx.size(), idx.size());
    for (std::size_t r = 0; r < idx.size(); ++r)
      for (std::size_t c = 0; c < idx.size(); ++c)
        sub(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) =
            jac(idx[r], idx[c]);
    EXPECT_NEAR(sub.determinant(), v.value, 1e-10 * (1.0 + std::abs(v.value)));
    EXPECT_TRUE(v.value < 0.5 || v.value > 2.0);
  }
}

TEST(MinorProbe, ZeroSamplesEmptyReport) {
  const auto report = tncp::minor_bounds_probe(Tensor<double>::identity(4, 2), 0.5, 0, 0);
  EXPECT_TRUE(report.violations.empty());
  EXPECT_EQ(report.samples, 0);
}

TEST(MinorProbe, BadDeltaRejected) {
  const Tensor<double> eye = Tensor<double>::identity(4, 2);
  EXPECT_THROW(tncp::minor_bounds_probe(eye, 1.0, 8, 0), std::invalid_argument);
  EXPECT_THROW(tncp::minor_bounds_probe(eye, 0.0, 8, 0), std::invalid_argument);
  EXPECT_THROW(tncp::minor_bounds_probe(eye, -0.5, 8, 0), std::invalid_argument);
}

TEST(MinorProbe, OddOrderRejected) {
  EXPECT_THROW(tncp::minor_bounds_probe(Tensor<double>::identity(3, 2), 0.5, 8, 0),
               std::invalid_argument);
}

}  // namespace
