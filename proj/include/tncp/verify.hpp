#pragma once

#include <Eigen/Eigenvalues>

#include <cmath>
#include <cstdint>
#include <optional>
#include <random>
#include <stdexcept>

#include "tncp/problem.hpp"
#include "tncp/rng.hpp"
#include "tncp/tensor.hpp"

namespace tncp {

/// Membership in the feasible set { x >= 0, F(x) >= 0 }, within tol.
template <typename Scalar, typename Derived>
bool feasibility(const ProblemInstance<Scalar>& P, const Eigen::MatrixBase<Derived>& x,
                 Scalar tol) {
  const VectorX<Scalar> xv = x;
  return xv.minCoeff() >= -tol && P.F(xv).minCoeff() >= -tol;
}

/// Scalar residual used for solver stopping and reporting:
///   max( ||min(x, F(x))||_inf , |x.F(x)| / (1 + ||q||_1) ).
/// Zero exactly when x solves the problem.
template <typename Scalar, typename Derived>
Scalar complementarity_residual(const ProblemInstance<Scalar>& P,
                                const Eigen::MatrixBase<Derived>& x) {
  const VectorX<Scalar> xv = x;
  const VectorX<Scalar> f = P.F(xv);
  const Scalar minwise = xv.cwiseMin(f).cwiseAbs().maxCoeff();
  const Scalar gap = std::abs(xv.dot(f)) / (Scalar(1) + P.q().template lpNorm<1>());
  return std::max(minwise, gap);
}

/// First-order certificate for a candidate pair (x, u) of the constrained
/// reformulation min A x^m + q.x subject to F(x) >= 0, x >= 0. All four
/// multiplier blocks are evaluated, along with the per-index curvature
/// products whose nonpositivity the multiplier conditions imply.
template <typename Scalar>
struct KktCertificate {
  VectorX<Scalar> x;
  VectorX<Scalar> u;

  VectorX<Scalar> stationarity;      ///< q + m A x^{m-1} - (m-1) A x^{m-2} u
  Scalar stationarity_min = Scalar(0);
  Scalar stationarity_comp = Scalar(0);  ///< x . stationarity
  Scalar multiplier_min = Scalar(0);     ///< min u_i
  Scalar multiplier_comp = Scalar(0);    ///< u . (q + A x^{m-1})

  /// (m-1) (x-u)_i (A x^{m-2} (x-u))_i; splits exactly into the two parts
  /// below, which is asserted as an internal consistency identity.
  VectorX<Scalar> curvature_products;
  VectorX<Scalar> primal_products;      ///< (m-1) x_i (A x^{m-2} (x-u))_i
  VectorX<Scalar> multiplier_products;  ///< -(m-1) u_i (A x^{m-2} (x-u))_i

  bool passed = false;
};

/// Evaluates the multiplier conditions at (x, u) for a single-tensor instance.
/// `passed` requires stationarity >= -tol with complementarity |x.s| <= tol,
/// and u >= -tol with |u.F(x)| <= tol. Nothing is asserted about multiplier
/// existence; the certificate only judges the given pair.
template <typename Scalar, typename DerivedX, typename DerivedU>
KktCertificate<Scalar> kkt_check(const ProblemInstance<Scalar>& P,
                                 const Eigen::MatrixBase<DerivedX>& x_expr,
                                 const Eigen::MatrixBase<DerivedU>& u_expr,
                                 Scalar tol = Scalar(1e-8)) {
  if (P.kind() != ProblemKind::Ncp) {
    throw std::invalid_argument("kkt_check supports single-tensor instances only");
  }
  const int n = P.dim();
  if (x_expr.rows() != n || u_expr.rows() != n || x_expr.cols() != 1 || u_expr.cols() != 1) {
    throw std::invalid_argument("x/u length mismatch");
  }
  const VectorX<Scalar> x = x_expr;
  const VectorX<Scalar> u = u_expr;
  const Tensor<Scalar>& A = P.tensors().front();
  const Scalar m = Scalar(A.order());

  const VectorX<Scalar> power_vec = contract_to_vector(A, x);   // A x^{m-1}
  const MatrixX<Scalar> power_mat = contract_to_matrix(A, x);   // A x^{m-2}

  KktCertificate<Scalar> cert;
  cert.x = x;
  cert.u = u;
  cert.stationarity = P.q() + m * power_vec - (m - 1) * (power_mat * u);
  cert.stationarity_min = cert.stationarity.minCoeff();
  cert.stationarity_comp = x.dot(cert.stationarity);
  cert.multiplier_min = u.minCoeff();
  cert.multiplier_comp = u.dot(P.q() + power_vec);

  const VectorX<Scalar> w = power_mat * (x - u);
  cert.curvature_products = (m - 1) * (x - u).cwiseProduct(w);
  cert.primal_products = (m - 1) * x.cwiseProduct(w);
  cert.multiplier_products = -(m - 1) * u.cwiseProduct(w);

  cert.passed = cert.stationarity_min >= -tol && std::abs(cert.stationarity_comp) <= tol &&
                cert.multiplier_min >= -tol && std::abs(cert.multiplier_comp) <= tol;
  return cert;
}

/// True iff the symmetric part of A x^{m-2} is positive definite at the given
/// nonzero x (smallest eigenvalue > tol). The "for all nonzero x" form is a
/// sampling concern of the caller.
template <typename Scalar, typename Derived>
bool contraction_matrix_pd(const ProblemInstance<Scalar>& P,
                           const Eigen::MatrixBase<Derived>& x_expr, Scalar tol = Scalar(1e-8)) {
  if (P.kind() != ProblemKind::Ncp) {
    throw std::invalid_argument("contraction_matrix_pd supports single-tensor instances only");
  }
  const VectorX<Scalar> x = x_expr;
  if (x.size() != P.dim()) throw std::invalid_argument("x length mismatch");
  if (x.isZero(Scalar(0))) throw std::invalid_argument("x must be nonzero");
  const MatrixX<Scalar> m = contract_to_matrix(P.tensors().front(), x);
  const MatrixX<Scalar> sym = Scalar(0.5) * (m + m.transpose());
  Eigen::SelfAdjointEigenSolver<MatrixX<Scalar>> eig(sym, Eigen::EigenvaluesOnly);
  return eig.eigenvalues().minCoeff() > tol;
}

/// Searches for a feasible point: the scaled all-ones ladder 0, 1, 2, 4, ...
/// first, then seeded random nonnegative points. Absence of a hit proves
/// nothing about emptiness.
template <typename Scalar>
std::optional<VectorX<Scalar>> feasibility_probe(const ProblemInstance<Scalar>& P,
                                                 long budget = 64, std::uint64_t seed = 0) {
  const int n = P.dim();
  long used = 0;

  VectorX<Scalar> x = VectorX<Scalar>::Zero(n);
  Scalar lambda(0);
  while (used < budget) {
    x = VectorX<Scalar>::Constant(n, lambda);
    ++used;
    if (feasibility(P, x, Scalar(0))) return x;
    lambda = (lambda == Scalar(0)) ? Scalar(1) : lambda * Scalar(2);
    if (lambda > Scalar(1e12)) break;
  }

  std::mt19937_64 rng(seed);
  while (used < budget) {
    const Scalar scale = std::pow(Scalar(10), Scalar(uniform(rng, -1.0, 1.5)));
    for (int i = 0; i < n; ++i) x[i] = scale * Scalar(uniform01(rng));
    ++used;
    if (feasibility(P, x, Scalar(0))) return x;
  }
  return std::nullopt;
}

}  // namespace tncp
