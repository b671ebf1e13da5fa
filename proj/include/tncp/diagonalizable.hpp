#pragma once

#include <cmath>
#include <stdexcept>
#include <utility>

#include "tncp/tensor.hpp"

namespace tncp {

/// Relative singularity threshold for the change-of-basis matrix: B counts as
/// invertible when |det B| > tol * ||B||_F^n. det scales like ||B||^n, so the
/// test is scale invariant.
template <typename Scalar>
bool basis_is_invertible(const MatrixX<Scalar>& B, Scalar tol = Scalar(1e-10)) {
  if (B.rows() != B.cols()) throw std::invalid_argument("basis matrix must be square");
  const Scalar frob = B.norm();
  if (!(frob > Scalar(0))) return false;
  const Scalar scale = std::pow(frob, static_cast<int>(B.rows()));
  return std::abs(B.determinant()) > tol * scale;
}

/// Diagonal entries d plus an invertible basis B. Realizing the form applies
/// B to every mode of the diagonal tensor built from d, producing the
/// symmetric tensor  diag(d) x_1 B x_2 B ... x_m B.
template <typename Scalar = double>
struct DiagonalizableForm {
  VectorX<Scalar> diag;
  MatrixX<Scalar> basis;

  int dim() const { return static_cast<int>(diag.size()); }
};

/// Realizes the form as a dense order-`order` tensor via repeated mode
/// products. Throws if the basis is singular or shapes disagree.
template <typename Scalar>
Tensor<Scalar> realize(const DiagonalizableForm<Scalar>& form, int order) {
  if (form.basis.rows() != form.diag.size() || form.basis.cols() != form.diag.size()) {
    throw std::invalid_argument("basis shape does not match diagonal length");
  }
  if (!basis_is_invertible(form.basis)) {
    throw std::invalid_argument("basis matrix is singular (|det B| below tolerance)");
  }
  Tensor<Scalar> T = Tensor<Scalar>::diagonal(order, form.diag);
  for (int k = 0; k < order; ++k) T = mode_product(T, form.basis, k);
  return T;
}

}  // namespace tncp
