#pragma once

#include <stdexcept>
#include <utility>
#include <vector>

#include "tncp/tensor.hpp"

namespace tncp {

enum class ProblemKind { Ncp, Gncp };

inline const char* to_string(ProblemKind k) { return k == ProblemKind::Ncp ? "NCP" : "GNCP"; }

/// A complementarity problem instance: find x >= 0 with F(x) >= 0 and
/// x . F(x) = 0, where
///   F(x) = A x^{m-1} + q                                  (single-tensor form)
///   F(x) = sum_k A_k x^{m-2k+1} + q,  orders m, m-2, .., 2 (graded form)
///
/// Every tensor is tail-symmetrized at construction. That leaves F bit-for-bit
/// unchanged on symmetric input and unchanged as a function in general, while
/// making the closed-form Jacobian sum_k (m_k - 1) A_k x^{m_k - 2} exact.
/// Instances are immutable; evaluation methods are const and thread-safe.
template <typename Scalar = double>
class ProblemInstance {
 public:
  static ProblemInstance ncp(const Tensor<Scalar>& A, VectorX<Scalar> q) {
    if (A.order() < 2 || A.order() % 2 != 0) {
      throw std::invalid_argument("solve paths require an even tensor order >= 2");
    }
    if (q.size() != A.dim()) throw std::invalid_argument("q length mismatch");
    ProblemInstance p;
    p.kind_ = ProblemKind::Ncp;
    p.tensors_.push_back(symmetrize_tail(A));
    p.q_ = std::move(q);
    return p;
  }

  /// Graded form: terms must descend in order by exactly 2 down to a square
  /// matrix (order 2).
  static ProblemInstance gncp(const std::vector<Tensor<Scalar>>& terms, VectorX<Scalar> q) {
    if (terms.empty()) throw std::invalid_argument("at least one tensor required");
    const int m = terms.front().order();
    const int n = terms.front().dim();
    if (static_cast<int>(terms.size()) != m / 2 || terms.back().order() != 2) {
      throw std::invalid_argument("tensor orders must step down m, m-2, ..., 2");
    }
    for (std::size_t k = 0; k < terms.size(); ++k) {
      if (terms[k].order() != m - 2 * static_cast<int>(k)) {
        throw std::invalid_argument("tensor orders must step down m, m-2, ..., 2");
      }
      if (terms[k].dim() != n) throw std::invalid_argument("tensor dimensions must agree");
    }
    if (q.size() != n) throw std::invalid_argument("q length mismatch");
    ProblemInstance p;
    p.kind_ = ProblemKind::Gncp;
    for (const auto& t : terms) p.tensors_.push_back(symmetrize_tail(t));
    p.q_ = std::move(q);
    return p;
  }

  ProblemKind kind() const noexcept { return kind_; }
  int order() const noexcept { return tensors_.front().order(); }
  int dim() const noexcept { return static_cast<int>(q_.size()); }
  const std::vector<Tensor<Scalar>>& tensors() const noexcept { return tensors_; }
  const VectorX<Scalar>& q() const noexcept { return q_; }

  /// q = 0 makes the problem degenerate (x = 0 solves it for definite
  /// tensors); allowed, but callers may want to warn.
  bool zero_q() const { return q_.isZero(Scalar(0)); }

  template <typename Derived>
  VectorX<Scalar> F(const Eigen::MatrixBase<Derived>& x) const {
    return G(x) + q_;
  }

  /// F(x) - F(0); for the single-tensor form this is positively homogeneous
  /// of degree m-1.
  template <typename Derived>
  VectorX<Scalar> G(const Eigen::MatrixBase<Derived>& x_expr) const {
    const VectorX<Scalar> x = check(x_expr);
    VectorX<Scalar> g = VectorX<Scalar>::Zero(dim());
    for (const auto& t : tensors_) g += contract_to_vector(t, x);
    return g;
  }

  template <typename Derived>
  MatrixX<Scalar> jacobian(const Eigen::MatrixBase<Derived>& x_expr) const {
    const VectorX<Scalar> x = check(x_expr);
    MatrixX<Scalar> jac = MatrixX<Scalar>::Zero(dim(), dim());
    for (const auto& t : tensors_) {
      jac += Scalar(t.order() - 1) * contract_to_matrix(t, x);
    }
    return jac;
  }

 private:
  ProblemInstance() = default;

  template <typename Derived>
  VectorX<Scalar> check(const Eigen::MatrixBase<Derived>& x) const {
    if (x.rows() != q_.size() || x.cols() != 1) {
      throw std::invalid_argument("x length mismatch");
    }
    return x;
  }

  ProblemKind kind_ = ProblemKind::Ncp;
  std::vector<Tensor<Scalar>> tensors_;
  VectorX<Scalar> q_;
};

}  // namespace tncp
