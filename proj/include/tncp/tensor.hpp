#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <span>
#include <stdexcept>
#include <utility>
#include <vector>

namespace tncp {

template <typename Scalar>
using VectorX = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

template <typename Scalar>
using MatrixX = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

namespace detail {

template <typename Scalar>
using ConstRowMajorMap =
    Eigen::Map<const Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>;

template <typename Scalar>
using RowMajorMap =
    Eigen::Map<Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>;

template <typename Derived>
inline constexpr bool is_vector_expr = Derived::ColsAtCompileTime == 1;

/// dim^order with an overflow guard; the dense storage is desk scale by design.
inline Eigen::Index entry_count(int order, int dim) {
  std::uint64_t count = 1;
  for (int k = 0; k < order; ++k) {
    count *= static_cast<std::uint64_t>(dim);
    if (count > (std::uint64_t{1} << 30)) {
      throw std::invalid_argument("tensor too large: dim^order exceeds dense storage limit");
    }
  }
  return static_cast<Eigen::Index>(count);
}

}  // namespace detail

/// Dense real tensor of order m and dimension n (n^m entries).
///
/// Entries are stored in lexicographic order with the first index slowest and
/// the last index fastest; all indices are 0-based in this API (the text file
/// formats are 1-based and converted on parse). Tensors are immutable after
/// construction, so values may be shared freely across threads.
///
/// Order 0 (a single scalar) arises as the result of contracting every mode
/// and is only constructible through `scalar()`.
template <typename Scalar = double>
class Tensor {
 public:
  /// Validates and takes ownership of a dense entry vector of length dim^order.
  Tensor(int order, int dim, VectorX<Scalar> entries) : order_(order), dim_(dim) {
    if (order < 1) throw std::invalid_argument("tensor order must be >= 1");
    check_and_adopt(std::move(entries));
  }

  template <typename Derived>
  Tensor(int order, int dim, const Eigen::MatrixBase<Derived>& entries)
      : Tensor(order, dim, VectorX<Scalar>(entries)) {}

  Tensor(int order, int dim, std::initializer_list<Scalar> entries)
      : Tensor(order, dim,
               VectorX<Scalar>(Eigen::Map<const VectorX<Scalar>>(
                   entries.begin(), static_cast<Eigen::Index>(entries.size())))) {}

  /// Order-0 tensor holding one scalar; closes the contraction algebra.
  static Tensor scalar(int dim, Scalar value) {
    Tensor t;
    t.order_ = 0;
    t.dim_ = dim;
    t.check_and_adopt(VectorX<Scalar>::Constant(1, value));
    return t;
  }

  static Tensor zero(int order, int dim) {
    if (order < 1) throw std::invalid_argument("tensor order must be >= 1");
    if (dim < 1) throw std::invalid_argument("tensor dim must be >= 1");
    return Tensor(order, dim, VectorX<Scalar>::Zero(detail::entry_count(order, dim)));
  }

  /// The identity tensor: entries (i,i,...,i) equal 1, all others 0.
  static Tensor identity(int order, int dim) {
    Tensor t = zero(order, dim);
    for (int i = 0; i < dim; ++i) t.entries_[t.diagonal_index(i)] = Scalar(1);
    return t;
  }

  /// Diagonal tensor with prescribed diagonal entries.
  static Tensor diagonal(int order, const VectorX<Scalar>& diag) {
    Tensor t = zero(order, static_cast<int>(diag.size()));
    for (int i = 0; i < t.dim_; ++i) t.entries_[t.diagonal_index(i)] = diag[i];
    return t;
  }

  int order() const noexcept { return order_; }
  int dim() const noexcept { return dim_; }
  Eigen::Index size() const noexcept { return entries_.size(); }
  const VectorX<Scalar>& entries() const noexcept { return entries_; }

  /// Linear offset of a 0-based index tuple (length must equal the order).
  Eigen::Index linear_index(std::span<const int> indices) const {
    if (static_cast<int>(indices.size()) != order_) {
      throw std::invalid_argument("index tuple length does not match tensor order");
    }
    Eigen::Index lin = 0;
    for (int idx : indices) {
      if (idx < 0 || idx >= dim_) throw std::out_of_range("tensor index out of range");
      lin = lin * dim_ + idx;
    }
    return lin;
  }

  /// Decodes a linear offset into the 0-based index tuple it addresses.
  void unravel(Eigen::Index linear, std::span<int> indices) const {
    for (int k = order_ - 1; k >= 0; --k) {
      indices[static_cast<std::size_t>(k)] = static_cast<int>(linear % dim_);
      linear /= dim_;
    }
  }

  Scalar operator()(std::span<const int> indices) const { return entries_[linear_index(indices)]; }

  Scalar operator()(std::initializer_list<int> indices) const {
    return (*this)(std::span<const int>(indices.begin(), indices.size()));
  }

  /// Value of an order-0 tensor.
  Scalar as_scalar() const {
    if (order_ != 0) throw std::logic_error("as_scalar requires an order-0 tensor");
    return entries_[0];
  }

  /// Order-1 tensor as a dense vector.
  VectorX<Scalar> as_vector() const {
    if (order_ != 1) throw std::logic_error("as_vector requires an order-1 tensor");
    return entries_;
  }

  /// Order-2 tensor as a dense matrix, modes (1,2) = (row, column).
  MatrixX<Scalar> as_matrix() const {
    if (order_ != 2) throw std::logic_error("as_matrix requires an order-2 tensor");
    return detail::ConstRowMajorMap<Scalar>(entries_.data(), dim_, dim_);
  }

  bool operator==(const Tensor& other) const {
    return order_ == other.order_ && dim_ == other.dim_ && entries_ == other.entries_;
  }

 private:
  Tensor() = default;

  void check_and_adopt(VectorX<Scalar> entries) {
    if (dim_ < 1) throw std::invalid_argument("tensor dim must be >= 1");
    if (entries.size() != detail::entry_count(order_, dim_)) {
      throw std::invalid_argument("tensor entry count does not equal dim^order");
    }
    if (!entries.allFinite()) throw std::invalid_argument("tensor entries must be finite");
    entries_ = std::move(entries);
  }

  Eigen::Index diagonal_index(int i) const {
    Eigen::Index lin = 0;
    for (int k = 0; k < order_; ++k) lin = lin * dim_ + i;
    return lin;
  }

  int order_ = 0;
  int dim_ = 1;
  VectorX<Scalar> entries_;
};

/// Mode-k product with a square matrix:
/// C_{i1..j..im} = sum_{ik} A_{i1..ik..im} * B(j, ik), j replacing index k.
/// `mode` is 0-based. The order and dimension are unchanged.
template <typename Scalar, typename Derived>
  requires(!detail::is_vector_expr<Derived>)
Tensor<Scalar> mode_product(const Tensor<Scalar>& A, const Eigen::MatrixBase<Derived>& B_expr,
                            int mode) {
  const int n = A.dim();
  if (mode < 0 || mode >= A.order()) throw std::invalid_argument("mode out of range");
  if (B_expr.rows() != n || B_expr.cols() != n) throw std::invalid_argument("matrix shape mismatch");
  const MatrixX<Scalar> B = B_expr;

  const Eigen::Index inner = A.size() / detail::entry_count(mode + 1, n);
  const Eigen::Index outer = A.size() / (inner * n);
  VectorX<Scalar> result(A.size());
  for (Eigen::Index a = 0; a < outer; ++a) {
    detail::ConstRowMajorMap<Scalar> slice(A.entries().data() + a * n * inner, n, inner);
    detail::RowMajorMap<Scalar> out(result.data() + a * n * inner, n, inner);
    out = B * slice;
  }
  return Tensor<Scalar>(A.order(), n, std::move(result));
}

/// Mode-k product with a vector: contracts away mode k (0-based), producing an
/// order m-1 tensor (order 0 when A is order 1).
template <typename Scalar, typename Derived>
  requires detail::is_vector_expr<Derived>
Tensor<Scalar> mode_product(const Tensor<Scalar>& A, const Eigen::MatrixBase<Derived>& x_expr,
                            int mode) {
  const int n = A.dim();
  if (mode < 0 || mode >= A.order()) throw std::invalid_argument("mode out of range");
  if (x_expr.size() != n) throw std::invalid_argument("vector length mismatch");
  const VectorX<Scalar> x = x_expr;

  const Eigen::Index inner = A.size() / detail::entry_count(mode + 1, n);
  const Eigen::Index outer = A.size() / (inner * n);
  VectorX<Scalar> out(outer * inner);
  for (Eigen::Index a = 0; a < outer; ++a) {
    detail::ConstRowMajorMap<Scalar> slice(A.entries().data() + a * n * inner, n, inner);
    out.segment(a * inner, inner) = slice.transpose() * x;
  }
  if (A.order() == 1) return Tensor<Scalar>::scalar(n, out[0]);
  return Tensor<Scalar>(A.order() - 1, n, std::move(out));
}

/// Contracts the trailing `count` modes with the same vector x.
///
/// This fixes the contraction convention for the whole library: A x^{m-1} is
/// indexed by mode 1 and A x^{m-2} by modes (1,2), so that
/// A x^m = x . (A x^{m-1}) = x . (A x^{m-2} x) holds for every tensor,
/// symmetric or not.
template <typename Scalar, typename Derived>
Tensor<Scalar> contract(const Tensor<Scalar>& A, const Eigen::MatrixBase<Derived>& x_expr,
                        int count) {
  const int n = A.dim();
  if (count < 0 || count > A.order()) throw std::invalid_argument("contraction count out of range");
  if (x_expr.rows() != n || x_expr.cols() != 1)
    throw std::invalid_argument("vector length mismatch");
  if (count == 0) return A;
  const VectorX<Scalar> x = x_expr;

  VectorX<Scalar> cur = A.entries();
  for (int c = 0; c < count; ++c) {
    const Eigen::Index rows = cur.size() / n;
    detail::ConstRowMajorMap<Scalar> m(cur.data(), rows, n);
    VectorX<Scalar> next = m * x;
    cur = std::move(next);
  }
  const int res_order = A.order() - count;
  if (res_order == 0) return Tensor<Scalar>::scalar(n, cur[0]);
  return Tensor<Scalar>(res_order, n, std::move(cur));
}

/// A x^m.
template <typename Scalar, typename Derived>
Scalar contract_all(const Tensor<Scalar>& A, const Eigen::MatrixBase<Derived>& x) {
  return contract(A, x, A.order()).as_scalar();
}

/// A x^{m-1}, indexed by mode 1.
template <typename Scalar, typename Derived>
VectorX<Scalar> contract_to_vector(const Tensor<Scalar>& A, const Eigen::MatrixBase<Derived>& x) {
  return contract(A, x, A.order() - 1).as_vector();
}

/// A x^{m-2}, indexed by modes (1,2).
template <typename Scalar, typename Derived>
MatrixX<Scalar> contract_to_matrix(const Tensor<Scalar>& A, const Eigen::MatrixBase<Derived>& x) {
  return contract(A, x, A.order() - 2).as_matrix();
}

template <typename Scalar>
Tensor<Scalar> operator+(const Tensor<Scalar>& a, const Tensor<Scalar>& b) {
  if (a.order() != b.order() || a.dim() != b.dim()) {
    throw std::invalid_argument("tensor shape mismatch");
  }
  if (a.order() == 0) return Tensor<Scalar>::scalar(a.dim(), a.as_scalar() + b.as_scalar());
  return Tensor<Scalar>(a.order(), a.dim(), VectorX<Scalar>(a.entries() + b.entries()));
}

template <typename Scalar>
Tensor<Scalar> operator*(Scalar c, const Tensor<Scalar>& a) {
  if (a.order() == 0) return Tensor<Scalar>::scalar(a.dim(), c * a.as_scalar());
  return Tensor<Scalar>(a.order(), a.dim(), VectorX<Scalar>(c * a.entries()));
}

/// True iff every entry agrees with the entry at its sorted index tuple
/// within `tol`, i.e. the tensor is permutation invariant.
template <typename Scalar>
bool is_symmetric(const Tensor<Scalar>& A, Scalar tol = Scalar(1e-12)) {
  if (tol < Scalar(0)) throw std::invalid_argument("tolerance must be nonnegative");
  if (A.order() <= 1) return true;
  std::vector<int> idx(static_cast<std::size_t>(A.order()));
  for (Eigen::Index lin = 0; lin < A.size(); ++lin) {
    A.unravel(lin, idx);
    std::vector<int> sorted = idx;
    std::sort(sorted.begin(), sorted.end());
    if (std::abs(A.entries()[lin] - A(sorted)) > tol) return false;
  }
  return true;
}

/// True iff every entry whose index tuple is non-constant is within `tol` of 0.
template <typename Scalar>
bool is_diagonal(const Tensor<Scalar>& A, Scalar tol = Scalar(1e-12)) {
  if (tol < Scalar(0)) throw std::invalid_argument("tolerance must be nonnegative");
  std::vector<int> idx(static_cast<std::size_t>(A.order()));
  for (Eigen::Index lin = 0; lin < A.size(); ++lin) {
    A.unravel(lin, idx);
    const bool constant = std::all_of(idx.begin(), idx.end(), [&](int i) { return i == idx[0]; });
    if (!constant && std::abs(A.entries()[lin]) > tol) return false;
  }
  return true;
}

namespace detail {

/// Averages entries over permutation classes. Tuples sharing a canonical form
/// (sorted tuple, with the first `fixed` indices left in place) are replaced
/// by their class mean. Averaging over the distinct rearrangements equals
/// averaging over all permutations because each rearrangement is hit by the
/// same number of permutations.
template <typename Scalar>
Tensor<Scalar> symmetrize_impl(const Tensor<Scalar>& A, int fixed) {
  if (A.order() - fixed <= 1) return A;
  {
    // already symmetric: return the input bit-for-bit (exact idempotence)
    std::vector<int> idx(static_cast<std::size_t>(A.order()));
    bool symmetric = true;
    for (Eigen::Index lin = 0; lin < A.size() && symmetric; ++lin) {
      A.unravel(lin, idx);
      std::sort(idx.begin() + fixed, idx.end());
      symmetric = A.entries()[lin] == A.entries()[A.linear_index(idx)];
    }
    if (symmetric) return A;
  }
  VectorX<Scalar> sums = VectorX<Scalar>::Zero(A.size());
  Eigen::VectorXi counts = Eigen::VectorXi::Zero(A.size());
  std::vector<int> idx(static_cast<std::size_t>(A.order()));
  std::vector<Eigen::Index> canon(static_cast<std::size_t>(A.size()));
  for (Eigen::Index lin = 0; lin < A.size(); ++lin) {
    A.unravel(lin, idx);
    std::sort(idx.begin() + fixed, idx.end());
    const Eigen::Index c = A.linear_index(idx);
    canon[static_cast<std::size_t>(lin)] = c;
    sums[c] += A.entries()[lin];
    counts[c] += 1;
  }
  VectorX<Scalar> out(A.size());
  for (Eigen::Index lin = 0; lin < A.size(); ++lin) {
    const Eigen::Index c = canon[static_cast<std::size_t>(lin)];
    out[lin] = sums[c] / Scalar(counts[c]);
  }
  return Tensor<Scalar>(A.order(), A.dim(), std::move(out));
}

}  // namespace detail

/// Average of A over all permutations of its index tuple. Preserves A x^m for
/// every x; idempotent; the result passes is_symmetric exactly.
template <typename Scalar>
Tensor<Scalar> symmetrize(const Tensor<Scalar>& A) {
  return detail::symmetrize_impl(A, 0);
}

/// Average of A over permutations of modes 2..m only (mode 1 fixed).
/// Preserves A x^{m-1} for every x and makes the closed-form Jacobian
/// (m-1) A x^{m-2} exact for non-symmetric input.
template <typename Scalar>
Tensor<Scalar> symmetrize_tail(const Tensor<Scalar>& A) {
  return detail::symmetrize_impl(A, 1);
}

}  // namespace tncp
