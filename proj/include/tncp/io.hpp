#pragma once

#include <charconv>
#include <cstdint>
#include <cstdio>
#include <limits>
#include <optional>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "tncp/problem.hpp"
#include "tncp/tensor.hpp"

// Text formats. Whitespace-tolerant, '#' starts a comment that runs to the
// end of the line, all indices are 1-based on disk.
//
//   tensor <m> <n>                 dense: n^m reals, first index slowest
//   tensor-sparse <m> <n> <nnz>    nnz lines "i1 ... im value"
//   vector <n>                     n reals
//   gtcp <m> <n>                   m/2 tensor blocks (orders m, m-2, ..., 2)
//                                  followed by one vector block for q

namespace tncp {

class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& message, int line)
      : std::runtime_error("line " + std::to_string(line) + ": " + message), line_(line) {}

  int line() const noexcept { return line_; }

 private:
  int line_;
};

namespace detail {

/// Splits text into whitespace-separated tokens, tracking the line each token
/// starts on and skipping '#' comments.
class TokenStream {
 public:
  explicit TokenStream(std::string_view text) : text_(text) {}

  std::optional<std::string_view> next() {
    skip_separators();
    if (pos_ >= text_.size()) return std::nullopt;
    const std::size_t start = pos_;
    token_line_ = line_;
    while (pos_ < text_.size() && !is_space(text_[pos_]) && text_[pos_] != '#') ++pos_;
    return text_.substr(start, pos_ - start);
  }

  std::string_view expect(const char* what) {
    const auto tok = next();
    if (!tok) throw ParseError(std::string("expected ") + what + ", found end of input", line_);
    return *tok;
  }

  bool at_end() {
    skip_separators();
    return pos_ >= text_.size();
  }

  /// Line of the most recently returned token (1-based).
  int line() const noexcept { return token_line_; }

 private:
  static bool is_space(char c) {
    return c == ' ' || c == '\t' || c == '\r' || c == '\n' || c == '\v' || c == '\f';
  }

  void skip_separators() {
    while (pos_ < text_.size()) {
      const char c = text_[pos_];
      if (c == '\n') {
        ++line_;
        ++pos_;
      } else if (is_space(c)) {
        ++pos_;
      } else if (c == '#') {
        while (pos_ < text_.size() && text_[pos_] != '\n') ++pos_;
      } else {
        break;
      }
    }
  }

  std::string_view text_;
  std::size_t pos_ = 0;
  int line_ = 1;
  int token_line_ = 1;
};

inline int parse_int(TokenStream& ts, const char* what) {
  const std::string_view tok = ts.expect(what);
  int value = 0;
  const auto res = std::from_chars(tok.data(), tok.data() + tok.size(), value);
  if (res.ec != std::errc{} || res.ptr != tok.data() + tok.size()) {
    throw ParseError("non-numeric token '" + std::string(tok) + "' where " + what + " expected",
                     ts.line());
  }
  return value;
}

template <typename Scalar>
Scalar parse_real(TokenStream& ts, const char* what) {
  const std::string_view tok = ts.expect(what);
  double value = 0;
  const auto res = std::from_chars(tok.data(), tok.data() + tok.size(), value);
  if (res.ec != std::errc{} || res.ptr != tok.data() + tok.size()) {
    throw ParseError("non-numeric token '" + std::string(tok) + "' where " + what + " expected",
                     ts.line());
  }
  return Scalar(value);
}

template <typename Scalar>
Tensor<Scalar> parse_tensor_block(TokenStream& ts) {
  const std::string_view head = ts.expect("'tensor' or 'tensor-sparse' header");
  const int header_line = ts.line();
  const bool sparse = head == "tensor-sparse";
  if (!sparse && head != "tensor") {
    throw ParseError("malformed header: expected 'tensor' or 'tensor-sparse', found '" +
                         std::string(head) + "'",
                     header_line);
  }
  const int order = parse_int(ts, "tensor order");
  const int dim = parse_int(ts, "tensor dimension");
  if (order < 1 || dim < 1) throw ParseError("order and dimension must be >= 1", header_line);
  const Eigen::Index count = detail::entry_count(order, dim);

  VectorX<Scalar> entries = VectorX<Scalar>::Zero(count);
  if (sparse) {
    const int nnz = parse_int(ts, "nonzero count");
    if (nnz < 0) throw ParseError("nonzero count must be >= 0", ts.line());
    std::vector<int> idx(static_cast<std::size_t>(order));
    for (int e = 0; e < nnz; ++e) {
      Eigen::Index lin = 0;
      for (int k = 0; k < order; ++k) {
        const int i = parse_int(ts, "tensor index");
        if (i < 1 || i > dim) {
          throw ParseError("index " + std::to_string(i) + " out of range [1, " +
                               std::to_string(dim) + "]",
                           ts.line());
        }
        lin = lin * dim + (i - 1);
      }
      entries[lin] = parse_real<Scalar>(ts, "entry value");
    }
  } else {
    for (Eigen::Index e = 0; e < count; ++e) {
      const auto tok = ts.next();
      if (!tok) {
        throw ParseError("entry count mismatch: expected " + std::to_string(count) +
                             " entries, found " + std::to_string(e),
                         ts.line());
      }
      double value = 0;
      const auto res = std::from_chars(tok->data(), tok->data() + tok->size(), value);
      if (res.ec != std::errc{} || res.ptr != tok->data() + tok->size()) {
        throw ParseError("non-numeric token '" + std::string(*tok) + "'", ts.line());
      }
      entries[e] = Scalar(value);
    }
  }
  try {
    return Tensor<Scalar>(order, dim, std::move(entries));
  } catch (const std::invalid_argument& err) {
    throw ParseError(err.what(), header_line);
  }
}

template <typename Scalar>
VectorX<Scalar> parse_vector_block(TokenStream& ts) {
  const std::string_view head = ts.expect("'vector' header");
  if (head != "vector") {
    throw ParseError("malformed header: expected 'vector', found '" + std::string(head) + "'",
                     ts.line());
  }
  const int n = parse_int(ts, "vector length");
  if (n < 1) throw ParseError("vector length must be >= 1", ts.line());
  VectorX<Scalar> v(n);
  for (int i = 0; i < n; ++i) v[i] = parse_real<Scalar>(ts, "vector entry");
  return v;
}

inline void expect_end(TokenStream& ts) {
  if (!ts.at_end()) {
    const auto tok = ts.next();
    throw ParseError("unexpected trailing content '" + std::string(*tok) + "'", ts.line());
  }
}

}  // namespace detail

/// First keyword of a file, used to dispatch instance loading.
enum class FileKind { Tensor, Vector, Gncp, Unknown };

inline FileKind classify_text(std::string_view text) {
  detail::TokenStream ts(text);
  const auto tok = ts.next();
  if (!tok) return FileKind::Unknown;
  if (*tok == "tensor" || *tok == "tensor-sparse") return FileKind::Tensor;
  if (*tok == "vector") return FileKind::Vector;
  if (*tok == "gtcp") return FileKind::Gncp;
  return FileKind::Unknown;
}

template <typename Scalar = double>
Tensor<Scalar> parse_tensor(std::string_view text) {
  detail::TokenStream ts(text);
  Tensor<Scalar> t = detail::parse_tensor_block<Scalar>(ts);
  detail::expect_end(ts);
  return t;
}

template <typename Scalar = double>
VectorX<Scalar> parse_vector(std::string_view text) {
  detail::TokenStream ts(text);
  VectorX<Scalar> v = detail::parse_vector_block<Scalar>(ts);
  detail::expect_end(ts);
  return v;
}

/// Parses a graded instance: `gtcp <m> <n>`, the m/2 tensor blocks in
/// descending order, then the vector block for q.
template <typename Scalar = double>
ProblemInstance<Scalar> parse_gncp(std::string_view text) {
  detail::TokenStream ts(text);
  const std::string_view head = ts.expect("'gtcp' header");
  if (head != "gtcp") {
    throw ParseError("malformed header: expected 'gtcp', found '" + std::string(head) + "'",
                     ts.line());
  }
  const int header_line = ts.line();
  const int m = parse_int(ts, "problem order");
  const int n = parse_int(ts, "problem dimension");
  if (m < 2 || m % 2 != 0) throw ParseError("problem order must be even and >= 2", header_line);
  if (n < 1) throw ParseError("problem dimension must be >= 1", header_line);

  std::vector<Tensor<Scalar>> terms;
  for (int k = 0; k < m / 2; ++k) {
    Tensor<Scalar> t = detail::parse_tensor_block<Scalar>(ts);
    if (t.order() != m - 2 * k || t.dim() != n) {
      throw ParseError("block " + std::to_string(k + 1) + " must be an order-" +
                           std::to_string(m - 2 * k) + " dimension-" + std::to_string(n) +
                           " tensor",
                       ts.line());
    }
    terms.push_back(std::move(t));
  }
  VectorX<Scalar> q = detail::parse_vector_block<Scalar>(ts);
  if (q.size() != n) throw ParseError("q must have length " + std::to_string(n), ts.line());
  detail::expect_end(ts);
  return ProblemInstance<Scalar>::gncp(terms, std::move(q));
}

namespace detail {

/// Shortest-exact formatting is not enough for hand-diffing fixtures; 17
/// significant digits round-trip every double exactly.
inline std::string format_real(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace detail

template <typename Scalar>
void write_tensor(std::ostream& os, const Tensor<Scalar>& t, bool sparse = false) {
  if (sparse) {
    std::vector<Eigen::Index> nonzero;
    for (Eigen::Index i = 0; i < t.size(); ++i)
      if (t.entries()[i] != Scalar(0)) nonzero.push_back(i);
    os << "tensor-sparse " << t.order() << ' ' << t.dim() << ' ' << nonzero.size() << '\n';
    std::vector<int> idx(static_cast<std::size_t>(t.order()));
    for (const Eigen::Index lin : nonzero) {
      t.unravel(lin, idx);
      for (int i : idx) os << (i + 1) << ' ';
      os << detail::format_real(static_cast<double>(t.entries()[lin])) << '\n';
    }
    return;
  }
  os << "tensor " << t.order() << ' ' << t.dim() << '\n';
  const int per_line = t.dim();
  for (Eigen::Index i = 0; i < t.size(); ++i) {
    os << detail::format_real(static_cast<double>(t.entries()[i]));
    os << (((i + 1) % per_line == 0) ? '\n' : ' ');
  }
}

template <typename Scalar>
void write_vector(std::ostream& os, const VectorX<Scalar>& v) {
  os << "vector " << v.size() << '\n';
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    os << detail::format_real(static_cast<double>(v[i]));
    os << ((i + 1 < v.size()) ? ' ' : '\n');
  }
}

template <typename Scalar>
void write_gncp(std::ostream& os, const ProblemInstance<Scalar>& p) {
  os << "gtcp " << p.order() << ' ' << p.dim() << '\n';
  for (const auto& t : p.tensors()) write_tensor(os, t);
  write_vector(os, p.q());
}

template <typename Scalar>
std::string to_text(const Tensor<Scalar>& t, bool sparse = false) {
  std::ostringstream os;
  write_tensor(os, t, sparse);
  return os.str();
}

template <typename Scalar>
std::string to_text(const VectorX<Scalar>& v) {
  std::ostringstream os;
  write_vector(os, v);
  return os.str();
}

}  // namespace tncp
