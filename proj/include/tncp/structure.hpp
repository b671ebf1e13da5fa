#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <random>
#include <stdexcept>
#include <utility>
#include <vector>

#include "tncp/rng.hpp"
#include "tncp/tensor.hpp"

namespace tncp {

/// Settings shared by the multi-start certification routines. All randomness
/// flows from `seed`, so verdicts are reproducible given (seed, budgets).
struct OptimizerOptions {
  int starts = 64;            ///< local descents per minimization
  int max_iter = 400;         ///< iterations per descent
  int grid_resolution = 24;   ///< coarse seeding grid on the weight simplex (dim <= 4)
  int sphere_samples = 10000; ///< random cross-check samples for definiteness
  std::uint64_t seed = 0;
};

namespace detail {

/// Feasible-set geometry for the normalized descent below.
enum class DescentSet {
  MNormOrthant,  // { y >= 0, sum y_i^m = 1 }
  MNormFree,     // { sum y_i^m = 1 }, even order only
  Sphere,        // { ||y||_2 = 1 }
};

template <typename Scalar>
struct DescentResult {
  Scalar value;
  VectorX<Scalar> argmin;
};

/// Minimizes A y^m over the given set by projected gradient descent on the
/// degree-0 homogeneous ratio A y^m / s(y), renormalizing each accepted
/// iterate back to s(y) = 1. A must be symmetric (the gradient of A y^m is
/// m A y^{m-1} only then). Monotone descent with an adaptive step; stops when
/// the step collapses or the budget runs out.
template <typename Scalar>
DescentResult<Scalar> normalized_descent(const Tensor<Scalar>& A, VectorX<Scalar> y,
                                         DescentSet set, int max_iter) {
  const int m = A.order();
  const auto project = [&](VectorX<Scalar> v) {
    if (set == DescentSet::MNormOrthant) v = v.cwiseMax(Scalar(0));
    return v;
  };
  const auto norm_scale = [&](const VectorX<Scalar>& v) -> Scalar {
    if (set == DescentSet::Sphere) return std::pow(v.norm(), Scalar(m));
    return v.array().pow(m).sum();
  };
  const auto renormalize = [&](VectorX<Scalar>& v) -> bool {
    const Scalar s = norm_scale(v);
    if (!(s > Scalar(0)) || !std::isfinite(s)) return false;
    v /= std::pow(s, Scalar(1) / Scalar(m));
    return true;
  };

  if (!renormalize(y)) throw std::invalid_argument("descent start must be nonzero");
  Scalar f = contract_all(A, y);
  Scalar step(1);

  for (int iter = 0; iter < max_iter; ++iter) {
    // gradient of the ratio at s(y) = 1
    VectorX<Scalar> w;
    if (set == DescentSet::Sphere) {
      w = y;  // ||y||^{m-2} y with ||y|| = 1
    } else {
      w = y.array().pow(m - 1);
    }
    const VectorX<Scalar> grad = Scalar(m) * (contract_to_vector(A, y) - f * w);

    bool accepted = false;
    for (int halve = 0; halve < 45 && !accepted; ++halve) {
      VectorX<Scalar> cand = project(y - step * grad);
      if (!renormalize(cand)) {
        step *= Scalar(0.5);
        continue;
      }
      const Scalar fc = contract_all(A, cand);
      if (fc < f - Scalar(1e-14) * (Scalar(1) + std::abs(f))) {
        y = std::move(cand);
        f = fc;
        step = std::min(step * Scalar(2), Scalar(1e3));
        accepted = true;
      } else {
        step *= Scalar(0.5);
      }
    }
    if (!accepted || step < Scalar(1e-14)) break;
  }
  return {f, std::move(y)};
}

/// Visits compositions k_1 + ... + k_n = total of nonnegative integers.
template <typename Fn>
void for_each_composition(int n, int total, std::vector<int>& k, int pos, Fn&& fn) {
  if (pos == n - 1) {
    k[static_cast<std::size_t>(pos)] = total;
    fn(k);
    return;
  }
  for (int v = 0; v <= total; ++v) {
    k[static_cast<std::size_t>(pos)] = v;
    for_each_composition(n, total - v, k, pos + 1, fn);
  }
}

template <typename Scalar>
Tensor<Scalar> symmetric_view(const Tensor<Scalar>& A, Scalar tol = Scalar(1e-12)) {
  return is_symmetric(A, tol) ? A : symmetrize(A);
}

}  // namespace detail

template <typename Scalar>
struct SimplexMinResult {
  Scalar value;
  VectorX<Scalar> argmin;
};

/// Best local minimum of A x^m over { x >= 0, sum x_i^m = 1 }, found by
/// multi-start projected descent seeded with the unit coordinate vectors, the
/// uniform direction, a coarse grid scan (dim <= 4) and seeded random
/// nonnegative directions. The sign of the result decides copositivity.
/// Non-symmetric input is symmetrized first (A x^m is unchanged).
template <typename Scalar>
SimplexMinResult<Scalar> simplex_min(const Tensor<Scalar>& A_in,
                                     const OptimizerOptions& opts = {}) {
  if (A_in.order() < 2) throw std::invalid_argument("simplex_min requires order >= 2");
  const Tensor<Scalar> A = detail::symmetric_view(A_in);
  const int n = A.dim();
  const int m = A.order();

  std::vector<VectorX<Scalar>> starts;
  for (int i = 0; i < n; ++i) starts.push_back(VectorX<Scalar>::Unit(n, i));
  starts.push_back(VectorX<Scalar>::Ones(n));

  // Coarse scan of the direction simplex rescaled onto the constraint set;
  // the best few grid points become descent seeds.
  if (n <= 4 && opts.grid_resolution > 0) {
    std::vector<std::pair<Scalar, VectorX<Scalar>>> grid;
    std::vector<int> k(static_cast<std::size_t>(n), 0);
    VectorX<Scalar> x(n);
    detail::for_each_composition(n, opts.grid_resolution, k, 0, [&](const std::vector<int>& kk) {
      for (int i = 0; i < n; ++i) x[i] = Scalar(kk[static_cast<std::size_t>(i)]);
      x /= std::pow(x.array().pow(m).sum(), Scalar(1) / Scalar(m));
      grid.emplace_back(contract_all(A, x), x);
    });
    std::sort(grid.begin(), grid.end(),
              [](const auto& a, const auto& b) { return a.first < b.first; });
    const std::size_t keep = std::min<std::size_t>(8, grid.size());
    for (std::size_t i = 0; i < keep; ++i) starts.push_back(grid[i].second);
  }

  std::mt19937_64 rng(opts.seed);
  while (static_cast<int>(starts.size()) < opts.starts) {
    VectorX<Scalar> r(n);
    for (int i = 0; i < n; ++i) r[i] = Scalar(uniform01(rng));
    if (r.maxCoeff() < Scalar(1e-3)) continue;
    starts.push_back(std::move(r));
  }

  SimplexMinResult<Scalar> best{std::numeric_limits<Scalar>::infinity(), VectorX<Scalar>()};
  for (const auto& s : starts) {
    const auto res = detail::normalized_descent(A, s, detail::DescentSet::MNormOrthant,
                                                opts.max_iter);
    if (res.value < best.value) {
      best.value = res.value;
      best.argmin = res.argmin;
    }
  }
  return best;
}

enum class CopositivityClass { StrictlyCopositive, Copositive, NotCopositive, Inconclusive };

inline const char* to_string(CopositivityClass c) {
  switch (c) {
    case CopositivityClass::StrictlyCopositive: return "StrictlyCopositive";
    case CopositivityClass::Copositive: return "Copositive";
    case CopositivityClass::NotCopositive: return "NotCopositive";
    case CopositivityClass::Inconclusive: return "Inconclusive";
  }
  return "?";
}

template <typename Scalar>
struct CopositivityVerdict {
  CopositivityClass cls = CopositivityClass::Inconclusive;
  Scalar simplex_min = Scalar(0);
  VectorX<Scalar> argmin;
  std::optional<VectorX<Scalar>> witness;  ///< present iff NotCopositive; A w^m < -tol, w >= 0
};

/// Sign classification of the simplex minimum: > tol strictly copositive,
/// within +-tol copositive (ties go to the weak class), < -tol not copositive
/// with the minimizer as witness.
template <typename Scalar>
CopositivityVerdict<Scalar> copositivity_verdict(const Tensor<Scalar>& A, Scalar tol = Scalar(1e-8),
                                                 const OptimizerOptions& opts = {}) {
  if (!(tol > Scalar(0))) throw std::invalid_argument("tolerance must be positive");
  const auto min_res = simplex_min(A, opts);
  CopositivityVerdict<Scalar> verdict;
  verdict.simplex_min = min_res.value;
  verdict.argmin = min_res.argmin;
  if (min_res.value > tol) {
    verdict.cls = CopositivityClass::StrictlyCopositive;
  } else if (min_res.value >= -tol) {
    verdict.cls = CopositivityClass::Copositive;
  } else {
    verdict.cls = CopositivityClass::NotCopositive;
    verdict.witness = min_res.argmin;
  }
  return verdict;
}

enum class DefinitenessClass { PositiveDefinite, NotPositiveDefinite, Inconclusive };

inline const char* to_string(DefinitenessClass c) {
  switch (c) {
    case DefinitenessClass::PositiveDefinite: return "PositiveDefinite";
    case DefinitenessClass::NotPositiveDefinite: return "NotPositiveDefinite";
    case DefinitenessClass::Inconclusive: return "Inconclusive";
  }
  return "?";
}

template <typename Scalar>
struct DefinitenessVerdict {
  DefinitenessClass cls = DefinitenessClass::Inconclusive;
  Scalar lambda_min_z = Scalar(0);  ///< estimated min of A x^m over ||x||_2 = 1
  Scalar lambda_min_h = Scalar(0);  ///< estimated min of A x^m over sum |x_i|^m = 1
  std::optional<VectorX<Scalar>> witness;  ///< x != 0 with A x^m <= 0 when not PD
};

/// Estimates the extreme Z- and H-eigenvalues by sign-unrestricted multi-start
/// descent plus a random sphere sweep. Both estimates are upper bounds on the
/// true minima, so PositiveDefinite (both > tol) is a numerical verdict, not a
/// certificate; NotPositiveDefinite is sound since it carries a witness.
/// Requires even order.
template <typename Scalar>
DefinitenessVerdict<Scalar> definiteness_verdict(const Tensor<Scalar>& A_in,
                                                 Scalar tol = Scalar(1e-8),
                                                 const OptimizerOptions& opts = {}) {
  if (A_in.order() < 2 || A_in.order() % 2 != 0) {
    throw std::invalid_argument("definiteness requires an even order >= 2");
  }
  const Tensor<Scalar> A = detail::symmetric_view(A_in);
  const int n = A.dim();

  std::mt19937_64 rng(opts.seed);
  std::vector<VectorX<Scalar>> starts;
  for (int i = 0; i < n; ++i) starts.push_back(VectorX<Scalar>::Unit(n, i));
  starts.push_back(VectorX<Scalar>::Ones(n));
  while (static_cast<int>(starts.size()) < opts.starts) {
    VectorX<Scalar> g(n);
    for (int i = 0; i < n; ++i) g[i] = Scalar(gaussian(rng));
    if (g.norm() < Scalar(1e-8)) continue;
    starts.push_back(std::move(g));
  }

  DefinitenessVerdict<Scalar> verdict;
  verdict.lambda_min_z = std::numeric_limits<Scalar>::infinity();
  verdict.lambda_min_h = std::numeric_limits<Scalar>::infinity();
  VectorX<Scalar> z_arg, h_arg;
  for (const auto& s : starts) {
    const auto z = detail::normalized_descent(A, s, detail::DescentSet::Sphere, opts.max_iter);
    if (z.value < verdict.lambda_min_z) {
      verdict.lambda_min_z = z.value;
      z_arg = z.argmin;
    }
    const auto h = detail::normalized_descent(A, s, detail::DescentSet::MNormFree, opts.max_iter);
    if (h.value < verdict.lambda_min_h) {
      verdict.lambda_min_h = h.value;
      h_arg = h.argmin;
    }
  }

  // Random sweep of the unit sphere; any improvement folds into the Z estimate.
  for (int i = 0; i < opts.sphere_samples; ++i) {
    VectorX<Scalar> g(n);
    for (int j = 0; j < n; ++j) g[j] = Scalar(gaussian(rng));
    const Scalar norm = g.norm();
    if (norm < Scalar(1e-8)) continue;
    g /= norm;
    const Scalar v = contract_all(A, g);
    if (v < verdict.lambda_min_z) {
      verdict.lambda_min_z = v;
      z_arg = g;
    }
  }

  if (verdict.lambda_min_z > tol && verdict.lambda_min_h > tol) {
    verdict.cls = DefinitenessClass::PositiveDefinite;
  } else if (verdict.lambda_min_z <= Scalar(0) || verdict.lambda_min_h <= Scalar(0)) {
    verdict.cls = DefinitenessClass::NotPositiveDefinite;
    verdict.witness = (verdict.lambda_min_z <= verdict.lambda_min_h) ? z_arg : h_arg;
  } else {
    verdict.cls = DefinitenessClass::Inconclusive;
  }
  return verdict;
}

enum class MappingClass { Copositive, StrictlyCopositive, StronglyCopositive, Unknown };

inline const char* to_string(MappingClass c) {
  switch (c) {
    case MappingClass::Copositive: return "Copositive";
    case MappingClass::StrictlyCopositive: return "StrictlyCopositive";
    case MappingClass::StronglyCopositive: return "StronglyCopositive";
    case MappingClass::Unknown: return "Unknown";
  }
  return "?";
}

template <typename Scalar>
struct MappingClassification {
  MappingClass cls = MappingClass::Unknown;
  std::optional<Scalar> alpha;  ///< strong-copositivity constant estimate
  CopositivityVerdict<Scalar> copositivity;
  std::optional<DefinitenessVerdict<Scalar>> definiteness;
};

/// Classifies x -> A x^{m-1} + q as a copositive mapping on the nonnegative
/// orthant. Since [F(x) - F(0)]^T x = A x^m, the tensor verdicts transfer:
/// positive definite gives strong copositivity with alpha = the Z-eigenvalue
/// estimate; (strictly) copositive gives the same class for the mapping. The
/// constant q does not enter the classification.
template <typename Scalar, typename Derived>
MappingClassification<Scalar> mapping_class(const Tensor<Scalar>& A,
                                            const Eigen::MatrixBase<Derived>& q,
                                            Scalar tol = Scalar(1e-8),
                                            const OptimizerOptions& opts = {}) {
  if (q.size() != A.dim()) throw std::invalid_argument("q length mismatch");
  MappingClassification<Scalar> out;
  out.copositivity = copositivity_verdict(A, tol, opts);
  if (A.order() % 2 == 0) {
    out.definiteness = definiteness_verdict(A, tol, opts);
    if (out.definiteness->cls == DefinitenessClass::PositiveDefinite) {
      out.cls = MappingClass::StronglyCopositive;
      out.alpha = out.definiteness->lambda_min_z;
      return out;
    }
  }
  switch (out.copositivity.cls) {
    case CopositivityClass::StrictlyCopositive: out.cls = MappingClass::StrictlyCopositive; break;
    case CopositivityClass::Copositive: out.cls = MappingClass::Copositive; break;
    default: out.cls = MappingClass::Unknown; break;
  }
  return out;
}

/// Support split of a nonnegative vector: `plus` holds the indices with
/// x_i > 0, `zero` the rest. The two sets partition [0, n).
struct IndexPartition {
  std::vector<int> plus;
  std::vector<int> zero;
};

template <typename Scalar>
IndexPartition support_partition(const VectorX<Scalar>& x) {
  IndexPartition part;
  for (int i = 0; i < static_cast<int>(x.size()); ++i) {
    (x[i] > Scalar(0) ? part.plus : part.zero).push_back(i);
  }
  return part;
}

enum class DRegularityVerdict { CounterexampleFound, NoCounterexampleFound };

inline const char* to_string(DRegularityVerdict v) {
  return v == DRegularityVerdict::CounterexampleFound ? "CounterexampleFound"
                                                      : "NoCounterexampleFound";
}

template <typename Scalar>
struct DRegularityWitness {
  VectorX<Scalar> x;  ///< nonnegative, nonzero
  Scalar t = Scalar(0);
};

template <typename Scalar>
struct DRegularityReport {
  VectorX<Scalar> d;
  DRegularityVerdict verdict = DRegularityVerdict::NoCounterexampleFound;
  std::optional<DRegularityWitness<Scalar>> witness;
  long budget_used = 0;
};

/// Searches for (x, t) with x >= 0, x != 0, t >= 0 satisfying
///   G_i(x) + t d_i  = 0   on the support of x,
///   G_i(x) + t d_i >= 0   off the support,
/// where G(x) = A x^{m-1}. All 2^n - 1 support patterns are enumerated; each
/// sample fixes x on the support (G is homogeneous, so samples are sup-norm
/// normalized) and solves for the unique consistent t. Finding a witness
/// falsifies d-regularity of G; finding none proves nothing.
template <typename Scalar, typename Derived>
DRegularityReport<Scalar> d_regularity_falsifier(const Tensor<Scalar>& A,
                                                 const Eigen::MatrixBase<Derived>& d_expr,
                                                 long budget = 2048, Scalar tol = Scalar(1e-8),
                                                 std::uint64_t seed = 0) {
  const int n = A.dim();
  const VectorX<Scalar> d = d_expr;
  if (d.size() != n) throw std::invalid_argument("d length mismatch");
  if ((d.array() <= Scalar(0)).any()) {
    throw std::invalid_argument("d must be strictly positive");
  }

  DRegularityReport<Scalar> report;
  report.d = d;
  std::mt19937_64 rng(seed);
  const std::uint32_t patterns = (n >= 31) ? 0 : ((std::uint32_t{1} << n) - 1);
  if (patterns == 0) throw std::invalid_argument("dimension too large for support enumeration");

  const auto try_sample = [&](const VectorX<Scalar>& x) -> bool {
    ++report.budget_used;
    const IndexPartition part = support_partition(x);
    const VectorX<Scalar> g = contract_to_vector(A, x);
    Scalar t_sum(0);
    for (int i : part.plus) t_sum += -g[i] / d[i];
    const Scalar t = std::max(Scalar(0), t_sum / Scalar(part.plus.size()));
    const Scalar tau = tol * (Scalar(1) + g.cwiseAbs().maxCoeff() + t * d.maxCoeff());
    for (int i : part.plus) {
      if (std::abs(g[i] + t * d[i]) > tau) return false;
    }
    for (int i : part.zero) {
      if (g[i] + t * d[i] < -tau) return false;
    }
    report.verdict = DRegularityVerdict::CounterexampleFound;
    report.witness = DRegularityWitness<Scalar>{x, t};
    return true;
  };

  // First round: the support indicators themselves; then random directions.
  for (std::uint32_t mask = 1; mask <= patterns && report.budget_used < budget; ++mask) {
    VectorX<Scalar> x = VectorX<Scalar>::Zero(n);
    for (int i = 0; i < n; ++i)
      if (mask & (std::uint32_t{1} << i)) x[i] = Scalar(1);
    if (try_sample(x)) return report;
  }
  while (report.budget_used < budget) {
    for (std::uint32_t mask = 1; mask <= patterns && report.budget_used < budget; ++mask) {
      VectorX<Scalar> x = VectorX<Scalar>::Zero(n);
      for (int i = 0; i < n; ++i) {
        if (mask & (std::uint32_t{1} << i)) x[i] = Scalar(0.05 + 0.95 * uniform01(rng));
      }
      x /= x.maxCoeff();
      if (try_sample(x)) return report;
    }
  }
  return report;
}

template <typename Scalar>
struct PrincipalMinor {
  std::uint32_t mask = 0;  ///< bit i set selects row/column i (0-based)
  Scalar value = Scalar(0);
};

inline std::vector<int> mask_indices(std::uint32_t mask) {
  std::vector<int> idx;
  for (int i = 0; mask != 0; ++i, mask >>= 1)
    if (mask & 1u) idx.push_back(i);
  return idx;
}

/// Determinants of all 2^n - 1 nonempty principal submatrices, in increasing
/// mask order. Exhaustive, so n is capped at 12.
template <typename Scalar>
std::vector<PrincipalMinor<Scalar>> principal_minors(const MatrixX<Scalar>& M) {
  if (M.rows() != M.cols()) throw std::invalid_argument("matrix must be square");
  const int n = static_cast<int>(M.rows());
  if (n > 12) throw std::invalid_argument("principal_minors limited to n <= 12");
  std::vector<PrincipalMinor<Scalar>> out;
  out.reserve((std::size_t{1} << n) - 1);
  for (std::uint32_t mask = 1; mask < (std::uint32_t{1} << n); ++mask) {
    const std::vector<int> idx = mask_indices(mask);
    const int k = static_cast<int>(idx.size());
    MatrixX<Scalar> sub(k, k);
    for (int r = 0; r < k; ++r)
      for (int c = 0; c < k; ++c) sub(r, c) = M(idx[static_cast<std::size_t>(r)],
                                                idx[static_cast<std::size_t>(c)]);
    out.push_back({mask, sub.determinant()});
  }
  return out;
}

template <typename Scalar>
struct MinorViolation {
  VectorX<Scalar> x;
  std::uint32_t subset_mask = 0;
  Scalar value = Scalar(0);
};

template <typename Scalar>
struct MinorBoundReport {
  Scalar delta = Scalar(0);
  long samples = 0;
  std::vector<MinorViolation<Scalar>> violations;
};

/// Samples the nonnegative orthant at mixed scales and records every principal
/// minor of (m-1) A x^{m-2} that escapes [delta, 1/delta]. A deterministic
/// scale ladder leads, so blow-up near 0 and infinity is caught regardless of
/// seed. Probes the open question of when the minors stay bounded; recorded
/// violations are reproducible from the stored x.
template <typename Scalar>
MinorBoundReport<Scalar> minor_bounds_probe(const Tensor<Scalar>& A, Scalar delta, long samples,
                                            std::uint64_t seed = 0) {
  if (!(delta > Scalar(0) && delta < Scalar(1))) {
    throw std::invalid_argument("delta must lie in (0, 1)");
  }
  if (A.order() < 2 || A.order() % 2 != 0) {
    throw std::invalid_argument("minor probe requires an even order >= 2");
  }
  if (A.dim() > 12) throw std::invalid_argument("minor probe limited to dim <= 12");

  const Tensor<Scalar> At = symmetrize_tail(A);  // Jacobian semantics for general input
  const int n = A.dim();
  const int m = A.order();
  const Scalar upper = Scalar(1) / delta;

  MinorBoundReport<Scalar> report;
  report.delta = delta;
  report.samples = samples;

  std::mt19937_64 rng(seed);
  const auto probe_point = [&](const VectorX<Scalar>& x) {
    const MatrixX<Scalar> jac = Scalar(m - 1) * contract_to_matrix(At, x);
    for (const auto& minor : principal_minors(jac)) {
      if (minor.value < delta || minor.value > upper) {
        report.violations.push_back({x, minor.mask, minor.value});
      }
    }
  };

  long done = 0;
  for (int e = -3; e <= 3 && done < samples; ++e, ++done) {
    probe_point(VectorX<Scalar>::Constant(n, std::pow(Scalar(10), Scalar(e))));
  }
  while (done < samples) {
    VectorX<Scalar> x(n);
    const Scalar scale = std::pow(Scalar(10), Scalar(uniform(rng, -3.0, 3.0)));
    for (int i = 0; i < n; ++i) x[i] = scale * Scalar(uniform01(rng));
    probe_point(x);
    ++done;
  }
  return report;
}

}  // namespace tncp
