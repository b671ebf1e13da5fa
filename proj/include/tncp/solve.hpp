#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <random>
#include <stdexcept>
#include <utility>
#include <vector>

#include "tncp/problem.hpp"
#include "tncp/rng.hpp"
#include "tncp/verify.hpp"

namespace tncp {

enum class SolveMethod { FbNewton, ProjGrad, Nlp };

inline const char* to_string(SolveMethod m) {
  switch (m) {
    case SolveMethod::FbNewton: return "fb-newton";
    case SolveMethod::ProjGrad: return "proj-grad";
    case SolveMethod::Nlp: return "nlp";
  }
  return "?";
}

enum class SolveStatus { Solved, NoSolutionFound, Infeasible };

inline const char* to_string(SolveStatus s) {
  switch (s) {
    case SolveStatus::Solved: return "Solved";
    case SolveStatus::NoSolutionFound: return "NoSolutionFound";
    case SolveStatus::Infeasible: return "Infeasible";
  }
  return "?";
}

struct SolveOptions {
  SolveMethod method = SolveMethod::FbNewton;
  double tol = 1e-10;
  int max_iter = 200;  ///< per start (the fallback pass gets its own budget)
  int starts = 32;
  std::uint64_t seed = 0;
  double cluster_radius = 1e-6;  ///< scaled by (1 + ||x||) when clustering
};

template <typename Scalar>
struct StartOutcome {
  int index = 0;
  Scalar residual = std::numeric_limits<Scalar>::infinity();
  int iterations = 0;
  bool converged = false;
  bool used_fallback = false;  ///< stagnated and switched to the projected method
  SolveMethod method = SolveMethod::FbNewton;
};

template <typename Scalar>
struct SolveReport {
  SolveStatus status = SolveStatus::NoSolutionFound;
  VectorX<Scalar> x;
  Scalar residual = std::numeric_limits<Scalar>::infinity();
  int iterations = 0;   ///< summed over starts
  int starts_used = 0;
  std::vector<VectorX<Scalar>> distinct_solutions;  ///< clustered, lexicographic order
  std::vector<StartOutcome<Scalar>> start_trace;
  std::optional<Scalar> nlp_objective;  ///< objective at x (nlp method only)
};

namespace detail {

template <typename Scalar>
struct LocalOutcome {
  VectorX<Scalar> x;
  Scalar residual = std::numeric_limits<Scalar>::infinity();
  int iterations = 0;
  bool converged = false;
  bool stagnated = false;
};

/// phi(a, b) = sqrt(a^2 + b^2) - a - b, zero exactly on
/// { a >= 0, b >= 0, ab = 0 }.
template <typename Scalar>
VectorX<Scalar> fb_vector(const VectorX<Scalar>& x, const VectorX<Scalar>& f) {
  VectorX<Scalar> phi(x.size());
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    phi[i] = std::hypot(x[i], f[i]) - x[i] - f[i];
  }
  return phi;
}

/// One element of the generalized Jacobian of the FB system, D_a + D_b * J,
/// resolving the kink at (0,0) along the (1,1) direction.
template <typename Scalar>
MatrixX<Scalar> fb_jacobian(const VectorX<Scalar>& x, const VectorX<Scalar>& f,
                            const MatrixX<Scalar>& jac) {
  MatrixX<Scalar> h = jac;
  const Scalar kink = Scalar(1) / std::sqrt(Scalar(2)) - Scalar(1);
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    const Scalar r = std::hypot(x[i], f[i]);
    Scalar da, db;
    if (r > Scalar(0)) {
      da = x[i] / r - Scalar(1);
      db = f[i] / r - Scalar(1);
    } else {
      da = db = kink;
    }
    h.row(i) *= db;
    h(i, i) += da;
  }
  return h;
}

template <typename Scalar>
Scalar fb_merit(const ProblemInstance<Scalar>& P, const VectorX<Scalar>& x) {
  const VectorX<Scalar> phi = fb_vector(x, VectorX<Scalar>(P.F(x)));
  return Scalar(0.5) * phi.squaredNorm();
}

/// Nonnegative clamp kept only when it does not hurt the residual.
template <typename Scalar>
void polish_nonnegative(const ProblemInstance<Scalar>& P, VectorX<Scalar>& x, Scalar& res) {
  if (x.minCoeff() >= Scalar(0)) return;
  VectorX<Scalar> clamped = x.cwiseMax(Scalar(0));
  const Scalar r = complementarity_residual(P, clamped);
  if (r <= res) {
    x = std::move(clamped);
    res = r;
  }
}

/// Damped semismooth Newton on the FB system: Newton direction from one
/// generalized Jacobian element, Armijo backtracking on 0.5||Phi||^2, gradient
/// step when the direction is unusable. Sets `stagnated` when no acceptable
/// step exists, which is the caller's cue to switch to the projected method.
template <typename Scalar>
LocalOutcome<Scalar> fb_newton_local(const ProblemInstance<Scalar>& P, VectorX<Scalar> x,
                                     Scalar tol, int max_iter) {
  LocalOutcome<Scalar> out;
  const Scalar sigma = Scalar(1e-4);

  for (int it = 0; it < max_iter; ++it) {
    ++out.iterations;
    out.residual = complementarity_residual(P, x);
    if (out.residual <= tol) {
      out.converged = true;
      break;
    }

    const VectorX<Scalar> f = P.F(x);
    const VectorX<Scalar> phi = fb_vector(x, f);
    const Scalar psi = Scalar(0.5) * phi.squaredNorm();
    const MatrixX<Scalar> h = fb_jacobian(x, f, MatrixX<Scalar>(P.jacobian(x)));
    const VectorX<Scalar> grad = h.transpose() * phi;

    if (grad.template lpNorm<Eigen::Infinity>() <= Scalar(1e-16) * (Scalar(1) + psi)) {
      out.stagnated = true;  // merit-stationary but not a solution
      break;
    }

    VectorX<Scalar> dir = Eigen::PartialPivLU<MatrixX<Scalar>>(h).solve(-phi);
    bool using_gradient = !(dir.allFinite() &&
                            (h * dir + phi).norm() <= Scalar(1e-6) * phi.norm() &&
                            grad.dot(dir) < Scalar(0));
    if (using_gradient) dir = -grad;

    bool stepped = false;
    while (!stepped) {
      const Scalar slope = grad.dot(dir);
      Scalar alpha(1);
      for (int halve = 0; halve < 55; ++halve) {
        const VectorX<Scalar> cand = x + alpha * dir;
        if (fb_merit(P, cand) <= psi + sigma * alpha * slope) {
          x = cand;
          stepped = true;
          break;
        }
        alpha *= Scalar(0.5);
      }
      if (stepped || using_gradient) break;
      dir = -grad;  // retry once along steepest descent
      using_gradient = true;
    }
    if (!stepped) {
      out.stagnated = true;
      break;
    }
  }

  out.residual = complementarity_residual(P, x);
  out.converged = out.residual <= tol;
  polish_nonnegative(P, x, out.residual);
  out.converged = out.residual <= tol;
  out.x = std::move(x);
  return out;
}

/// Projected gradient descent on the FB merit over the nonnegative orthant.
template <typename Scalar>
LocalOutcome<Scalar> proj_grad_local(const ProblemInstance<Scalar>& P, VectorX<Scalar> x,
                                     Scalar tol, int max_iter) {
  LocalOutcome<Scalar> out;
  x = x.cwiseMax(Scalar(0));
  Scalar step(1);

  for (int it = 0; it < max_iter; ++it) {
    ++out.iterations;
    out.residual = complementarity_residual(P, x);
    if (out.residual <= tol) {
      out.converged = true;
      break;
    }

    const VectorX<Scalar> f = P.F(x);
    const VectorX<Scalar> phi = fb_vector(x, f);
    const Scalar psi = Scalar(0.5) * phi.squaredNorm();
    const MatrixX<Scalar> h = fb_jacobian(x, f, MatrixX<Scalar>(P.jacobian(x)));
    const VectorX<Scalar> grad = h.transpose() * phi;

    bool improved = false;
    for (int halve = 0; halve < 55 && !improved; ++halve) {
      const VectorX<Scalar> cand = (x - step * grad).cwiseMax(Scalar(0));
      if (fb_merit(P, cand) < psi - Scalar(1e-18) * (Scalar(1) + psi)) {
        x = cand;
        step = std::min(step * Scalar(2), Scalar(1e6));
        improved = true;
      } else {
        step *= Scalar(0.5);
      }
    }
    if (!improved) {
      out.stagnated = true;
      break;
    }
  }

  out.residual = complementarity_residual(P, x);
  out.converged = out.residual <= tol;
  out.x = std::move(x);
  return out;
}

/// Exterior quadratic penalty for the constrained reformulation
///   min A x^m + q.x   s.t.  F(x) >= 0, x >= 0,
/// with projected-gradient inner loops and an escalating penalty weight.
template <typename Scalar>
LocalOutcome<Scalar> nlp_local(const ProblemInstance<Scalar>& P, VectorX<Scalar> x, Scalar tol,
                               int max_iter) {
  LocalOutcome<Scalar> out;
  x = x.cwiseMax(Scalar(0));

  const auto objective = [&](const VectorX<Scalar>& v) -> Scalar { return v.dot(P.F(v)); };
  const auto penalty = [&](const VectorX<Scalar>& v, Scalar mu) -> Scalar {
    const VectorX<Scalar> viol = P.F(v).cwiseMin(Scalar(0));
    return objective(v) + mu * viol.squaredNorm();
  };

  for (Scalar mu(1); mu <= Scalar(1e10); mu *= Scalar(10)) {
    Scalar step(1);
    for (int it = 0; it < max_iter; ++it) {
      ++out.iterations;
      const VectorX<Scalar> f = P.F(x);
      const MatrixX<Scalar> jac = P.jacobian(x);
      // objective gradient: F(x) + (dF)^T x; penalty adds 2 mu (dF)^T min(0,F)
      const VectorX<Scalar> viol = f.cwiseMin(Scalar(0));
      const VectorX<Scalar> grad =
          f + jac.transpose() * x + Scalar(2) * mu * (jac.transpose() * viol);
      const Scalar cur = penalty(x, mu);

      bool improved = false;
      for (int halve = 0; halve < 50 && !improved; ++halve) {
        const VectorX<Scalar> cand = (x - step * grad).cwiseMax(Scalar(0));
        if (penalty(cand, mu) < cur - Scalar(1e-18) * (Scalar(1) + std::abs(cur))) {
          x = cand;
          step = std::min(step * Scalar(2), Scalar(1e6));
          improved = true;
        } else {
          step *= Scalar(0.5);
        }
      }
      if (!improved) break;
    }
  }

  out.residual = complementarity_residual(P, x);
  polish_nonnegative(P, x, out.residual);
  const Scalar theta = objective(x);
  out.converged =
      std::abs(theta) <= tol && out.residual <= tol && feasibility(P, x, tol);
  out.x = std::move(x);
  return out;
}

template <typename Scalar>
bool lex_less(const VectorX<Scalar>& a, const VectorX<Scalar>& b) {
  return std::lexicographical_compare(a.data(), a.data() + a.size(), b.data(),
                                      b.data() + b.size());
}

/// Greedy clustering of converged solutions, deterministic by lexicographic
/// order: a solution joins the first cluster whose representative lies within
/// the scaled radius, and each cluster is represented by its most accurate
/// member. Representatives come back in lexicographic order.
template <typename Scalar>
std::vector<VectorX<Scalar>> cluster_solutions(
    std::vector<std::pair<VectorX<Scalar>, Scalar>> sols, Scalar radius) {
  std::sort(sols.begin(), sols.end(), [](const auto& a, const auto& b) {
    return lex_less<Scalar>(a.first, b.first);
  });
  std::vector<std::pair<VectorX<Scalar>, Scalar>> reps;  // (representative, residual)
  for (const auto& [s, res] : sols) {
    bool merged = false;
    for (auto& [r, rres] : reps) {
      const Scalar scale = Scalar(1) + std::max(s.norm(), r.norm());
      if ((s - r).norm() <= radius * scale) {
        if (res < rres) {
          r = s;
          rres = res;
        }
        merged = true;
        break;
      }
    }
    if (!merged) reps.emplace_back(s, res);
  }
  std::sort(reps.begin(), reps.end(), [](const auto& a, const auto& b) {
    return lex_less<Scalar>(a.first, b.first);
  });
  std::vector<VectorX<Scalar>> out;
  out.reserve(reps.size());
  for (auto& [r, res] : reps) out.push_back(std::move(r));
  return out;
}

template <typename Scalar>
std::vector<VectorX<Scalar>> make_starts(const ProblemInstance<Scalar>& P, int starts,
                                         std::uint64_t seed) {
  const int n = P.dim();
  std::vector<VectorX<Scalar>> pts;
  pts.push_back(VectorX<Scalar>::Zero(n));
  for (int i = 0; i < n && static_cast<int>(pts.size()) < starts; ++i) {
    pts.push_back(VectorX<Scalar>::Unit(n, i));
  }
  if (static_cast<int>(pts.size()) < starts) pts.push_back(VectorX<Scalar>::Ones(n));

  std::mt19937_64 rng(seed);
  const Scalar scales[] = {Scalar(0.5), Scalar(1), Scalar(2), Scalar(4)};
  int scale_idx = 0;
  while (static_cast<int>(pts.size()) < starts) {
    VectorX<Scalar> r(n);
    for (int i = 0; i < n; ++i) r[i] = scales[scale_idx % 4] * Scalar(uniform01(rng));
    ++scale_idx;
    pts.push_back(std::move(r));
  }
  pts.resize(static_cast<std::size_t>(std::min<int>(starts, static_cast<int>(pts.size()))));
  return pts;
}

}  // namespace detail

template <typename Scalar>
SolveReport<Scalar> solve_nlp(const ProblemInstance<Scalar>& P, const SolveOptions& opts = {});

/// Multi-start solve. The default method runs the semismooth Newton pass and,
/// if that start stagnates short of the tolerance, retries the same start with
/// the projected-gradient method. Converged solutions are clustered into
/// distinct_solutions. Deterministic for a fixed (seed, starts).
///
/// NoSolutionFound means the budget ran out: either no solution exists or the
/// starts all stagnated (the trace says which); nonexistence is never
/// asserted.
template <typename Scalar>
SolveReport<Scalar> solve(const ProblemInstance<Scalar>& P, const SolveOptions& opts = {}) {
  if (!(opts.tol > 0) || opts.starts < 1 || opts.max_iter < 1) {
    throw std::invalid_argument("invalid solve options");
  }
  if (opts.method == SolveMethod::Nlp) return solve_nlp(P, opts);
  const Scalar tol = Scalar(opts.tol);

  SolveReport<Scalar> report;
  const auto starts = detail::make_starts(P, opts.starts, opts.seed);
  report.starts_used = static_cast<int>(starts.size());

  std::vector<std::pair<VectorX<Scalar>, Scalar>> solutions;
  for (std::size_t s = 0; s < starts.size(); ++s) {
    StartOutcome<Scalar> trace;
    trace.index = static_cast<int>(s);
    trace.method = opts.method;

    detail::LocalOutcome<Scalar> local;
    if (opts.method == SolveMethod::FbNewton) {
      local = detail::fb_newton_local(P, starts[s], tol, opts.max_iter);
      if (!local.converged && local.stagnated) {
        const auto fallback = detail::proj_grad_local(P, local.x, tol, opts.max_iter);
        local.x = fallback.x;
        local.residual = fallback.residual;
        local.converged = fallback.converged;
        local.stagnated = fallback.stagnated;
        local.iterations += fallback.iterations;
        trace.used_fallback = true;
      }
    } else {
      local = detail::proj_grad_local(P, starts[s], tol, opts.max_iter);
    }

    trace.residual = local.residual;
    trace.iterations = local.iterations;
    trace.converged = local.converged;
    report.iterations += local.iterations;
    report.start_trace.push_back(trace);

    if (local.converged) {
      solutions.emplace_back(local.x, local.residual);
      if (local.residual < report.residual ||
          (local.residual == report.residual && detail::lex_less(local.x, report.x))) {
        report.residual = local.residual;
        report.x = local.x;
      }
    }
  }

  if (!solutions.empty()) {
    report.status = SolveStatus::Solved;
    report.distinct_solutions =
        detail::cluster_solutions(std::move(solutions), Scalar(opts.cluster_radius));
  }
  return report;
}

/// Constrained-reformulation path: exterior quadratic penalty per start.
/// Solved requires the terminal objective A x^m + q.x to vanish within tol at
/// a feasible point; otherwise the best candidate and its objective are
/// returned for inspection.
template <typename Scalar>
SolveReport<Scalar> solve_nlp(const ProblemInstance<Scalar>& P, const SolveOptions& opts) {
  if (P.kind() != ProblemKind::Ncp) {
    throw std::invalid_argument("the constrained reformulation is defined for the "
                                "single-tensor problem only");
  }
  if (!(opts.tol > 0) || opts.starts < 1 || opts.max_iter < 1) {
    throw std::invalid_argument("invalid solve options");
  }
  const Scalar tol = Scalar(opts.tol);

  SolveReport<Scalar> report;
  const auto starts = detail::make_starts(P, opts.starts, opts.seed);
  report.starts_used = static_cast<int>(starts.size());

  std::vector<std::pair<VectorX<Scalar>, Scalar>> solutions;
  Scalar best_merit = std::numeric_limits<Scalar>::infinity();
  for (std::size_t s = 0; s < starts.size(); ++s) {
    const auto local = detail::nlp_local(P, starts[s], tol, opts.max_iter);

    StartOutcome<Scalar> trace;
    trace.index = static_cast<int>(s);
    trace.method = SolveMethod::Nlp;
    trace.residual = local.residual;
    trace.iterations = local.iterations;
    trace.converged = local.converged;
    report.iterations += local.iterations;
    report.start_trace.push_back(trace);

    if (local.converged) solutions.emplace_back(local.x, local.residual);
    // keep the best candidate even when nothing certifies
    const Scalar theta = std::abs(local.x.dot(P.F(local.x)));
    const Scalar merit = local.converged ? local.residual : Scalar(1e6) + theta;
    if (merit < best_merit ||
        (merit == best_merit && detail::lex_less(local.x, report.x))) {
      best_merit = merit;
      report.x = local.x;
      report.residual = local.residual;
      report.nlp_objective = local.x.dot(P.F(local.x));
    }
  }

  if (!solutions.empty()) {
    report.status = SolveStatus::Solved;
    report.distinct_solutions =
        detail::cluster_solutions(std::move(solutions), Scalar(opts.cluster_radius));
  }
  return report;
}

/// Runs solve with the caller's multi-start budget (pick a generous one) and
/// returns the clustered solution set. A singleton is evidence of uniqueness,
/// not a proof.
template <typename Scalar>
std::vector<VectorX<Scalar>> uniqueness_probe(const ProblemInstance<Scalar>& P,
                                              const SolveOptions& opts = {}) {
  return solve(P, opts).distinct_solutions;
}

}  // namespace tncp
