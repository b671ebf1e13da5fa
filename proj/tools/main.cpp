// tncp: command-line front end for the tensor complementarity library.
//
// Subcommands: analyze, solve, verify, dreg, minors, gen. Exit codes:
//   0  verdict or solution produced
//   1  nothing found / inconclusive (NoSolutionFound, Inconclusive verdicts,
//      no counterexample, no bound violations)
//   2  usage or input error

#include <CLI11.hpp>
#include <json.hpp>

#include <Eigen/Dense>

#include <cstdint>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "tncp/diagonalizable.hpp"
#include "tncp/io.hpp"
#include "tncp/problem.hpp"
#include "tncp/rng.hpp"
#include "tncp/solve.hpp"
#include "tncp/structure.hpp"
#include "tncp/tensor.hpp"
#include "tncp/verify.hpp"

namespace {

using json = nlohmann::ordered_json;
using Eigen::MatrixXd;
using Eigen::VectorXd;
using tncp::ProblemInstance;
using tncp::Tensor;

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open file '" + path + "'");
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write file '" + path + "'");
  out << text;
}

json to_json(const VectorXd& v) {
  json arr = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) arr.push_back(v[i]);
  return arr;
}

std::string format_vector(const VectorXd& v) {
  std::ostringstream os;
  os << std::setprecision(12) << '[';
  for (Eigen::Index i = 0; i < v.size(); ++i) os << (i ? ", " : "") << v[i];
  os << ']';
  return os.str();
}

Tensor<double> load_tensor(const std::string& path) {
  const std::string text = read_file(path);
  if (tncp::classify_text(text) != tncp::FileKind::Tensor) {
    throw std::runtime_error("'" + path + "' is not a tensor file");
  }
  return tncp::parse_tensor(text);
}

VectorXd load_vector(const std::string& path) {
  const std::string text = read_file(path);
  if (tncp::classify_text(text) != tncp::FileKind::Vector) {
    throw std::runtime_error("'" + path + "' is not a vector file");
  }
  return tncp::parse_vector(text);
}

/// A parsed instance plus where it came from.
struct InstanceFile {
  ProblemInstance<double> instance;
  std::vector<std::string> sources;
  std::string variant;  // "gtcp" or "tensor+vector"
};

/// One path (gtcp file) or a tensor/vector pair.
InstanceFile load_instance(const std::vector<std::string>& paths) {
  if (paths.size() == 1) {
    const std::string text = read_file(paths[0]);
    if (tncp::classify_text(text) != tncp::FileKind::Gncp) {
      throw std::runtime_error(
          "single-file instances must be gtcp files; pass a tensor file plus a q vector file "
          "for the single-tensor problem");
    }
    return {tncp::parse_gncp(text), paths, "gtcp"};
  }
  if (paths.size() == 2) {
    return {ProblemInstance<double>::ncp(load_tensor(paths[0]), load_vector(paths[1])), paths,
            "tensor+vector"};
  }
  throw std::runtime_error("expected one gtcp file or a tensor file plus a q vector file");
}

void warn_zero_q(const ProblemInstance<double>& p) {
  if (p.zero_q()) {
    std::cerr << "warning: q = 0 is a degenerate instance (x = 0 solves it whenever the "
                 "leading form is definite)\n";
  }
}

// ---------------------------------------------------------------------------
// analyze
// ---------------------------------------------------------------------------

struct AnalyzeArgs {
  std::string path;
  double tol = 1e-8;
  int starts = 64;
  int max_iter = 400;
  std::uint64_t seed = 0;
  bool as_json = false;
};

int run_analyze(const AnalyzeArgs& args) {
  const Tensor<double> a = load_tensor(args.path);
  tncp::OptimizerOptions opts;
  opts.starts = args.starts;
  opts.max_iter = args.max_iter;
  opts.seed = args.seed;

  const bool symmetric = tncp::is_symmetric(a);
  const bool diagonal = tncp::is_diagonal(a);
  std::optional<tncp::CopositivityVerdict<double>> cop;
  if (a.order() >= 2) cop = tncp::copositivity_verdict(a, args.tol, opts);
  std::optional<tncp::DefinitenessVerdict<double>> def;
  if (a.order() >= 2 && a.order() % 2 == 0) def = tncp::definiteness_verdict(a, args.tol, opts);

  bool inconclusive = false;
  if (cop) inconclusive |= cop->cls == tncp::CopositivityClass::Inconclusive;
  if (def) inconclusive |= def->cls == tncp::DefinitenessClass::Inconclusive;

  if (args.as_json) {
    json out;
    out["command"] = "analyze";
    out["input"] = args.path;
    out["order"] = a.order();
    out["dim"] = a.dim();
    out["symmetric"] = symmetric;
    out["diagonal"] = diagonal;
    if (cop) {
      json c;
      c["class"] = to_string(cop->cls);
      c["simplex_min"] = cop->simplex_min;
      c["argmin"] = to_json(cop->argmin);
      c["witness"] = cop->witness ? to_json(*cop->witness) : json(nullptr);
      out["copositivity"] = c;
    } else {
      out["copositivity"] = nullptr;
    }
    if (def) {
      json d;
      d["class"] = to_string(def->cls);
      d["lambda_min_z"] = def->lambda_min_z;
      d["lambda_min_h"] = def->lambda_min_h;
      d["witness"] = def->witness ? to_json(*def->witness) : json(nullptr);
      out["definiteness"] = d;
    } else {
      out["definiteness"] = nullptr;
    }
    std::cout << out.dump(2) << '\n';
  } else {
    std::cout << "tensor: order " << a.order() << ", dim " << a.dim() << '\n';
    std::cout << "symmetric: " << (symmetric ? "yes" : "no") << '\n';
    std::cout << "diagonal: " << (diagonal ? "yes" : "no") << '\n';
    std::cout << std::setprecision(12);
    if (cop) {
      std::cout << "copositivity: " << to_string(cop->cls) << " (simplex min " << cop->simplex_min
                << " at " << format_vector(cop->argmin) << ")\n";
      if (cop->witness) std::cout << "  witness: " << format_vector(*cop->witness) << '\n';
    } else {
      std::cout << "copositivity: n/a (order < 2)\n";
    }
    if (def) {
      std::cout << "definiteness: " << to_string(def->cls) << " (lambda_min_z "
                << def->lambda_min_z << ", lambda_min_h " << def->lambda_min_h << ")\n";
      if (def->witness) std::cout << "  witness: " << format_vector(*def->witness) << '\n';
    } else {
      std::cout << "definiteness: n/a (odd order)\n";
    }
  }
  return inconclusive ? 1 : 0;
}

// ---------------------------------------------------------------------------
// solve
// ---------------------------------------------------------------------------

struct SolveArgs {
  std::vector<std::string> paths;
  std::string method = "fb-newton";
  double tol = 1e-10;
  int max_iter = 200;
  int starts = 32;
  std::uint64_t seed = 0;
  bool as_json = false;
};

int run_solve(const SolveArgs& args) {
  const InstanceFile file = load_instance(args.paths);
  const auto& p = file.instance;
  warn_zero_q(p);

  tncp::SolveOptions opts;
  opts.tol = args.tol;
  opts.max_iter = args.max_iter;
  opts.starts = args.starts;
  opts.seed = args.seed;
  if (args.method == "fb-newton") {
    opts.method = tncp::SolveMethod::FbNewton;
  } else if (args.method == "proj-grad") {
    opts.method = tncp::SolveMethod::ProjGrad;
  } else {
    opts.method = tncp::SolveMethod::Nlp;
  }

  const auto report = tncp::solve(p, opts);

  if (args.as_json) {
    json out;
    out["command"] = "solve";
    out["inputs"] = file.sources;
    out["format"] = file.variant;
    out["kind"] = to_string(p.kind());
    out["method"] = args.method;
    out["status"] = to_string(report.status);
    out["x"] = report.status == tncp::SolveStatus::Solved ? to_json(report.x) : json(nullptr);
    out["residual"] = report.residual;
    out["iterations"] = report.iterations;
    out["starts_used"] = report.starts_used;
    json sols = json::array();
    for (const auto& s : report.distinct_solutions) sols.push_back(to_json(s));
    out["distinct_solutions"] = sols;
    out["nlp_objective"] = report.nlp_objective ? json(*report.nlp_objective) : json(nullptr);
    json trace = json::array();
    for (const auto& t : report.start_trace) {
      json e;
      e["index"] = t.index;
      e["method"] = to_string(t.method);
      e["converged"] = t.converged;
      e["used_fallback"] = t.used_fallback;
      e["iterations"] = t.iterations;
      e["residual"] = t.residual;
      trace.push_back(e);
    }
    out["starts"] = trace;
    std::cout << out.dump(2) << '\n';
  } else {
    std::cout << std::setprecision(12);
    std::cout << "status: " << to_string(report.status) << '\n';
    if (report.status == tncp::SolveStatus::Solved) {
      std::cout << "x: " << format_vector(report.x) << '\n';
    }
    std::cout << "residual: " << report.residual << '\n';
    std::cout << "iterations: " << report.iterations << " over " << report.starts_used
              << " starts\n";
    std::cout << "distinct solutions: " << report.distinct_solutions.size() << '\n';
    for (const auto& s : report.distinct_solutions) {
      std::cout << "  " << format_vector(s) << '\n';
    }
    if (report.nlp_objective) std::cout << "objective: " << *report.nlp_objective << '\n';
    if (report.status != tncp::SolveStatus::Solved) {
      int stagnated = 0;
      for (const auto& t : report.start_trace) stagnated += t.converged ? 0 : 1;
      std::cout << stagnated << " of " << report.starts_used
                << " starts stagnated short of the tolerance\n";
    }
  }
  return report.status == tncp::SolveStatus::Solved ? 0 : 1;
}

// ---------------------------------------------------------------------------
// verify
// ---------------------------------------------------------------------------

struct VerifyArgs {
  std::vector<std::string> paths;  // instance files... then x
  std::string u_path;
  double tol = 1e-8;
  bool as_json = false;
};

int run_verify(const VerifyArgs& args) {
  if (args.paths.size() < 2) {
    throw std::runtime_error("expected an instance (gtcp file, or tensor + q vector) and an x "
                             "vector file");
  }
  const std::vector<std::string> instance_paths(args.paths.begin(), args.paths.end() - 1);
  const InstanceFile file = load_instance(instance_paths);
  const auto& p = file.instance;
  const VectorXd x = load_vector(args.paths.back());
  std::optional<VectorXd> u;
  if (!args.u_path.empty()) u = load_vector(args.u_path);

  const bool feasible = tncp::feasibility(p, x, args.tol);
  const double residual = tncp::complementarity_residual(p, x);

  std::optional<tncp::KktCertificate<double>> cert;
  if (p.kind() == tncp::ProblemKind::Ncp) {
    cert = tncp::kkt_check(p, x, u ? *u : x, args.tol);
  } else if (u) {
    throw std::runtime_error("multiplier certificates support single-tensor instances only");
  }

  if (args.as_json) {
    json out;
    out["command"] = "verify";
    out["inputs"] = file.sources;
    out["format"] = file.variant;
    out["kind"] = to_string(p.kind());
    out["tol"] = args.tol;
    out["feasible"] = feasible;
    out["residual"] = residual;
    if (cert) {
      json k;
      k["passed"] = cert->passed;
      k["u"] = to_json(cert->u);
      k["stationarity"] = to_json(cert->stationarity);
      k["stationarity_min"] = cert->stationarity_min;
      k["stationarity_comp"] = cert->stationarity_comp;
      k["multiplier_min"] = cert->multiplier_min;
      k["multiplier_comp"] = cert->multiplier_comp;
      k["curvature_products"] = to_json(cert->curvature_products);
      k["primal_products"] = to_json(cert->primal_products);
      k["multiplier_products"] = to_json(cert->multiplier_products);
      out["kkt"] = k;
    } else {
      out["kkt"] = nullptr;
    }
    std::cout << out.dump(2) << '\n';
  } else {
    std::cout << std::setprecision(12);
    std::cout << "feasible: " << (feasible ? "yes" : "no") << " (tol " << args.tol << ")\n";
    std::cout << "residual: " << residual << '\n';
    if (cert) {
      std::cout << "kkt (u = " << (u ? "supplied" : "x") << "): "
                << (cert->passed ? "passed" : "failed") << '\n';
      std::cout << "  stationarity min " << cert->stationarity_min << ", comp "
                << cert->stationarity_comp << '\n';
      std::cout << "  multiplier  min " << cert->multiplier_min << ", comp "
                << cert->multiplier_comp << '\n';
    } else {
      std::cout << "kkt: n/a for graded instances\n";
    }
  }
  return 0;
}

// ---------------------------------------------------------------------------
// dreg
// ---------------------------------------------------------------------------

struct DregArgs {
  std::string path;
  std::string d_path;
  long budget = 2048;
  double tol = 1e-8;
  std::uint64_t seed = 0;
  bool as_json = false;
};

int run_dreg(const DregArgs& args) {
  const Tensor<double> a = load_tensor(args.path);
  const VectorXd d =
      args.d_path.empty() ? VectorXd(VectorXd::Ones(a.dim())) : load_vector(args.d_path);
  const auto report = tncp::d_regularity_falsifier(a, d, args.budget, args.tol, args.seed);
  const bool found = report.verdict == tncp::DRegularityVerdict::CounterexampleFound;

  if (args.as_json) {
    json out;
    out["command"] = "dreg";
    out["d"] = to_json(report.d);
    out["verdict"] = to_string(report.verdict);
    if (report.witness) {
      json w;
      w["x"] = to_json(report.witness->x);
      w["t"] = report.witness->t;
      out["witness"] = w;
    } else {
      out["witness"] = nullptr;
    }
    out["budget_used"] = report.budget_used;
    std::cout << out.dump(2) << '\n';
  } else {
    std::cout << std::setprecision(12);
    std::cout << "verdict: " << to_string(report.verdict) << " (budget used "
              << report.budget_used << ")\n";
    if (report.witness) {
      std::cout << "witness: x = " << format_vector(report.witness->x) << ", t = "
                << report.witness->t << '\n';
    } else {
      std::cout << "no witness found; this does not certify d-regularity\n";
    }
  }
  return found ? 0 : 1;
}

// ---------------------------------------------------------------------------
// minors
// ---------------------------------------------------------------------------

struct MinorsArgs {
  std::string path;
  double delta = 0.5;
  long budget = 64;
  std::uint64_t seed = 0;
  bool as_json = false;
};

int run_minors(const MinorsArgs& args) {
  const Tensor<double> a = load_tensor(args.path);
  const auto report = tncp::minor_bounds_probe(a, args.delta, args.budget, args.seed);

  if (args.as_json) {
    json out;
    out["command"] = "minors";
    out["delta"] = report.delta;
    out["samples"] = report.samples;
    out["violation_count"] = report.violations.size();
    json vs = json::array();
    for (const auto& v : report.violations) {
      json e;
      e["x"] = to_json(v.x);
      json idx = json::array();
      for (int i : tncp::mask_indices(v.subset_mask)) idx.push_back(i + 1);
      e["indices"] = idx;
      e["minor"] = v.value;
      vs.push_back(e);
    }
    out["violations"] = vs;
    std::cout << out.dump(2) << '\n';
  } else {
    std::cout << std::setprecision(12);
    std::cout << "delta: " << report.delta << ", samples: " << report.samples << '\n';
    std::cout << "violations: " << report.violations.size() << '\n';
    const std::size_t shown = std::min<std::size_t>(report.violations.size(), 10);
    for (std::size_t i = 0; i < shown; ++i) {
      const auto& v = report.violations[i];
      std::cout << "  minor ";
      for (int j : tncp::mask_indices(v.subset_mask)) std::cout << (j + 1) << ' ';
      std::cout << "= " << v.value << " at x = " << format_vector(v.x) << '\n';
    }
    if (shown < report.violations.size()) {
      std::cout << "  ... " << (report.violations.size() - shown) << " more\n";
    }
  }
  return report.violations.empty() ? 1 : 0;
}

// ---------------------------------------------------------------------------
// gen
// ---------------------------------------------------------------------------

struct GenArgs {
  std::string kind;
  int order = 4;
  int dim = 2;
  std::uint64_t seed = 0;
  std::string output;
  std::string q_output;
  bool as_json = false;
};

MatrixXd random_orthogonal(std::mt19937_64& rng, int n) {
  MatrixXd g(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) g(i, j) = tncp::gaussian(rng);
  Eigen::HouseholderQR<MatrixXd> qr(g);
  MatrixXd q = qr.householderQ();
  const MatrixXd r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (int j = 0; j < n; ++j)
    if (r(j, j) < 0) q.col(j) = -q.col(j);
  return q;
}

int run_gen(const GenArgs& args) {
  if (args.order < 1 || args.dim < 1) throw std::runtime_error("order and dim must be >= 1");
  std::mt19937_64 rng(args.seed);

  Tensor<double> tensor = Tensor<double>::identity(args.order, args.dim);
  bool sparse = false;
  if (args.kind == "identity") {
    sparse = true;
  } else if (args.kind == "diagpd") {
    if (args.order % 2 != 0) throw std::runtime_error("diagpd requires an even order");
    tncp::DiagonalizableForm<double> form;
    form.diag.resize(args.dim);
    for (int i = 0; i < args.dim; ++i) form.diag[i] = tncp::uniform(rng, 0.5, 2.0);
    VectorXd s(args.dim);
    for (int i = 0; i < args.dim; ++i) s[i] = tncp::uniform(rng, 0.5, 2.0);
    form.basis = random_orthogonal(rng, args.dim) * s.asDiagonal() *
                 random_orthogonal(rng, args.dim).transpose();
    tensor = realize(form, args.order);
  } else if (args.kind == "allpos") {
    VectorXd entries(tncp::detail::entry_count(args.order, args.dim));
    for (Eigen::Index i = 0; i < entries.size(); ++i) entries[i] = tncp::uniform(rng, 0.1, 1.0);
    tensor = symmetrize(Tensor<double>(args.order, args.dim, std::move(entries)));
  } else if (args.kind == "random-symmetric") {
    VectorXd entries(tncp::detail::entry_count(args.order, args.dim));
    for (Eigen::Index i = 0; i < entries.size(); ++i) entries[i] = tncp::uniform(rng, -1.0, 1.0);
    tensor = symmetrize(Tensor<double>(args.order, args.dim, std::move(entries)));
  } else {
    throw std::runtime_error("unknown kind '" + args.kind +
                             "' (expected identity, diagpd, allpos or random-symmetric)");
  }

  const std::string tensor_text = tncp::to_text(tensor, sparse);
  std::optional<std::string> q_text;
  if (!args.q_output.empty()) {
    VectorXd q(args.dim);
    do {
      for (int i = 0; i < args.dim; ++i) q[i] = tncp::uniform(rng, -1.0, 1.0);
    } while (args.dim > 1 && (q.minCoeff() >= 0.0 || q.maxCoeff() <= 0.0));
    q_text = tncp::to_text(q);
    write_file(args.q_output, *q_text);
  }
  if (!args.output.empty()) write_file(args.output, tensor_text);

  if (args.as_json) {
    json out;
    out["command"] = "gen";
    out["kind"] = args.kind;
    out["order"] = args.order;
    out["dim"] = args.dim;
    out["seed"] = args.seed;
    out["output"] = args.output.empty() ? json(nullptr) : json(args.output);
    out["q_output"] = args.q_output.empty() ? json(nullptr) : json(args.q_output);
    out["tensor_text"] = args.output.empty() ? json(tensor_text) : json(nullptr);
    std::cout << out.dump(2) << '\n';
  } else if (args.output.empty()) {
    std::cout << tensor_text;
  } else {
    std::cout << "wrote " << args.output;
    if (!args.q_output.empty()) std::cout << " and " << args.q_output;
    std::cout << '\n';
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"tensor nonlinear complementarity toolkit"};
  app.require_subcommand(1);

  AnalyzeArgs analyze_args;
  auto* analyze = app.add_subcommand("analyze", "structure verdicts for a tensor");
  analyze->add_option("tensor", analyze_args.path, "tensor file")->required();
  analyze->add_option("--tol", analyze_args.tol, "classification tolerance");
  analyze->add_option("--starts", analyze_args.starts, "multi-start budget");
  analyze->add_option("--max-iter", analyze_args.max_iter, "iterations per descent");
  analyze->add_option("--seed", analyze_args.seed, "random seed");
  analyze->add_flag("--json", analyze_args.as_json, "machine-readable output");

  SolveArgs solve_args;
  auto* solve = app.add_subcommand("solve", "solve a complementarity instance");
  solve->add_option("instance", solve_args.paths, "gtcp file, or tensor file + q vector file")
      ->required()
      ->expected(1, 2);
  solve->add_option("--method", solve_args.method, "fb-newton | proj-grad | nlp")
      ->check(CLI::IsMember({"fb-newton", "proj-grad", "nlp"}));
  solve->add_option("--tol", solve_args.tol, "residual tolerance");
  solve->add_option("--max-iter", solve_args.max_iter, "iterations per start");
  solve->add_option("--starts", solve_args.starts, "multi-start budget");
  solve->add_option("--seed", solve_args.seed, "random seed");
  solve->add_flag("--json", solve_args.as_json, "machine-readable output");

  VerifyArgs verify_args;
  auto* verify = app.add_subcommand("verify", "check a candidate solution");
  verify
      ->add_option("files", verify_args.paths,
                   "instance (gtcp, or tensor + q vector) followed by the x vector file")
      ->required()
      ->expected(2, 3);
  verify->add_option("--u", verify_args.u_path, "multiplier vector file (default: u = x)");
  verify->add_option("--tol", verify_args.tol, "verification tolerance");
  verify->add_flag("--json", verify_args.as_json, "machine-readable output");

  DregArgs dreg_args;
  auto* dreg = app.add_subcommand("dreg", "search for a d-regularity counterexample");
  dreg->add_option("tensor", dreg_args.path, "tensor file")->required();
  dreg->add_option("--d", dreg_args.d_path, "positive direction vector file (default: ones)");
  dreg->add_option("--budget", dreg_args.budget, "total samples");
  dreg->add_option("--tol", dreg_args.tol, "witness tolerance");
  dreg->add_option("--seed", dreg_args.seed, "random seed");
  dreg->add_flag("--json", dreg_args.as_json, "machine-readable output");

  MinorsArgs minors_args;
  auto* minors = app.add_subcommand("minors", "probe principal-minor bounds of the Jacobian");
  minors->add_option("tensor", minors_args.path, "tensor file")->required();
  minors->add_option("--delta", minors_args.delta, "bound parameter in (0,1)")->required();
  minors->add_option("--budget", minors_args.budget, "sample count");
  minors->add_option("--seed", minors_args.seed, "random seed");
  minors->add_flag("--json", minors_args.as_json, "machine-readable output");

  GenArgs gen_args;
  auto* gen = app.add_subcommand("gen", "generate an instance fixture");
  gen->add_option("kind", gen_args.kind, "identity | diagpd | allpos | random-symmetric")
      ->required();
  gen->add_option("--order", gen_args.order, "tensor order");
  gen->add_option("--dim", gen_args.dim, "tensor dimension");
  gen->add_option("--seed", gen_args.seed, "random seed (bit-reproducible output)");
  gen->add_option("-o,--output", gen_args.output, "tensor output path (default: stdout)");
  gen->add_option("--q-out", gen_args.q_output, "also write a mixed-sign q vector here");
  gen->add_flag("--json", gen_args.as_json, "machine-readable output");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  try {
    if (*analyze) return run_analyze(analyze_args);
    if (*solve) return run_solve(solve_args);
    if (*verify) return run_verify(verify_args);
    if (*dreg) return run_dreg(dreg_args);
    if (*minors) return run_minors(minors_args);
    if (*gen) return run_gen(gen_args);
  } catch (const tncp::ParseError& e) {
    std::cerr << "parse error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 2;
}
