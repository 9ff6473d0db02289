#include "eivtls/cli.hpp"

#include <algorithm>
#include <filesystem>
#include <iostream>
#include <optional>

#include "CLI11.hpp"
#include "eivtls/error.hpp"
#include "eivtls/harness.hpp"
#include "eivtls/matrix_io.hpp"
#include "eivtls/solvers.hpp"
#include "json.hpp"

namespace eivtls::cli {

namespace {

using nlohmann::ordered_json;

struct SolveArgs {
  std::string a_path;
  std::string b_path;
  Index k = 0;
  std::string rank = "";
  std::string method = "ctls";
  std::string out;
};

struct SimulateArgs {
  std::string config;
  std::string experiment = "consistency";
};

struct ReportArgs {
  std::string rows;
  std::string format = "md";
};

struct GenerateArgs {
  std::string config;
  Index m = 0;
  Index replicate = 0;
  std::string out;
};

ordered_json vector_json(const Vector& v) {
  ordered_json arr = ordered_json::array();
  for (Index i = 0; i < v.size(); ++i) arr.push_back(v(i));
  return arr;
}

void ensure_parent(const std::string& prefix) {
  const std::filesystem::path parent = std::filesystem::path(prefix).parent_path();
  if (!parent.empty()) std::filesystem::create_directories(parent);
}

std::optional<Index> parse_rank(const std::string& text, Index fallback) {
  if (text.empty()) return fallback;
  if (text == "auto") return std::nullopt;
  try {
    std::size_t used = 0;
    const long long v = std::stoll(text, &used);
    if (used != text.size()) throw std::invalid_argument(text);
    return static_cast<Index>(v);
  } catch (const std::exception&) {
    throw Error(ErrorCode::MalformedInput, "--rank expects an integer or 'auto', got '" + text + "'");
  }
}

int cmd_solve(const SolveArgs& args, std::ostream& out) {
  const Matrix a = io::read_csv_matrix(args.a_path);
  const Matrix b = io::read_csv_matrix(args.b_path);
  if (a.size() == 0 || b.size() == 0) throw Error(ErrorCode::MalformedInput, "A and B must be non-empty");
  model::ProblemInstance inst = model::ProblemInstance::from_blocks(a, b, args.k);
  const Index n = inst.n();
  const std::optional<Index> rank = parse_rank(args.rank, n);

  ordered_json diag;
  diag["method"] = args.method;
  diag["m"] = inst.m();
  diag["n"] = n;
  diag["ell"] = inst.ell();
  diag["k"] = inst.k;

  Matrix x;
  Matrix w(n, 0);
  if (args.method == "tls") {
    if (inst.k != 0) throw Error(ErrorCode::MalformedInput, "--k applies to --method ctls only");
    if (!rank || *rank != n) throw Error(ErrorCode::MalformedInput, "--method tls solves at full rank n");
    x = solvers::solve_tls(a, b);
    Matrix c(a.rows(), n + inst.ell());
    c << a, b;
    const auto eig = numerics::sym_eig_ascending(c.transpose() * c);
    diag["rank_mode"] = "explicit";
    diag["rank"] = n;
    diag["eigenvalues"] = vector_json(eig.values);
    diag["spectral_gap"] = eig.values(inst.ell()) - eig.values(inst.ell() - 1);
  } else if (args.method == "ttls" || args.method == "ctls") {
    if (args.method == "ttls" && inst.k != 0) throw Error(ErrorCode::MalformedInput, "--k applies to --method ctls only");
    if (rank && !(inst.k < *rank && *rank <= n)) {
      throw Error(ErrorCode::MalformedInput, "--rank must satisfy k < rank <= n");
    }
    const solvers::SolutionSet sol = solvers::solve_ctls({inst, rank});
    x = sol.x_star;
    w = sol.w_hat;
    const auto& basis = sol.basis;
    diag["rank_mode"] = rank ? "explicit" : "auto";
    diag["rank"] = basis.rank;
    diag["eigenvalues"] = vector_json(basis.eigvals);
    diag["spectral_gap"] = basis.spectral_gap;
    diag["gap_degenerate"] = basis.gap_degenerate;
    if (sol.rank_decision.estimated) {
      const auto& rd = sol.rank_decision;
      ordered_json trace;
      trace["estimated_rank"] = rd.rank;
      trace["cluster_size"] = rd.cluster_size;
      trace["noise_cluster"] = vector_json(basis.eigvals.head(rd.cluster_size));
      trace["relative_gaps"] = rd.relative_gaps;
      trace["first_cluster_size"] = inst.ell();
      trace["clamped"] = rd.clamped;
      diag["rank_decision"] = trace;
    }
  } else {
    throw Error(ErrorCode::MalformedInput, "--method must be tls, ttls or ctls");
  }

  ensure_parent(args.out);
  io::write_csv_matrix(args.out + "_x.csv", x);
  io::write_csv_matrix(args.out + "_w.csv", w);
  io::write_text(args.out + "_diag.json", diag.dump(2) + "\n");
  out << "wrote " << args.out << "_x.csv, " << args.out << "_w.csv, " << args.out << "_diag.json\n";
  return kExitOk;
}

int cmd_simulate(const SimulateArgs& args, std::ostream& out) {
  const std::string text = io::read_text(args.config);
  const harness::Experiment experiment = harness::experiment_from_string(args.experiment);
  harness::ConvergenceReport report;
  std::string prefix;
  if (experiment == harness::Experiment::Slln) {
    const harness::SllnConfig config = harness::slln_config_from_json(text);
    prefix = config.out_prefix;
    report = harness::slln_demo(config);
  } else {
    const harness::ExperimentConfig config = harness::config_from_json(text, experiment);
    prefix = config.out_prefix;
    report = harness::run_experiment(experiment, config);
  }
  out << harness::summary_markdown(report);
  out << "\nwrote " << prefix << "_rows.csv and " << prefix << "_summary.json\n";
  return kExitOk;
}

int cmd_report(const ReportArgs& args, std::ostream& out) {
  std::vector<harness::Row> rows = harness::rows_from_csv(io::read_text(args.rows));
  std::string experiment = rows.front().experiment;
  const harness::ConvergenceReport report = harness::summarize(std::move(experiment), std::move(rows));
  if (args.format == "json") {
    out << harness::summary_json(report);
  } else {
    out << harness::summary_markdown(report);
  }
  return kExitOk;
}

int cmd_generate(const GenerateArgs& args, std::ostream& out) {
  const harness::ExperimentConfig config =
      harness::config_from_json(io::read_text(args.config), harness::Experiment::Consistency);
  const auto rep = static_cast<std::uint64_t>(args.replicate);
  const model::GroundTruth gt = model::synthesize_ground_truth(config.spec, args.m, rep);
  const std::uint64_t noise_seed = model::mix_seed(model::mix_seed(config.spec.seed, args.m), rep);
  const model::ProblemInstance inst = model::add_noise(gt, noise_seed);
  ensure_parent(args.out);
  io::write_instance(args.out, inst, config.spec);
  io::write_ground_truth(args.out, gt, rep, noise_seed);
  out << "wrote instance and ground truth with prefix " << args.out << "\n";
  return kExitOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Row- and rank-constrained total least squares"};
  app.name("eiv_tls");
  app.require_subcommand(1);

  SolveArgs solve;
  auto* solve_cmd = app.add_subcommand("solve", "Solve one instance from CSV matrices");
  solve_cmd->add_option("--a", solve.a_path, "CSV file with A (m x n)")->required();
  solve_cmd->add_option("--b", solve.b_path, "CSV file with B (m x ell)")->required();
  solve_cmd->add_option("--k", solve.k, "Number of leading exact rows")->check(CLI::NonNegativeNumber);
  solve_cmd->add_option("--rank", solve.rank, "Rank constraint (integer or 'auto'); defaults to n");
  solve_cmd->add_option("--method", solve.method, "tls, ttls or ctls")
      ->check(CLI::IsMember({"tls", "ttls", "ctls"}));
  solve_cmd->add_option("--out", solve.out, "Output prefix")->required();

  SimulateArgs simulate;
  auto* sim_cmd = app.add_subcommand("simulate", "Run a Monte Carlo experiment from a JSON config");
  sim_cmd->add_option("--config", simulate.config, "JSON config file")->required();
  sim_cmd->add_option("--experiment", simulate.experiment, "consistency, inclusion, misspec or slln")
      ->check(CLI::IsMember({"consistency", "inclusion", "misspec", "slln"}));

  ReportArgs report;
  auto* report_cmd = app.add_subcommand("report", "Re-aggregate an experiment rows file");
  report_cmd->add_option("--rows", report.rows, "Rows CSV written by simulate")->required();
  report_cmd->add_option("--format", report.format, "md or json")->check(CLI::IsMember({"md", "json"}));

  GenerateArgs generate;
  auto* gen_cmd = app.add_subcommand("generate", "Write a synthetic instance and its ground truth");
  gen_cmd->add_option("--config", generate.config, "JSON config file")->required();
  gen_cmd->add_option("--m", generate.m, "Sample size")->required();
  gen_cmd->add_option("--replicate", generate.replicate, "Replicate index")->check(CLI::NonNegativeNumber);
  gen_cmd->add_option("--out", generate.out, "Output prefix")->required();

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return kExitInput;
  }

  try {
    if (*solve_cmd) return cmd_solve(solve, out);
    if (*sim_cmd) return cmd_simulate(simulate, out);
    if (*report_cmd) return cmd_report(report, out);
    if (*gen_cmd) return cmd_generate(generate, out);
  } catch (const Error& e) {
    if (is_solver_error(e.code())) {
      err << e.what() << "\n";
      return kExitSolver;
    }
    err << "error: " << e.what() << "\n";
    return kExitInput;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitInput;
  }
  return kExitInput;
}

}  // namespace eivtls::cli
