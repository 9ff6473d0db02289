#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "eivtls/model.hpp"

namespace eivtls::harness {

enum class Experiment { Consistency, Inclusion, Misspecification, Slln };

std::string_view to_string(Experiment e);
Experiment experiment_from_string(std::string_view name);

/// Weight sequence of the Cesaro-sum demo.
enum class AlphaKind { Zero, One, Alternating };

struct ExperimentConfig {
  model::ModelSpec spec;
  std::vector<Index> m_schedule;
  Index replicates = 1;
  /// True selects automatic rank estimation.
  bool auto_rank = false;
  /// Explicit rank override; unset means r for consistency/misspec and
  /// r_inf for inclusion.
  std::optional<Index> rank;
  std::string out_prefix;

  /// Throws InvalidConfig naming the offending field.
  void validate(Experiment experiment) const;
};

struct SllnConfig {
  AlphaKind alpha = AlphaKind::One;
  model::NoiseKind noise = model::NoiseKind::Gaussian;
  double sigma = 1.0;
  std::vector<Index> m_schedule;
  Index seeds = 1;
  std::uint64_t seed = 0;
  std::string out_prefix;

  void validate() const;
};

/// One (m, replicate) cell. Metrics that do not apply to the experiment are NaN.
struct Row {
  std::string experiment;
  Index m = 0;
  Index replicate = 0;
  std::string status = "ok";
  Index rank = 0;
  double sin_max = 0.0;
  double x_error = 0.0;
  double tls_error = 0.0;
  double gram_residual = 0.0;
  double spectral_gap = 0.0;
  int gap_degenerate = 0;
  double noise_eig_rel_dev = 0.0;
  double dk_lhs = 0.0;
  double dk_rhs = 0.0;
  int dk_violated = 0;
  double slln_value = 0.0;
  double alpha_sq_mean = 0.0;

  bool ok() const { return status == "ok"; }
};

struct MetricStats {
  Index count = 0;
  double median = 0.0;
  double q1 = 0.0;
  double q3 = 0.0;
};

struct MSummary {
  Index m = 0;
  Index rows = 0;
  Index excluded = 0;
  Index modal_rank = 0;
  Index gap_degenerate = 0;
  Index dk_evaluated = 0;
  Index dk_violations = 0;
  std::map<std::string, MetricStats> metrics;
};

struct ConvergenceReport {
  std::string experiment;
  std::vector<Row> rows;
  std::vector<MSummary> per_m;
  Index excluded = 0;

  const MSummary& at(Index m) const;
  /// Median of `metric` for every m in schedule order.
  std::vector<double> medians(const std::string& metric) const;
};

ConvergenceReport run_consistency_experiment(const ExperimentConfig& config);
ConvergenceReport run_inclusion_experiment(const ExperimentConfig& config);
/// CTLS against rank-r TLS that ignores the exact rows; the config's
/// coupling decides whether the exact-row directions appear in the noisy rows.
ConvergenceReport misspecification_demo(const ExperimentConfig& config);
ConvergenceReport slln_demo(const SllnConfig& config);

ConvergenceReport run_experiment(Experiment experiment, const ExperimentConfig& config);

/// Per-m aggregation over ok rows. Depends on the rows only.
ConvergenceReport summarize(std::string experiment, std::vector<Row> rows);

std::string rows_to_csv(const std::vector<Row>& rows);
/// Throws MalformedInput on any structural problem or an empty file.
std::vector<Row> rows_from_csv(std::string_view text);

std::string summary_json(const ConvergenceReport& report);
std::string summary_markdown(const ConvergenceReport& report);

/// Writes <prefix>_rows.csv and <prefix>_summary.json.
void write_report(const ConvergenceReport& report, const std::string& prefix);

/// Parses the JSON config (keys n, ell, k, r, r_inf, sigma, noise, seed,
/// m_schedule, replicates, rank_mode, out_prefix; optional coupling, alpha).
ExperimentConfig config_from_json(std::string_view text, Experiment experiment);
SllnConfig slln_config_from_json(std::string_view text);

/// Worker count: EIV_TLS_THREADS if set and positive, else the machine's.
unsigned worker_count();

}  // namespace eivtls::harness
