#include "eivtls/harness.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <exception>
#include <filesystem>
#include <limits>
#include <mutex>
#include <random>
#include <sstream>
#include <thread>

#include "eivtls/error.hpp"
#include "eivtls/matrix_io.hpp"
#include "eivtls/metrics.hpp"
#include "eivtls/solvers.hpp"
#include "json.hpp"

namespace eivtls::harness {

namespace {

using nlohmann::ordered_json;

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
constexpr std::uint64_t kNoiseStream = 0x4e4f4953455f5f5fULL;
constexpr std::uint64_t kSllnStream = 0x534c4c4e5f5f5f5fULL;

const std::vector<std::string> kColumns = {
    "experiment", "m",           "replicate",         "status", "rank",   "sin_max",
    "x_error",    "tls_error",   "gram_residual",     "spectral_gap",     "gap_degenerate",
    "noise_eig_rel_dev",         "dk_lhs",            "dk_rhs", "dk_violated", "slln_value",
    "alpha_sq_mean"};

// numeric metrics aggregated in the summary, in output order
const std::vector<std::string> kMetrics = {"sin_max",           "x_error", "tls_error", "gram_residual", "spectral_gap",
                                           "noise_eig_rel_dev", "dk_lhs",  "dk_rhs",    "slln_value",    "alpha_sq_mean"};

double metric_of(const Row& row, const std::string& name) {
  if (name == "sin_max") return row.sin_max;
  if (name == "x_error") return row.x_error;
  if (name == "tls_error") return row.tls_error;
  if (name == "gram_residual") return row.gram_residual;
  if (name == "spectral_gap") return row.spectral_gap;
  if (name == "noise_eig_rel_dev") return row.noise_eig_rel_dev;
  if (name == "dk_lhs") return row.dk_lhs;
  if (name == "dk_rhs") return row.dk_rhs;
  if (name == "slln_value") return row.slln_value;
  if (name == "alpha_sq_mean") return row.alpha_sq_mean;
  throw Error(ErrorCode::InvalidConfig, "unknown metric " + name);
}

Row blank_row(std::string experiment, Index m, Index replicate) {
  Row row;
  row.experiment = std::move(experiment);
  row.m = m;
  row.replicate = replicate;
  row.sin_max = row.x_error = row.tls_error = row.gram_residual = row.spectral_gap = kNaN;
  row.noise_eig_rel_dev = row.dk_lhs = row.dk_rhs = row.slln_value = row.alpha_sq_mean = kNaN;
  return row;
}

// Runs body(i) for i in [0, count) on worker_count() threads. Results are
// written by index, so completion order does not matter.
template <typename Body>
void parallel_for(std::size_t count, Body body) {
  const std::size_t workers = std::min<std::size_t>(worker_count(), count);
  if (workers <= 1) {
    for (std::size_t i = 0; i < count; ++i) body(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < count; i = next++) {
        try {
          body(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(failure_mutex);
          if (!failure) failure = std::current_exception();
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
}

struct Cell {
  Index m;
  Index replicate;
};

std::vector<Cell> cells_of(const std::vector<Index>& schedule, Index replicates) {
  std::vector<Cell> cells;
  for (Index m : schedule)
    for (Index r = 0; r < replicates; ++r) cells.push_back({m, r});
  return cells;
}

struct Sample {
  model::GroundTruth truth;
  model::ProblemInstance instance;
};

Sample draw_sample(const model::ModelSpec& spec, const Cell& cell) {
  const auto rep = static_cast<std::uint64_t>(cell.replicate);
  model::GroundTruth gt = model::synthesize_ground_truth(spec, cell.m, rep);
  const std::uint64_t noise_seed =
      model::mix_seed(model::mix_seed(model::mix_seed(spec.seed, kNoiseStream), static_cast<std::uint64_t>(cell.m)), rep);
  model::ProblemInstance inst = model::add_noise(gt, noise_seed);
  return {std::move(gt), std::move(inst)};
}

std::optional<Index> solver_rank(const ExperimentConfig& config, Index fallback) {
  if (config.auto_rank) return std::nullopt;
  return config.rank.value_or(fallback);
}

template <typename RowFn>
ConvergenceReport run_cells(Experiment experiment, const ExperimentConfig& config, RowFn fill) {
  config.validate(experiment);
  const std::vector<Cell> cells = cells_of(config.m_schedule, config.replicates);
  std::vector<Row> rows(cells.size());
  const std::string name(to_string(experiment));
  parallel_for(cells.size(), [&](std::size_t i) {
    Row row = blank_row(name, cells[i].m, cells[i].replicate);
    try {
      fill(cells[i], row);
    } catch (const Error& e) {
      if (!is_solver_error(e.code())) throw;
      if (row.status == "ok") row.status = std::string(to_string(e.code()));
    }
    rows[i] = std::move(row);
  });
  ConvergenceReport report = summarize(name, std::move(rows));
  if (!config.out_prefix.empty()) write_report(report, config.out_prefix);
  return report;
}

std::vector<double> sorted_finite(std::vector<double> values) {
  values.erase(std::remove_if(values.begin(), values.end(), [](double v) { return !std::isfinite(v); }), values.end());
  std::sort(values.begin(), values.end());
  return values;
}

// linear-interpolation quantile of sorted data
double quantile(const std::vector<double>& sorted, double q) {
  const double pos = q * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

double parse_double_field(std::string_view s, std::size_t line) {
  double v = 0.0;
  if (s == "nan") return kNaN;
  if (s == "inf") return std::numeric_limits<double>::infinity();
  if (s == "-inf") return -std::numeric_limits<double>::infinity();
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || ec != std::errc() || ptr != s.data() + s.size()) {
    throw Error(ErrorCode::MalformedInput, "rows line " + std::to_string(line) + ": bad number '" + std::string(s) + "'");
  }
  return v;
}

long long parse_int_field(std::string_view s, std::size_t line) {
  long long v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || ec != std::errc() || ptr != s.data() + s.size()) {
    throw Error(ErrorCode::MalformedInput, "rows line " + std::to_string(line) + ": bad integer '" + std::string(s) + "'");
  }
  return v;
}

std::vector<std::string_view> split(std::string_view line, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = line.find(sep, start);
    out.push_back(line.substr(start, pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

ordered_json number_or_null(double v) { return std::isfinite(v) ? ordered_json(v) : ordered_json(nullptr); }

[[noreturn]] void bad_field(const std::string& field, const std::string& why) {
  throw Error(ErrorCode::InvalidConfig, "config field '" + field + "': " + why);
}

Index get_index(const ordered_json& j, const char* key, std::optional<Index> fallback) {
  if (!j.contains(key)) {
    if (fallback) return *fallback;
    bad_field(key, "required");
  }
  const auto& v = j.at(key);
  if (!v.is_number_integer()) bad_field(key, "must be an integer");
  return v.get<Index>();
}

double get_double(const ordered_json& j, const char* key, std::optional<double> fallback) {
  if (!j.contains(key)) {
    if (fallback) return *fallback;
    bad_field(key, "required");
  }
  const auto& v = j.at(key);
  if (!v.is_number()) bad_field(key, "must be a number");
  return v.get<double>();
}

std::string get_string(const ordered_json& j, const char* key, const std::string& fallback) {
  if (!j.contains(key)) return fallback;
  const auto& v = j.at(key);
  if (!v.is_string()) bad_field(key, "must be a string");
  return v.get<std::string>();
}

ordered_json parse_object(std::string_view text, const std::vector<std::string>& allowed) {
  ordered_json j;
  try {
    j = ordered_json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(ErrorCode::InvalidConfig, std::string("config is not valid JSON: ") + e.what());
  }
  if (!j.is_object()) throw Error(ErrorCode::InvalidConfig, "config must be a JSON object");
  for (const auto& [key, value] : j.items()) {
    if (std::find(allowed.begin(), allowed.end(), key) == allowed.end()) bad_field(key, "unknown key");
  }
  return j;
}

model::NoiseKind parse_noise(const ordered_json& j) {
  const std::string noise = get_string(j, "noise", "gaussian");
  if (noise == "gaussian") return model::NoiseKind::Gaussian;
  if (noise == "uniform") return model::NoiseKind::Uniform;
  bad_field("noise", "expected 'gaussian' or 'uniform', got '" + noise + "'");
}

std::vector<Index> parse_schedule(const ordered_json& j) {
  if (!j.contains("m_schedule")) bad_field("m_schedule", "required");
  const auto& v = j.at("m_schedule");
  if (!v.is_array() || v.empty()) bad_field("m_schedule", "must be a non-empty array of integers");
  std::vector<Index> out;
  for (const auto& e : v) {
    if (!e.is_number_integer()) bad_field("m_schedule", "entries must be integers");
    out.push_back(e.get<Index>());
  }
  return out;
}

std::uint64_t parse_seed(const ordered_json& j) {
  if (!j.contains("seed")) return 0;
  const auto& v = j.at("seed");
  if (!v.is_number_integer() || (v.is_number_integer() && !v.is_number_unsigned() && v.get<long long>() < 0)) {
    bad_field("seed", "must be a non-negative integer");
  }
  return v.get<std::uint64_t>();
}

void check_schedule(const std::vector<Index>& schedule, Index min_exclusive) {
  if (schedule.empty()) bad_field("m_schedule", "must not be empty");
  for (std::size_t i = 0; i < schedule.size(); ++i) {
    if (schedule[i] <= min_exclusive) {
      bad_field("m_schedule", "every m must exceed " + std::to_string(min_exclusive) + ", got " +
                                  std::to_string(schedule[i]));
    }
    if (i > 0 && schedule[i] <= schedule[i - 1]) bad_field("m_schedule", "must be strictly increasing");
  }
}

}  // namespace

std::string_view to_string(Experiment e) {
  switch (e) {
    case Experiment::Consistency: return "consistency";
    case Experiment::Inclusion: return "inclusion";
    case Experiment::Misspecification: return "misspec";
    case Experiment::Slln: return "slln";
  }
  return "consistency";
}

Experiment experiment_from_string(std::string_view name) {
  if (name == "consistency") return Experiment::Consistency;
  if (name == "inclusion") return Experiment::Inclusion;
  if (name == "misspec") return Experiment::Misspecification;
  if (name == "slln") return Experiment::Slln;
  throw Error(ErrorCode::InvalidConfig, "unknown experiment '" + std::string(name) + "'");
}

unsigned worker_count() {
  if (const char* env = std::getenv("EIV_TLS_THREADS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && v > 0) return static_cast<unsigned>(v);
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

void ExperimentConfig::validate(Experiment experiment) const {
  try {
    spec.validate();
  } catch (const Error& e) {
    throw Error(ErrorCode::InvalidConfig, std::string("config spec (n, ell, k, r, r_inf, sigma): ") + e.what());
  }
  check_schedule(m_schedule, spec.n + spec.ell);
  if (replicates < 1) bad_field("replicates", "must be >= 1");
  if (rank && !(spec.k < *rank && *rank <= spec.n)) bad_field("rank_mode", "explicit rank must satisfy k < rank <= n");
  if (experiment == Experiment::Inclusion && !(spec.rank_inf() < spec.r)) {
    bad_field("r_inf", "inclusion experiment needs r_inf < r");
  }
  if (experiment == Experiment::Misspecification && spec.k < 1) bad_field("k", "misspecification demo needs k > 0");
}

void SllnConfig::validate() const {
  if (!(sigma >= 0.0) || !std::isfinite(sigma)) bad_field("sigma", "must be finite and >= 0");
  check_schedule(m_schedule, 0);
  if (seeds < 1) bad_field("replicates", "must be >= 1");
}

const MSummary& ConvergenceReport::at(Index m) const {
  for (const auto& s : per_m)
    if (s.m == m) return s;
  throw Error(ErrorCode::InvalidConfig, "no rows for m = " + std::to_string(m));
}

std::vector<double> ConvergenceReport::medians(const std::string& metric) const {
  std::vector<double> out;
  for (const auto& s : per_m) {
    auto it = s.metrics.find(metric);
    out.push_back(it == s.metrics.end() ? kNaN : it->second.median);
  }
  return out;
}

ConvergenceReport run_consistency_experiment(const ExperimentConfig& config) {
  const model::ModelSpec& spec = config.spec;
  return run_cells(Experiment::Consistency, config, [&](const Cell& cell, Row& row) {
    const Sample sample = draw_sample(spec, cell);
    const model::NoiselessReference ref = model::noiseless_reference(sample.truth);
    const solvers::SolutionSet sol = solvers::solve_ctls({sample.instance, solver_rank(config, spec.r)});
    const auto& basis = sol.basis;
    const double s2 = spec.sigma * spec.sigma;

    row.rank = basis.rank;
    row.sin_max = metrics::principal_angles(basis.z, sample.truth.y_bar).sin_max;
    row.x_error = (sol.x_star - sample.truth.x_min).norm();
    const Matrix g = solvers::form_G(sample.instance.c2(), basis.p);
    row.gram_residual = metrics::gram_limit_residual(g, cell.m, ref.t_hat, spec.sigma);
    row.spectral_gap = basis.spectral_gap;
    row.gap_degenerate = basis.gap_degenerate ? 1 : 0;
    if (s2 > 0.0) {
      const Index d = basis.v.cols();
      const Vector low = basis.eigvals.head(d) / static_cast<double>(cell.m);
      row.noise_eig_rel_dev = ((low.array() - s2).abs() / s2).maxCoeff();
      const double eps = 0.5 * s2;
      if (basis.v.cols() == ref.v_bar.cols() && basis.spectral_gap > s2 - eps) {
        const metrics::DkCheck dk = metrics::davis_kahan_check(basis.v, ref.v_bar, g, cell.m, ref.t_hat, spec.sigma, eps);
        row.dk_lhs = dk.lhs;
        row.dk_rhs = dk.rhs;
        row.dk_violated = dk.violated ? 1 : 0;
      }
    }
  });
}

ConvergenceReport run_inclusion_experiment(const ExperimentConfig& config) {
  const model::ModelSpec& spec = config.spec;
  return run_cells(Experiment::Inclusion, config, [&](const Cell& cell, Row& row) {
    const Sample sample = draw_sample(spec, cell);
    const solvers::SolutionSet sol = solvers::solve_ctls({sample.instance, solver_rank(config, spec.rank_inf())});
    row.rank = sol.basis.rank;
    // containment of Ra(Ybar) into Ra(Z) when dim Ybar <= dim Z
    row.sin_max = metrics::principal_angles(sample.truth.y_bar, sol.basis.z).sin_max;
    row.x_error = (sol.x_star - sample.truth.x_min).norm();
    row.spectral_gap = sol.basis.spectral_gap;
    row.gap_degenerate = sol.basis.gap_degenerate ? 1 : 0;
  });
}

ConvergenceReport misspecification_demo(const ExperimentConfig& config) {
  const model::ModelSpec& spec = config.spec;
  return run_cells(Experiment::Misspecification, config, [&](const Cell& cell, Row& row) {
    const Sample sample = draw_sample(spec, cell);
    solvers::SolutionSet ctls;
    try {
      ctls = solvers::solve_ctls({sample.instance, solver_rank(config, spec.r)});
    } catch (const Error& e) {
      if (is_solver_error(e.code())) row.status = "ctls:" + std::string(to_string(e.code()));
      throw;
    }
    row.rank = ctls.basis.rank;
    row.x_error = (ctls.x_star - sample.truth.x_min).norm();
    row.sin_max = metrics::principal_angles(ctls.basis.z, sample.truth.y_bar).sin_max;
    row.spectral_gap = ctls.basis.spectral_gap;
    row.gap_degenerate = ctls.basis.gap_degenerate ? 1 : 0;
    try {
      const solvers::SolutionSet tls = solvers::solve_ttls(sample.instance.a, sample.instance.b, ctls.basis.rank);
      row.tls_error = (tls.x_star - sample.truth.x_min).norm();
    } catch (const Error& e) {
      if (is_solver_error(e.code())) row.status = "tls:" + std::string(to_string(e.code()));
      throw;
    }
  });
}

ConvergenceReport slln_demo(const SllnConfig& config) {
  config.validate();
  const auto seeds = static_cast<std::size_t>(config.seeds);
  const std::size_t per_seed = config.m_schedule.size();
  std::vector<Row> rows(seeds * per_seed);
  parallel_for(seeds, [&](std::size_t s) {
    std::mt19937_64 rng(model::mix_seed(model::mix_seed(config.seed, kSllnStream), s));
    std::normal_distribution<double> normal(0.0, config.sigma);
    const double half_width = config.sigma * std::sqrt(3.0);
    std::uniform_real_distribution<double> uniform(-half_width, half_width);
    double weighted = 0.0;
    double alpha_sq = 0.0;
    Index i = 0;
    for (std::size_t step = 0; step < per_seed; ++step) {
      const Index m = config.m_schedule[step];
      for (; i < m; ++i) {
        const double eps = config.noise == model::NoiseKind::Gaussian ? normal(rng) : uniform(rng);
        // 1-based index i+1
        double alpha = 1.0;
        if (config.alpha == AlphaKind::Zero) alpha = 0.0;
        if (config.alpha == AlphaKind::Alternating) alpha = ((i + 1) % 2 == 0) ? 1.0 : -1.0;
        weighted += alpha * eps;
        alpha_sq += alpha * alpha;
      }
      Row row = blank_row("slln", m, static_cast<Index>(s));
      row.slln_value = std::abs(weighted / static_cast<double>(m));
      row.alpha_sq_mean = alpha_sq / static_cast<double>(m);
      rows[step * seeds + s] = std::move(row);
    }
  });
  ConvergenceReport report = summarize("slln", std::move(rows));
  if (!config.out_prefix.empty()) write_report(report, config.out_prefix);
  return report;
}

ConvergenceReport run_experiment(Experiment experiment, const ExperimentConfig& config) {
  switch (experiment) {
    case Experiment::Consistency: return run_consistency_experiment(config);
    case Experiment::Inclusion: return run_inclusion_experiment(config);
    case Experiment::Misspecification: return misspecification_demo(config);
    case Experiment::Slln: break;
  }
  throw Error(ErrorCode::InvalidConfig, "slln runs from an SllnConfig");
}

ConvergenceReport summarize(std::string experiment, std::vector<Row> rows) {
  ConvergenceReport report;
  report.experiment = std::move(experiment);
  std::vector<Index> ms;
  for (const auto& r : rows)
    if (std::find(ms.begin(), ms.end(), r.m) == ms.end()) ms.push_back(r.m);
  std::sort(ms.begin(), ms.end());

  for (Index m : ms) {
    MSummary s;
    s.m = m;
    std::map<Index, Index> rank_counts;
    std::map<std::string, std::vector<double>> values;
    for (const auto& r : rows) {
      if (r.m != m) continue;
      ++s.rows;
      if (!r.ok()) {
        ++s.excluded;
        continue;
      }
      ++rank_counts[r.rank];
      s.gap_degenerate += r.gap_degenerate;
      if (std::isfinite(r.dk_lhs)) {
        ++s.dk_evaluated;
        s.dk_violations += r.dk_violated;
      }
      for (const auto& name : kMetrics) values[name].push_back(metric_of(r, name));
    }
    Index best_count = 0;
    for (const auto& [rank, count] : rank_counts) {
      if (count > best_count) {
        best_count = count;
        s.modal_rank = rank;
      }
    }
    for (const auto& name : kMetrics) {
      const std::vector<double> sorted = sorted_finite(values[name]);
      if (sorted.empty()) continue;
      MetricStats st;
      st.count = static_cast<Index>(sorted.size());
      st.median = quantile(sorted, 0.5);
      st.q1 = quantile(sorted, 0.25);
      st.q3 = quantile(sorted, 0.75);
      s.metrics[name] = st;
    }
    report.excluded += s.excluded;
    report.per_m.push_back(std::move(s));
  }
  report.rows = std::move(rows);
  return report;
}

std::string rows_to_csv(const std::vector<Row>& rows) {
  std::string out;
  for (std::size_t i = 0; i < kColumns.size(); ++i) {
    if (i) out.push_back(',');
    out += kColumns[i];
  }
  out.push_back('\n');
  for (const auto& r : rows) {
    std::ostringstream line;
    line << r.experiment << ',' << r.m << ',' << r.replicate << ',' << r.status << ',' << r.rank << ','
         << format_double(r.sin_max) << ',' << format_double(r.x_error) << ',' << format_double(r.tls_error) << ','
         << format_double(r.gram_residual) << ',' << format_double(r.spectral_gap) << ',' << r.gap_degenerate << ','
         << format_double(r.noise_eig_rel_dev) << ',' << format_double(r.dk_lhs) << ',' << format_double(r.dk_rhs)
         << ',' << r.dk_violated << ',' << format_double(r.slln_value) << ',' << format_double(r.alpha_sq_mean)
         << '\n';
    out += line.str();
  }
  return out;
}

std::vector<Row> rows_from_csv(std::string_view text) {
  std::vector<Row> rows;
  std::size_t line_no = 0;
  bool header_seen = false;
  while (!text.empty()) {
    const std::size_t end = text.find('\n');
    std::string_view line = text.substr(0, end);
    text = end == std::string_view::npos ? std::string_view{} : text.substr(end + 1);
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.empty()) continue;
    const auto fields = split(line, ',');
    if (fields.size() != kColumns.size()) {
      throw Error(ErrorCode::MalformedInput, "rows line " + std::to_string(line_no) + ": expected " +
                                                 std::to_string(kColumns.size()) + " fields, got " +
                                                 std::to_string(fields.size()));
    }
    if (!header_seen) {
      for (std::size_t i = 0; i < fields.size(); ++i) {
        if (fields[i] != kColumns[i]) throw Error(ErrorCode::MalformedInput, "rows header does not match the schema");
      }
      header_seen = true;
      continue;
    }
    Row r;
    r.experiment = std::string(fields[0]);
    r.m = parse_int_field(fields[1], line_no);
    r.replicate = parse_int_field(fields[2], line_no);
    r.status = std::string(fields[3]);
    r.rank = parse_int_field(fields[4], line_no);
    r.sin_max = parse_double_field(fields[5], line_no);
    r.x_error = parse_double_field(fields[6], line_no);
    r.tls_error = parse_double_field(fields[7], line_no);
    r.gram_residual = parse_double_field(fields[8], line_no);
    r.spectral_gap = parse_double_field(fields[9], line_no);
    r.gap_degenerate = static_cast<int>(parse_int_field(fields[10], line_no));
    r.noise_eig_rel_dev = parse_double_field(fields[11], line_no);
    r.dk_lhs = parse_double_field(fields[12], line_no);
    r.dk_rhs = parse_double_field(fields[13], line_no);
    r.dk_violated = static_cast<int>(parse_int_field(fields[14], line_no));
    r.slln_value = parse_double_field(fields[15], line_no);
    r.alpha_sq_mean = parse_double_field(fields[16], line_no);
    if (r.experiment.empty() || r.status.empty()) {
      throw Error(ErrorCode::MalformedInput, "rows line " + std::to_string(line_no) + ": empty experiment or status");
    }
    if (!rows.empty() && rows.front().experiment != r.experiment) {
      throw Error(ErrorCode::MalformedInput, "rows mix experiments");
    }
    rows.push_back(std::move(r));
  }
  if (rows.empty()) throw Error(ErrorCode::MalformedInput, "rows file has no data rows");
  return rows;
}

std::string summary_json(const ConvergenceReport& report) {
  ordered_json j;
  j["experiment"] = report.experiment;
  j["total_rows"] = report.rows.size();
  j["excluded"] = report.excluded;
  ordered_json per_m = ordered_json::array();
  for (const auto& s : report.per_m) {
    ordered_json e;
    e["m"] = s.m;
    e["rows"] = s.rows;
    e["excluded"] = s.excluded;
    e["modal_rank"] = s.modal_rank;
    e["gap_degenerate"] = s.gap_degenerate;
    e["dk_evaluated"] = s.dk_evaluated;
    e["dk_violations"] = s.dk_violations;
    ordered_json metrics = ordered_json::object();
    for (const auto& name : kMetrics) {
      auto it = s.metrics.find(name);
      if (it == s.metrics.end()) continue;
      ordered_json st;
      st["count"] = it->second.count;
      st["median"] = number_or_null(it->second.median);
      st["q1"] = number_or_null(it->second.q1);
      st["q3"] = number_or_null(it->second.q3);
      metrics[name] = st;
    }
    e["metrics"] = metrics;
    per_m.push_back(e);
  }
  j["per_m"] = per_m;
  return j.dump(2) + "\n";
}

std::string summary_markdown(const ConvergenceReport& report) {
  std::vector<std::string> shown;
  for (const auto& name : kMetrics) {
    if (name == "dk_lhs" || name == "dk_rhs" || name == "alpha_sq_mean") continue;
    for (const auto& s : report.per_m) {
      if (s.metrics.count(name)) {
        shown.push_back(name);
        break;
      }
    }
  }
  std::ostringstream out;
  out << "experiment: " << report.experiment << " (rows " << report.rows.size() << ", excluded " << report.excluded
      << ")\n\n";
  out << "| m | rows | excluded | rank |";
  for (const auto& name : shown) out << " median " << name << " |";
  out << "\n|---:|---:|---:|---:|";
  for (std::size_t i = 0; i < shown.size(); ++i) out << "---:|";
  out << '\n';
  char buf[32];
  for (const auto& s : report.per_m) {
    out << "| " << s.m << " | " << s.rows << " | " << s.excluded << " | " << s.modal_rank << " |";
    for (const auto& name : shown) {
      auto it = s.metrics.find(name);
      if (it == s.metrics.end()) {
        out << " - |";
      } else {
        std::snprintf(buf, sizeof buf, "%.4e", it->second.median);
        out << ' ' << buf << " |";
      }
    }
    out << '\n';
  }
  return out.str();
}

void write_report(const ConvergenceReport& report, const std::string& prefix) {
  const std::filesystem::path parent = std::filesystem::path(prefix).parent_path();
  if (!parent.empty()) std::filesystem::create_directories(parent);
  io::write_text(prefix + "_rows.csv", rows_to_csv(report.rows));
  io::write_text(prefix + "_summary.json", summary_json(report));
}

ExperimentConfig config_from_json(std::string_view text, Experiment experiment) {
  const ordered_json j = parse_object(text, {"n", "ell", "k", "r", "r_inf", "sigma", "noise", "seed", "m_schedule",
                                             "replicates", "rank_mode", "out_prefix", "coupling"});
  ExperimentConfig c;
  c.spec.n = get_index(j, "n", std::nullopt);
  c.spec.ell = get_index(j, "ell", 1);
  c.spec.k = get_index(j, "k", 0);
  c.spec.r = get_index(j, "r", std::nullopt);
  if (j.contains("r_inf")) c.spec.r_inf = get_index(j, "r_inf", std::nullopt);
  c.spec.sigma = get_double(j, "sigma", std::nullopt);
  c.spec.noise = parse_noise(j);
  c.spec.seed = parse_seed(j);
  const std::string default_coupling = experiment == Experiment::Misspecification ? "disjoint" : "shared";
  const std::string coupling = get_string(j, "coupling", default_coupling);
  if (coupling == "shared") {
    c.spec.coupling = model::ExactRowCoupling::Shared;
  } else if (coupling == "disjoint") {
    c.spec.coupling = model::ExactRowCoupling::Disjoint;
  } else {
    bad_field("coupling", "expected 'shared' or 'disjoint'");
  }
  c.m_schedule = parse_schedule(j);
  c.replicates = get_index(j, "replicates", 1);
  if (j.contains("rank_mode")) {
    const auto& v = j.at("rank_mode");
    if (v.is_string()) {
      const std::string mode = v.get<std::string>();
      if (mode == "auto") {
        c.auto_rank = true;
      } else if (mode != "explicit") {
        bad_field("rank_mode", "expected 'explicit', 'auto' or an integer rank");
      }
    } else if (v.is_number_integer()) {
      c.rank = v.get<Index>();
    } else {
      bad_field("rank_mode", "expected 'explicit', 'auto' or an integer rank");
    }
  }
  c.out_prefix = get_string(j, "out_prefix", std::string(to_string(experiment)));
  c.validate(experiment);
  return c;
}

SllnConfig slln_config_from_json(std::string_view text) {
  const ordered_json j = parse_object(text, {"sigma", "noise", "seed", "m_schedule", "replicates", "alpha", "out_prefix",
                                             "n", "ell", "k", "r", "r_inf", "rank_mode", "coupling"});
  SllnConfig c;
  c.sigma = get_double(j, "sigma", 1.0);
  c.noise = parse_noise(j);
  c.seed = parse_seed(j);
  c.m_schedule = parse_schedule(j);
  c.seeds = get_index(j, "replicates", 1);
  const std::string alpha = get_string(j, "alpha", "one");
  if (alpha == "one") {
    c.alpha = AlphaKind::One;
  } else if (alpha == "zero") {
    c.alpha = AlphaKind::Zero;
  } else if (alpha == "alternating") {
    c.alpha = AlphaKind::Alternating;
  } else {
    bad_field("alpha", "expected 'one', 'zero' or 'alternating'");
  }
  c.out_prefix = get_string(j, "out_prefix", "slln");
  c.validate();
  return c;
}

}  // namespace eivtls::harness
