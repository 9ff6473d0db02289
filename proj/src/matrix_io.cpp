#include "eivtls/matrix_io.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <vector>

#include "eivtls/error.hpp"
#include "json.hpp"

namespace eivtls::io {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

double parse_scalar(std::string_view field, std::size_t line) {
  field = trim(field);
  if (!field.empty() && field.front() == '+') field.remove_prefix(1);
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
  if (field.empty() || ec != std::errc() || ptr != field.data() + field.size() || !std::isfinite(value)) {
    throw Error(ErrorCode::MalformedInput, "line " + std::to_string(line) + ": bad scalar '" + std::string(field) + "'");
  }
  return value;
}

const char* noise_name(model::NoiseKind kind) { return kind == model::NoiseKind::Gaussian ? "gaussian" : "uniform"; }

nlohmann::ordered_json spec_json(const model::ModelSpec& spec) {
  nlohmann::ordered_json j;
  j["n"] = spec.n;
  j["ell"] = spec.ell;
  j["k"] = spec.k;
  j["r"] = spec.r;
  j["r_inf"] = spec.rank_inf();
  j["sigma"] = spec.sigma;
  j["noise"] = noise_name(spec.noise);
  j["seed"] = spec.seed;
  j["coupling"] = spec.coupling == model::ExactRowCoupling::Shared ? "shared" : "disjoint";
  return j;
}

}  // namespace

std::string format_csv_matrix(const Matrix& m) {
  std::string out;
  if (m.size() == 0) return out;
  char buf[32];
  for (Index i = 0; i < m.rows(); ++i) {
    for (Index j = 0; j < m.cols(); ++j) {
      if (j) out.push_back(',');
      const int len = std::snprintf(buf, sizeof buf, "%.17g", m(i, j));
      out.append(buf, static_cast<std::size_t>(len));
    }
    out.push_back('\n');
  }
  return out;
}

Matrix parse_csv_matrix(std::string_view text) {
  std::vector<std::vector<double>> rows;
  std::size_t line_no = 0;
  while (!text.empty()) {
    const std::size_t end = text.find('\n');
    std::string_view line = text.substr(0, end);
    text = end == std::string_view::npos ? std::string_view{} : text.substr(end + 1);
    ++line_no;
    line = trim(line);
    if (line.empty()) {
      // only trailing blank lines are tolerated
      if (trim(text).find_first_not_of("\r\n\t ") != std::string_view::npos) {
        throw Error(ErrorCode::MalformedInput, "line " + std::to_string(line_no) + ": blank line inside matrix");
      }
      continue;
    }
    std::vector<double> row;
    std::size_t start = 0;
    while (true) {
      const std::size_t comma = line.find(',', start);
      row.push_back(parse_scalar(line.substr(start, comma - start), line_no));
      if (comma == std::string_view::npos) break;
      start = comma + 1;
    }
    if (!rows.empty() && row.size() != rows.front().size()) {
      throw Error(ErrorCode::MalformedInput, "line " + std::to_string(line_no) + ": expected " +
                                                 std::to_string(rows.front().size()) + " fields, got " +
                                                 std::to_string(row.size()));
    }
    rows.push_back(std::move(row));
  }
  if (rows.empty()) return Matrix(0, 0);
  Matrix m(static_cast<Index>(rows.size()), static_cast<Index>(rows.front().size()));
  for (Index i = 0; i < m.rows(); ++i)
    for (Index j = 0; j < m.cols(); ++j) m(i, j) = rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
  return m;
}

std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::MalformedInput, "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text(const std::filesystem::path& path, std::string_view text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::MalformedInput, "cannot write " + path.string());
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
}

void write_csv_matrix(const std::filesystem::path& path, const Matrix& m) { write_text(path, format_csv_matrix(m)); }

Matrix read_csv_matrix(const std::filesystem::path& path) { return parse_csv_matrix(read_text(path)); }

void write_instance(const std::string& prefix, const model::ProblemInstance& inst, const model::ModelSpec& spec) {
  write_csv_matrix(prefix + "_a.csv", inst.a);
  write_csv_matrix(prefix + "_b.csv", inst.b);
  nlohmann::ordered_json meta;
  meta["m"] = inst.m();
  meta["n"] = inst.n();
  meta["ell"] = inst.ell();
  meta["k"] = inst.k;
  meta["spec"] = spec_json(spec);
  write_text(prefix + "_meta.json", meta.dump(2) + "\n");
}

void write_ground_truth(const std::string& prefix, const model::GroundTruth& gt, std::uint64_t replicate,
                        std::uint64_t noise_seed) {
  write_csv_matrix(prefix + "_abar.csv", gt.a_bar);
  write_csv_matrix(prefix + "_bbar.csv", gt.b_bar);
  write_csv_matrix(prefix + "_xmin.csv", gt.x_min);
  write_csv_matrix(prefix + "_w.csv", gt.w);
  write_csv_matrix(prefix + "_ybar.csv", gt.y_bar);
  nlohmann::ordered_json meta = spec_json(gt.spec);
  meta["m"] = gt.m();
  meta["replicate"] = replicate;
  meta["noise_seed"] = noise_seed;
  write_text(prefix + "_truth.json", meta.dump(2) + "\n");
}

}  // namespace eivtls::io
