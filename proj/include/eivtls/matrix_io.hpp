#pragma once

#include <filesystem>
#include <string>
#include <string_view>

#include "eivtls/model.hpp"
#include "eivtls/numerics.hpp"

namespace eivtls::io {

/// Headerless comma-separated rows. Values are written with 17 significant
/// digits so a read reproduces them exactly. A matrix with no entries is
/// an empty file.
std::string format_csv_matrix(const Matrix& m);
Matrix parse_csv_matrix(std::string_view text);

void write_csv_matrix(const std::filesystem::path& path, const Matrix& m);
Matrix read_csv_matrix(const std::filesystem::path& path);

std::string read_text(const std::filesystem::path& path);
void write_text(const std::filesystem::path& path, std::string_view text);

/// <prefix>_a.csv, <prefix>_b.csv and <prefix>_meta.json (n, ell, k, m).
void write_instance(const std::string& prefix, const model::ProblemInstance& inst, const model::ModelSpec& spec);

/// <prefix>_abar.csv, _bbar.csv, _xmin.csv, _w.csv, _ybar.csv and _truth.json.
void write_ground_truth(const std::string& prefix, const model::GroundTruth& gt, std::uint64_t replicate,
                        std::uint64_t noise_seed);

}  // namespace eivtls::io
