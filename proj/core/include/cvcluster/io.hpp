#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "cvcluster/analysis.hpp"
#include "cvcluster/estimator.hpp"
#include "cvcluster/gaussian.hpp"

namespace cvc {

std::string tool_version();

/// 64-bit FNV-1a of `text` as 16 lowercase hex digits.
std::string fnv1a_hex(const std::string& text);

/// Scientific notation with exactly 17 significant digits.
std::string format_double(double value);

/// Key/value lines written as "# key: value" at the top of every CSV.
struct FileMetadata {
  std::vector<std::pair<std::string, std::string>> fields;

  FileMetadata& set(const std::string& key, const std::string& value);
  std::string get(const std::string& key, const std::string& fallback = "") const;
};

/// tool_version and config_hash pre-filled.
FileMetadata standard_metadata(const std::string& config_hash);

void write_text_file(const std::filesystem::path& path, const std::string& text);
std::string read_text_file(const std::filesystem::path& path);

std::string matrix_to_csv(const Matrix& m, const FileMetadata& meta);
/// Parses "# key: value" header lines into `meta` when given.
Matrix matrix_from_csv(const std::string& text, FileMetadata* meta = nullptr);

std::string basis_to_json(const ModeBasis& basis);
ModeBasis basis_from_json(const std::string& text);

/// Writes `path` (CSV with ordering/units/n_modes in the header) and
/// `path` + ".json" (basis, ordering, metadata).
void write_covariance(const std::filesystem::path& path, const CovarianceMatrix& cov,
                      const ModeBasis& basis, FileMetadata meta, const std::string& units = "photons");
CovarianceMatrix read_covariance(const std::filesystem::path& path, ModeBasis* basis = nullptr);

std::string calibration_to_json(const CalibrationRecord& calib, const FileMetadata* meta = nullptr);
CalibrationRecord calibration_from_json(const std::string& text);

std::string nullifier_report_to_json(const NullifierReport& report, const FileMetadata& meta);
std::string her_report_to_json(const HERReport& report, const FileMetadata& meta);
/// Columns theta,mean_normalized_variance.
std::string sweep_to_csv(const SweepResult& sweep, const FileMetadata& meta);

/// Binary window stream: one JSON header line, then little-endian float64
/// rows of 2N values (mode-interleaved volts). A ".csv" path switches to a
/// plain CSV with the same header rendered as metadata lines.
class SampleStreamWriter {
 public:
  SampleStreamWriter(const std::filesystem::path& path, const ModeBasis& basis,
                     const FileMetadata& meta);
  void write_block(const Matrix& windows);
  std::int64_t windows_written() const { return written_; }
  void close();

 private:
  std::ofstream out_;
  std::filesystem::path path_;
  bool csv_ = false;
  int dim_ = 0;
  std::int64_t written_ = 0;
};

class SampleStreamReader {
 public:
  explicit SampleStreamReader(const std::filesystem::path& path);

  const ModeBasis& basis() const { return basis_; }
  const FileMetadata& metadata() const { return meta_; }
  std::int64_t total() const { return total_; }
  std::int64_t remaining() const { return total_ - read_; }
  int dimension() const { return 2 * basis_.count(); }

  /// Reads up to `max_rows` windows; returns rows read (0 at end).
  std::int64_t next_block(Matrix& block, std::int64_t max_rows);

 private:
  std::ifstream in_;
  bool csv_ = false;
  ModeBasis basis_;
  FileMetadata meta_;
  std::int64_t total_ = 0;
  std::int64_t read_ = 0;
  Matrix csv_rows_;
};

}  // namespace cvc
