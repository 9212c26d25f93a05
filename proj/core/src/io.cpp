#include "cvcluster/io.hpp"

#include <bit>
#include <charconv>
#include <cstring>
#include <sstream>

#include <nlohmann/json.hpp>

#include "cvcluster/error.hpp"

#ifndef CVCLUSTER_VERSION
#define CVCLUSTER_VERSION "0.0.0"
#endif

namespace cvc {

using ojson = nlohmann::ordered_json;

std::string tool_version() { return CVCLUSTER_VERSION; }

std::string fnv1a_hex(const std::string& text) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::string format_double(double value) {
  char buf[40];
  const auto res = std::to_chars(buf, buf + sizeof buf, value, std::chars_format::scientific, 16);
  return std::string(buf, res.ptr);
}

FileMetadata& FileMetadata::set(const std::string& key, const std::string& value) {
  for (auto& [k, v] : fields) {
    if (k == key) {
      v = value;
      return *this;
    }
  }
  fields.emplace_back(key, value);
  return *this;
}

std::string FileMetadata::get(const std::string& key, const std::string& fallback) const {
  for (const auto& [k, v] : fields) {
    if (k == key) return v;
  }
  return fallback;
}

FileMetadata standard_metadata(const std::string& config_hash) {
  FileMetadata meta;
  meta.set("tool", "cvcluster").set("tool_version", tool_version()).set("config_hash", config_hash);
  return meta;
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  require(static_cast<bool>(out), ErrorKind::io, "cannot open " + path.string() + " for writing");
  out << text;
  out.flush();
  require(static_cast<bool>(out), ErrorKind::io, "failed writing " + path.string());
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  require(static_cast<bool>(in), ErrorKind::io, "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

namespace {

std::string header_lines(const FileMetadata& meta) {
  std::string out;
  for (const auto& [k, v] : meta.fields) out += "# " + k + ": " + v + "\n";
  return out;
}

bool parse_header_line(const std::string& line, FileMetadata* meta) {
  if (line.empty() || line[0] != '#') return false;
  if (meta != nullptr) {
    const auto colon = line.find(':');
    if (colon != std::string::npos) {
      std::string key = line.substr(1, colon - 1);
      std::string value = line.substr(colon + 1);
      const auto trim = [](std::string& s) {
        s.erase(0, s.find_first_not_of(" \t"));
        s.erase(s.find_last_not_of(" \t\r") + 1);
      };
      trim(key);
      trim(value);
      meta->set(key, value);
    }
  }
  return true;
}

std::vector<double> parse_row(const std::string& line, std::size_t line_no) {
  std::vector<double> row;
  const char* p = line.data();
  const char* end = p + line.size();
  while (end > p && (end[-1] == '\r' || end[-1] == ' ')) --end;
  while (p < end) {
    while (p < end && *p == ' ') ++p;
    double v = 0.0;
    const auto res = std::from_chars(p, end, v);
    require(res.ec == std::errc(), ErrorKind::io,
            "bad number on CSV line " + std::to_string(line_no));
    row.push_back(v);
    p = res.ptr;
    while (p < end && *p == ' ') ++p;
    if (p < end) {
      require(*p == ',', ErrorKind::io, "expected ',' on CSV line " + std::to_string(line_no));
      ++p;
    }
  }
  return row;
}

std::string row_to_csv(const double* data, Eigen::Index n, Eigen::Index stride) {
  std::string line;
  for (Eigen::Index j = 0; j < n; ++j) {
    if (j > 0) line += ',';
    line += format_double(data[j * stride]);
  }
  line += '\n';
  return line;
}

ojson basis_json(const ModeBasis& basis) {
  return {{"count", basis.count()},
          {"spacing_hz", basis.spacing_hz()},
          {"center_hz", basis.center_hz()},
          {"offset_kind", to_string(basis.offset_kind())}};
}

ModeBasis basis_from(const nlohmann::json& b) {
  return ModeBasis(b.at("count").get<int>(), b.at("spacing_hz").get<double>(),
                   b.at("center_hz").get<double>(),
                   offset_kind_from_string(b.at("offset_kind").get<std::string>()));
}

ojson meta_json(const FileMetadata& meta) {
  ojson m = ojson::object();
  for (const auto& [k, v] : meta.fields) m[k] = v;
  return m;
}

template <class F>
auto parse_json(const std::string& text, const std::string& what, F&& body) {
  try {
    return body(nlohmann::json::parse(text));
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorKind::io, "malformed " + what + " JSON: " + e.what());
  }
}

void write_le_doubles(std::ofstream& out, const double* data, std::size_t count) {
  if constexpr (std::endian::native == std::endian::little) {
    out.write(reinterpret_cast<const char*>(data), static_cast<std::streamsize>(count * 8));
  } else {
    for (std::size_t i = 0; i < count; ++i) {
      unsigned char b[8];
      std::memcpy(b, &data[i], 8);
      for (int k = 7; k >= 0; --k) out.put(static_cast<char>(b[k]));
    }
  }
}

void read_le_doubles(std::ifstream& in, double* data, std::size_t count) {
  in.read(reinterpret_cast<char*>(data), static_cast<std::streamsize>(count * 8));
  if constexpr (std::endian::native != std::endian::little) {
    for (std::size_t i = 0; i < count; ++i) {
      unsigned char b[8];
      std::memcpy(b, &data[i], 8);
      std::reverse(b, b + 8);
      std::memcpy(&data[i], b, 8);
    }
  }
}

bool is_csv(const std::filesystem::path& path) { return path.extension() == ".csv"; }

}  // namespace

std::string matrix_to_csv(const Matrix& m, const FileMetadata& meta) {
  std::string out = header_lines(meta);
  out.reserve(out.size() + static_cast<std::size_t>(m.size()) * 25);
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    out += row_to_csv(m.data() + i, m.cols(), m.rows());
  }
  return out;
}

Matrix matrix_from_csv(const std::string& text, FileMetadata* meta) {
  std::istringstream in(text);
  std::string line;
  std::vector<std::vector<double>> rows;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (parse_header_line(line, meta)) continue;
    if (line.find_first_not_of(" \r") == std::string::npos) continue;
    rows.push_back(parse_row(line, line_no));
    require(rows.back().size() == rows.front().size(), ErrorKind::io,
            "ragged CSV at line " + std::to_string(line_no));
  }
  const Eigen::Index r = static_cast<Eigen::Index>(rows.size());
  const Eigen::Index c = rows.empty() ? 0 : static_cast<Eigen::Index>(rows.front().size());
  Matrix m(r, c);
  for (Eigen::Index i = 0; i < r; ++i) {
    for (Eigen::Index j = 0; j < c; ++j) m(i, j) = rows[i][j];
  }
  return m;
}

std::string basis_to_json(const ModeBasis& basis) { return basis_json(basis).dump(2) + "\n"; }

ModeBasis basis_from_json(const std::string& text) {
  return parse_json(text, "basis", [](const nlohmann::json& doc) { return basis_from(doc); });
}

void write_covariance(const std::filesystem::path& path, const CovarianceMatrix& cov,
                      const ModeBasis& basis, FileMetadata meta, const std::string& units) {
  require(basis.count() == cov.n_modes(), ErrorKind::invalid_argument,
          "basis does not match covariance");
  meta.set("ordering", to_string(cov.ordering()))
      .set("units", units)
      .set("n_modes", std::to_string(cov.n_modes()));
  write_text_file(path, matrix_to_csv(cov.entries(), meta));
  ojson side;
  side["basis"] = basis_json(basis);
  side["ordering"] = to_string(cov.ordering());
  side["units"] = units;
  side["metadata"] = meta_json(meta);
  write_text_file(path.string() + ".json", side.dump(2) + "\n");
}

CovarianceMatrix read_covariance(const std::filesystem::path& path, ModeBasis* basis) {
  FileMetadata meta;
  const Matrix m = matrix_from_csv(read_text_file(path), &meta);
  const std::string ord = meta.get("ordering", "quadrature_blocked");
  Ordering ordering;
  try {
    ordering = ordering_from_string(ord);
  } catch (const Error& e) {
    fail(ErrorKind::io, std::string("covariance header: ") + e.what());
  }
  CovarianceMatrix cov = [&] {
    try {
      return CovarianceMatrix(m, ordering);
    } catch (const Error& e) {
      fail(ErrorKind::io, path.string() + ": " + e.what());
    }
  }();
  if (basis != nullptr) {
    const std::filesystem::path side = path.string() + ".json";
    if (std::filesystem::exists(side)) {
      *basis = parse_json(read_text_file(side), "covariance sidecar",
                          [](const nlohmann::json& doc) { return basis_from(doc.at("basis")); });
      require(basis->count() == cov.n_modes(), ErrorKind::io, "sidecar basis size mismatch");
    } else {
      *basis = vacuum(cov.n_modes()).basis;
    }
  }
  return cov;
}

std::string calibration_to_json(const CalibrationRecord& calib, const FileMetadata* meta) {
  ojson doc;
  if (meta) doc["metadata"] = meta_json(*meta);
  doc["gain_db"] = calib.gain_db;
  doc["added_noise_photons"] = calib.added_noise_photons;
  doc["tau_d_rad_per_mhz"] = calib.tau_d_rad_per_mhz;
  return doc.dump(2) + "\n";
}

CalibrationRecord calibration_from_json(const std::string& text) {
  return parse_json(text, "calibration", [](const nlohmann::json& doc) {
    CalibrationRecord c;
    c.gain_db = doc.at("gain_db").get<std::vector<double>>();
    c.added_noise_photons = doc.at("added_noise_photons").get<std::vector<double>>();
    c.tau_d_rad_per_mhz = doc.at("tau_d_rad_per_mhz").get<double>();
    c.validate(static_cast<int>(c.gain_db.size()));
    return c;
  });
}

std::string nullifier_report_to_json(const NullifierReport& report, const FileMetadata& meta) {
  ojson doc;
  doc["metadata"] = meta_json(meta);
  doc["theta"] = report.theta;
  doc["mean_normalized"] = report.mean_normalized;
  doc["db"] = report.db;
  doc["variances"] = report.variances;
  doc["references"] = report.references;
  doc["normalized"] = report.normalized;
  if (report.standard_error) {
    doc["jackknife"] = {{"standard_error", *report.standard_error},
                        {"sigmas_below_vacuum", report.sigmas_below_vacuum.value_or(0.0)}};
  }
  return doc.dump(2) + "\n";
}

std::string her_report_to_json(const HERReport& report, const FileMetadata& meta) {
  ojson doc;
  doc["metadata"] = meta_json(meta);
  doc["kind"] = to_string(report.kind);
  doc["n_x"] = report.n_x;
  doc["her"] = report.value;
  doc["offsets"] = report.offsets;
  doc["contributions"] = report.contributions;
  return doc.dump(2) + "\n";
}

std::string sweep_to_csv(const SweepResult& sweep, const FileMetadata& meta) {
  FileMetadata m = meta;
  m.set("theta_opt", format_double(sweep.theta_opt)).set("min_value", format_double(sweep.min_value));
  std::string out = header_lines(m) + "theta,mean_normalized_variance\n";
  for (std::size_t k = 0; k < sweep.thetas.size(); ++k) {
    out += format_double(sweep.thetas[k]) + "," + format_double(sweep.values[k]) + "\n";
  }
  return out;
}

SampleStreamWriter::SampleStreamWriter(const std::filesystem::path& path, const ModeBasis& basis,
                                       const FileMetadata& meta)
    : out_(path, std::ios::binary | std::ios::trunc),
      path_(path),
      csv_(is_csv(path)),
      dim_(2 * basis.count()) {
  require(static_cast<bool>(out_), ErrorKind::io, "cannot open " + path.string() + " for writing");
  ojson header;
  header["format"] = "cvcluster-samples";
  header["version"] = 1;
  header["ordering"] = "mode_interleaved";
  header["units"] = "volts";
  header["basis"] = basis_json(basis);
  header["metadata"] = meta_json(meta);
  if (csv_) {
    out_ << "# header: " << header.dump() << "\n";
  } else {
    out_ << header.dump() << "\n";
  }
}

void SampleStreamWriter::write_block(const Matrix& windows) {
  require(windows.cols() == dim_, ErrorKind::invalid_argument, "window width mismatch");
  if (csv_) {
    for (Eigen::Index i = 0; i < windows.rows(); ++i) {
      out_ << row_to_csv(windows.data() + i, windows.cols(), windows.rows());
    }
  } else {
    const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> rows = windows;
    write_le_doubles(out_, rows.data(), static_cast<std::size_t>(rows.size()));
  }
  require(static_cast<bool>(out_), ErrorKind::io, "failed writing " + path_.string());
  written_ += windows.rows();
}

void SampleStreamWriter::close() {
  out_.flush();
  require(static_cast<bool>(out_), ErrorKind::io, "failed writing " + path_.string());
  out_.close();
}

SampleStreamReader::SampleStreamReader(const std::filesystem::path& path)
    : in_(path, std::ios::binary), csv_(is_csv(path)) {
  require(static_cast<bool>(in_), ErrorKind::io, "cannot open " + path.string());
  std::string line;
  require(static_cast<bool>(std::getline(in_, line)), ErrorKind::io, "empty sample stream");
  if (csv_) {
    const std::string tag = "# header: ";
    require(line.rfind(tag, 0) == 0, ErrorKind::io, "sample CSV lacks a header line");
    line = line.substr(tag.size());
  }
  parse_json(line, "sample stream header", [&](const nlohmann::json& doc) {
    require(doc.at("format").get<std::string>() == "cvcluster-samples", ErrorKind::io,
            "not a cvcluster sample stream");
    basis_ = basis_from(doc.at("basis"));
    for (const auto& [k, v] : doc.at("metadata").items()) meta_.set(k, v.get<std::string>());
    return 0;
  });
  if (csv_) {
    std::ostringstream rest;
    rest << in_.rdbuf();
    csv_rows_ = matrix_from_csv(rest.str());
    require(csv_rows_.rows() == 0 || csv_rows_.cols() == dimension(), ErrorKind::io,
            "sample CSV width does not match the basis");
    total_ = csv_rows_.rows();
  } else {
    const auto start = in_.tellg();
    in_.seekg(0, std::ios::end);
    const auto bytes = static_cast<std::int64_t>(in_.tellg() - start);
    in_.seekg(start);
    const std::int64_t row_bytes = 8LL * dimension();
    require(bytes % row_bytes == 0, ErrorKind::io, "truncated sample stream");
    total_ = bytes / row_bytes;
  }
}

std::int64_t SampleStreamReader::next_block(Matrix& block, std::int64_t max_rows) {
  const std::int64_t rows = std::min(max_rows, remaining());
  if (rows <= 0) {
    block.resize(0, dimension());
    return 0;
  }
  if (csv_) {
    block = csv_rows_.middleRows(read_, rows);
  } else {
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> buf(rows, dimension());
    read_le_doubles(in_, buf.data(), static_cast<std::size_t>(buf.size()));
    require(static_cast<bool>(in_), ErrorKind::io, "failed reading sample stream");
    block = buf;
  }
  read_ += rows;
  return rows;
}

}  // namespace cvc
