// Copyright 2026 The DLSC Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "dlsc/matrix_io.hpp"

#include <bit>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <sstream>
#include <system_error>
#include <vector>

static_assert(std::endian::native == std::endian::little,
              "binary matrix I/O assumes a little-endian host");

namespace dlsc {

namespace {

constexpr char kBinaryMagic[4] = {'D', 'L', 'S', 'C'};
constexpr std::uint16_t kBinaryVersion = 1;

[[noreturn]] void io_fail(const std::filesystem::path& path,
                          const std::string& what) {
  throw_error(ErrorCode::kIo, what + ": " + path.string());
}

[[noreturn]] void parse_fail(const std::filesystem::path& path,
                             const std::string& what) {
  throw_error(ErrorCode::kParse, path.string() + ": " + what);
}

void strip_cr(std::string& line) {
  if (!line.empty() && line.back() == '\r') line.pop_back();
}

double parse_double_token(std::string_view token,
                          const std::filesystem::path& path,
                          Eigen::Index row, Eigen::Index col) {
  // Row/column are reported 1-based, counting data rows only.
  double value = 0.0;
  const char* begin = token.data();
  const char* end = begin + token.size();
  auto [ptr, ec] = std::from_chars(begin, end, value);
  if (ec != std::errc() || ptr != end)
    parse_fail(path, "non-numeric cell '" + std::string(token) + "' at row " +
                         std::to_string(row + 1) + ", column " +
                         std::to_string(col + 1));
  if (!std::isfinite(value))
    parse_fail(path, "non-finite value at row " + std::to_string(row + 1) +
                         ", column " + std::to_string(col + 1));
  return value;
}

std::vector<std::string_view> split_commas(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = line.find(',', start);
    if (pos == std::string_view::npos) {
      out.push_back(line.substr(start));
      break;
    }
    out.push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
  return out;
}

/// Parses a "key=<value>" header line; returns the value part.
std::string_view header_value(std::string_view line, std::string_view key,
                              const std::filesystem::path& path) {
  if (line.size() < key.size() + 1 || line.substr(0, key.size()) != key ||
      line[key.size()] != '=')
    parse_fail(path, "malformed header: expected '" + std::string(key) +
                         "=<value>', got '" + std::string(line) + "'");
  return line.substr(key.size() + 1);
}

double header_double(std::string_view line, std::string_view key,
                     const std::filesystem::path& path) {
  const std::string_view v = header_value(line, key, path);
  double value = 0.0;
  auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), value);
  if (ec != std::errc() || ptr != v.data() + v.size() || !std::isfinite(value))
    parse_fail(path, "malformed header: '" + std::string(key) +
                         "' value '" + std::string(v) + "' is not a number");
  return value;
}

/// Body shared by every CSV matrix container: rows of comma-separated
/// doubles after the format-specific header lines.
Eigen::MatrixXd read_csv_body(std::istream& in,
                              const std::filesystem::path& path) {
  std::vector<std::vector<double>> rows;
  std::string line;
  Eigen::Index n_cols = -1;
  while (std::getline(in, line)) {
    strip_cr(line);
    if (line.empty() && in.peek() == EOF) break;  // trailing newline
    const Eigen::Index row = static_cast<Eigen::Index>(rows.size());
    const auto cells = split_commas(line);
    if (n_cols < 0) {
      n_cols = static_cast<Eigen::Index>(cells.size());
    } else if (static_cast<Eigen::Index>(cells.size()) != n_cols) {
      parse_fail(path, "inconsistent row length at row " +
                           std::to_string(row + 1) + ": expected " +
                           std::to_string(n_cols) + " values, got " +
                           std::to_string(cells.size()));
    }
    std::vector<double> values(cells.size());
    for (std::size_t c = 0; c < cells.size(); ++c)
      values[c] = parse_double_token(cells[c], path, row,
                                     static_cast<Eigen::Index>(c));
    rows.push_back(std::move(values));
  }
  if (rows.empty()) parse_fail(path, "no data rows");
  Eigen::MatrixXd m(static_cast<Eigen::Index>(rows.size()), n_cols);
  for (Eigen::Index r = 0; r < m.rows(); ++r)
    for (Eigen::Index c = 0; c < m.cols(); ++c)
      m(r, c) = rows[static_cast<std::size_t>(r)][static_cast<std::size_t>(c)];
  return m;
}

void write_csv_body(std::ostream& out, const Eigen::MatrixXd& data) {
  for (Eigen::Index r = 0; r < data.rows(); ++r) {
    for (Eigen::Index c = 0; c < data.cols(); ++c) {
      if (c) out << ',';
      out << format_double(data(r, c));
    }
    out << '\n';
  }
}

template <typename T>
void write_pod(std::ostream& out, const T& value) {
  out.write(reinterpret_cast<const char*>(&value), sizeof(T));
}

template <typename T>
T read_pod(std::istream& in, const std::filesystem::path& path) {
  T value{};
  in.read(reinterpret_cast<char*>(&value), sizeof(T));
  if (!in) parse_fail(path, "truncated binary matrix file");
  return value;
}

RawMatrixFile load_matrix_binary(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) io_fail(path, "cannot open for reading");
  char magic[4];
  in.read(magic, 4);
  if (!in || std::memcmp(magic, kBinaryMagic, 4) != 0)
    parse_fail(path, "bad magic bytes, not a DLSC binary matrix");
  const auto version = read_pod<std::uint16_t>(in, path);
  if (version != kBinaryVersion)
    parse_fail(path, "unsupported format version " + std::to_string(version));
  const auto rows = read_pod<std::uint64_t>(in, path);
  const auto cols = read_pod<std::uint64_t>(in, path);
  const auto tr = read_pod<double>(in, path);
  if (rows == 0 || cols == 0) parse_fail(path, "empty matrix dimensions");
  constexpr std::uint64_t kMaxEntries = std::uint64_t(1) << 34;
  if (rows > kMaxEntries / cols)
    parse_fail(path, "matrix dimensions exceed supported size");
  Eigen::MatrixXd data(static_cast<Eigen::Index>(rows),
                       static_cast<Eigen::Index>(cols));
  // Stored row-major; Eigen matrices are column-major, so read by row.
  std::vector<double> row(cols);
  for (std::uint64_t r = 0; r < rows; ++r) {
    in.read(reinterpret_cast<char*>(row.data()),
            static_cast<std::streamsize>(cols * sizeof(double)));
    if (!in) parse_fail(path, "truncated binary matrix file");
    for (std::uint64_t c = 0; c < cols; ++c) {
      if (!std::isfinite(row[c]))
        parse_fail(path, "non-finite value at row " + std::to_string(r + 1) +
                             ", column " + std::to_string(c + 1));
      data(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = row[c];
    }
  }
  return RawMatrixFile{std::move(data), tr};
}

RawMatrixFile load_matrix_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) io_fail(path, "cannot open for reading");
  std::string header;
  if (!std::getline(in, header)) parse_fail(path, "empty file");
  strip_cr(header);
  const double tr = header_double(header, "tr", path);
  return RawMatrixFile{read_csv_body(in, path), tr};
}

}  // namespace

std::string format_double(double value) {
  char buf[64];
  auto [ptr, ec] =
      std::to_chars(buf, buf + sizeof(buf), value,
                    std::chars_format::general, 17);
  return std::string(buf, ptr);
}

MatrixFileFormat format_from_extension(const std::filesystem::path& path) {
  return path.extension() == ".csv" ? MatrixFileFormat::kCsv
                                    : MatrixFileFormat::kBinary;
}

void atomic_write_file(const std::filesystem::path& path,
                       const std::function<void(std::ostream&)>& writer) {
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary);
    if (!out) io_fail(tmp, "cannot open for writing");
    writer(out);
    out.flush();
    if (!out) io_fail(tmp, "write failed");
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) io_fail(path, "rename failed (" + ec.message() + ")");
}

RawMatrixFile load_matrix_file(const std::filesystem::path& path,
                               MatrixFileFormat format) {
  return format == MatrixFileFormat::kCsv ? load_matrix_csv(path)
                                          : load_matrix_binary(path);
}

void save_matrix_file(const Eigen::MatrixXd& data, double tr,
                      const std::filesystem::path& path,
                      MatrixFileFormat format) {
  if (data.rows() < 1 || data.cols() < 1)
    throw_error(ErrorCode::kInvalidArgument, "refusing to save empty matrix");
  if (!data.allFinite())
    throw_error(ErrorCode::kInvalidArgument,
                "refusing to save non-finite matrix entries");
  if (format == MatrixFileFormat::kCsv) {
    atomic_write_file(path, [&](std::ostream& out) {
      out << "tr=" << format_double(tr) << '\n';
      write_csv_body(out, data);
    });
  } else {
    atomic_write_file(path, [&](std::ostream& out) {
      out.write(kBinaryMagic, 4);
      write_pod(out, kBinaryVersion);
      write_pod(out, static_cast<std::uint64_t>(data.rows()));
      write_pod(out, static_cast<std::uint64_t>(data.cols()));
      write_pod(out, tr);
      std::vector<double> row(static_cast<std::size_t>(data.cols()));
      for (Eigen::Index r = 0; r < data.rows(); ++r) {
        for (Eigen::Index c = 0; c < data.cols(); ++c)
          row[static_cast<std::size_t>(c)] = data(r, c);
        out.write(reinterpret_cast<const char*>(row.data()),
                  static_cast<std::streamsize>(row.size() * sizeof(double)));
      }
    });
  }
}

SignalMatrix load_signal_matrix(const std::filesystem::path& path,
                                MatrixFileFormat format) {
  RawMatrixFile raw = load_matrix_file(path, format);
  try {
    return SignalMatrix(std::move(raw.data), raw.tr);
  } catch (const Error& e) {
    throw e.with_context(path.string());
  }
}

void save_signal_matrix(const SignalMatrix& m, const std::filesystem::path& path,
                        MatrixFileFormat format) {
  save_matrix_file(m.data(), m.tr_seconds(), path, format);
}

Dictionary load_dictionary_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) io_fail(path, "cannot open for reading");
  std::string line;
  if (!std::getline(in, line)) parse_fail(path, "empty file");
  strip_cr(line);
  const double fixed = header_double(line, "fixed", path);
  if (fixed < 0 || fixed != std::floor(fixed))
    parse_fail(path, "'fixed' header must be a non-negative integer");
  if (!std::getline(in, line)) parse_fail(path, "missing labels header");
  strip_cr(line);
  const std::string_view label_csv = header_value(line, "labels", path);
  std::vector<std::string> labels;
  for (std::string_view l : split_commas(label_csv)) labels.emplace_back(l);
  Eigen::MatrixXd atoms = read_csv_body(in, path);
  if (static_cast<Eigen::Index>(labels.size()) != atoms.cols())
    parse_fail(path, "label count " + std::to_string(labels.size()) +
                         " does not match atom count " +
                         std::to_string(atoms.cols()));
  try {
    return Dictionary(std::move(atoms), static_cast<Eigen::Index>(fixed),
                      std::move(labels));
  } catch (const Error& e) {
    throw e.with_context(path.string());
  }
}

void save_dictionary_csv(const Dictionary& dict,
                         const std::filesystem::path& path) {
  for (const auto& label : dict.labels())
    if (label.find(',') != std::string::npos)
      throw_error(ErrorCode::kInvalidArgument,
                  "atom label '" + label + "' contains a comma");
  atomic_write_file(path, [&](std::ostream& out) {
    out << "fixed=" << dict.fixed_count() << '\n';
    out << "labels=";
    for (Eigen::Index j = 0; j < dict.n_atoms(); ++j) {
      if (j) out << ',';
      out << dict.label(j);
    }
    out << '\n';
    write_csv_body(out, dict.atoms());
  });
}

CoefficientMatrix load_coefficients_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) io_fail(path, "cannot open for reading");
  std::string line;
  if (!std::getline(in, line)) parse_fail(path, "empty file");
  strip_cr(line);
  const double lambda = header_double(line, "lambda", path);
  if (lambda < 1 || lambda != std::floor(lambda))
    parse_fail(path, "'lambda' header must be a positive integer");
  Eigen::MatrixXd coeffs = read_csv_body(in, path);
  try {
    return CoefficientMatrix(std::move(coeffs), static_cast<int>(lambda));
  } catch (const Error& e) {
    throw e.with_context(path.string());
  }
}

void save_coefficients_csv(const CoefficientMatrix& coeffs,
                           const std::filesystem::path& path) {
  atomic_write_file(path, [&](std::ostream& out) {
    out << "lambda=" << coeffs.sparsity_bound() << '\n';
    write_csv_body(out, coeffs.coeffs());
  });
}

}  // namespace dlsc
