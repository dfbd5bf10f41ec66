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

#ifndef DLSC_MATRIX_IO_HPP
#define DLSC_MATRIX_IO_HPP

#include <filesystem>
#include <functional>
#include <string>

#include <Eigen/Core>

#include "dlsc/coefficients.hpp"
#include "dlsc/dictionary.hpp"
#include "dlsc/signal_matrix.hpp"

namespace dlsc {

enum class MatrixFileFormat { kCsv, kBinary };

/// Picks kCsv for a ".csv" extension, kBinary otherwise.
MatrixFileFormat format_from_extension(const std::filesystem::path& path);

// Raw layer. Same on-disk formats as the signal-matrix functions but without
// the SignalMatrix invariants (any N >= 1 row count goes), so degenerate
// matrices and non-time-series payloads can use the container too.
//
// CSV: one header line "tr=<decimal seconds>", then one comma-separated line
// per row, values printed with 17 significant digits.
// Binary: magic "DLSC", u16 format version (= 1), u64 rows, u64 cols,
// f64 tr, then rows*cols f64 values row-major, all little-endian.
struct RawMatrixFile {
  Eigen::MatrixXd data;
  double tr = 0.0;
};

RawMatrixFile load_matrix_file(const std::filesystem::path& path,
                               MatrixFileFormat format);
void save_matrix_file(const Eigen::MatrixXd& data, double tr,
                      const std::filesystem::path& path,
                      MatrixFileFormat format);

/// Typed wrappers: binary round-trips are bit-exact; CSV round-trips are
/// exact too since 17 significant digits reproduce a double.
SignalMatrix load_signal_matrix(const std::filesystem::path& path,
                                MatrixFileFormat format);
void save_signal_matrix(const SignalMatrix& m, const std::filesystem::path& path,
                        MatrixFileFormat format);

// Dictionary CSV: header lines "fixed=<K_f>" and "labels=<l1,...,lK>", then
// N rows of K comma-separated values. Labels must not contain commas.
Dictionary load_dictionary_csv(const std::filesystem::path& path);
void save_dictionary_csv(const Dictionary& dict,
                         const std::filesystem::path& path);

// Coefficient CSV: header line "lambda=<bound>", then K rows of V values.
CoefficientMatrix load_coefficients_csv(const std::filesystem::path& path);
void save_coefficients_csv(const CoefficientMatrix& coeffs,
                           const std::filesystem::path& path);

/// Serializes a double with 17 significant digits (lossless round-trip).
std::string format_double(double value);

/// Writes via a temp file in the same directory, then renames over `path`.
/// All toolkit outputs go through this so partially written files never
/// appear under their final name.
void atomic_write_file(const std::filesystem::path& path,
                       const std::function<void(std::ostream&)>& writer);

}  // namespace dlsc

#endif  // DLSC_MATRIX_IO_HPP
