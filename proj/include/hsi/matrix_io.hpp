#pragma once

#include "hsi/types.hpp"

#include <string>

namespace hsi {

/// Binary matrix container: magic "HSIM", version byte 0x01, then row and
/// column counts as little-endian u64, then the payload as row-major
/// little-endian f64. Byte-for-byte reproducible for identical inputs.
Matrix read_matrix_bin(const std::string& path);
void write_matrix_bin(const std::string& path, const Matrix& m);

/// Comma-separated rows of decimal doubles, one matrix row per line.
/// Written with enough digits to round-trip exactly.
Matrix read_matrix_csv(const std::string& path);
void write_matrix_csv(const std::string& path, const Matrix& m);

/// Picks by extension: ".bin" or ".csv".
Matrix read_matrix(const std::string& path);
void write_matrix(const std::string& path, const Matrix& m);

/// One 1-based group id per line, line i giving the group of atom i.
/// Blank lines and "#" comment lines are skipped.
GroupStructure read_groups(const std::string& path);
void write_groups(const std::string& path, const GroupStructure& groups);

}  // namespace hsi
