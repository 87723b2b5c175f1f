#include "hsi/matrix_io.hpp"

#include <bit>
#include <cerrno>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <limits>
#include <sstream>
#include <vector>

namespace hsi {

namespace {

constexpr char kMagic[4] = {'H', 'S', 'I', 'M'};
constexpr std::uint8_t kVersion = 0x01;

static_assert(std::endian::native == std::endian::little,
              "binary matrix I/O assumes a little-endian host");

std::string io_error(const std::string& path, const std::string& what) {
  return path + ": " + what;
}

bool ends_with(const std::string& s, const std::string& suffix) {
  return s.size() >= suffix.size() &&
         s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

}  // namespace

Matrix read_matrix_bin(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw DataError(io_error(path, "cannot open for reading"));
  }
  char magic[4];
  std::uint8_t version = 0;
  std::uint64_t rows = 0;
  std::uint64_t cols = 0;
  in.read(magic, 4);
  in.read(reinterpret_cast<char*>(&version), 1);
  in.read(reinterpret_cast<char*>(&rows), 8);
  in.read(reinterpret_cast<char*>(&cols), 8);
  if (!in) {
    throw DataError(io_error(path, "truncated header, expected 21 bytes"));
  }
  if (std::memcmp(magic, kMagic, 4) != 0) {
    throw DataError(io_error(path, "bad magic, not a matrix file"));
  }
  if (version != kVersion) {
    throw DataError(io_error(path, "unsupported version " + std::to_string(version)));
  }
  if (rows == 0 || cols == 0) {
    throw DataError(io_error(path, "empty matrix (" + std::to_string(rows) + "x" +
                                       std::to_string(cols) + ")"));
  }
  constexpr std::uint64_t kMaxEntries = std::uint64_t{1} << 32;
  if (rows > kMaxEntries || cols > kMaxEntries || rows * cols > kMaxEntries) {
    throw DataError(io_error(path, "matrix dimensions " + std::to_string(rows) + "x" +
                                       std::to_string(cols) + " are implausibly large"));
  }
  const std::uint64_t count = rows * cols;
  std::vector<double> payload(count);
  in.read(reinterpret_cast<char*>(payload.data()),
          static_cast<std::streamsize>(count * sizeof(double)));
  const std::uint64_t got = static_cast<std::uint64_t>(in.gcount());
  if (got != count * sizeof(double)) {
    throw DataError(io_error(path, "truncated payload, expected " +
                                       std::to_string(count * sizeof(double)) +
                                       " bytes, got " + std::to_string(got)));
  }
  Matrix m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
  for (std::uint64_t r = 0; r < rows; ++r) {
    for (std::uint64_t c = 0; c < cols; ++c) {
      m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) =
          payload[r * cols + c];
    }
  }
  return m;
}

void write_matrix_bin(const std::string& path, const Matrix& m) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) {
    throw DataError(io_error(path, "cannot open for writing"));
  }
  const std::uint64_t rows = static_cast<std::uint64_t>(m.rows());
  const std::uint64_t cols = static_cast<std::uint64_t>(m.cols());
  out.write(kMagic, 4);
  out.write(reinterpret_cast<const char*>(&kVersion), 1);
  out.write(reinterpret_cast<const char*>(&rows), 8);
  out.write(reinterpret_cast<const char*>(&cols), 8);
  std::vector<double> payload(rows * cols);
  for (std::uint64_t r = 0; r < rows; ++r) {
    for (std::uint64_t c = 0; c < cols; ++c) {
      payload[r * cols + c] =
          m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c));
    }
  }
  out.write(reinterpret_cast<const char*>(payload.data()),
            static_cast<std::streamsize>(payload.size() * sizeof(double)));
  if (!out) {
    throw DataError(io_error(path, "write failed"));
  }
}

Matrix read_matrix_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw DataError(io_error(path, "cannot open for reading"));
  }
  std::vector<std::vector<double>> rows;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') {
      line.pop_back();
    }
    if (line.empty()) {
      continue;
    }
    std::vector<double> row;
    std::size_t pos = 0;
    int col = 0;
    while (true) {
      ++col;
      std::size_t comma = line.find(',', pos);
      std::string field = line.substr(pos, comma == std::string::npos
                                               ? std::string::npos
                                               : comma - pos);
      errno = 0;
      char* end = nullptr;
      const double v = std::strtod(field.c_str(), &end);
      if (end == field.c_str() || *end != '\0' || errno == ERANGE) {
        throw DataError(io_error(path, "line " + std::to_string(lineno) +
                                           ", field " + std::to_string(col) +
                                           ": cannot parse '" + field +
                                           "' as a number"));
      }
      row.push_back(v);
      if (comma == std::string::npos) {
        break;
      }
      pos = comma + 1;
    }
    if (!rows.empty() && row.size() != rows.front().size()) {
      throw DataError(io_error(path, "line " + std::to_string(lineno) + " has " +
                                         std::to_string(row.size()) +
                                         " fields, expected " +
                                         std::to_string(rows.front().size())));
    }
    rows.push_back(std::move(row));
  }
  if (rows.empty()) {
    throw DataError(io_error(path, "no data rows"));
  }
  Matrix m(static_cast<Eigen::Index>(rows.size()),
           static_cast<Eigen::Index>(rows.front().size()));
  for (std::size_t r = 0; r < rows.size(); ++r) {
    for (std::size_t c = 0; c < rows[r].size(); ++c) {
      m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = rows[r][c];
    }
  }
  return m;
}

void write_matrix_csv(const std::string& path, const Matrix& m) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) {
    throw DataError(io_error(path, "cannot open for writing"));
  }
  char buf[40];
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      std::snprintf(buf, sizeof(buf), "%.17g", m(r, c));
      if (c > 0) {
        out << ',';
      }
      out << buf;
    }
    out << '\n';
  }
  if (!out) {
    throw DataError(io_error(path, "write failed"));
  }
}

Matrix read_matrix(const std::string& path) {
  if (ends_with(path, ".bin")) {
    return read_matrix_bin(path);
  }
  if (ends_with(path, ".csv")) {
    return read_matrix_csv(path);
  }
  throw DataError(io_error(path, "unknown matrix extension, expected .bin or .csv"));
}

void write_matrix(const std::string& path, const Matrix& m) {
  if (ends_with(path, ".bin")) {
    write_matrix_bin(path, m);
    return;
  }
  if (ends_with(path, ".csv")) {
    write_matrix_csv(path, m);
    return;
  }
  throw DataError(io_error(path, "unknown matrix extension, expected .bin or .csv"));
}

GroupStructure read_groups(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw DataError(io_error(path, "cannot open for reading"));
  }
  std::vector<int> assignment;
  std::string line;
  int lineno = 0;
  int max_group = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') {
      line.pop_back();
    }
    std::size_t first = line.find_first_not_of(" \t");
    if (first == std::string::npos || line[first] == '#') {
      continue;
    }
    std::size_t last = line.find_last_not_of(" \t");
    std::string token = line.substr(first, last - first + 1);
    errno = 0;
    char* end = nullptr;
    const long v = std::strtol(token.c_str(), &end, 10);
    if (end == token.c_str() || *end != '\0' || errno == ERANGE || v < 1 ||
        v > std::numeric_limits<int>::max()) {
      throw DataError(io_error(path, "line " + std::to_string(lineno) +
                                         ": expected a positive group id, got '" +
                                         token + "'"));
    }
    assignment.push_back(static_cast<int>(v) - 1);
    max_group = std::max(max_group, static_cast<int>(v));
  }
  if (assignment.empty()) {
    throw DataError(io_error(path, "no group assignments"));
  }
  return GroupStructure(max_group, std::move(assignment));
}

void write_groups(const std::string& path, const GroupStructure& groups) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) {
    throw DataError(io_error(path, "cannot open for writing"));
  }
  for (int atom = 0; atom < groups.atom_count(); ++atom) {
    out << (groups.group_of(atom) + 1) << '\n';
  }
  if (!out) {
    throw DataError(io_error(path, "write failed"));
  }
}

}  // namespace hsi
