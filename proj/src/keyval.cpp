#include "hsi/keyval.hpp"

#include "hsi/types.hpp"

#include <algorithm>
#include <cerrno>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

namespace hsi::keyval {

namespace {

std::string trim(const std::string& s) {
  const std::size_t first = s.find_first_not_of(" \t");
  if (first == std::string::npos) {
    return {};
  }
  const std::size_t last = s.find_last_not_of(" \t");
  return s.substr(first, last - first + 1);
}

}  // namespace

Pairs parse_text(const std::string& text, const std::string& origin) {
  Pairs pairs;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') {
      line.pop_back();
    }
    const std::size_t hash = line.find('#');
    if (hash != std::string::npos) {
      line = line.substr(0, hash);
    }
    const std::string stripped = trim(line);
    if (stripped.empty()) {
      continue;
    }
    const std::size_t eq = stripped.find('=');
    if (eq == std::string::npos) {
      throw ConfigError(origin + ": line " + std::to_string(lineno) +
                        ": expected key=value, got '" + stripped + "'");
    }
    std::string key = trim(stripped.substr(0, eq));
    std::string value = trim(stripped.substr(eq + 1));
    if (key.empty()) {
      throw ConfigError(origin + ": line " + std::to_string(lineno) +
                        ": empty key");
    }
    for (const auto& [k, v] : pairs) {
      if (k == key) {
        throw ConfigError(origin + ": line " + std::to_string(lineno) +
                          ": duplicate key '" + key + "'");
      }
    }
    pairs.emplace_back(std::move(key), std::move(value));
  }
  return pairs;
}

Pairs parse_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw ConfigError(path + ": cannot open for reading");
  }
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_text(buf.str(), path);
}

void write_file(const std::string& path, const Pairs& pairs) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) {
    throw DataError(path + ": cannot open for writing");
  }
  for (const auto& [k, v] : pairs) {
    out << k << '=' << v << '\n';
  }
  if (!out) {
    throw DataError(path + ": write failed");
  }
}

double to_double(const std::string& key, const std::string& value) {
  errno = 0;
  char* end = nullptr;
  const double v = std::strtod(value.c_str(), &end);
  if (end == value.c_str() || *end != '\0' || errno == ERANGE) {
    throw ConfigError("key '" + key + "': cannot parse '" + value +
                      "' as a number");
  }
  return v;
}

std::int64_t to_int(const std::string& key, const std::string& value) {
  errno = 0;
  char* end = nullptr;
  const long long v = std::strtoll(value.c_str(), &end, 10);
  if (end == value.c_str() || *end != '\0' || errno == ERANGE) {
    throw ConfigError("key '" + key + "': cannot parse '" + value +
                      "' as an integer");
  }
  return v;
}

std::uint64_t to_uint64(const std::string& key, const std::string& value) {
  errno = 0;
  char* end = nullptr;
  const unsigned long long v = std::strtoull(value.c_str(), &end, 10);
  if (end == value.c_str() || *end != '\0' || errno == ERANGE ||
      value.find('-') != std::string::npos) {
    throw ConfigError("key '" + key + "': cannot parse '" + value +
                      "' as an unsigned integer");
  }
  return v;
}

bool to_bool(const std::string& key, const std::string& value) {
  if (value == "true" || value == "1") {
    return true;
  }
  if (value == "false" || value == "0") {
    return false;
  }
  throw ConfigError("key '" + key + "': cannot parse '" + value +
                    "' as a boolean (use true/false)");
}

std::string format_double(double v) {
  char buf[40];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

}  // namespace hsi::keyval
