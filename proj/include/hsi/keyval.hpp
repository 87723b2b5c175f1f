#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

namespace hsi::keyval {

using Pairs = std::vector<std::pair<std::string, std::string>>;

/// Flat key=value text: one pair per line, `#` starts a comment, blank lines
/// ignored, whitespace around keys and values trimmed. Duplicate keys are
/// rejected.
Pairs parse_text(const std::string& text, const std::string& origin);
Pairs parse_file(const std::string& path);
void write_file(const std::string& path, const Pairs& pairs);

/// Typed conversions; errors name the offending key and value.
double to_double(const std::string& key, const std::string& value);
std::int64_t to_int(const std::string& key, const std::string& value);
std::uint64_t to_uint64(const std::string& key, const std::string& value);
bool to_bool(const std::string& key, const std::string& value);

std::string format_double(double v);

}  // namespace hsi::keyval
