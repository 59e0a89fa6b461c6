#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace nesy::text {

std::string trim(std::string_view s);
std::vector<std::string> split_whitespace(std::string_view s);
std::vector<std::string> split_lines(std::string_view s);
std::string join(const std::vector<std::string>& parts, std::string_view sep);
bool contains(std::string_view haystack, std::string_view needle);
std::string to_lower(std::string_view s);

/// 64-bit FNV-1a. Stable across platforms, used for digests and hashing.
std::uint64_t fnv1a(std::string_view s, std::uint64_t seed = 0);
std::string hex64(std::uint64_t v);

/// Shortest round-trip decimal form ("3.1415", "7000").
std::string format_number(double v);

/// Full-string numeric parse after trimming; accepts inf/-inf.
std::optional<double> parse_number(std::string_view s);

/// Python-style list literal: ['a', 'b'].
std::string render_list(const std::vector<std::string>& items);

/// Inverse of render_list. Also accepts double-quoted and bare items.
std::optional<std::vector<std::string>> parse_list(std::string_view s);

/// Python-style single-quoted string literal.
std::string quote(std::string_view s);

}  // namespace nesy::text
