#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace aimaze {

/// Shortest round-trip decimal form of v (std::to_chars). Parsing the
/// result recovers the exact double, which keeps file formats and traces
/// byte-stable.
std::string format_double(double v);

std::optional<double> parse_double(std::string_view s);
std::optional<long long> parse_int(std::string_view s);
std::optional<std::uint64_t> parse_u64(std::string_view s);

std::vector<std::string_view> split(std::string_view s, char sep);
std::string_view trim(std::string_view s);

std::string replace_all(std::string text, std::string_view from,
                        std::string_view to);

std::uint64_t fnv1a64(std::string_view s);
std::string to_hex(std::uint64_t v);

}  // namespace aimaze
