#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace navisense::detail {

std::string trim(std::string_view s);
std::string lower(std::string_view s);
std::vector<std::string> split(std::string_view s, char sep);
/// Whitespace-separated, lowercased words with surrounding punctuation
/// removed.
std::vector<std::string> words(std::string_view s);
/// Whole-string parse; nullopt on trailing garbage.
std::optional<double> parse_double(std::string_view s);
/// Shortest round-trip representation.
std::string format_double(double x);
bool starts_with(std::string_view s, std::string_view prefix);

}  // namespace navisense::detail
