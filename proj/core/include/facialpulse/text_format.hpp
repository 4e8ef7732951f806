#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace facialpulse {

// Shortest decimal form that round-trips to the same double.
std::string format_real(double value);

std::optional<double> parse_real(std::string_view text);
std::optional<long long> parse_integer(std::string_view text);

std::vector<std::string_view> split(std::string_view line, char separator);
std::string_view trim(std::string_view text);

// Reads a whole text file; throws kIo if it cannot be opened.
std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& contents);

}  // namespace facialpulse
