#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace perpsim {

/// Splits one CSV line on commas. The schemas handled here never quote fields.
std::vector<std::string> split_csv_line(std::string_view line);

/// Splits text into lines, tolerating trailing CR (CRLF input) and a missing
/// final newline.
std::vector<std::string> split_lines(std::string_view text);

/// Round-trip-exact decimal rendering of a double (%.17g).
std::string format_double(double v);

/// Strict full-string double parse; `what` names the field in error messages.
double parse_double_field(const std::string& s, const std::string& what);

std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, std::string_view content);

} // namespace perpsim
