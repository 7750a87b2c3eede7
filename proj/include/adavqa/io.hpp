#pragma once

#include <filesystem>
#include <string>
#include <string_view>

namespace adavqa {

/// Reads a whole file; throws std::runtime_error with the path on failure.
std::string read_text_file(const std::filesystem::path& path);

/// Writes via a temp file in the same directory followed by a rename, so
/// readers never observe a partial file.
void write_text_file_atomic(const std::filesystem::path& path, std::string_view content);

/// Renders a double with enough digits to round-trip bit-exactly.
std::string format_hexfloat(double x);
double parse_hexfloat(std::string_view token);

/// Fixed-width decimal rendering at 9 significant digits (CSV exports).
std::string format_sig9(double x);

}  // namespace adavqa
