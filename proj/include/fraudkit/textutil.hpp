#pragma once

#include <cstdint>
#include <string>
#include <string_view>

namespace fraudkit {

/// Shortest printf formatting at 6 significant digits ("%.6g").
std::string format_sig6(double x);

/// Rounds to `digits` significant decimal digits. Used before values enter
/// reports so report files are byte-stable.
double round_sig(double x, int digits = 6);

/// FNV-1a 64-bit digest, hex-encoded. Non-cryptographic; used for manifest
/// content hashes and reproducibility checks.
std::string fnv1a_hex(std::string_view bytes);

/// Reads a whole file; throws UsageError when the path is unreadable.
std::string read_file(const std::string& path);

/// Writes a whole file; throws UsageError when the path is unwritable.
void write_file(const std::string& path, std::string_view content);

}  // namespace fraudkit
