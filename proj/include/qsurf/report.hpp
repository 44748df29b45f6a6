#pragma once

#include <cstdint>
#include <string>
#include <vector>

// Deterministic text output helpers: fixed scientific float formatting
// (9 significant digits, platform-independent), CSV assembly, and the
// content hash used by run manifests.

namespace qsurf::report {

// "%.8e" with negative zero normalized; "inf"/"nan" spelled out.
std::string fmt(double v);

std::string csv_row(const std::vector<std::string>& cells);

// FNV-1a 64-bit, rendered as 16 hex digits.
std::string fnv1a_hex(const std::string& data);

}  // namespace qsurf::report
