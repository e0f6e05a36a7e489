#pragma once

#include <string>

// Small file helpers shared by the CSV/manifest writers.
namespace sclarsim::io {

// Writes to a temp file in the same directory, then renames over the target,
// so readers never observe a partial file.
void atomic_write_file(const std::string& path, const std::string& content);

std::string read_file(const std::string& path);

// Deterministic shortest-ish decimal for CSV cells.
std::string fmt_double(double v);

}  // namespace sclarsim::io
