#pragma once

#include <string>
#include <vector>

#include "pwmstab/types.hpp"

namespace pwmstab {

/// Fixed 12-significant-digit rendering used for every numeric output;
/// reruns must produce byte-identical files.
std::string format_g12(double v);

/// One CSV line from already-formatted cells (comma separators, LF ending).
std::string csv_row(const std::vector<std::string>& cells);

/// Writes text to path byte-exactly (binary mode, LF endings as given).
void write_file(const std::string& path, const std::string& content);

} // namespace pwmstab
