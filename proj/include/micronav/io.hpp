#pragma once

#include <string>

namespace micronav {

// Throws DataError naming the path on failure.
std::string read_text_file(const std::string& path);

// Temp-file-and-rename so readers never observe a partial file and failed
// writes leave nothing behind.
void write_file_atomic(const std::string& path, const std::string& content);

// Fixed-point formatting, locale independent.
std::string format_double(double v, int decimals);

}  // namespace micronav
