#pragma once

#include <cstddef>
#include <functional>
#include <string>
#include <string_view>

namespace melcond {

// Fixed-precision decimal, identical on every run for identical doubles.
std::string format_number(double value, int precision = 6);

std::string read_text_file(const std::string& path);
// Creates parent directories. Throws Io.
void write_text_file(const std::string& path, std::string_view text);

// Runs body(0..n-1) on up to `jobs` threads. The first exception thrown by
// any call is rethrown after all threads join.
void parallel_for(std::size_t n, int jobs, const std::function<void(std::size_t)>& body);

}  // namespace melcond
