#pragma once

#include <sstream>
#include <string>

namespace thra {

template <typename... Args>
std::string cat(Args&&... args) {
    std::ostringstream os;
    (os << ... << std::forward<Args>(args));
    return os.str();
}

// Fixed numeric formatting used by every file writer: 6 significant digits
// for data values, 10 for wavelengths so grids survive a round trip.
std::string format_g6(double v);
std::string format_g10(double v);

// Rounds to 6 significant digits, so JSON writers emit the same precision
// as the CSV writers.
double round_g6(double v);

// Writes to a sibling temp file and renames over the target, so readers
// never observe a half-written file.
void atomic_write_file(const std::string& path, const std::string& content);

}  // namespace thra
