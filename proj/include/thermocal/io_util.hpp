#pragma once

#include <string>

namespace thermocal {

/// "%.17g" form of v (round-trip exact, fixed width class).
std::string format_g17(double v);

/// Shortest round-trip-exact decimal form of v (never more than 17 significant digits).
std::string format_shortest(double v);

/// Write content to path via a temp file in the same directory plus rename,
/// so readers never observe a partial file. Throws IoError on failure.
void write_file_atomic(const std::string& path, const std::string& content);

/// Read a whole file; throws IoError with the path on failure.
std::string read_file(const std::string& path);

}  // namespace thermocal
