#pragma once

#include <filesystem>
#include <functional>
#include <ostream>
#include <string>

namespace amplab::csv {

// Shortest round-trip decimal form. Keeps report files byte-reproducible.
std::string fmt(double x);

// Writes via a temp file in the same directory and renames into place, so a
// partially written file never carries the final name.
void atomic_write(const std::filesystem::path& path,
                  const std::function<void(std::ostream&)>& body);

}  // namespace amplab::csv
