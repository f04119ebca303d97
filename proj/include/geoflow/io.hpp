#pragma once

#include <filesystem>
#include <string>

namespace geoflow {

/// Writes to `path`.tmp, then renames over `path`.
void write_atomically(const std::filesystem::path& path, const std::string& content);

/// "%.17g"
std::string fmt17(double x);

}  // namespace geoflow
