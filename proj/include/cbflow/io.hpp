#pragma once

#include <cstdint>
#include <string>

namespace cbflow {

/// %.17g rendering, the format used by every CSV writer.
std::string fmt_g17(double v);

/// Writes content to path atomically (temp file in the same directory,
/// then rename). Never leaves a partial file behind on failure.
void atomic_write_file(const std::string& path, const std::string& content);

/// FNV-1a of a canonical string; used to stamp reports with a config hash.
std::uint64_t fnv1a(const std::string& s);

}  // namespace cbflow
