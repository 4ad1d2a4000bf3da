#pragma once

#include <cstdint>
#include <string>
#include <string_view>

namespace roughmdp::io {

/// Round-trippable, locale-independent double formatting ("%.17g").
/// All CSV/JSON writers go through this so outputs are byte-stable.
std::string format_double(double x);

/// FNV-1a 64-bit over bytes, hex-encoded; used for config hashes and
/// artifact checksums in manifests.
std::string fnv1a64_hex(std::string_view bytes);

enum class LogLevel { Quiet = 0, Info = 1, Debug = 2 };

/// Resolved once from ROUGHMDP_LOG (quiet|info|debug, default info).
LogLevel log_level();

void log_info(const std::string& msg);
void log_debug(const std::string& msg);

} // namespace roughmdp::io
