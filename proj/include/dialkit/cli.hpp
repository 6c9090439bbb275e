#pragma once

#include <cstddef>
#include <filesystem>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

namespace dialkit::cli {

// One `key = value` line of a run config. Keys are the long flag names of
// the subcommand without the leading dashes.
struct ConfigEntry {
  std::string key;
  std::string value;
  std::size_t line = 0;
};

using RunConfig = std::vector<ConfigEntry>;

// Blank lines and `#` comments are ignored. Throws ParseError naming the
// source and line on malformed or duplicate keys.
RunConfig parse_config(std::string_view text, std::string_view source = "<config>");
RunConfig load_config(const std::filesystem::path& path);

inline constexpr int kExitOk = 0;
inline constexpr int kExitDomain = 1;
inline constexpr int kExitUsage = 2;

// args excludes the program name. Diagnostics go to `err`; data only to files.
int dispatch(const std::vector<std::string>& args, std::ostream& err);
int dispatch(int argc, const char* const* argv);

}  // namespace dialkit::cli
