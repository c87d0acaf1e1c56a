#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>

namespace cvas {

// Flat `key = value` configuration; `#` starts a comment.
class ConfigFile {
 public:
  ConfigFile() = default;

  static ConfigFile parse(std::string_view text);
  static ConfigFile load(const std::filesystem::path& path);

  std::optional<std::string> get(std::string_view key) const;
  const std::map<std::string, std::string, std::less<>>& entries() const noexcept {
    return entries_;
  }

 private:
  std::map<std::string, std::string, std::less<>> entries_;
};

// Precedence: command-line flag, then config file, then built-in default.
std::string resolve_string(const std::optional<std::string>& flag,
                           const ConfigFile& config, std::string_view key,
                           std::string_view fallback);
double resolve_double(const std::optional<std::string>& flag,
                      const ConfigFile& config, std::string_view key,
                      double fallback);
std::int64_t resolve_int(const std::optional<std::string>& flag,
                         const ConfigFile& config, std::string_view key,
                         std::int64_t fallback);

}  // namespace cvas
