#include "cvas/config.hpp"

#include <charconv>
#include <cmath>
#include <cstdlib>

#include "cvas/error.hpp"
#include "cvas/io_util.hpp"

namespace cvas {
namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

std::optional<std::string> pick(const std::optional<std::string>& flag,
                                const ConfigFile& config, std::string_view key) {
  if (flag) return flag;
  return config.get(key);
}

}  // namespace

ConfigFile ConfigFile::parse(std::string_view text) {
  ConfigFile cfg;
  int line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    auto nl = text.find('\n', pos);
    if (nl == std::string_view::npos) nl = text.size();
    std::string_view raw = text.substr(pos, nl - pos);
    pos = nl + 1;
    ++line_no;
    const std::string line = trim(raw.substr(0, raw.find('#')));
    if (line.empty()) continue;
    const auto eq = line.find('=');
    const std::string key = eq == std::string::npos ? "" : trim(std::string_view(line).substr(0, eq));
    if (key.empty()) {
      throw Error(ErrorCode::kFormatError,
                  "config line " + std::to_string(line_no) + ": expected key = value");
    }
    cfg.entries_[key] = trim(std::string_view(line).substr(eq + 1));
  }
  return cfg;
}

ConfigFile ConfigFile::load(const std::filesystem::path& path) {
  return parse(read_file(path));
}

std::optional<std::string> ConfigFile::get(std::string_view key) const {
  const auto it = entries_.find(key);
  if (it == entries_.end()) return std::nullopt;
  return it->second;
}

std::string resolve_string(const std::optional<std::string>& flag,
                           const ConfigFile& config, std::string_view key,
                           std::string_view fallback) {
  auto v = pick(flag, config, key);
  return v ? *v : std::string(fallback);
}

double resolve_double(const std::optional<std::string>& flag,
                      const ConfigFile& config, std::string_view key,
                      double fallback) {
  const auto v = pick(flag, config, key);
  if (!v) return fallback;
  char* end = nullptr;
  const double out = std::strtod(v->c_str(), &end);
  if (v->empty() || end != v->c_str() + v->size() || !std::isfinite(out)) {
    throw Error(ErrorCode::kFormatError,
                std::string(key) + ": '" + *v + "' is not a finite number");
  }
  return out;
}

std::int64_t resolve_int(const std::optional<std::string>& flag,
                         const ConfigFile& config, std::string_view key,
                         std::int64_t fallback) {
  const auto v = pick(flag, config, key);
  if (!v) return fallback;
  std::int64_t out = 0;
  const auto [ptr, ec] = std::from_chars(v->data(), v->data() + v->size(), out);
  if (ec != std::errc() || ptr != v->data() + v->size()) {
    throw Error(ErrorCode::kFormatError, std::string(key) + ": '" + *v + "' is not an integer");
  }
  return out;
}

}  // namespace cvas
