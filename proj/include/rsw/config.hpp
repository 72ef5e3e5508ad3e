#pragma once

// Run configuration files: sectioned key = value text.
//
//   # comment            (also ';', and trailing after whitespace)
//   horizon = 1          top-level keys: horizon, seed
//   [grid]
//   n = 256
//   [study]
//   eps_list = 4e-3, 2e-3
//
// Keys without defaults: grid.n, params.eps, horizon. Overrides use the
// dotted name (params.eps=0) or any unique bare key name (eps=0).

#include <filesystem>
#include <string>
#include <vector>

#include "rsw/errors.hpp"
#include "rsw/experiments.hpp"

namespace rsw {

struct ConfigError : Error {
  using Error::Error;
};

struct MissingKey : ConfigError {
  explicit MissingKey(std::string k) : ConfigError("missing required key '" + k + "'"), key(std::move(k)) {}
  std::string key;
};

struct TypeError : ConfigError {
  TypeError(const std::string& source, std::size_t l, std::size_t c, std::string k, const std::string& what)
      : ConfigError(source + ":" + std::to_string(l) + ":" + std::to_string(c) + ": key '" + k + "': " + what),
        line(l),
        column(c),
        key(std::move(k)) {}
  std::size_t line;
  std::size_t column;
  std::string key;
};

struct UnknownKey : ConfigError {
  UnknownKey(const std::string& source, std::size_t l, std::string k)
      : ConfigError(source + ":" + std::to_string(l) + ": unknown key '" + k + "'"), line(l), key(std::move(k)) {}
  std::size_t line;
  std::string key;
};

struct ValidationError : ConfigError {
  ValidationError(std::string k, const std::string& what)
      : ConfigError("invalid value for '" + k + "': " + what), key(std::move(k)) {}
  std::string key;
};

struct ConfigOptions {
  bool strict = true;
  /// Filled with ignored unknown keys when strict is false.
  std::vector<std::string>* warnings = nullptr;
};

RunConfig parse_config_text(const std::string& text, const std::string& source,
                            const std::vector<std::string>& overrides = {}, const ConfigOptions& opts = {});
RunConfig parse_config(const std::filesystem::path& path, const std::vector<std::string>& overrides = {},
                       const ConfigOptions& opts = {});

/// Config text that parses back to exactly cfg.
std::string to_config_text(const RunConfig& cfg);

/// Every recognized dotted key, in file order.
std::vector<std::string> config_keys();

}  // namespace rsw
