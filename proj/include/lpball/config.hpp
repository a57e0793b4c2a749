#pragma once

// Experiment configuration from INI files. Keys in [common] apply to every
// experiment; a section named after the experiment kind overrides them.
//
//   [common]
//   seed = 7
//   [clt]
//   p = inf
//   q = 1,2
//   n = 10000

#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <limits>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "lpball/errors.hpp"
#include "lpball/experiments.hpp"
#include "lpball/exponent.hpp"

namespace lpball {

namespace detail {

inline std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t");
  return std::string(s.substr(b, e - b + 1));
}

inline std::vector<std::string> split_list(std::string_view text) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (start <= text.size()) {
    const auto comma = text.find(',', start);
    const auto piece = trim(text.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start));
    if (!piece.empty()) out.push_back(piece);
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

inline double parse_real(const std::string& field, const std::string& text) {
  try {
    std::size_t used = 0;
    const double v = std::stod(text, &used);
    if (used != text.size()) throw std::invalid_argument(text);
    return v;
  } catch (const std::exception&) {
    throw ConfigError(field, "'" + text + "' is not a number");
  }
}

}  // namespace detail

/// Accepts plain integers and integral scientific literals such as 1e6.
inline std::uint64_t parse_count(const std::string& field, const std::string& text) {
  const double v = detail::parse_real(field, detail::trim(text));
  if (!(v >= 0.0) || v != std::floor(v) || v > 1.8e19) {
    throw ConfigError(field, "'" + text + "' is not a nonnegative integer");
  }
  return static_cast<std::uint64_t>(std::llround(v));
}

inline std::vector<double> parse_real_list(const std::string& field, const std::string& text) {
  std::vector<double> out;
  for (const auto& s : detail::split_list(text)) out.push_back(detail::parse_real(field, s));
  return out;
}

inline std::vector<std::uint64_t> parse_count_list(const std::string& field, const std::string& text) {
  std::vector<std::uint64_t> out;
  for (const auto& s : detail::split_list(text)) out.push_back(parse_count(field, s));
  return out;
}

inline Measure parse_measure(const std::string& text) {
  if (text == "uniform" || text == "uniform_ball" || text == "uniform-ball") return Measure::uniform_ball;
  if (text == "cone" || text == "cone_boundary" || text == "cone-boundary") return Measure::cone_boundary;
  throw ConfigError("measure", "expected 'uniform' or 'cone', got '" + text + "'");
}

/// Applies one key = value setting to `c`. Unknown keys are errors.
inline void apply_setting(ExperimentConfig& c, const std::string& key, const std::string& raw) {
  const std::string value = detail::trim(raw);
  try {
    if (key == "p") {
      c.p = parse_exponent(value);
    } else if (key == "q") {
      c.qs = parse_exponent_list(value);
    } else if (key == "n") {
      c.n = parse_count(key, value);
    } else if (key == "samples") {
      c.samples = parse_count(key, value);
    } else if (key == "seed") {
      c.seed = parse_count(key, value);
    } else if (key == "workers") {
      const auto w = parse_count(key, value);
      if (w < 1 || w > 1024) throw ConfigError(key, "must be in [1, 1024]");
      c.workers = static_cast<unsigned>(w);
    } else if (key == "measure") {
      c.measure = parse_measure(value);
    } else if (key == "grid") {
      c.grid = parse_real_list(key, value);
    } else if (key == "alphas") {
      c.alphas = parse_real_list(key, value);
    } else if (key == "n_grid") {
      c.n_grid = parse_count_list(key, value);
    } else if (key == "trend_samples") {
      c.trend_samples = parse_count(key, value);
    } else {
      throw ConfigError(key, "unknown configuration key");
    }
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception& e) {
    throw ConfigError(key, e.what());
  }
}

/// Overlays [common] and then [<kind>] from an INI file onto `c`.
inline void load_config_file(ExperimentConfig& c, const std::string& path) {
  boost::property_tree::ptree tree;
  try {
    boost::property_tree::ini_parser::read_ini(path, tree);
  } catch (const boost::property_tree::ini_parser_error& e) {
    throw ConfigError("config", e.what());
  }
  for (const char* section : {"common", to_string(c.kind)}) {
    const auto node = tree.get_child_optional(section);
    if (!node) continue;
    for (const auto& [key, child] : *node) apply_setting(c, key, child.get_value<std::string>());
  }
}

inline constexpr const char* kSeedEnv = "LPBALL_SEED";

/// Seed override from the environment, if set.
inline void apply_seed_env(ExperimentConfig& c) {
  if (const char* s = std::getenv(kSeedEnv); s != nullptr && *s != '\0') c.seed = parse_count(kSeedEnv, s);
}

}  // namespace lpball
