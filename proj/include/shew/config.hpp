#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "shew/circle_domain.hpp"
#include "shew/coefficients.hpp"
#include "shew/reflected_solver.hpp"

namespace shew {

/// Config parse/validation failure; carries the offending field for exit-code-1
/// reporting.
struct ConfigError : std::runtime_error {
  std::string field;
  ConfigError(std::string field_, const std::string& reason)
      : std::runtime_error("config field '" + field_ + "': " + reason), field(std::move(field_)) {}
};

/// Minimal TOML subset: [section] headers, key = value with numbers, booleans,
/// double-quoted strings, and flat arrays of numbers/strings. '#' comments.
class TomlTable {
 public:
  static TomlTable parse(const std::string& text);
  static TomlTable parse_file(const std::string& path);

  bool has(const std::string& section, const std::string& key) const;
  double number(const std::string& section, const std::string& key, double fallback) const;
  double required_number(const std::string& section, const std::string& key) const;
  std::int64_t integer(const std::string& section, const std::string& key,
                       std::int64_t fallback) const;
  bool boolean(const std::string& section, const std::string& key, bool fallback) const;
  std::string text(const std::string& section, const std::string& key,
                   const std::string& fallback) const;
  std::vector<double> numbers(const std::string& section, const std::string& key,
                              const std::vector<double>& fallback) const;

 private:
  struct Value {
    std::string raw;
    std::vector<std::string> array;
    bool is_array = false;
    bool is_string = false;
  };
  const Value* find(const std::string& section, const std::string& key) const;
  std::map<std::string, std::map<std::string, Value>> sections_;
};

/// Closed-form wall expression in x: numbers, x, + - * /, unary minus,
/// parentheses, sin(...) and cos(...).
std::function<double(double)> parse_wall_expression(const std::string& expr);

struct ExperimentConfig {
  // [grid]
  int n_x = 64;
  // [time]
  double dt = 1e-3;
  double horizon = 1.0;
  double burn_in = 0.0;
  double stride = 0.1;
  int record_stride = 1;
  // [walls]
  std::string wall_preset = "constant";
  std::string wall_lower_expr, wall_upper_expr;
  std::vector<double> wall_params{-1.0, 1.0};
  // [coefficients]
  std::string f_preset = "zero";
  std::vector<double> f_params;
  std::string sigma_preset = "constant";
  std::vector<double> sigma_params{1.0};
  // [scheme]
  double epsilon = 1e-2;
  double delta = 1e-2;
  std::string scheme = "projected";
  std::string laplacian = "spectral";
  std::optional<int> mixing_n;  // absent = limit coefficients
  double zeta = 1e-9;
  // [seeds]
  std::uint64_t master_seed = 1;
  int replicas = 1;
  int threads = 0;  // 0 = hardware default
  // probe extras stay accessible through the raw table
  TomlTable raw;

  CircleGrid grid() const { return CircleGrid::with_nodes(n_x); }
  WallPair walls() const;
  ScalarCoefficient drift() const;
  ScalarCoefficient diffusion() const;
  PenalizedParams penalized_params() const;
  SeedManifest seed_manifest() const;
  /// Canonical echo of every recognized field, for the manifest.
  std::string to_json() const;
};

ExperimentConfig load_config(const std::string& path);
ExperimentConfig config_from_table(const TomlTable& table);

ScalarCoefficient coefficient_from_preset(const std::string& which, const std::string& preset,
                                          const std::vector<double>& params);

}  // namespace shew
