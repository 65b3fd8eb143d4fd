#pragma once

#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>

#include "lorenzlab/metric.hpp"
#include "lorenzlab/search.hpp"

namespace lorenzlab {

class ConfigError : public std::runtime_error {
 public:
  ConfigError(const std::string& what, int line, int column)
      : std::runtime_error(std::to_string(line) + ":" + std::to_string(column) + ": " + what),
        line_(line), column_(column) {}
  int line() const { return line_; }
  int column() const { return column_; }

 private:
  int line_, column_;
};

struct Tolerances {
  double ode = 1e-12;
  double newton = 1e-9;
  double dedup = 1e-4;
};

struct SearchSettings {
  int intercepts = 16;
  int segments = 32;
  int max_class_coord = 3;
  std::vector<Class2> classes;
  Class2 homology{0, 1};  // maximize
  CausalSign sign = CausalSign::nonspacelike;
  int vertices = 64;
};

struct RunConfig {
  ModelSpec model;
  Tolerances tolerances;
  SearchSettings search;
};

// Sections [model], [tolerances], [search]; `key = value` lines; '#' and ';'
// start comments; strings may be double-quoted.
RunConfig parse_config(const std::string& text);
RunConfig load_config(const std::filesystem::path& path);

SurveyOptions survey_options(const RunConfig& cfg, int workers, unsigned long long seed);

}  // namespace lorenzlab
