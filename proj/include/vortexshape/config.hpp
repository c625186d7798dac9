#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "vortexshape/descent.hpp"

namespace vortexshape {

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct OutputOptions {
  bool vtk = false;
  bool boundary_every_iteration = true;
};

struct SweepSpec {
  std::vector<int> configurations;   // mixed configuration indices (1..10)
  std::string compare_curl;          // polyline CSV of a stored curl_dF solution
  std::string compare_detgrad;       // polyline CSV of a stored detgrad_dF solution
};

struct ExperimentSpec {
  std::string name = "run";
  RunConfig config;
  OutputOptions output;
  std::optional<SweepSpec> sweep;
};

// Plain-text "key = value" file with [section] headers; '#' starts a comment.
// Unknown keys and malformed values raise ConfigError with a line reference.
ExperimentSpec parse_config(std::istream& is, const std::string& source_name = "<config>");
ExperimentSpec parse_config_file(const std::string& path);

}  // namespace vortexshape
