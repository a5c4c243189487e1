#ifndef SUBFLOW_CONFIG_HPP
#define SUBFLOW_CONFIG_HPP

#include <array>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "subflow/domain.hpp"
#include "subflow/flow.hpp"
#include "subflow/grid.hpp"
#include "subflow/target.hpp"

namespace subflow {

// Run configuration: a sectioned key=value text file. Unknown keys are
// rejected so typos surface as configuration errors instead of silently
// falling back to defaults.
//
//   seed = 2026
//   output = out
//   [domain]
//   name = twisted-torus
//   resolution = 16 16 16
//   [target]
//   kind = unit-sphere
//   n = 2
//   [potential]
//   kind = height
//   [flow]
//   initial = wrap
//   tol = 1e-3
//   [checks]
//   levels = 8 16 32
//   suites = first-variation divergence second-variation
//   [stability]
//   samples = 32

struct DomainConfig {
  std::string name = "twisted-torus";
  std::array<int, 3> resolution{16, 16, 16};
  std::array<double, 3> periods{two_pi, two_pi, two_pi};
};

struct TargetConfig {
  std::string kind = "unit-sphere";
  int n = 2;
};

struct PotentialConfig {
  std::string kind = "constant";
  double value = 0.0;  // constant potential level
  double coeff = 0.0;  // ambient-quadratic coefficient
};

struct ChecksConfig {
  std::vector<int> levels{8, 16, 32};
  std::vector<int> orders{2, 4};
  double dt = 0.0;  // FD step for the t-derivatives; <= 0 picks the grid spacing
  bool sign_flip_diagnostic = false;
  std::vector<std::string> suites{"first-variation", "divergence", "second-variation"};
  double order_gate_2 = 1.9;
  double order_gate_4 = 3.8;
};

struct StabilityConfig {
  int samples = 32;
  int rayleigh_iters = 0;
  double margin = 0.0;          // <= 0 picks the default certification margin
  double tension_factor = 10.0; // criticality gate = factor * flow tolerance
};

struct RunConfig {
  std::uint64_t seed = 2026;
  std::string output = "out";
  DomainConfig domain;
  TargetConfig target;
  PotentialConfig potential;
  std::string flow_initial = "wrap";
  std::vector<double> constant_point;
  FlowOptions flow;
  ChecksConfig checks;
  StabilityConfig stability;
};

/// Parses configuration text. Diagnostics carry the 1-based line number.
RunConfig parse_config(const std::string& text);

/// Reads and parses a configuration file.
RunConfig load_config(const std::filesystem::path& path);

ChartPtr make_chart(const DomainConfig& c);
Target make_target(const TargetConfig& c);
Potential make_potential(const PotentialConfig& c);

}  // namespace subflow

#endif  // SUBFLOW_CONFIG_HPP
