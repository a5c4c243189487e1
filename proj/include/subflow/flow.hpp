#ifndef SUBFLOW_FLOW_HPP
#define SUBFLOW_FLOW_HPP

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "subflow/variational.hpp"

namespace subflow {

struct FlowOptions {
  double dt = 0.0;          // initial step; <= 0 picks 0.2 * h_min^2
  double tol = 1e-3;        // sup-norm tension target
  int max_steps = 20000;
  double backtrack = 0.5;   // step shrink factor on rejected steps, in (0,1)
  int max_backtracks = 60;  // per-step shrink budget; 0 disables backtracking
  int grow_after = 10;      // consecutive accepts before dt recovers one notch
  int checkpoint_every = 0; // 0: no intermediate dumps
  std::uint64_t seed = 0;   // consumed by random initial data
  FdOrder order = FdOrder::fourth;
};

enum class FlowStatus { converged, max_steps, blowup };

std::string to_string(FlowStatus s);

struct FlowStep {
  int step = 0;
  double energy = 0.0;
  double tension_sup = 0.0;
  double dt = 0.0;
};

struct FlowTrace {
  std::vector<FlowStep> steps;  // row 0 is the initial state
  double max_sphere_drift = 0.0;
  int rejected_steps = 0;
};

/// Initial data kinds: "constant" (needs a point), "wrap" (the standard
/// doubly-periodic sweep into the first three ambient coordinates), or
/// "random-smooth" (seeded trig perturbation of the north pole / unit point).
MapField initial_map(std::string_view kind, ChartPtr chart, const Target& target,
                     std::uint64_t seed, std::span<const double> constant_point = {});

struct StepResult {
  MapField next;
  double energy = 0.0;
  bool accepted = false;
};

/// One explicit geodesic step f -> exp_f(dt * tension). The candidate is
/// accepted only if it does not increase the energy. Throws NumericalError
/// on non-finite candidate energy.
StepResult flow_step(const MapField& f, const Potential& G, double dt,
                     FdOrder order = FdOrder::fourth);

struct FlowOutcome {
  MapField field;
  FlowTrace trace;
  FlowStatus status = FlowStatus::max_steps;
};

/// Called after every accepted step with the step index and current field;
/// drivers use it for checkpointing at the cadence they choose.
using FlowCallback = std::function<void(int step, const MapField& f)>;

/// Gradient descent with backtracking until the tension sup-norm reaches
/// opts.tol, the step budget runs out, or the energy stops being finite.
/// Accepted-step energies are nonincreasing by construction; runs are
/// bit-reproducible for a fixed configuration.
FlowOutcome flow_until(const MapField& f0, const Potential& G, const FlowOptions& opts,
                       const FlowCallback& on_accept = {});

std::string trace_to_csv(const FlowTrace& trace);

}  // namespace subflow

#endif  // SUBFLOW_FLOW_HPP
