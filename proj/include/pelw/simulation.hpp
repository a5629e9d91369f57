#ifndef PELW_SIMULATION_HPP
#define PELW_SIMULATION_HPP

#include <cstddef>
#include <optional>
#include <string>

namespace pelw {

/// Outcome of a lockstep simulation check between a machine or net and its
/// encoded process.
struct SimulationReport {
  bool holds = true;
  std::size_t steps = 0;                   // steps (or BFS levels) matched
  std::optional<std::size_t> divergence;   // step index of the first mismatch
  std::size_t states = 0;                  // configurations compared
  std::string message;
};

}  // namespace pelw

#endif
