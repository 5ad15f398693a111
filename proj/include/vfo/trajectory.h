#ifndef VFO_TRAJECTORY_H_
#define VFO_TRAJECTORY_H_

#include <optional>
#include <vector>

#include "vfo/nn.h"

namespace vfo {

// Which data-generating process a sample came from.
enum class Origin { kExpert, kBackground };

// s_1..s_T with optional a_1..a_{T-1} and per-step rewards. Expert
// trajectories carry no actions.
struct Trajectory {
  std::vector<Vec> states;
  std::optional<std::vector<Vec>> actions;
  std::optional<std::vector<double>> rewards;
  bool terminated = false;
  bool truncated = false;

  std::size_t num_transitions() const {
    return states.empty() ? 0 : states.size() - 1;
  }
  // Sum of stored rewards; throws if rewards are absent.
  double total_return() const;
  // Throws std::invalid_argument when lengths or flags are inconsistent.
  void validate() const;
};

}  // namespace vfo

#endif  // VFO_TRAJECTORY_H_
