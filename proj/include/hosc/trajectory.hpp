#pragma once

#include <cstddef>
#include <vector>

#include "hosc/model.hpp"

namespace hosc {

struct DiagnosticsRecord {
  double t = 0.0;
  double energy = 0.0;
  Vector actions;
  double min_gap = 0.0;
  double min_combo = 0.0;
  double constraint_residual = 0.0;
};

/// Time-ordered samples. `records` is either empty (no observer attached)
/// or parallel to `states`.
struct Trajectory {
  std::vector<State> states;
  std::vector<DiagnosticsRecord> records;
  int stride = 1;

  std::size_t size() const noexcept { return states.size(); }
  bool empty() const noexcept { return states.empty(); }
  const State& back() const { return states.back(); }
};

}  // namespace hosc
