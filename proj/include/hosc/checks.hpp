#pragma once

#include <random>
#include <string>
#include <string_view>
#include <vector>

#include "hosc/harness.hpp"

namespace hosc {

/// One validation item. Passing means lower <= measured <= upper.
struct CheckItem {
  std::string name;
  double measured = 0.0;
  double lower = 0.0;
  double upper = 0.0;
  bool passed = false;
};

struct CheckReport {
  std::vector<CheckItem> items;

  bool all_passed() const;
  /// One line per item: status, name, measured value and accepted range.
  std::string format() const;
};

std::vector<std::string> check_names();

/// Desk-scale invariant suite: kernel oracles, projection identities, the
/// mollifier Jacobian scaling, reversibility of the projected and mollified
/// step maps and the reference stepsize guard. `inject_fault` names a check
/// whose accepted range is replaced by an empty one (negative control);
/// unknown names raise ConfigError.
CheckReport run_check(const SweepConfig& cfg, std::string_view inject_fault = {});

/// Double pendulum position at distance O(eps) from the manifold: random
/// spring angles, then a perturbation eps * N(0, 1) per coordinate.
Vector near_manifold_position(std::mt19937_64& rng, double eps);

}  // namespace hosc
