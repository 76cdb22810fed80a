// Command-line driver: converge | actions | simulate | check.
//
// Flags override values from --config. Exit status: 0 success, 1 numerical
// failure (including failed runs inside a sweep and failed checks), 2 bad
// configuration or command line.

#include <cstdio>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "hosc/checks.hpp"
#include "hosc/errors.hpp"
#include "hosc/harness.hpp"

namespace {

struct Overrides {
  std::string config;
  std::optional<std::string> out;
  std::optional<double> epsilon;
  std::optional<double> t_end;
  std::vector<std::string> methods;
  std::vector<double> stepsizes;
  std::optional<int> micro_divisor;
  std::optional<int> workers;
  std::string inject_fault;
};

void add_common(CLI::App& cmd, Overrides& o) {
  cmd.add_option("--config", o.config, "JSON experiment description")->check(CLI::ExistingFile);
  cmd.add_option("--out", o.out, "CSV output path");
  cmd.add_option("--epsilon", o.epsilon, "stiffness parameter");
  cmd.add_option("--t-end", o.t_end, "integration horizon");
  cmd.add_option("--method", o.methods, "impulse, mollified or projected (repeatable)");
  cmd.add_option("--h", o.stepsizes, "macro stepsize (repeatable)");
  cmd.add_option("--micro-divisor", o.micro_divisor, "micro step is epsilon / N for every method");
  cmd.add_option("--workers", o.workers, "parallel runs");
}

hosc::SweepConfig resolve(const Overrides& o, hosc::SweepConfig cfg) {
  if (!o.config.empty()) cfg = hosc::load_config(o.config);
  if (o.out) cfg.out = *o.out;
  if (o.epsilon) cfg.epsilon = *o.epsilon;
  if (o.t_end) cfg.t_end = *o.t_end;
  if (!o.methods.empty()) {
    cfg.methods.clear();
    for (const auto& name : o.methods) {
      const auto kind = hosc::parse_method(name);
      if (!kind) throw hosc::ConfigError("unknown method '" + name + "'");
      cfg.methods.push_back(*kind);
    }
  }
  if (!o.stepsizes.empty()) cfg.stepsizes = o.stepsizes;
  if (o.micro_divisor)
    for (auto& [kind, value] : cfg.micro_divisor) value = *o.micro_divisor;
  if (o.workers) cfg.workers = *o.workers;
  hosc::validate(cfg);
  return cfg;
}

void print_rows(const hosc::SweepResult& result) {
  std::printf("%-10s %-12s %-12s %-12s %-12s %s\n", "method", "h", "max_err_x", "max_err_Py",
              "max_drift", "status");
  for (const auto& r : result.rows) {
    std::printf("%-10s %-12.5g %-12.4e %-12.4e %-12.4e %s\n",
                std::string(hosc::to_string(r.method)).c_str(), r.h, r.max_err_x, r.max_err_Py,
                r.max_action_drift, r.status.c_str());
    if (r.status != "ok") std::printf("  %s\n", r.message.c_str());
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Multiscale integrators for stiff oscillatory Hamiltonian systems"};
  app.require_subcommand(1);
  // "-h" is taken by the stepsize flag.
  app.set_help_flag("--help", "print help and exit");

  Overrides o;
  auto* converge = app.add_subcommand("converge", "stepsize sweep against the effective reference");
  auto* actions = app.add_subcommand("actions", "action drift study with time series");
  auto* simulate = app.add_subcommand("simulate", "one method, one stepsize, full diagnostics");
  auto* check = app.add_subcommand("check", "desk-scale invariant suite");
  for (auto* cmd : {converge, actions, simulate, check}) add_common(*cmd, o);
  check->add_option("--inject-fault", o.inject_fault, "empty the accepted range of this check");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (*converge) {
      const auto result = hosc::run_convergence_sweep(resolve(o, hosc::default_convergence_config()));
      print_rows(result);
      return result.all_ok() ? 0 : 1;
    }
    if (*actions) {
      const auto result = hosc::run_action_study(resolve(o, hosc::default_action_config()));
      print_rows(result);
      return result.all_ok() ? 0 : 1;
    }
    if (*simulate) {
      hosc::SweepConfig base = hosc::default_action_config();
      base.methods = {hosc::MethodKind::Projected};
      base.out = "simulate.csv";
      const auto traj = hosc::run_single(resolve(o, base));
      std::printf("%zu samples, t_end = %.17g\n", traj.size(), traj.back().t);
      return 0;
    }
    const auto report =
        hosc::run_check(resolve(o, hosc::default_convergence_config()), o.inject_fault);
    std::fputs(report.format().c_str(), stdout);
    return report.all_passed() ? 0 : 1;
  } catch (const hosc::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  } catch (const hosc::NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << '\n';
    return 1;
  }
}
