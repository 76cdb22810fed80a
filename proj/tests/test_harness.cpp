#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <limits>
#include <numbers>
#include <sstream>

#include "hosc/checks.hpp"
#include "hosc/errors.hpp"
#include "hosc/harness.hpp"

using namespace hosc;

namespace {

std::string read_file(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

std::filesystem::path scratch_dir() {
  const auto dir = std::filesystem::temp_directory_path() / "hosc_test_harness";
  std::filesystem::create_directories(dir);
  return dir;
}

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream in(line);
  while (std::getline(in, item, sep)) out.push_back(item);
  return out;
}

std::string first_line(const std::string& text) { return text.substr(0, text.find('\n')); }

SweepConfig small_sweep() {
  SweepConfig cfg = default_convergence_config();
  cfg.epsilon = 1e-2;
  cfg.stepsizes = {0.1, 0.05};
  cfg.t_end = 1.0;
  cfg.h_ref = 1e-3;
  cfg.out.clear();
  return cfg;
}

}  // namespace

TEST_CASE("default convergence sweep has 24 rows") {
  SweepConfig cfg = default_convergence_config();
  cfg.out = (scratch_dir() / "default.csv").string();
  const SweepResult result = run_convergence_sweep(cfg);
  CHECK(result.rows.size() == 24);
  CHECK(result.all_ok());
  const std::string csv = read_file(cfg.out);
  CHECK(first_line(csv) == "method,h,max_err_x,max_err_Py,max_action_drift,status");
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 25);
  CHECK(csv.find('\r') == std::string::npos);
  CHECK(std::filesystem::exists(sidecar_path(cfg.out, "timing")));

  // Rows follow the configured order of methods, then stepsizes.
  CHECK(result.rows[0].method == MethodKind::Impulse);
  CHECK(result.rows[0].h == 0.25);
  CHECK(result.rows[23].method == MethodKind::Projected);
  CHECK(result.rows[23].h == 0x1p-9);
}

TEST_CASE("sweeps are byte-identical across reruns and worker counts") {
  SweepConfig cfg = small_sweep();
  cfg.out = (scratch_dir() / "a.csv").string();
  cfg.workers = 1;
  run_convergence_sweep(cfg);
  const std::string first = read_file(cfg.out);
  cfg.workers = 3;
  run_convergence_sweep(cfg);
  CHECK(read_file(cfg.out) == first);
}

TEST_CASE("action study writes summary and series") {
  SweepConfig cfg = default_action_config();
  cfg.t_end = 1.0;
  cfg.out = (scratch_dir() / "actions.csv").string();
  const SweepResult result = run_action_study(cfg);
  CHECK(result.rows.size() == 3);
  REQUIRE(result.series.size() == 3);
  CHECK(result.series[0].times.size() == 21);
  const std::string series = read_file(sidecar_path(cfg.out, "series"));
  CHECK(first_line(series) == "method,h,t,I0,I1");
  CHECK(std::count(series.begin(), series.end(), '\n') == 1 + 3 * 21);

  // Summary drift equals the max deviation of the series.
  for (std::size_t r = 0; r < 3; ++r) {
    double drift = 0.0;
    for (const auto& a : result.series[r].actions)
      for (std::size_t k = 0; k < a.size(); ++k)
        drift = std::max(drift, std::abs(a[k] - result.series[r].actions[0][k]));
    CHECK(drift == result.rows[r].max_action_drift);
  }

  cfg.stepsizes = {0.1, 0.05};
  CHECK_THROWS_AS(run_action_study(cfg), ConfigError);
}

TEST_CASE("single run CSV") {
  SweepConfig cfg = default_action_config();
  cfg.methods = {MethodKind::Projected};
  cfg.t_end = 0.5;
  cfg.out = (scratch_dir() / "single.csv").string();
  const Trajectory traj = run_single(cfg);
  const std::string csv = read_file(cfg.out);
  CHECK(first_line(csv) ==
        "t,x0,x1,x2,x3,y0,y1,y2,y3,energy,I0,I1,min_gap,min_combo,constraint_residual");
  CHECK(traj.size() == 11);
  CHECK(traj.records.front().min_gap == doctest::Approx(std::sqrt(2.0) - 1).epsilon(1e-3));

  const std::size_t body = csv.find('\n') + 1;
  const auto row = split(csv.substr(body, csv.find('\n', body) - body), ',');
  CHECK(row.size() == 15);

  run_single(cfg);
  CHECK(read_file(cfg.out) == csv);

  cfg.methods = {MethodKind::Projected, MethodKind::Impulse};
  CHECK_THROWS_AS(run_single(cfg), ConfigError);
}

TEST_CASE("failed runs become tagged rows") {
  SweepConfig cfg = small_sweep();
  cfg.model.alphas = {3.0, 3.0};
  cfg.methods = {MethodKind::Projected};
  cfg.micro_divisor[MethodKind::Projected] = 1;
  const SweepResult result = run_convergence_sweep(cfg);
  REQUIRE(result.rows.size() == 2);
  CHECK(result.rows[0].status == "StabilityViolation");
  CHECK(std::isnan(result.rows[0].max_err_x));
  CHECK_FALSE(result.all_ok());
  CHECK(sweep_csv(result).find(",nan,nan,nan,StabilityViolation\n") != std::string::npos);
}

TEST_CASE("config parsing") {
  const SweepConfig defaults = default_convergence_config();
  const std::string text = dump_config(defaults);

  SUBCASE("round trip") {
    const SweepConfig back = parse_config(text);
    CHECK(dump_config(back) == text);
    CHECK(back.stepsizes == defaults.stepsizes);
    CHECK(back.micro_divisor_for(MethodKind::Impulse) == 1000);
    CHECK(back.micro_divisor_for(MethodKind::Projected) == 100);
  }
  SUBCASE("every key is required") {
    for (const char* key : {"model", "model_params", "epsilon", "methods", "stepsizes", "t_end",
                            "micro_divisor", "h_ref", "out", "stride", "workers"}) {
      std::string cut = text;
      const auto pos = cut.find(std::string("\"") + key + "\"");
      REQUIRE(pos != std::string::npos);
      cut.replace(pos + 1, std::strlen(key), std::string("x_") + key);
      CHECK_THROWS_AS(parse_config(cut), ConfigError);
    }
  }
  SUBCASE("integer micro divisor applies to all methods") {
    std::string t = text;
    const auto start = t.find("\"micro_divisor\"");
    const auto end = t.find('}', start);
    t.replace(start, end - start + 1, "\"micro_divisor\": 250");
    const SweepConfig cfg = parse_config(t);
    CHECK(cfg.micro_divisor_for(MethodKind::Impulse) == 250);
    CHECK(cfg.micro_divisor_for(MethodKind::Mollified) == 250);
  }
  SUBCASE("invalid values") {
    SweepConfig bad = defaults;
    bad.stepsizes = {0.1, 0.2};
    CHECK_THROWS_AS(validate(bad), ConfigError);
    bad = defaults;
    bad.t_end = 0.0;
    CHECK_THROWS_AS(validate(bad), ConfigError);
    bad = defaults;
    bad.model.name = "triple_pendulum";
    CHECK_THROWS_AS(validate(bad), ConfigError);
    bad = defaults;
    bad.model.alphas = {1.0, -1.0};
    CHECK_THROWS_AS(validate(bad), ConfigError);
    CHECK_THROWS_AS(parse_config("{not json"), ConfigError);
    CHECK_THROWS_AS(parse_config(text.substr(0, text.size() - 2) + ", \"extra\": 1}"), ConfigError);
  }
  SUBCASE("spring chain with explicit start") {
    SweepConfig chain = defaults;
    chain.model.name = "spring_chain";
    chain.model.alphas = {1, 1, 1};
    chain.model.lengths = {1, 1, 1};
    CHECK_THROWS_AS(validate(chain), ConfigError);
    chain.model.initial = "explicit";
    chain.model.x0 = {0, -1, 0, -2, 0, -3.01};
    chain.model.y0 = {0, 0, 0, 0, 0, 0};
    validate(chain);
    CHECK(dump_config(parse_config(dump_config(chain))) == dump_config(chain));
  }
}

TEST_CASE("shipped configs load") {
  int seen = 0;
  for (const auto& entry : std::filesystem::directory_iterator(HOSC_CONFIG_DIR)) {
    if (entry.path().extension() != ".json") continue;
    INFO(entry.path().string());
    const SweepConfig cfg = load_config(entry.path().string());
    CHECK_NOTHROW(validate(cfg));
    CHECK_NOTHROW(build_system(cfg.model, cfg.epsilon));
    ++seen;
  }
  CHECK(seen >= 3);
}

TEST_CASE("csv formatting") {
  CHECK(format_real(0.1) == "0.10000000000000001");
  CHECK(format_real(0.25) == "0.25");
  CHECK(format_real(std::numeric_limits<double>::infinity()) == "inf");
  CHECK(std::stod(format_real(std::numbers::pi)) == std::numbers::pi);
  CHECK(sidecar_path("runs/out.csv", "timing") == "runs/out.timing.csv");
  CHECK(sidecar_path("out", "series") == "out.series.csv");
}

TEST_CASE("fitted log slope") {
  const std::vector<double> h{0.25, 0.125, 0.0625, 0.03125};
  std::vector<double> err;
  for (double v : h) err.push_back(3.0 * v * v);
  CHECK(fitted_log_slope(h, err) == doctest::Approx(2.0).epsilon(1e-12));
}

TEST_CASE("check suite passes and fault injection trips it") {
  const SweepConfig cfg = default_convergence_config();
  const CheckReport clean = run_check(cfg);
  CHECK(clean.items.size() == check_names().size());
  for (const auto& item : clean.items) {
    INFO(item.name, " measured ", item.measured);
    CHECK(item.passed);
  }
  CHECK(clean.format().find("projection_idempotency") != std::string::npos);

  const CheckReport faulty = run_check(cfg, "projection_idempotency");
  CHECK_FALSE(faulty.all_passed());
  for (const auto& item : faulty.items) CHECK(item.passed == (item.name != "projection_idempotency"));

  CHECK_THROWS_AS(run_check(cfg, "no_such_check"), ConfigError);
}

TEST_CASE("sweep wall time scales linearly with the micro-step count") {
  SweepConfig cfg = small_sweep();
  cfg.methods = {MethodKind::Projected, MethodKind::Mollified};
  cfg.stepsizes = {0.1, 0.05, 0.025};
  const auto total = [](const SweepResult& r) {
    double t = 0.0;
    for (const auto& row : r.rows) t += row.wall_time;
    return t;
  };
  cfg.t_end = 2.0;
  const double base = total(run_convergence_sweep(cfg));
  cfg.t_end = 4.0;
  const double doubled = total(run_convergence_sweep(cfg));
  INFO("wall time ", base, " then ", doubled);
  CHECK(doubled / base >= 2.0 * 0.7);
  CHECK(doubled / base <= 2.0 * 1.3);
}
