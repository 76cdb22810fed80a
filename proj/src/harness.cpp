#include "hosc/harness.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <limits>
#include <mutex>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "hosc/diagnostics.hpp"
#include "hosc/effective.hpp"
#include "hosc/errors.hpp"

namespace hosc {

using nlohmann::json;

int SweepConfig::micro_divisor_for(MethodKind kind) const {
  const auto it = micro_divisor.find(kind);
  return it == micro_divisor.end() ? 100 : it->second;
}

SweepConfig default_convergence_config() {
  SweepConfig cfg;
  cfg.epsilon = 1e-3;
  for (int k = 2; k <= 9; ++k) cfg.stepsizes.push_back(std::ldexp(1.0, -k));
  cfg.t_end = 10.0;
  cfg.out = "converge.csv";
  return cfg;
}

SweepConfig default_action_config() {
  SweepConfig cfg;
  cfg.epsilon = 1e-2;
  cfg.stepsizes = {0.05};
  cfg.t_end = 10.0;
  cfg.out = "actions.csv";
  return cfg;
}

namespace {

const json& require(const json& doc, const char* key) {
  const auto it = doc.find(key);
  if (it == doc.end()) throw ConfigError(std::string("missing config key '") + key + "'");
  return *it;
}

template <class T>
T read_as(const json& doc, const char* key) {
  try {
    return require(doc, key).get<T>();
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config key '") + key + "': " + e.what());
  }
}

MethodKind method_from(const std::string& name) {
  const auto kind = parse_method(name);
  if (!kind) throw ConfigError("unknown method '" + name + "'");
  return *kind;
}

}  // namespace

SweepConfig parse_config(std::string_view json_text) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  if (!doc.is_object()) throw ConfigError("config must be a JSON object");

  static const char* const known[] = {"model",  "model_params", "epsilon", "methods",
                                      "stepsizes", "t_end",     "micro_divisor", "h_ref",
                                      "out",    "stride",       "workers"};
  for (const auto& item : doc.items()) {
    if (std::find(std::begin(known), std::end(known), item.key()) == std::end(known))
      throw ConfigError("unknown config key '" + item.key() + "'");
  }

  SweepConfig cfg;
  cfg.model.name = read_as<std::string>(doc, "model");
  const json& params = require(doc, "model_params");
  if (!params.is_object()) throw ConfigError("model_params must be an object");
  cfg.model.alphas = read_as<Vector>(params, "alphas");
  cfg.model.lengths = read_as<Vector>(params, "lengths");
  cfg.model.initial = read_as<std::string>(params, "initial");
  if (cfg.model.initial == "explicit") {
    cfg.model.x0 = read_as<Vector>(params, "x0");
    cfg.model.y0 = read_as<Vector>(params, "y0");
  }

  cfg.epsilon = read_as<double>(doc, "epsilon");
  cfg.methods.clear();
  for (const auto& name : read_as<std::vector<std::string>>(doc, "methods"))
    cfg.methods.push_back(method_from(name));
  cfg.stepsizes = read_as<std::vector<double>>(doc, "stepsizes");
  cfg.t_end = read_as<double>(doc, "t_end");

  const json& divisor = require(doc, "micro_divisor");
  if (divisor.is_number_integer()) {
    for (auto& [kind, value] : cfg.micro_divisor) value = divisor.get<int>();
  } else if (divisor.is_object()) {
    for (const auto& item : divisor.items()) {
      if (!item.value().is_number_integer())
        throw ConfigError("micro_divisor." + item.key() + " must be an integer");
      cfg.micro_divisor[method_from(item.key())] = item.value().get<int>();
    }
  } else {
    throw ConfigError("micro_divisor must be an integer or an object keyed by method");
  }

  cfg.h_ref = read_as<double>(doc, "h_ref");
  cfg.out = read_as<std::string>(doc, "out");
  cfg.stride = read_as<int>(doc, "stride");
  cfg.workers = read_as<int>(doc, "workers");
  validate(cfg);
  return cfg;
}

SweepConfig load_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str());
}

std::string dump_config(const SweepConfig& cfg) {
  json params = {{"alphas", cfg.model.alphas},
                 {"lengths", cfg.model.lengths},
                 {"initial", cfg.model.initial}};
  if (cfg.model.initial == "explicit") {
    params["x0"] = cfg.model.x0;
    params["y0"] = cfg.model.y0;
  }
  std::vector<std::string> methods;
  for (MethodKind kind : cfg.methods) methods.emplace_back(to_string(kind));

  json divisor = json::object();
  for (const auto& [kind, value] : cfg.micro_divisor) divisor[std::string(to_string(kind))] = value;

  const json doc = {{"model", cfg.model.name},
                    {"model_params", params},
                    {"epsilon", cfg.epsilon},
                    {"methods", methods},
                    {"stepsizes", cfg.stepsizes},
                    {"t_end", cfg.t_end},
                    {"micro_divisor", divisor},
                    {"h_ref", cfg.h_ref},
                    {"out", cfg.out},
                    {"stride", cfg.stride},
                    {"workers", cfg.workers}};
  return doc.dump(2) + "\n";
}

void validate(const SweepConfig& cfg) {
  if (!(cfg.epsilon > 0.0 && cfg.epsilon <= 1.0)) throw ConfigError("epsilon must lie in (0, 1]");
  if (!(cfg.t_end > 0.0)) throw ConfigError("t_end must be positive");
  if (!(cfg.h_ref > 0.0)) throw ConfigError("h_ref must be positive");
  if (cfg.methods.empty()) throw ConfigError("methods must not be empty");
  for (std::size_t i = 0; i < cfg.methods.size(); ++i)
    for (std::size_t j = i + 1; j < cfg.methods.size(); ++j)
      if (cfg.methods[i] == cfg.methods[j]) throw ConfigError("methods contain duplicates");
  if (cfg.stepsizes.empty()) throw ConfigError("stepsizes must not be empty");
  for (std::size_t i = 0; i < cfg.stepsizes.size(); ++i) {
    if (!(cfg.stepsizes[i] > 0.0) || !std::isfinite(cfg.stepsizes[i]))
      throw ConfigError("stepsizes must be positive");
    if (i > 0 && !(cfg.stepsizes[i] < cfg.stepsizes[i - 1]))
      throw ConfigError("stepsizes must be strictly descending");
  }
  for (const auto& [kind, value] : cfg.micro_divisor)
    if (value < 1) throw ConfigError("micro_divisor must be at least 1");
  if (cfg.stride < 1) throw ConfigError("stride must be at least 1");
  if (cfg.workers < 1) throw ConfigError("workers must be at least 1");

  try {
    const SystemPtr sys = build_system(cfg.model, cfg.epsilon);
    initial_state(cfg.model, cfg.epsilon);
  } catch (const NumericalError& e) {
    throw ConfigError(std::string("model cannot be constructed: ") + e.what());
  }
}

SystemPtr build_system(const ModelSpec& model, double epsilon) {
  if (model.alphas.size() != model.lengths.size())
    throw ConfigError("model_params.alphas and model_params.lengths differ in length");
  if (model.name == "double_pendulum") {
    if (model.alphas.size() != 2) throw ConfigError("double_pendulum takes two alphas and lengths");
    return make_double_pendulum(epsilon, model.alphas[0], model.alphas[1], model.lengths[0],
                                model.lengths[1]);
  }
  if (model.name == "spring_chain") {
    if (model.alphas.empty()) throw ConfigError("spring_chain needs at least one spring");
    return make_spring_chain(model.alphas.size(), epsilon, model.alphas, model.lengths);
  }
  throw ConfigError("unknown model '" + model.name + "'");
}

State initial_state(const ModelSpec& model, double epsilon) {
  const std::size_t n = 2 * model.alphas.size();
  if (model.initial == "standard") {
    if (model.name != "double_pendulum")
      throw ConfigError("initial 'standard' is only defined for double_pendulum");
    return double_pendulum_initial_state(epsilon);
  }
  if (model.initial == "explicit") {
    if (model.x0.size() != n || model.y0.size() != n)
      throw ConfigError("explicit x0 and y0 must have length " + std::to_string(n));
    return State{model.x0, model.y0, 0.0};
  }
  throw ConfigError("model_params.initial must be 'standard' or 'explicit'");
}

bool SweepResult::all_ok() const {
  return std::all_of(rows.begin(), rows.end(), [](const SweepRow& r) { return r.status == "ok"; });
}

const SweepRow* SweepResult::find(MethodKind method, double h) const {
  for (const auto& row : rows)
    if (row.method == method && row.h == h) return &row;
  return nullptr;
}

namespace {

struct Job {
  MethodKind method;
  double h;
};

struct JobOutput {
  SweepRow row;
  ActionSeries series;
};

/// Runs every (method, h) pair against one shared reference. Output order
/// follows the config regardless of which worker finished first.
std::vector<JobOutput> run_jobs(const SweepConfig& cfg, bool keep_series) {
  validate(cfg);
  const SystemPtr sys = build_system(cfg.model, cfg.epsilon);
  const State s0 = initial_state(cfg.model, cfg.epsilon);
  const Trajectory ref = effective_reference(*sys, s0.x, s0.y, cfg.h_ref, cfg.t_end);

  std::vector<Job> jobs;
  for (MethodKind kind : cfg.methods)
    for (double h : cfg.stepsizes) jobs.push_back({kind, h});
  std::vector<JobOutput> out(jobs.size());

  const auto run_one = [&](std::size_t index) {
    const Job& job = jobs[index];
    JobOutput& result = out[index];
    result.row.method = job.method;
    result.row.h = job.h;
    result.series.method = job.method;
    result.series.h = job.h;

    const auto start = std::chrono::steady_clock::now();
    try {
      IntegrateOptions options;
      options.observer = [&](const State& s) {
        DiagnosticsRecord rec;
        rec.t = s.t;
        rec.actions = compute_actions(*sys, s.x, s.y);
        return rec;
      };
      const MacroMethod method{job.method, job.h, cfg.micro_divisor_for(job.method)};
      const Trajectory traj = integrate(*sys, s0, method, cfg.t_end, options);
      const ErrorMetrics em = error_metrics(traj, ref, *sys);
      result.row.max_err_x = em.max_err_x;
      result.row.max_err_Py = em.max_err_Py;
      result.row.max_action_drift = max_action_drift(traj);
      if (keep_series) {
        for (std::size_t i = 0; i < traj.records.size(); ++i) {
          if (i % static_cast<std::size_t>(cfg.stride) != 0 && i + 1 != traj.records.size())
            continue;
          result.series.times.push_back(traj.records[i].t);
          result.series.actions.push_back(traj.records[i].actions);
        }
      }
    } catch (const NumericalError& e) {
      const double nan = std::numeric_limits<double>::quiet_NaN();
      result.row.max_err_x = result.row.max_err_Py = result.row.max_action_drift = nan;
      result.row.status = std::string(to_string(e.kind()));
      result.row.message = e.what();
    }
    result.row.wall_time =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  };

  const std::size_t workers =
      std::min<std::size_t>(static_cast<std::size_t>(cfg.workers), jobs.size());
  if (workers <= 1) {
    for (std::size_t i = 0; i < jobs.size(); ++i) run_one(i);
    return out;
  }

  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < jobs.size(); i = next++) {
        try {
          run_one(i);
        } catch (...) {
          std::lock_guard lock(failure_mutex);
          if (!failure) failure = std::current_exception();
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
  return out;
}

void write_outputs(const SweepConfig& cfg, const SweepResult& result, bool with_series) {
  if (cfg.out.empty()) return;
  write_text_file(cfg.out, sweep_csv(result));
  write_text_file(sidecar_path(cfg.out, "timing"), timing_csv(result));
  if (with_series) write_text_file(sidecar_path(cfg.out, "series"), series_csv(result));
}

}  // namespace

SweepResult run_convergence_sweep(const SweepConfig& cfg) {
  SweepResult result;
  for (auto& job : run_jobs(cfg, false)) result.rows.push_back(std::move(job.row));
  write_outputs(cfg, result, false);
  return result;
}

SweepResult run_action_study(const SweepConfig& cfg) {
  if (cfg.stepsizes.size() != 1)
    throw ConfigError("the action study takes exactly one stepsize");
  SweepResult result;
  for (auto& job : run_jobs(cfg, true)) {
    result.rows.push_back(std::move(job.row));
    result.series.push_back(std::move(job.series));
  }
  write_outputs(cfg, result, true);
  return result;
}

Trajectory run_single(const SweepConfig& cfg) {
  validate(cfg);
  if (cfg.methods.size() != 1 || cfg.stepsizes.size() != 1)
    throw ConfigError("simulate takes exactly one method and one stepsize");
  const SystemPtr sys = build_system(cfg.model, cfg.epsilon);
  const State s0 = initial_state(cfg.model, cfg.epsilon);

  IntegrateOptions options;
  options.stride = cfg.stride;
  options.observer = [&](const State& s) { return full_diagnostics(*sys, s); };
  const MacroMethod method{cfg.methods[0], cfg.stepsizes[0], cfg.micro_divisor_for(cfg.methods[0])};
  Trajectory traj = integrate(*sys, s0, method, cfg.t_end, options);
  if (!cfg.out.empty()) write_text_file(cfg.out, trajectory_csv(traj));
  return traj;
}

std::string format_real(double value) {
  if (std::isnan(value)) return "nan";
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", value);
  return buf;
}

std::string sweep_csv(const SweepResult& result) {
  std::string out = "method,h,max_err_x,max_err_Py,max_action_drift,status\n";
  for (const auto& row : result.rows) {
    out += std::string(to_string(row.method)) + ',' + format_real(row.h) + ',' +
           format_real(row.max_err_x) + ',' + format_real(row.max_err_Py) + ',' +
           format_real(row.max_action_drift) + ',' + row.status + '\n';
  }
  return out;
}

std::string timing_csv(const SweepResult& result) {
  std::string out = "method,h,wall_time\n";
  for (const auto& row : result.rows)
    out += std::string(to_string(row.method)) + ',' + format_real(row.h) + ',' +
           format_real(row.wall_time) + '\n';
  return out;
}

std::string series_csv(const SweepResult& result) {
  std::size_t m = 0;
  for (const auto& s : result.series)
    if (!s.actions.empty()) m = s.actions.front().size();
  std::string out = "method,h,t";
  for (std::size_t k = 0; k < m; ++k) out += ",I" + std::to_string(k);
  out += '\n';
  for (const auto& s : result.series) {
    for (std::size_t i = 0; i < s.times.size(); ++i) {
      out += std::string(to_string(s.method)) + ',' + format_real(s.h) + ',' +
             format_real(s.times[i]);
      for (double a : s.actions[i]) out += ',' + format_real(a);
      out += '\n';
    }
  }
  return out;
}

std::string trajectory_csv(const Trajectory& traj) {
  if (traj.empty()) return "t\n";
  const std::size_t n = traj.states.front().x.size();
  const std::size_t m = traj.records.empty() ? 0 : traj.records.front().actions.size();
  std::string out = "t";
  for (std::size_t i = 0; i < n; ++i) out += ",x" + std::to_string(i);
  for (std::size_t i = 0; i < n; ++i) out += ",y" + std::to_string(i);
  out += ",energy";
  for (std::size_t k = 0; k < m; ++k) out += ",I" + std::to_string(k);
  out += ",min_gap,min_combo,constraint_residual\n";

  for (std::size_t j = 0; j < traj.size(); ++j) {
    const State& s = traj.states[j];
    out += format_real(s.t);
    for (double v : s.x) out += ',' + format_real(v);
    for (double v : s.y) out += ',' + format_real(v);
    if (traj.records.empty()) {
      out += '\n';
      continue;
    }
    const DiagnosticsRecord& rec = traj.records[j];
    out += ',' + format_real(rec.energy);
    for (double a : rec.actions) out += ',' + format_real(a);
    out += ',' + format_real(rec.min_gap) + ',' + format_real(rec.min_combo) + ',' +
           format_real(rec.constraint_residual) + '\n';
  }
  return out;
}

void write_text_file(const std::string& path, const std::string& text) {
  const std::filesystem::path p(path);
  if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path());
  std::ofstream out(p, std::ios::binary | std::ios::trunc);
  if (!out) throw ConfigError("cannot write '" + path + "'");
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  if (!out) throw ConfigError("failed writing '" + path + "'");
}

std::string sidecar_path(const std::string& path, std::string_view tag) {
  std::filesystem::path p(path);
  const std::string ext = p.has_extension() ? p.extension().string() : std::string(".csv");
  p.replace_filename(p.stem().string() + "." + std::string(tag) + ext);
  return p.string();
}

double fitted_log_slope(const std::vector<double>& h, const std::vector<double>& err) {
  if (h.size() != err.size() || h.size() < 2)
    throw NumericalError(ErrorKind::InvalidArgument, "slope fit needs two or more matched points");
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  const double n = static_cast<double>(h.size());
  for (std::size_t i = 0; i < h.size(); ++i) {
    const double lx = std::log2(h[i]);
    const double ly = std::log2(err[i]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

}  // namespace hosc
