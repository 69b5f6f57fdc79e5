#pragma once

#include <atomic>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <map>
#include <string>
#include <thread>
#include <vector>

#include <nlohmann/json.hpp>

#include "waseplab/field_spec.hpp"

namespace waseplab {

struct ExperimentConfig {
  std::string experiment = "clt";
  int d = 1;
  std::vector<int> n = {64};
  double T = 0.1;
  double dt = 0.0;  ///< 0 = automatic step for the hydro and master solvers
  VectorFieldSpec F = VectorFieldSpec::zero(1);
  TrigSeries u0 = TrigSeries::constant_value(0.5);
  /// Test function f (or H) sampled at x/n.
  TrigSeries f = TrigSeries::cosine(0.0, 1.4142135623730951);
  int replicas = 100;
  std::uint64_t seed = 1;
  int modes = 0;  ///< Fourier cutoff M; 0 = default for d
  int ell = 0;    ///< 0 = ell_of_n
  int ell_min = 2;
  int ell_max = 16;
  int report_times = 5;
  std::string out = "out";

  void validate() const;
  nlohmann::json to_json() const;
  static ExperimentConfig from_json(const nlohmann::json& j);
  /// Defaults for a named experiment before any user overrides.
  static ExperimentConfig defaults(const std::string& experiment);
  std::uint64_t hash() const;
};

nlohmann::json trig_to_json(const TrigSeries& s);
TrigSeries trig_from_json(const nlohmann::json& j);
nlohmann::json field_to_json(const VectorFieldSpec& F);
VectorFieldSpec field_from_json(const nlohmann::json& j, int d);

struct SummaryRow {
  std::string experiment;
  std::string point;
  std::string statistic;
  double value = 0.0;
  double se = 0.0;
  std::size_t replicas = 1;
};

struct Check {
  std::string name;
  bool passed = false;
  std::string detail;
};

struct ExperimentResult {
  std::vector<SummaryRow> rows;
  std::vector<Check> checks;
  /// file name -> CSV body (without the hash line)
  std::map<std::string, std::string> details;

  bool passed() const;
  void check(std::string name, bool ok, std::string detail);
  void row(const std::string& experiment, const std::string& point, const std::string& stat, double value,
           double se = 0.0, std::size_t replicas = 1);
};

std::string hash_hex(std::uint64_t h);

/// Every CSV starts with "# config_hash=<hex>".
void write_csv_with_hash(std::ostream& os, std::uint64_t hash, const std::string& body);
void write_summary_csv(std::ostream& os, std::uint64_t hash, const std::vector<SummaryRow>& rows);
/// Throws PreconditionError when the stream's hash line is missing or differs.
void verify_csv_hash(std::istream& is, std::uint64_t expected);

nlohmann::json run_manifest(const ExperimentConfig& cfg, const ExperimentResult& res, int workers);

/// Writes summary.csv, the detail CSVs and manifest.json under cfg.out.
void write_outputs(const ExperimentConfig& cfg, const ExperimentResult& res, int workers);

/// Runs fn(0..count-1) on `workers` threads. Results come back in replica
/// order, so any reduction over them is independent of the worker count.
template <class R>
std::vector<R> run_replicas(std::size_t count, int workers, const std::function<R(std::size_t)>& fn) {
  std::vector<R> out(count);
  if (workers <= 1 || count <= 1) {
    for (std::size_t i = 0; i < count; ++i) out[i] = fn(i);
    return out;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::atomic<bool> failed{false};
  auto work = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= count || failed.load()) return;
      try {
        out[i] = fn(i);
      } catch (...) {
        if (!failed.exchange(true)) failure = std::current_exception();
        return;
      }
    }
  };
  std::vector<std::thread> pool;
  const auto w = std::min<std::size_t>(static_cast<std::size_t>(workers), count);
  for (std::size_t k = 0; k < w; ++k) pool.emplace_back(work);
  for (auto& th : pool) th.join();
  if (failure) std::rethrow_exception(failure);
  return out;
}

/// Seed for one parameter point, so different n never share streams.
std::uint64_t point_seed(std::uint64_t seed, int n);

// Experiments. Each returns rows, named checks and detail CSVs.
ExperimentResult run_hydro_rate(const ExperimentConfig& cfg, int workers = 1);
ExperimentResult run_equilibrium_clt(const ExperimentConfig& cfg, int workers = 1);
ExperimentResult run_bg_decay(const ExperimentConfig& cfg, int workers = 1);
ExperimentResult run_entropy_growth(const ExperimentConfig& cfg, int workers = 1);
ExperimentResult run_flow_sweep(const ExperimentConfig& cfg, int workers = 1);
/// Quadratic variation and martingale checks in a stationary setting.
ExperimentResult run_martingale(const ExperimentConfig& cfg, int workers = 1);
ExperimentResult run_simulate(const ExperimentConfig& cfg, int workers = 1);
ExperimentResult run_solve_pde(const ExperimentConfig& cfg, int workers = 1);
ExperimentResult run_master_oracle(const ExperimentConfig& cfg, int workers = 1);

using ExperimentFn = ExperimentResult (*)(const ExperimentConfig&, int);
/// Lookup by CLI name; throws on unknown names.
ExperimentFn experiment_by_name(const std::string& name);
std::vector<std::string> experiment_names();

}  // namespace waseplab
