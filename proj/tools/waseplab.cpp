#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <thread>

#include "waseplab/error.hpp"
#include "waseplab/harness.hpp"

namespace {

const char* kDefaults = R"(Config keys (JSON object; every key optional):
  experiment   subcommand name (set automatically)
  d            lattice dimension, 1..3                       default 1
  n            list of torus sides                           per experiment
  T            final time                                    per experiment
  dt           solver step, 0 = automatic                    0
  F            {"kind": zero|constant|gradient|rotational|fourier, ...}
  u0           initial profile {"constant": c, "terms": [{"m": [..], "cos": a, "sin": b}]}
  f            test function, same format as u0              sqrt(2) cos(2 pi x)
  replicas     Monte Carlo replicas                          per experiment
  seed         base seed                                     1
  modes        Fourier cutoff, 0 = 16/8/5 for d = 1/2/3       0
  ell          block scale, 0 = automatic                    0
  ell_min, ell_max  flow sweep range                         2, 16
  report_times number of report times in (0, T]              5
  out          output directory                              out

Experiment defaults:
  hydro-rate     n = 32,64,128,256  T = 0.05  200 replicas  F = sin(2 pi x)  u0 = 1/2 + 0.2 cos(2 pi x)
  clt            n = 256  T = 0.1  500 replicas  u0 = 1/2  F = 0
  qv             n = 256  T = 0.01  1000 replicas  u0 = 1/2  F = 1
  bg             n = 64,128,256  T = 0.05  200 replicas
  entropy        n = 6,8,10,12  T = 0.05  u0 = 1/2 + 0.2 cos(2 pi x)
  master-oracle  n = 8  T = 0.05  F = sin(2 pi x)
  flows          ell = 2..16
  simulate, solve-pde  n = 64  T = 0.05
)";

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Weakly asymmetric exclusion: hydrodynamics, fluctuations and entropy checks"};
  app.footer(kDefaults);
  app.require_subcommand(1);

  std::string config_path;
  std::uint64_t seed = 0;
  bool seed_set = false;
  std::string out;
  int workers = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  bool deterministic = false;

  for (const auto& name : waseplab::experiment_names()) {
    auto* sub = app.add_subcommand(name, "run the " + name + " experiment");
    sub->add_option("--config", config_path, "JSON config file");
    sub->add_option_function<std::uint64_t>("--seed", [&](std::uint64_t s) { seed = s; seed_set = true; }, "base seed");
    sub->add_option("--out", out, "output directory");
    sub->add_option("--workers", workers, "worker threads")->check(CLI::PositiveNumber);
    sub->add_flag("--deterministic", deterministic, "single worker, fixed reduction order");
  }
  CLI11_PARSE(app, argc, argv);

  const std::string name = app.get_subcommands().front()->get_name();
  try {
    nlohmann::json j = nlohmann::json::object();
    if (!config_path.empty()) {
      std::ifstream is(config_path);
      if (!is) throw waseplab::PreconditionError("cannot open config " + config_path);
      j = nlohmann::json::parse(is, nullptr, true, true);
    }
    if (j.contains("experiment") && j["experiment"] != name) {
      throw waseplab::PreconditionError("config is for experiment " + j["experiment"].get<std::string>());
    }
    j["experiment"] = name;
    if (seed_set) j["seed"] = seed;
    if (!out.empty()) j["out"] = out;
    const auto cfg = waseplab::ExperimentConfig::from_json(j);
    if (deterministic) workers = 1;

    const auto res = waseplab::experiment_by_name(name)(cfg, workers);
    waseplab::write_outputs(cfg, res, workers);
    for (const auto& c : res.checks) {
      std::cout << (c.passed ? "PASS " : "FAIL ") << c.name << (c.detail.empty() ? "" : "  (" + c.detail + ")") << '\n';
    }
    std::cout << "wrote " << cfg.out << "/summary.csv\n";
    return res.passed() ? 0 : 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
}
