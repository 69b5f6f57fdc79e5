#include "waseplab/harness.hpp"

#include <filesystem>
#include <fstream>
#include <iomanip>
#include <istream>
#include <ostream>
#include <sstream>

#include "waseplab/error.hpp"
#include "waseplab/stats.hpp"

namespace waseplab {

nlohmann::json trig_to_json(const TrigSeries& s) {
  nlohmann::json j;
  j["constant"] = s.constant;
  j["terms"] = nlohmann::json::array();
  for (const auto& t : s.terms) j["terms"].push_back({{"m", t.m}, {"cos", t.a}, {"sin", t.b}});
  return j;
}

TrigSeries trig_from_json(const nlohmann::json& j) {
  if (j.is_number()) return TrigSeries::constant_value(j.get<double>());
  TrigSeries s;
  s.constant = j.value("constant", 0.0);
  if (j.contains("terms")) {
    for (const auto& t : j.at("terms")) {
      TrigTerm term;
      const auto m = t.at("m").get<std::vector<int>>();
      require(!m.empty() && m.size() <= kMaxDim, "trig term mode must have 1..3 entries");
      for (std::size_t i = 0; i < m.size(); ++i) term.m[i] = m[i];
      term.a = t.value("cos", 0.0);
      term.b = t.value("sin", 0.0);
      s.terms.push_back(term);
    }
  }
  return s;
}

nlohmann::json field_to_json(const VectorFieldSpec& F) {
  nlohmann::json j;
  j["kind"] = to_string(F.kind);
  j["components"] = nlohmann::json::array();
  for (int i = 0; i < F.d; ++i) j["components"].push_back(trig_to_json(F.components[static_cast<std::size_t>(i)]));
  return j;
}

VectorFieldSpec field_from_json(const nlohmann::json& j, int d) {
  const FieldKind kind = field_kind_from_string(j.value("kind", std::string("zero")));
  switch (kind) {
    case FieldKind::zero:
      return VectorFieldSpec::zero(d);
    case FieldKind::constant: {
      const auto v = j.at("value").get<std::vector<double>>();
      require(static_cast<int>(v.size()) == d, "constant field needs d components");
      Vec3 c{0.0, 0.0, 0.0};
      for (int i = 0; i < d; ++i) c[static_cast<std::size_t>(i)] = v[static_cast<std::size_t>(i)];
      return VectorFieldSpec::constant(d, c);
    }
    case FieldKind::gradient:
      return VectorFieldSpec::gradient(d, trig_from_json(j.at("potential")));
    case FieldKind::rotational:
      require(d == 2, "rotational field is defined for d = 2");
      return VectorFieldSpec::rotational(j.value("amp", 1.0));
    case FieldKind::fourier: {
      const auto& comps = j.at("components");
      require(static_cast<int>(comps.size()) == d, "fourier field needs d components");
      std::array<TrigSeries, kMaxDim> c;
      for (int i = 0; i < d; ++i) c[static_cast<std::size_t>(i)] = trig_from_json(comps[static_cast<std::size_t>(i)]);
      return VectorFieldSpec::fourier(d, c);
    }
  }
  throw PreconditionError("unknown field kind");
}

void ExperimentConfig::validate() const {
  require(!experiment.empty(), "experiment name is required");
  require(d >= 1 && d <= kMaxDim, "d must be 1..3");
  require(F.d == d, "field dimension differs from d");
  require(!n.empty(), "n list is empty");
  for (int v : n) require(v >= 2, "every n must be at least 2");
  require(T >= 0.0, "T must be nonnegative");
  require(dt >= 0.0, "dt must be nonnegative");
  require(replicas >= 1, "replicas must be positive");
  require(modes >= 0, "mode cutoff must be nonnegative");
  require(ell >= 0, "ell must be nonnegative (0 = auto)");
  require(ell_min >= 2 && ell_max >= ell_min, "ell range must satisfy 2 <= ell_min <= ell_max");
  require(report_times >= 1, "report_times must be positive");
  for (const auto& t : u0.terms) {
    for (int i = d; i < kMaxDim; ++i) require(t.m[static_cast<std::size_t>(i)] == 0, "u0 uses an axis beyond d");
  }
}

nlohmann::json ExperimentConfig::to_json() const {
  nlohmann::json j;
  j["experiment"] = experiment;
  j["d"] = d;
  j["n"] = n;
  j["T"] = T;
  j["dt"] = dt;
  j["F"] = field_to_json(F);
  j["u0"] = trig_to_json(u0);
  j["f"] = trig_to_json(f);
  j["replicas"] = replicas;
  j["seed"] = seed;
  j["modes"] = modes;
  j["ell"] = ell;
  j["ell_min"] = ell_min;
  j["ell_max"] = ell_max;
  j["report_times"] = report_times;
  j["out"] = out;
  return j;
}

ExperimentConfig ExperimentConfig::defaults(const std::string& experiment) {
  ExperimentConfig c;
  c.experiment = experiment;
  if (experiment == "hydro-rate") {
    c.n = {32, 64, 128, 256};
    c.T = 0.05;
    c.replicas = 200;
    c.F = VectorFieldSpec::fourier(1, {TrigSeries::sine(0.0, 1.0), {}, {}});
    c.u0 = TrigSeries::cosine(0.5, 0.2);
    c.f = TrigSeries::cosine(0.0, 1.0);
  } else if (experiment == "clt") {
    c.n = {256};
    c.T = 0.1;
    c.replicas = 500;
  } else if (experiment == "bg") {
    c.n = {64, 128, 256};
    c.T = 0.05;
    c.replicas = 200;
    c.f = TrigSeries::cosine(0.0, 1.0);
  } else if (experiment == "entropy" || experiment == "master-oracle") {
    c.n = {6, 8, 10, 12};
    c.T = 0.05;
    c.u0 = TrigSeries::cosine(0.5, 0.2);
    if (experiment == "master-oracle") {
      c.n = {8};
      c.F = VectorFieldSpec::fourier(1, {TrigSeries::sine(0.0, 1.0), {}, {}});
    }
  } else if (experiment == "flows") {
    c.n = {2};
    c.ell_min = 2;
    c.ell_max = 16;
  } else if (experiment == "qv") {
    c.n = {256};
    c.T = 0.01;
    c.replicas = 1000;
    c.F = VectorFieldSpec::constant(1, {1.0, 0.0, 0.0});
  } else if (experiment == "simulate" || experiment == "solve-pde") {
    c.n = {64};
    c.T = 0.05;
    c.replicas = 1;
    c.u0 = TrigSeries::cosine(0.5, 0.2);
  }
  return c;
}

ExperimentConfig ExperimentConfig::from_json(const nlohmann::json& j) {
  const std::string name = j.value("experiment", std::string("clt"));
  ExperimentConfig c = defaults(name);
  for (const auto& [key, _] : j.items()) {
    static const char* known[] = {"experiment", "d",     "n",       "T",       "dt",           "F",  "u0", "f", "replicas",
                                  "seed",       "modes", "ell",     "ell_min", "ell_max", "report_times", "out"};
    bool ok = false;
    for (const char* k : known) ok = ok || key == k;
    require(ok, "unknown config key: " + key);
  }
  c.d = j.value("d", c.d);
  if (j.contains("n")) c.n = j.at("n").is_array() ? j.at("n").get<std::vector<int>>() : std::vector<int>{j.at("n").get<int>()};
  c.T = j.value("T", c.T);
  c.dt = j.value("dt", c.dt);
  if (j.contains("F")) c.F = field_from_json(j.at("F"), c.d);
  else if (c.F.d != c.d) c.F = VectorFieldSpec::zero(c.d);
  if (j.contains("u0")) c.u0 = trig_from_json(j.at("u0"));
  if (j.contains("f")) c.f = trig_from_json(j.at("f"));
  c.replicas = j.value("replicas", c.replicas);
  c.seed = j.value("seed", c.seed);
  c.modes = j.value("modes", c.modes);
  if (j.contains("ell")) c.ell = j.at("ell").is_string() ? 0 : j.at("ell").get<int>();
  c.ell_min = j.value("ell_min", c.ell_min);
  c.ell_max = j.value("ell_max", c.ell_max);
  c.report_times = j.value("report_times", c.report_times);
  c.out = j.value("out", c.out);
  c.validate();
  return c;
}

std::uint64_t ExperimentConfig::hash() const { return fnv1a64(to_json().dump()); }

bool ExperimentResult::passed() const {
  for (const auto& c : checks) {
    if (!c.passed) return false;
  }
  return true;
}

void ExperimentResult::check(std::string name, bool ok, std::string detail) {
  checks.push_back(Check{std::move(name), ok, std::move(detail)});
}

void ExperimentResult::row(const std::string& experiment, const std::string& point, const std::string& stat,
                           double value, double se, std::size_t replicas) {
  rows.push_back(SummaryRow{experiment, point, stat, value, se, replicas});
}

std::string hash_hex(std::uint64_t h) {
  std::ostringstream os;
  os << std::hex << std::setw(16) << std::setfill('0') << h;
  return os.str();
}

void write_csv_with_hash(std::ostream& os, std::uint64_t hash, const std::string& body) {
  os << "# config_hash=" << hash_hex(hash) << '\n' << body;
}

void write_summary_csv(std::ostream& os, std::uint64_t hash, const std::vector<SummaryRow>& rows) {
  std::ostringstream body;
  body.precision(12);
  body << "experiment,point,statistic,value,se,replicas\n";
  for (const auto& r : rows) {
    body << r.experiment << ',' << r.point << ',' << r.statistic << ',' << r.value << ',' << r.se << ',' << r.replicas
         << '\n';
  }
  write_csv_with_hash(os, hash, body.str());
}

void verify_csv_hash(std::istream& is, std::uint64_t expected) {
  std::string line;
  if (!std::getline(is, line)) throw PreconditionError("empty CSV: missing config hash line");
  const std::string prefix = "# config_hash=";
  if (line.rfind(prefix, 0) != 0) throw PreconditionError("CSV lacks a config hash line");
  const std::string got = line.substr(prefix.size());
  if (got != hash_hex(expected)) {
    throw PreconditionError("config hash mismatch: file has " + got + ", expected " + hash_hex(expected));
  }
}

nlohmann::json run_manifest(const ExperimentConfig& cfg, const ExperimentResult& res, int workers) {
  nlohmann::json m;
  m["config"] = cfg.to_json();
  m["config_hash"] = hash_hex(cfg.hash());
  m["version"] = "0.1.0";
  m["compiler"] = __VERSION__;
  m["cxx_standard"] = static_cast<long>(__cplusplus);
  m["workers"] = workers;
  m["passed"] = res.passed();
  m["checks"] = nlohmann::json::array();
  for (const auto& c : res.checks) m["checks"].push_back({{"name", c.name}, {"passed", c.passed}, {"detail", c.detail}});
  m["files"] = nlohmann::json::object();
  for (const auto& [name, body] : res.details) m["files"][name] = hash_hex(fnv1a64(body));
  return m;
}

void write_outputs(const ExperimentConfig& cfg, const ExperimentResult& res, int workers) {
  namespace fs = std::filesystem;
  const fs::path dir(cfg.out);
  fs::create_directories(dir);
  const auto h = cfg.hash();
  {
    std::ofstream os(dir / "summary.csv");
    write_summary_csv(os, h, res.rows);
  }
  for (const auto& [name, body] : res.details) {
    std::ofstream os(dir / name);
    write_csv_with_hash(os, h, body);
  }
  std::ofstream os(dir / "manifest.json");
  os << run_manifest(cfg, res, workers).dump(2) << '\n';
}

std::uint64_t point_seed(std::uint64_t seed, int n) {
  return fnv1a64(std::to_string(seed) + "/" + std::to_string(n));
}

}  // namespace waseplab
