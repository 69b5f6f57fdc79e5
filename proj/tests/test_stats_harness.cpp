#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "waseplab/error.hpp"
#include "waseplab/harness.hpp"
#include "waseplab/rng.hpp"
#include "waseplab/stats.hpp"
#include "waseplab/wasep.hpp"

using namespace waseplab;

TEST_CASE("mean and standard error") {
  const auto m = mean_se({1.0, 2.0, 3.0, 4.0});
  CHECK(m.mean == 2.5);
  CHECK(m.var == doctest::Approx(5.0 / 3.0));
  CHECK(m.se == doctest::Approx(std::sqrt(5.0 / 12.0)));
  CHECK(mean_se({7.0}).se == 0.0);
}

TEST_CASE("log-log fit recovers a power law") {
  const std::vector<double> x{2, 4, 8, 16};
  std::vector<double> y;
  for (double v : x) y.push_back(3.0 * std::pow(v, -0.5));
  const auto f = loglog_fit(x, y);
  CHECK(f.slope == doctest::Approx(-0.5));
  CHECK(std::exp(f.intercept) == doctest::Approx(3.0));
  for (double r : f.residuals) CHECK(std::fabs(r) < 1e-12);
  CHECK_THROWS_AS(loglog_fit({1.0, 2.0}, {1.0, -1.0}), PreconditionError);
}

TEST_CASE("Kolmogorov distribution") {
  CHECK(kolmogorov_tail(1.3581) == doctest::Approx(0.05).epsilon(1e-3));
  CHECK(kolmogorov_tail(1.6276) == doctest::Approx(0.01).epsilon(1e-3));
  CHECK(kolmogorov_tail(0.0) == 1.0);
}

TEST_CASE("KS against a normal") {
  // normal quantiles: statistic is 1/(2N), p close to one
  std::vector<double> q;
  const int N = 200;
  for (int i = 0; i < N; ++i) {
    const double p = (i + 0.5) / N;
    double lo = -10, hi = 10;
    for (int k = 0; k < 200; ++k) {
      const double mid = 0.5 * (lo + hi);
      (normal_cdf(mid) < p ? lo : hi) = mid;
    }
    q.push_back(lo);
  }
  const auto r = ks_normal(q, 0.0, 1.0);
  CHECK(r.statistic == doctest::Approx(0.5 / N).epsilon(1e-6));
  CHECK(r.p_value > 0.99);
  std::vector<double> uni;
  Philox rng(1, 0, 0);
  for (int i = 0; i < 2000; ++i) uni.push_back(rng.uniform() * 4 - 2);
  CHECK(ks_normal(uni, 0.0, 1.0).p_value < 1e-6);
  CHECK(ks_two_sample(q, q).statistic == 0.0);
  CHECK(ks_two_sample({1, 2, 3}, {4, 5, 6}).statistic == 1.0);
}

TEST_CASE("FNV-1a") {
  CHECK(fnv1a64("") == 0xcbf29ce484222325ULL);
  CHECK(fnv1a64("a") == 0xaf63dc4c8601ec8cULL);
  CHECK(fnv1a64("foobar") == 0x85944171f73967e8ULL);
}

TEST_CASE("config round trip, validation and hashing") {
  auto c = ExperimentConfig::defaults("hydro-rate");
  c.seed = 99;
  const auto back = ExperimentConfig::from_json(c.to_json());
  CHECK(back.to_json() == c.to_json());
  CHECK(back.hash() == c.hash());
  c.seed = 100;
  CHECK(back.hash() != c.hash());
  CHECK_THROWS_AS(ExperimentConfig::from_json({{"experiment", "clt"}, {"replicaz", 3}}), PreconditionError);
  CHECK_THROWS_AS(ExperimentConfig::from_json({{"experiment", "clt"}, {"d", 4}}), PreconditionError);
  CHECK_THROWS_AS(ExperimentConfig::from_json({{"experiment", "clt"}, {"n", {1}}}), PreconditionError);
  const auto j = ExperimentConfig::from_json({{"experiment", "clt"}, {"d", 2}, {"F", {{"kind", "rotational"}, {"amp", 2.0}}}});
  CHECK(j.F.kind == FieldKind::rotational);
  CHECK(j.F.d == 2);
}

TEST_CASE("CSV hash line is checked") {
  std::stringstream ss;
  write_summary_csv(ss, 0xabcULL, {SummaryRow{"x", "n=4", "s", 1.0, 0.1, 10}});
  CHECK_NOTHROW(verify_csv_hash(ss, 0xabcULL));
  ss.seekg(0);
  CHECK_THROWS_AS(verify_csv_hash(ss, 0xabdULL), PreconditionError);
}

TEST_CASE("replica farm returns results in replica order for any worker count") {
  const std::function<double(std::size_t)> fn = [](std::size_t i) {
    Philox rng(5, i, 0);
    return rng.uniform();
  };
  const auto a = run_replicas<double>(50, 1, fn);
  const auto b = run_replicas<double>(50, 4, fn);
  CHECK(a == b);
  const std::function<int(std::size_t)> bad = [](std::size_t i) -> int {
    if (i == 7) throw NumericalError("boom");
    return 0;
  };
  CHECK_THROWS_AS(run_replicas<int>(20, 3, bad), NumericalError);
}

TEST_CASE("experiments are reproducible and worker-count independent") {
  auto c = ExperimentConfig::defaults("hydro-rate");
  c.n = {16, 32};
  c.replicas = 20;
  c.T = 0.01;
  const auto a = run_hydro_rate(c, 1);
  const auto b = run_hydro_rate(c, 3);
  REQUIRE(a.rows.size() == b.rows.size());
  for (std::size_t i = 0; i < a.rows.size(); ++i) {
    CHECK(a.rows[i].value == b.rows[i].value);
    CHECK(a.rows[i].se == b.rows[i].se);
  }
  for (const auto& r : a.rows) {
    if (r.replicas > 1) CHECK(r.se > 0.0);
  }
}

TEST_CASE("equilibrium hydro error is centred") {
  const int n = 64, N = 400;
  Torus tor(1, n);
  DensityField u{tor, std::vector<double>(n, 0.3), 0.0};
  const auto rates = build_rates(VectorFieldSpec::zero(1), tor);
  std::vector<double> errs;
  for (int r = 0; r < N; ++r) {
    const auto eta = sample_profile_measure(u, 12, static_cast<std::uint64_t>(r));
    Philox rng(12, static_cast<std::uint64_t>(r), 2);
    const auto tr = simulate(eta, rates, 0.01, rng, {}, {false});
    double e = 0.0;
    for (SiteIndex x = 0; x < tor.sites(); ++x) e += (tr.final_state.eta(x) - 0.3) * std::cos(2 * M_PI * x / n);
    errs.push_back(e / n);
  }
  const auto m = mean_se(errs);
  CHECK(std::fabs(m.mean) <= 3.0 * m.se);
}

TEST_CASE("doubling replicas halves the squared standard error") {
  auto c = ExperimentConfig::defaults("hydro-rate");
  c.n = {32, 64};
  c.T = 0.01;
  c.replicas = 400;
  const auto a = run_hydro_rate(c, 1);
  c.replicas = 800;
  const auto b = run_hydro_rate(c, 1);
  const double r = (b.rows[0].se * b.rows[0].se) / (a.rows[0].se * a.rows[0].se);
  CHECK(r == doctest::Approx(0.5).epsilon(0.2));
}

TEST_CASE("trivial experiment cases") {
  auto bg = ExperimentConfig::defaults("bg");
  bg.n = {16, 32};
  bg.replicas = 3;
  bg.T = 0.005;
  bg.f = TrigSeries::constant_value(0.0);
  for (const auto& r : run_bg_decay(bg, 1).rows) {
    if (r.statistic == "mean_abs_integral") CHECK(r.value == 0.0);
  }

  auto ent = ExperimentConfig::defaults("entropy");
  ent.n = {6, 8};
  ent.u0 = TrigSeries::constant_value(0.4);
  ent.T = 0.01;
  for (const auto& r : run_entropy_growth(ent, 1).rows) {
    if (r.statistic == "sup_H") CHECK(r.value < 1e-12);
  }

  auto clt = ExperimentConfig::defaults("clt");
  clt.n = {64};
  clt.T = 0.0;
  clt.replicas = 2000;
  const auto res = run_equilibrium_clt(clt, 1);
  double var = 0, se = 0, target = 0;
  for (const auto& r : res.rows) {
    if (r.statistic == "variance") {
      var = r.value;
      se = r.se;
    }
    if (r.statistic == "target_variance") target = r.value;
  }
  CHECK(std::fabs(var - target) <= 3.0 * se);

  auto constf = clt;
  constf.f = TrigSeries::constant_value(2.0);
  constf.T = 0.01;
  constf.replicas = 500;
  const auto res2 = run_equilibrium_clt(constf, 1);
  for (const auto& r : res2.rows) {
    // particle number is conserved, so X(const) keeps its initial law
    if (r.statistic == "variance") CHECK(r.value == doctest::Approx(0.25 * 4.0).epsilon(0.1));
  }
}

TEST_CASE("outputs carry the config hash") {
  auto c = ExperimentConfig::defaults("flows");
  c.ell_max = 5;
  c.out = (std::filesystem::temp_directory_path() / "waseplab_test_out").string();
  const auto res = run_flow_sweep(c, 1);
  CHECK(res.passed());
  write_outputs(c, res, 1);
  std::ifstream is(std::filesystem::path(c.out) / "summary.csv");
  CHECK_NOTHROW(verify_csv_hash(is, c.hash()));
  std::ifstream detail(std::filesystem::path(c.out) / "flows_d1.csv");
  CHECK_NOTHROW(verify_csv_hash(detail, c.hash()));
  CHECK(std::filesystem::exists(std::filesystem::path(c.out) / "manifest.json"));
}
