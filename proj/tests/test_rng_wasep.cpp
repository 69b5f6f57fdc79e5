#include <doctest.h>

#include <Eigen/Dense>
#include <unsupported/Eigen/MatrixFunctions>
#include <cmath>
#include <sstream>

#include "waseplab/error.hpp"
#include "waseplab/rng.hpp"
#include "waseplab/wasep.hpp"

using namespace waseplab;

TEST_CASE("Philox4x32-10 known answers") {
  using C = std::array<std::uint32_t, 4>;
  using K = std::array<std::uint32_t, 2>;
  CHECK(philox4x32(C{0, 0, 0, 0}, K{0, 0}) == C{0x6627e8d5, 0xe169c58d, 0xbc57ac4c, 0x9b00dbd8});
  CHECK(philox4x32(C{0xffffffff, 0xffffffff, 0xffffffff, 0xffffffff}, K{0xffffffff, 0xffffffff}) ==
        C{0x408f276d, 0x41c83b0e, 0xa20bc7c6, 0x6d5451fd});
  CHECK(philox4x32(C{0x243f6a88, 0x85a308d3, 0x13198a2e, 0x03707344}, K{0xa4093822, 0x299f31d0}) ==
        C{0xd16cfe09, 0x94fdcceb, 0x5001e420, 0x24126ea1});
}

TEST_CASE("streams are reproducible and distinct") {
  Philox a(7, 3, 1), b(7, 3, 1), c(7, 4, 1), e(7, 3, 2);
  for (int i = 0; i < 10; ++i) {
    const auto va = a();
    CHECK(va == b());
    CHECK(va != c());
    CHECK(va != e());
  }
}

TEST_CASE("uniform, below and exponential moments") {
  Philox rng(11, 0, 0);
  const int N = 200000;
  double su = 0.0, se = 0.0;
  std::array<int, 3> counts{};
  for (int i = 0; i < N; ++i) {
    const double u = rng.uniform();
    REQUIRE(u >= 0.0);
    REQUIRE(u < 1.0);
    su += u;
    se += rng.exponential();
    ++counts[rng.below(3)];
  }
  CHECK(std::fabs(su / N - 0.5) < 5 * std::sqrt(1.0 / 12 / N));
  CHECK(std::fabs(se / N - 1.0) < 5 * std::sqrt(1.0 / N));
  for (int c : counts) CHECK(std::fabs(c - N / 3.0) < 5 * std::sqrt(N * (1.0 / 3) * (2.0 / 3)));
}

TEST_CASE("configuration bookkeeping") {
  Torus tor(2, 9);
  Configuration eta(tor);
  eta.set(5, true);
  eta.set(70, true);
  eta.set(5, true);
  CHECK(eta.count() == 2);
  eta.set(5, false);
  CHECK(eta.count() == 1);
  CHECK(eta.eta(70) == 1);
  CHECK(eta.occupancy()[70] == 1);
  CHECK_THROWS_AS(Configuration(tor, std::vector<int>(3, 0)), PreconditionError);
}

TEST_CASE("rates follow n^2 max{1/2, 1 +- F/n}") {
  Torus tor(1, 10);
  EdgeField F{tor, std::vector<double>(10, 0.0)};
  F.values[2] = 3.0;
  F.values[4] = -8.0;
  const RateTable r = build_rates(F);
  CHECK(r.forward[2] == doctest::Approx(100.0 * 1.3));
  CHECK(r.backward[2] == doctest::Approx(100.0 * 0.7));
  CHECK(r.forward[4] == doctest::Approx(50.0));
  CHECK(r.backward[4] == doctest::Approx(180.0));
  CHECK(r.cap_active);
  CHECK(r.max_rate == doctest::Approx(180.0));
  CHECK(r.jump_rate(3, 0, +1) == doctest::Approx(100.0));
  CHECK(r.jump_rate(3, 0, -1) == doctest::Approx(r.backward[2]));
}

TEST_CASE("profile measure has the right one-site means") {
  Torus tor(1, 4);
  DensityField u{tor, {0.1, 0.4, 0.6, 0.9}, 0.0};
  const int N = 20000;
  std::array<double, 4> m{};
  for (int r = 0; r < N; ++r) {
    const auto eta = sample_profile_measure(u, 5, static_cast<std::uint64_t>(r));
    for (SiteIndex x = 0; x < 4; ++x) m[x] += eta.eta(x);
  }
  for (SiteIndex x = 0; x < 4; ++x) {
    CHECK(std::fabs(m[x] / N - u.u[x]) < 5 * std::sqrt(u.u[x] * (1 - u.u[x]) / N));
  }
}

TEST_CASE("single particle matches the matrix exponential of its generator") {
  const int n = 4;
  Torus tor(1, n);
  const auto rates = build_rates(VectorFieldSpec::fourier(1, {TrigSeries::sine(0.5, 1.5), {}, {}}), tor);
  Eigen::Matrix4d Q = Eigen::Matrix4d::Zero();
  for (int x = 0; x < n; ++x) {
    for (int s : {+1, -1}) {
      const auto y = tor.neighbor(static_cast<SiteIndex>(x), 0, s);
      Q(x, y) += rates.jump_rate(static_cast<SiteIndex>(x), 0, s);
      Q(x, x) -= rates.jump_rate(static_cast<SiteIndex>(x), 0, s);
    }
  }
  const double T = 0.03;
  const Eigen::Matrix4d P = (Q * T).exp();
  const int N = 40000;
  std::array<int, 4> hits{};
  Configuration eta0(tor);
  eta0.set(1, true);
  for (int r = 0; r < N; ++r) {
    Philox rng(9, static_cast<std::uint64_t>(r), 2);
    const auto tr = simulate(eta0, rates, T, rng, {}, {false});
    for (SiteIndex x = 0; x < 4; ++x) hits[x] += tr.final_state.eta(x);
  }
  for (int x = 0; x < n; ++x) {
    const double p = P(1, x);
    CHECK(std::fabs(hits[static_cast<std::size_t>(x)] / double(N) - p) < 5 * std::sqrt(p * (1 - p) / N) + 1e-9);
  }
}

TEST_CASE("simulation conserves particles, replays and is seed-deterministic") {
  Torus tor(2, 8);
  const auto rates = build_rates(VectorFieldSpec::rotational(2.0), tor);
  DensityField u{tor, std::vector<double>(tor.sites(), 0.3), 0.0};
  const auto eta0 = sample_profile_measure(u, 1, 0);
  const auto a = simulate(eta0, rates, 0.05, std::uint64_t{42}, {0.01, 0.02, 0.05});
  const auto b = simulate(eta0, rates, 0.05, std::uint64_t{42}, {0.01, 0.02, 0.05});
  CHECK(a.final_state == b.final_state);
  CHECK(a.jumps == b.jumps);
  CHECK(a.final_state.count() == eta0.count());
  CHECK(a.snapshots.size() == 3);
  Configuration eta = eta0;
  std::size_t snap = 0;
  for (const auto& e : a.events) {
    while (snap < a.snapshots.size() && a.snapshots[snap].t < e.t) {
      CHECK(a.snapshots[snap].eta == eta);
      ++snap;
    }
    REQUIRE(eta.occupied(e.from));
    REQUIRE(!eta.occupied(e.to));
    CHECK(tor.sup_distance(e.from, e.to) == 1);
    eta.set(e.from, false);
    eta.set(e.to, true);
  }
  CHECK(eta == a.final_state);
}

TEST_CASE("binary snapshots round trip") {
  Torus tor(1, 70);
  const auto rates = build_rates(VectorFieldSpec::zero(1), tor);
  DensityField u{tor, std::vector<double>(70, 0.5), 0.0};
  const auto tr = simulate(sample_profile_measure(u, 3, 0), rates, 0.01, std::uint64_t{5}, {0.0, 0.005, 0.01});
  std::stringstream ss;
  write_snapshots_binary(tr, ss);
  int d = 0, n = 0;
  const auto back = read_snapshots_binary(ss, &d, &n);
  CHECK(d == 1);
  CHECK(n == 70);
  REQUIRE(back.size() == 3);
  for (std::size_t i = 0; i < 3; ++i) {
    CHECK(back[i].t == tr.snapshots[i].t);
    CHECK(back[i].eta == tr.snapshots[i].eta);
  }
}
