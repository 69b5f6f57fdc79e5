#include <doctest.h>

#include <cmath>
#include <numbers>

#include "waseplab/error.hpp"
#include "waseplab/fluct.hpp"
#include "waseplab/master.hpp"
#include "waseplab/rng.hpp"
#include "waseplab/stats.hpp"

using namespace waseplab;

namespace {

const double kPi = std::numbers::pi;

Configuration from_bits(const Torus& tor, std::size_t s) {
  std::vector<int> occ(tor.sites());
  for (std::size_t i = 0; i < occ.size(); ++i) occ[i] = static_cast<int>((s >> i) & 1u);
  return Configuration(tor, occ);
}

}  // namespace

TEST_CASE("fluctuation field by hand") {
  Torus tor(1, 4);
  const Configuration eta(tor, {1, 0, 0, 1});
  const DensityField u{tor, {0.5, 0.5, 0.25, 0.75}, 0.0};
  // (0.5*1 - 0.5*2 - 0.25*3 + 0.25*4) / 2
  CHECK(fluctuation_field(eta, u, {1, 2, 3, 4}) == doctest::Approx(-0.125));
}

TEST_CASE("Fourier modes are the field tested against exponentials") {
  Torus tor(2, 8);
  const DensityField u = sample_profile(TrigSeries::cosine(0.5, 0.2), tor);
  const auto eta = sample_profile_measure(u, 4, 0);
  const auto c = fluctuation_modes(eta, u, 3);
  CHECK(c.conjugate_asymmetry() < 1e-12);
  std::vector<double> one(tor.sites(), 1.0), re(tor.sites()), im(tor.sites());
  for (SiteIndex x = 0; x < tor.sites(); ++x) {
    const auto p = tor.position(x);
    re[x] = std::cos(2 * kPi * (2 * p[0] - p[1]));
    im[x] = std::sin(2 * kPi * (2 * p[0] - p[1]));
  }
  CHECK(c.at({0, 0, 0}).real() == doctest::Approx(fluctuation_field(eta, u, one)));
  CHECK(c.at({2, -1, 0}).real() == doctest::Approx(fluctuation_field(eta, u, re)));
  CHECK(c.at({2, -1, 0}).imag() == doctest::Approx(fluctuation_field(eta, u, im)));
  double s = 0.0;
  for (const auto& v : c.c) s += std::norm(v);
  CHECK(sobolev_norm(c, 0.0) == doctest::Approx(std::sqrt(s)));
  CHECK(sobolev_norm(c, -1.0) < sobolev_norm(c, 0.0));
  CHECK(default_mode_cutoff(1) == 16);
  CHECK(default_mode_cutoff(3) == 5);
}

TEST_CASE("centred quadratic forms") {
  Torus tor(1, 5);
  const std::vector<double> u{0.2, 0.4, 0.5, 0.6, 0.8};
  QuadraticForm q = QuadraticForm::zeros(tor, true);
  q.add_centered_pair(tor, 4, 0, 1.5, u);
  q.add_centered_site(2, -2.0, u[2]);
  for (std::size_t s = 0; s < 32; ++s) {
    const auto eta = from_bits(tor, s);
    const double expect = 1.5 * (eta.eta(4) - u[4]) * (eta.eta(0) - u[0]) - 2.0 * (eta.eta(2) - u[2]);
    CHECK(q.evaluate(eta) == doctest::Approx(expect));
  }
}

TEST_CASE("path integral of an occupation variable is its occupation time") {
  Torus tor(1, 12);
  const auto rates = build_rates(VectorFieldSpec::zero(1), tor);
  DensityField u{tor, std::vector<double>(12, 0.5), 0.0};
  const auto tr = simulate(sample_profile_measure(u, 2, 0), rates, 0.05, std::uint64_t{3}, {});
  const SiteIndex site = 5;
  double occ = 0.0, t = 0.0;
  Configuration eta = tr.initial;
  for (const auto& e : tr.events) {
    occ += eta.eta(site) * (e.t - t);
    t = e.t;
    eta.set(e.from, false);
    eta.set(e.to, true);
  }
  occ += eta.eta(site) * (0.05 - t);
  const std::vector<double> edges{0.01, 0.02, 0.035, 0.05};
  const auto I = integrate_forms(tr, edges, [&](double, double) {
    QuadraticForm q = QuadraticForm::zeros(tor, true);
    q.lin[site] = 1.0;
    q.constant = 2.0;
    q.pair[3] = 1.0;  // eta_3 eta_4
    return std::vector<QuadraticForm>{q};
  });
  // second piece is the time both 3 and 4 are occupied
  double both = 0.0;
  t = 0.0;
  eta = tr.initial;
  for (const auto& e : tr.events) {
    both += eta.eta(3) * eta.eta(4) * (e.t - t);
    t = e.t;
    eta.set(e.from, false);
    eta.set(e.to, true);
  }
  both += eta.eta(3) * eta.eta(4) * (0.05 - t);
  CHECK(I.back()[0] == doctest::Approx(occ + 2.0 * 0.05 + both).epsilon(1e-12));
}

TEST_CASE("drift and quadratic variation algebra against the full generator") {
  const int n = 6;
  Torus tor(1, n);
  const auto F = sample_dual_field(VectorFieldSpec::fourier(1, {TrigSeries::sine(0.3, 1.8), {}, {}}), tor);
  const auto rates = build_rates(F);
  REQUIRE(!rates.cap_active);
  const DensityField u = sample_profile(TrigSeries::cosine(0.5, 0.3), tor);
  const auto H = sample_profile(TrigSeries::sine(0.1, 1.0), tor).u;
  const auto Lu = discrete_generator_L(u, F);
  const auto LH = lambda_n(H, u, F);
  const double scale = 1.0 / std::sqrt(double(n));
  const std::size_t S = std::size_t{1} << n;
  std::vector<double> X(S), X2(S);
  for (std::size_t s = 0; s < S; ++s) {
    X[s] = fluctuation_field(from_bits(tor, s), u, H);
    X2[s] = X[s] * X[s];
  }
  const auto LX = apply_generator(X, rates);
  const auto LX2 = apply_generator(X2, rates);
  for (std::size_t s = 0; s < S; ++s) {
    const auto eta = from_bits(tor, s);
    double drift = 0.0, qv = 0.0;
    for (SiteIndex x = 0; x < tor.sites(); ++x) {
      const SiteIndex y = tor.neighbor(x, 0, +1);
      const double dH = H[y] - H[x];
      drift += H[x] * Lu[x] + (eta.eta(x) - u.u[x]) * LH[x];
      drift += -2.0 * n * dH * F.at(x, 0) * (eta.eta(x) - u.u[x]) * (eta.eta(y) - u.u[y]);
      qv += (rates.forward[x] * eta.eta(x) * (1 - eta.eta(y)) + rates.backward[x] * eta.eta(y) * (1 - eta.eta(x))) * dH * dH / n;
    }
    CHECK(LX[s] == doctest::Approx(scale * drift).epsilon(1e-11));
    CHECK(LX2[s] - 2.0 * X[s] * LX[s] == doctest::Approx(qv).epsilon(1e-9));
  }
}

TEST_CASE("martingale part is centred with variance equal to its compensator") {
  const int n = 16;
  Torus tor(1, n);
  const auto spec = VectorFieldSpec::fourier(1, {TrigSeries::sine(0.0, 2.0), {}, {}});
  const DensityField u0 = sample_profile(TrigSeries::cosine(0.5, 0.25), tor);
  const double T = 0.03;
  const auto hydro = solve_hydro(u0, spec, T);
  const auto rates = build_rates(spec, tor);
  const auto f = sample_profile(TrigSeries::sine(0.0, 1.0), tor).u;
  const TestFunction H = TestFunction::backward(f, T, hydro, 121);
  DecomposeOptions opt;
  opt.max_cell = T / 120;
  const int N = 3000;
  std::vector<double> M, QV;
  for (int r = 0; r < N; ++r) {
    const auto eta0 = sample_profile_measure(u0, 21, static_cast<std::uint64_t>(r));
    Philox rng(21, static_cast<std::uint64_t>(r), 2);
    const auto tr = simulate(eta0, rates, T, rng, {});
    const auto rep = decompose(tr, H, hydro, rates, {T / 2, T}, opt);
    REQUIRE(rep.rows.size() == 2);
    CHECK(rep.max_jump <= 1.0 / std::sqrt(double(n)) * 2.0 * (1 + 1e-12));
    M.push_back(rep.rows.back().M);
    QV.push_back(rep.rows.back().QV);
  }
  const auto m = mean_se(M);
  const auto q = mean_se(QV);
  CHECK(std::fabs(m.mean) < 4.0 * m.se);
  CHECK(std::fabs(m.var / q.mean - 1.0) < 4.0 * std::sqrt(2.0 / N) + 4.0 * q.se / q.mean);
}

TEST_CASE("quadratic variation alone agrees with the decomposition") {
  Torus tor(1, 20);
  const auto rates = build_rates(VectorFieldSpec::constant(1, {1.0, 0.0, 0.0}), tor);
  DensityField u{tor, std::vector<double>(20, 0.5), 0.0};
  const auto hydro = HydroTrajectory::constant(u, sample_dual_field(VectorFieldSpec::constant(1, {1.0, 0.0, 0.0}), tor), 0.02);
  const auto tr = simulate(sample_profile_measure(u, 8, 0), rates, 0.02, std::uint64_t{8}, {});
  const auto H = TestFunction::fixed(sample_profile(TrigSeries::cosine(0.0, 1.0), tor).u);
  const auto rep = decompose(tr, H, hydro, rates, {0.01, 0.02}, {});
  const auto qv = quadratic_variation(tr, H, rates, {0.01, 0.02}, {});
  CHECK(qv[0] == doctest::Approx(rep.rows[0].QV));
  CHECK(qv[1] == doctest::Approx(rep.rows[1].QV));
  CHECK(rep.rows[0].R == doctest::Approx(0.0).scale(1e-12));
}

TEST_CASE("limit variance in the stationary heat case") {
  const int n = 64;
  Torus tor(1, n);
  const DensityField u{tor, std::vector<double>(n, 0.5), 0.0};
  const double t = 0.01;
  const auto hydro = solve_hydro(u, VectorFieldSpec::zero(1), t);
  const auto f = sample_profile(TrigSeries::cosine(0.0, std::sqrt(2.0)), tor).u;
  const double lambda = 2.0 * n * n * (1.0 - std::cos(2 * kPi / n));
  CHECK(limit_variance(f, hydro, t, 400) == doctest::Approx((1.0 - std::exp(-2 * lambda * t)) / 4.0).epsilon(1e-3));
  CHECK(lattice_l2_sq(f, tor) == doctest::Approx(1.0));
  CHECK(limit_variance(f, hydro, 0.0) == 0.0);
}

TEST_CASE("decompose refuses capped rates") {
  Torus tor(1, 6);
  const auto spec = VectorFieldSpec::constant(1, {5.0, 0.0, 0.0});
  const auto rates = build_rates(spec, tor);
  DensityField u{tor, std::vector<double>(6, 0.5), 0.0};
  const auto hydro = HydroTrajectory::constant(u, sample_dual_field(spec, tor), 0.01);
  const auto tr = simulate(sample_profile_measure(u, 1, 0), rates, 0.01, std::uint64_t{1}, {});
  CHECK_THROWS_AS(decompose(tr, TestFunction::fixed(std::vector<double>(6, 1.0)), hydro, rates, {0.01}, {}),
                  PreconditionError);
}
