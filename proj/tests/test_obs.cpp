#include <doctest.h>

#include <cmath>

#include "waseplab/error.hpp"
#include "waseplab/flows.hpp"
#include "waseplab/master.hpp"
#include "waseplab/obs.hpp"
#include "waseplab/rng.hpp"

using namespace waseplab;

namespace {

Configuration alternating(const Torus& tor) {
  Configuration eta(tor);
  for (SiteIndex x = 0; x < tor.sites(); x += 2) eta.set(x, true);
  return eta;
}

DensityField half(const Torus& tor) { return DensityField{tor, std::vector<double>(tor.sites(), 0.5), 0.0}; }

struct Instance {
  Configuration eta;
  DensityField u;
  std::vector<double> G;
};

Instance random_instance(const Torus& tor, std::uint64_t seed) {
  Philox rng(seed, 0, 11);
  DensityField u{tor, std::vector<double>(tor.sites()), 0.0};
  std::vector<double> G(tor.sites());
  for (auto& v : u.u) v = 0.2 + 0.6 * rng.uniform();
  for (auto& v : G) v = 2.0 * rng.uniform() - 1.0;
  return {sample_profile_measure(u, rng), u, G};
}

}  // namespace

TEST_CASE("omega at half density") {
  Torus tor(1, 4);
  const auto w = omega_field(alternating(tor), half(tor));
  CHECK(w == std::vector<double>{2.0, -2.0, 2.0, -2.0});
  CHECK(omega_products(w, tor, LocalSet::origin(1), 0) == 2.0);
  CHECK(omega_products(w, tor, LocalSet(1, {{0, 0, 0}, {-1, 0, 0}}), 0) == -4.0);
}

TEST_CASE("local sets live in the negative orthant and report their scales") {
  CHECK_THROWS_AS(LocalSet(1, {{1, 0, 0}}), PreconditionError);
  const LocalSet A(2, {{0, 0, 0}, {-2, 0, 0}, {-1, -3, 0}});
  CHECK(A.ell0() == 4);
  CHECK(A.ell1() == 4);
  CHECK(LocalSet::origin(3).ell1() == 1);
}

TEST_CASE("block averages") {
  Torus tor(1, 8);
  const std::vector<double> w{2, -2, 2, -2, 2, -2, 2, -2};
  CHECK(block_average(w, tor, 1) == w);
  const auto c = block_average(std::vector<double>(8, 1.5), tor, 3);
  for (double v : c) CHECK(v == doctest::Approx(1.5));
  const auto w2 = block_average(w, tor, 2);
  for (SiteIndex x = 0; x < 8; ++x) {
    CHECK(w2[x] == doctest::Approx(0.25 * w[x] + 0.5 * w[(x + 1) % 8] + 0.25 * w[(x + 2) % 8]));
  }
  CHECK_THROWS_AS(block_average(w, tor, 4), PreconditionError);
}

TEST_CASE("omega products are centred under the product measure") {
  Torus tor(1, 6);
  const DensityField u = sample_profile(TrigSeries::cosine(0.5, 0.3), tor);
  const auto mu = product_measure_vector(u).p;
  const LocalSet A(1, {{0, 0, 0}, {-2, 0, 0}});
  for (SiteIndex x = 0; x < 6; ++x) {
    double m1 = 0.0, m2 = 0.0;
    for (std::size_t s = 0; s < mu.size(); ++s) {
      std::vector<int> occ(6);
      for (int i = 0; i < 6; ++i) occ[static_cast<std::size_t>(i)] = static_cast<int>((s >> i) & 1u);
      const Configuration eta(tor, occ);
      m1 += mu[s] * omega_products(eta, u, LocalSet::origin(1), x);
      m2 += mu[s] * omega_products(eta, u, A, x);
    }
    CHECK(std::fabs(m1) < 1e-14);
    CHECK(std::fabs(m2) < 1e-14);
  }
}

TEST_CASE("first stage on the hand example") {
  Torus tor(1, 4);
  const auto fs = first_stage(std::vector<double>(4, 1.0), LocalSet::origin(1), 0, 1, alternating(tor), half(tor));
  CHECK(fs.V == doctest::Approx(-16.0));
  CHECK(fs.identity_lhs == doctest::Approx(fs.identity_rhs));
}

TEST_CASE("vanishing G and constant u") {
  Torus tor(1, 32);
  const auto inst = random_instance(tor, 3);
  const auto fs = first_stage(std::vector<double>(32, 0.0), LocalSet::origin(1), 0, 3, inst.eta, inst.u);
  CHECK(fs.V == 0.0);
  CHECK(fs.Vl == 0.0);
  CHECK(fs.W == 0.0);
  CHECK(fs.Z == 0.0);
  DensityField flat{tor, std::vector<double>(32, 0.37), 0.0};
  const auto fs2 = first_stage(inst.G, LocalSet::origin(1), 0, 3, inst.eta, flat);
  const auto ss = second_stage(fs2);
  CHECK(fs2.Z == 0.0);
  CHECK(ss.Vt == 0.0);
  CHECK(ss.Zt == 0.0);
  CHECK(ss.sup_h2 == 0.0);
}

TEST_CASE("telescoping identities on random instances") {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    Torus tor(1, 32);
    const auto inst = random_instance(tor, seed);
    const LocalSet A = seed % 2 ? LocalSet::origin(1) : LocalSet(1, {{0, 0, 0}, {-1, 0, 0}});
    const auto fs = first_stage(inst.G, A, 0, 3, inst.eta, inst.u);
    CHECK(std::fabs(fs.identity_lhs - fs.identity_rhs) <= 1e-9 * std::max({1.0, std::fabs(fs.V), std::fabs(fs.Vl)}));
    const auto ss = second_stage(fs);
    CHECK(std::fabs(ss.identity_lhs - ss.identity_rhs) <= 1e-9 * std::max({1.0, std::fabs(fs.Z), std::fabs(ss.Vt)}));
  }
}

TEST_CASE("second stage h is bounded by flow mass squared times the gradient scale") {
  Torus tor(1, 64);
  const auto inst = random_instance(tor, 5);
  double grad = 0.0, wmax = 0.0, gmax = 0.0;
  const auto w = omega_field(inst.eta, inst.u);
  for (SiteIndex x = 0; x < 64; ++x) {
    grad = std::max(grad, 64.0 * std::fabs(inst.u.u[(x + 1) % 64] - inst.u.u[x]));
    wmax = std::max(wmax, std::fabs(w[x]));
    gmax = std::max(gmax, std::fabs(inst.G[x]));
  }
  for (int ell : {2, 4, 8, 16}) {
    const double mass = point_to_qell_flow(ell, 1).sum_abs();
    CHECK(mass <= ell);
    const auto ss = second_stage(first_stage(inst.G, LocalSet::origin(1), 0, ell, inst.eta, inst.u));
    CHECK(ss.sup_h2 <= mass * mass * grad * wmax * wmax * gmax * (1 + 1e-12));
  }
}

TEST_CASE("flow convolution of a point mass returns the flow") {
  Torus tor(2, 16);
  std::vector<double> a(tor.sites(), 0.0);
  a[0] = 1.0;
  const auto phi = cached_qell_flow(3, 2);
  const Flow exact = point_to_qell_flow(3, 2);
  const auto h = flow_convolve(*phi, 1, a, tor);
  CHECK(h[tor.encode({2, 1, 0})] == doctest::Approx(exact.value({2, 1, 0}, 1)));
  CHECK(h[tor.encode({-1, 0, 0})] == 0.0);
  CHECK(phi.get() == cached_qell_flow(3, 2).get());
}

TEST_CASE("W is the sum of squared h") {
  Torus tor(2, 12);
  const auto inst = random_instance(tor, 8);
  const auto fs = first_stage(inst.G, LocalSet::origin(2), 1, 2, inst.eta, inst.u);
  double s = 0.0;
  for (const auto& h : fs.h) {
    for (double v : h) s += v * v;
  }
  CHECK(fs.W == doctest::Approx(s));
  CHECK(fs.W_per_b.size() == 2);
}

TEST_CASE("mesoscopic scale choice") {
  CHECK(ell_of_n(1, 80) == 10);
  CHECK(ell_of_n(3, 64) == 16);
  CHECK(ell_of_n(2, 100) == 47);
  for (int d = 1; d <= 3; ++d) {
    for (int n = 32; n <= 512; n *= 2) {
      const int ell = ell_of_n(d, n);
      const double ratio = std::pow(ell, d) * g_d(d, std::max(2, ell)) / (double(n) * n);
      CHECK(ratio >= 0.005);
      CHECK(ratio <= 5.0);
    }
  }
}
