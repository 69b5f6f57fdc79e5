#include <doctest.h>

#include <cmath>

#include "waseplab/flows.hpp"

using namespace waseplab;

namespace {

ExactMeasure box_p(int ell, int d) { return to_exact(box_measures(ell, d).p); }
ExactMeasure box_q(int ell, int d) { return to_exact(box_measures(ell, d).q); }

}  // namespace

TEST_CASE("one-dimensional point to cube flow is a linear ramp") {
  for (int ell = 1; ell <= 12; ++ell) {
    const Flow psi = point_to_cube_flow(ell, 1);
    for (int x = 0; x < ell; ++x) {
      mpq_class expect(ell - 1 - x, ell);
      expect.canonicalize();
      CHECK(psi.at({x, 0, 0}, 0) == expect);
    }
  }
}

TEST_CASE("step flows connect consecutive cubes") {
  for (int d = 1; d <= 3; ++d) {
    for (int k = 2; k <= 6; ++k) {
      CHECK(exactly_equal(divergence(step_flow(k, d)), subtract(box_p(k, d), box_p(k - 1, d))));
      CHECK(step_flow(k, d).support_extent() <= k);
    }
  }
}

TEST_CASE("point to cube and point to q flows have the right divergence") {
  for (int d = 1; d <= 3; ++d) {
    for (int ell = 1; ell <= 5; ++ell) {
      CHECK(exactly_equal(divergence(point_to_cube_flow(ell, d)), subtract(point_mass(d), box_p(ell, d))));
      const Flow phi = point_to_qell_flow(ell, d);
      CHECK(exactly_equal(divergence(phi), subtract(point_mass(d), box_q(ell, d))));
      CHECK(phi.support_extent() <= 2 * ell - 1);
      CHECK(exactly_equal(divergence(convolve_with_box(point_to_cube_flow(ell, d), ell)),
                          subtract(box_p(ell, d), box_q(ell, d))));
    }
  }
}

TEST_CASE("the incremental sweep matches direct construction") {
  for (int d = 1; d <= 3; ++d) {
    sweep_point_to_cube(6, d, [&](int ell, const Flow& psi) {
      const Flow direct = point_to_cube_flow(ell, d);
      for (int b = 0; b < d; ++b) {
        const std::size_t cells = direct.num[0].size();
        for (std::size_t i = 0; i < cells; ++i) {
          Coord z{0, 0, 0};
          std::size_t r = i;
          for (int k = d - 1; k >= 0; --k) {
            z[static_cast<std::size_t>(k)] = static_cast<std::int64_t>(r % static_cast<std::size_t>(direct.extent));
            r /= static_cast<std::size_t>(direct.extent);
          }
          CHECK(psi.at(z, b) == direct.at(z, b));
        }
      }
    });
  }
}

TEST_CASE("energy of the ramp") {
  // sum_{x<l} ((l-1-x)/l)^2 = (l-1)(2l-1) / (6l)
  for (int ell = 2; ell <= 20; ++ell) {
    CHECK(point_to_cube_flow(ell, 1).sum_sq() == doctest::Approx((ell - 1.0) * (2.0 * ell - 1.0) / (6.0 * ell)));
  }
}

TEST_CASE("g_d scales") {
  CHECK(g_d(1, 7.0) == 7.0);
  CHECK(g_d(2, std::exp(2.0)) == doctest::Approx(2.0));
  CHECK(g_d(3, 50.0) == 1.0);
}

TEST_CASE("to_double keeps precision for huge numerators") {
  mpz_class big = 1;
  big <<= 3000;
  CHECK(to_double(big * 3, big * 4) == 0.75);
  CHECK(to_double(-big, big * 8) == -0.125);
}

TEST_CASE("step flow constant for d = 1") {
  CHECK(step_flow_constant(1) == doctest::Approx(1.0));
}
