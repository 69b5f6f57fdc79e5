#include <doctest.h>

#include <cmath>

#include "waseplab/error.hpp"
#include "waseplab/lattice.hpp"

using namespace waseplab;

TEST_CASE("encode and decode are inverse") {
  for (int d = 1; d <= 3; ++d) {
    Torus tor(d, 5);
    for (SiteIndex s = 0; s < tor.sites(); ++s) CHECK(tor.encode(tor.decode(s)) == s);
  }
}

TEST_CASE("neighbor agrees with wrap and steps back") {
  Torus tor(3, 4);
  for (SiteIndex s = 0; s < tor.sites(); ++s) {
    for (int b = 0; b < 3; ++b) {
      Coord e{0, 0, 0};
      e[static_cast<std::size_t>(b)] = 1;
      CHECK(tor.neighbor(s, b, +1) == wrap(tor, s, e));
      CHECK(tor.neighbor(tor.neighbor(s, b, +1), b, -1) == s);
    }
  }
}

TEST_CASE("sup distance wraps around") {
  Torus tor(2, 10);
  CHECK(tor.sup_distance(tor.encode({0, 0, 0}), tor.encode({9, 3, 0})) == 3);
  CHECK(tor.sup_distance(tor.encode({0, 0, 0}), tor.encode({5, 1, 0})) == 5);
}

TEST_CASE("wrap rejects offsets as long as the torus") {
  Torus tor(1, 4);
  CHECK_THROWS_AS(wrap(tor, 0, {4, 0, 0}), PreconditionError);
}

TEST_CASE("cube has l^d sites") {
  Torus tor(3, 6);
  CHECK(cube_sites(tor, 3).sites.size() == 27);
}

TEST_CASE("q is the self-convolution of p") {
  for (int d = 1; d <= 3; ++d) {
    for (int ell = 1; ell <= 5; ++ell) {
      const auto [p, q] = box_measures(ell, d);
      CHECK(p.max_weight() == doctest::Approx(1.0 / std::pow(ell, d)));
      // direct convolution, independent of the per-axis triangle formula
      std::vector<std::int64_t> conv(q.numerators().size(), 0);
      for (const auto& a : p.support()) {
        for (const auto& b : p.support()) {
          Coord z{0, 0, 0};
          for (int i = 0; i < d; ++i) z[static_cast<std::size_t>(i)] = a[static_cast<std::size_t>(i)] + b[static_cast<std::size_t>(i)];
          conv[q.flat(z)] += 1;
        }
      }
      CHECK(conv == q.numerators());
    }
  }
}

TEST_CASE("sparse partition on small tori") {
  for (int d = 1; d <= 2; ++d) {
    for (int n = 3; n <= 10; ++n) {
      Torus tor(d, n);
      for (int ell = 1; 2 * ell < n; ++ell) {
        const auto parts = sparse_partition(tor, ell);
        CHECK(parts.size() <= static_cast<std::size_t>((d + 1) * std::pow(ell, d)));
        std::vector<int> seen(tor.sites(), 0);
        for (const auto& part : parts) {
          for (auto s : part.sites) ++seen[s];
          for (std::size_t i = 0; i < part.sites.size(); ++i) {
            for (std::size_t j = i + 1; j < part.sites.size(); ++j) {
              CHECK(tor.sup_distance(part.sites[i], part.sites[j]) >= ell);
            }
          }
        }
        for (int c : seen) CHECK(c == 1);
      }
    }
  }
}

TEST_CASE("sparse partition needs l < n/2") {
  Torus tor(1, 8);
  CHECK_THROWS_AS(sparse_partition(tor, 4), PreconditionError);
}
