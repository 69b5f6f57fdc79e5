#include "waseplab/lattice.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <map>
#include <string>

#include "waseplab/error.hpp"

namespace waseplab {

namespace {

std::int64_t mod(std::int64_t a, std::int64_t n) {
  std::int64_t r = a % n;
  return r < 0 ? r + n : r;
}

std::int64_t ipow(std::int64_t base, int e) {
  std::int64_t r = 1;
  for (int i = 0; i < e; ++i) r *= base;
  return r;
}

}  // namespace

Torus::Torus(int d, int n) : d_(d), n_(n) {
  require(d >= 1 && d <= kMaxDim, "torus dimension must be 1..3");
  require(n >= 1, "torus side must be positive");
  sites_ = 1;
  for (int i = 0; i < d; ++i) sites_ *= static_cast<std::size_t>(n);
  require(sites_ <= (std::size_t{1} << 31), "torus too large for 32-bit site indices");
  std::size_t s = 1;
  for (int b = d - 1; b >= 0; --b) {
    strides_[static_cast<std::size_t>(b)] = s;
    s *= static_cast<std::size_t>(n);
  }
}

Coord Torus::decode(SiteIndex site) const {
  Coord c{0, 0, 0};
  std::size_t rest = site;
  for (int b = 0; b < d_; ++b) {
    const auto s = strides_[static_cast<std::size_t>(b)];
    c[static_cast<std::size_t>(b)] = static_cast<std::int64_t>(rest / s);
    rest %= s;
  }
  return c;
}

SiteIndex Torus::encode(const Coord& c) const {
  std::size_t idx = 0;
  for (int b = 0; b < d_; ++b) {
    idx += static_cast<std::size_t>(mod(c[static_cast<std::size_t>(b)], n_)) *
           strides_[static_cast<std::size_t>(b)];
  }
  return static_cast<SiteIndex>(idx);
}

SiteIndex Torus::neighbor(SiteIndex site, int b, int sign) const {
  const auto s = strides_[static_cast<std::size_t>(b)];
  const auto coord = (site / s) % static_cast<std::size_t>(n_);
  if (sign > 0) {
    return coord + 1 == static_cast<std::size_t>(n_)
               ? static_cast<SiteIndex>(site - coord * s)
               : static_cast<SiteIndex>(site + s);
  }
  return coord == 0 ? static_cast<SiteIndex>(site + (static_cast<std::size_t>(n_) - 1) * s)
                    : static_cast<SiteIndex>(site - s);
}

std::int64_t Torus::sup_distance(SiteIndex a, SiteIndex b) const {
  const Coord ca = decode(a);
  const Coord cb = decode(b);
  std::int64_t best = 0;
  for (int i = 0; i < d_; ++i) {
    const auto delta = std::llabs(ca[static_cast<std::size_t>(i)] - cb[static_cast<std::size_t>(i)]);
    best = std::max(best, std::min<std::int64_t>(delta, n_ - delta));
  }
  return best;
}

std::array<double, kMaxDim> Torus::position(SiteIndex site) const {
  const Coord c = decode(site);
  std::array<double, kMaxDim> x{0.0, 0.0, 0.0};
  for (int i = 0; i < d_; ++i) {
    x[static_cast<std::size_t>(i)] = static_cast<double>(c[static_cast<std::size_t>(i)]) / n_;
  }
  return x;
}

SiteIndex wrap(const Torus& torus, SiteIndex site, const Coord& offset) {
  for (int i = 0; i < torus.dim(); ++i) {
    require(std::llabs(offset[static_cast<std::size_t>(i)]) < torus.side(),
            "wrap offset component must be smaller than n in absolute value");
  }
  Coord c = torus.decode(site);
  for (int i = 0; i < torus.dim(); ++i) c[static_cast<std::size_t>(i)] += offset[static_cast<std::size_t>(i)];
  return torus.encode(c);
}

SiteSet cube_sites(const Torus& torus, int ell) {
  require(ell >= 1 && ell <= torus.side(), "cube side must be in [1, n]");
  SiteSet out{torus, {}};
  for (SiteIndex s = 0; s < torus.sites(); ++s) {
    const Coord c = torus.decode(s);
    bool inside = true;
    for (int i = 0; i < torus.dim(); ++i) inside = inside && c[static_cast<std::size_t>(i)] < ell;
    if (inside) out.sites.push_back(s);
  }
  return out;
}

std::vector<SiteSet> sparse_partition(const Torus& torus, int ell) {
  const int n = torus.side();
  require(ell >= 1, "sparsity scale must be positive");
  require(2 * ell < n, "sparse_partition requires l < n/2");

  const int blocks = n / ell;  // >= 2
  const int rem = n % ell;
  // Coordinate coloring: block k has length ell + extra(k), extras sum to rem.
  std::vector<int> color(static_cast<std::size_t>(n));
  int start = 0;
  int colors = ell;
  for (int k = 0; k < blocks; ++k) {
    const int extra = rem / blocks + (k < rem % blocks ? 1 : 0);
    colors = std::max(colors, ell + extra);
    for (int j = 0; j < ell + extra; ++j) color[static_cast<std::size_t>(start + j)] = j;
    start += ell + extra;
  }

  std::map<std::int64_t, std::vector<SiteIndex>> classes;
  for (SiteIndex s = 0; s < torus.sites(); ++s) {
    const Coord c = torus.decode(s);
    std::int64_t id = 0;
    for (int i = 0; i < torus.dim(); ++i) {
      id = id * colors + color[static_cast<std::size_t>(c[static_cast<std::size_t>(i)])];
    }
    classes[id].push_back(s);
  }

  std::vector<SiteSet> out;
  out.reserve(classes.size());
  for (auto& [id, sites] : classes) out.push_back(SiteSet{torus, std::move(sites)});
  return out;
}

BoxMeasure::BoxMeasure(int d, int extent, std::vector<std::int64_t> numerators, std::int64_t denominator)
    : d_(d), extent_(extent), numerators_(std::move(numerators)), denominator_(denominator) {
  require(d >= 1 && d <= kMaxDim, "measure dimension must be 1..3");
  require(numerators_.size() == static_cast<std::size_t>(ipow(extent, d)), "measure storage size mismatch");
  std::int64_t total = 0;
  for (auto v : numerators_) {
    require(v >= 0, "measure weights must be nonnegative");
    total += v;
  }
  require(total == denominator_, "measure weights must sum to 1");
}

std::size_t BoxMeasure::flat(const Coord& z) const {
  std::size_t idx = 0;
  for (int i = 0; i < d_; ++i) idx = idx * static_cast<std::size_t>(extent_) + static_cast<std::size_t>(z[static_cast<std::size_t>(i)]);
  return idx;
}

Coord BoxMeasure::unflat(std::size_t i) const {
  Coord z{0, 0, 0};
  for (int k = d_ - 1; k >= 0; --k) {
    z[static_cast<std::size_t>(k)] = static_cast<std::int64_t>(i % static_cast<std::size_t>(extent_));
    i /= static_cast<std::size_t>(extent_);
  }
  return z;
}

std::int64_t BoxMeasure::numerator(const Coord& z) const {
  for (int i = 0; i < d_; ++i) {
    const auto zi = z[static_cast<std::size_t>(i)];
    if (zi < 0 || zi >= extent_) return 0;
  }
  return numerators_[flat(z)];
}

double BoxMeasure::weight(const Coord& z) const {
  return static_cast<double>(numerator(z)) / static_cast<double>(denominator_);
}

std::vector<Coord> BoxMeasure::support() const {
  std::vector<Coord> out;
  for (std::size_t i = 0; i < numerators_.size(); ++i) {
    if (numerators_[i] != 0) out.push_back(unflat(i));
  }
  return out;
}

double BoxMeasure::max_weight() const {
  return static_cast<double>(*std::max_element(numerators_.begin(), numerators_.end())) /
         static_cast<double>(denominator_);
}

BoxMeasures box_measures(int ell, int d) {
  require(ell >= 1, "box size must be positive");
  require(d >= 1 && d <= kMaxDim, "dimension must be 1..3");
  require(2.0 * d * std::log2(static_cast<double>(ell)) < 62.0, "box too large for exact 64-bit weights");

  const std::int64_t cells = ipow(ell, d);
  BoxMeasure p(d, ell, std::vector<std::int64_t>(static_cast<std::size_t>(cells), 1), cells);

  // q_l factorizes into 1-d triangles: (l - |z_i - (l-1)|) / l^2 per axis.
  const int extent = 2 * ell - 1;
  std::vector<std::int64_t> qnum(static_cast<std::size_t>(ipow(extent, d)));
  BoxMeasure shape(d, extent, std::vector<std::int64_t>(qnum.size(), 0), 0);
  for (std::size_t i = 0; i < qnum.size(); ++i) {
    const Coord z = shape.unflat(i);
    std::int64_t v = 1;
    for (int k = 0; k < d; ++k) v *= ell - std::llabs(z[static_cast<std::size_t>(k)] - (ell - 1));
    qnum[i] = v;
  }
  BoxMeasure q(d, extent, std::move(qnum), cells * cells);
  return BoxMeasures{std::move(p), std::move(q)};
}

}  // namespace waseplab
