#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <vector>

namespace waseplab {

inline constexpr int kMaxDim = 3;

/// Integer coordinates in Z^d; unused trailing components are zero.
using Coord = std::array<std::int64_t, kMaxDim>;

using SiteIndex = std::uint32_t;

/// Discrete torus T_n^d with row-major site indexing: the last coordinate
/// varies fastest.
class Torus {
 public:
  Torus(int d, int n);

  int dim() const { return d_; }
  int side() const { return n_; }
  std::size_t sites() const { return sites_; }

  Coord decode(SiteIndex site) const;
  /// Coordinates are reduced mod n before encoding.
  SiteIndex encode(const Coord& c) const;

  /// Stride of direction e_b in the flat index.
  std::size_t stride(int b) const { return strides_[static_cast<std::size_t>(b)]; }

  /// Neighbor x + e_b (sign = +1) or x - e_b (sign = -1).
  SiteIndex neighbor(SiteIndex site, int b, int sign) const;

  /// Sup-norm distance on the torus.
  std::int64_t sup_distance(SiteIndex a, SiteIndex b) const;

  /// Macroscopic position x/n in [0,1)^d.
  std::array<double, kMaxDim> position(SiteIndex site) const;

  friend bool operator==(const Torus& a, const Torus& b) { return a.d_ == b.d_ && a.n_ == b.n_; }

 private:
  int d_;
  int n_;
  std::size_t sites_;
  std::array<std::size_t, kMaxDim> strides_{};
};

/// x + offset on the torus. Requires |offset_i| < n.
SiteIndex wrap(const Torus& torus, SiteIndex site, const Coord& offset);

/// Ordered set of distinct torus sites.
struct SiteSet {
  Torus torus;
  std::vector<SiteIndex> sites;
};

/// Sites of the cube Lambda_l = {0..l-1}^d placed at the origin of the torus.
SiteSet cube_sites(const Torus& torus, int ell);

/// Partition of the torus into l-sparse classes (pairwise sup-distance >= l),
/// at most (d+1) l^d of them. Requires l < n/2.
///
/// Each coordinate is cut into a >= 2 consecutive blocks of length l, the
/// first r = n mod l of them (spread as evenly as possible) one site longer.
/// A site's per-coordinate color is its offset inside its block; classes are
/// the products of per-coordinate colors.
std::vector<SiteSet> sparse_partition(const Torus& torus, int ell);

/// Finitely supported probability on Z^d, stored densely on [0, extent)^d
/// as exact integer numerators over a common denominator.
class BoxMeasure {
 public:
  BoxMeasure(int d, int extent, std::vector<std::int64_t> numerators, std::int64_t denominator);

  int dim() const { return d_; }
  int extent() const { return extent_; }
  std::int64_t denominator() const { return denominator_; }
  const std::vector<std::int64_t>& numerators() const { return numerators_; }

  /// Zero outside the stored box.
  std::int64_t numerator(const Coord& z) const;
  double weight(const Coord& z) const;

  std::size_t flat(const Coord& z) const;
  Coord unflat(std::size_t i) const;

  std::vector<Coord> support() const;
  double max_weight() const;

 private:
  int d_;
  int extent_;
  std::vector<std::int64_t> numerators_;
  std::int64_t denominator_;
};

struct BoxMeasures {
  BoxMeasure p;  ///< uniform on Lambda_l
  BoxMeasure q;  ///< p * p, supported in Lambda_{2l-1}
};

BoxMeasures box_measures(int ell, int d);

}  // namespace waseplab
