#include "waseplab/flows.hpp"

#include <algorithm>
#include <cmath>

#include "waseplab/error.hpp"

namespace waseplab {

namespace {

std::size_t box_size(int extent, int d) {
  std::size_t s = 1;
  for (int i = 0; i < d; ++i) s *= static_cast<std::size_t>(extent);
  return s;
}

std::size_t flat_in(const Coord& z, int extent, int d) {
  std::size_t idx = 0;
  for (int i = 0; i < d; ++i) idx = idx * static_cast<std::size_t>(extent) + static_cast<std::size_t>(z[static_cast<std::size_t>(i)]);
  return idx;
}

bool inside(const Coord& z, int extent, int d) {
  for (int i = 0; i < d; ++i) {
    const auto c = z[static_cast<std::size_t>(i)];
    if (c < 0 || c >= extent) return false;
  }
  return true;
}

Coord unflat_in(std::size_t i, int extent, int d) {
  Coord z{0, 0, 0};
  for (int k = d - 1; k >= 0; --k) {
    z[static_cast<std::size_t>(k)] = static_cast<std::int64_t>(i % static_cast<std::size_t>(extent));
    i /= static_cast<std::size_t>(extent);
  }
  return z;
}

long binom(int n, int k) {
  long r = 1;
  for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return r;
}

mpz_class zpow(long base, int e) {
  mpz_class r;
  mpz_ui_pow_ui(r.get_mpz_t(), static_cast<unsigned long>(base), static_cast<unsigned long>(e));
  return r;
}

// lcm over k' of k' * binom(d, k').
long layer_lcm(int d) { return d == 1 ? 1 : d == 2 ? 2 : 6; }

mpz_class step_denominator(int k, int d) {
  return zpow(k, d) * zpow(k - 1, d) * layer_lcm(d);
}

// Adds sign * psi^k into target, whose denominator must be a multiple of
// step_denominator(k, d) and whose extent must be >= k.
void accumulate_step(Flow& target, int k, int d, int sign) {
  const mpz_class scale = target.den / step_denominator(k, d);
  require(scale * step_denominator(k, d) == target.den, "denominator not a multiple of the step denominator");
  const long ld = layer_lcm(d);

  // Stage k' handles sites of Lambda_k with exactly k' coordinates equal to
  // k-1. Each pushes its accumulated mass inward along every outer
  // coordinate, spread evenly over the k-1 sites of that line.
  Coord x{0, 0, 0};
  const std::size_t cells = box_size(k, d);
  for (std::size_t i = 0; i < cells; ++i) {
    x = unflat_in(i, k, d);
    int outer = 0;
    for (int c = 0; c < d; ++c) outer += x[static_cast<std::size_t>(c)] == k - 1 ? 1 : 0;
    if (outer == 0) continue;
    mpz_class mass_above = 0;
    for (int m = outer; m <= d; ++m) mass_above += binom(d, m) * zpow(k - 1, d - m);
    // value(j) = -(k-j) * mass_above * (k-1)^(k'-1) * L_d / (k' binom(d,k')) / den_k
    const mpz_class base = mass_above * zpow(k - 1, outer - 1) * (ld / (outer * binom(d, outer))) * scale;
    for (int b = 0; b < d; ++b) {
      if (x[static_cast<std::size_t>(b)] != k - 1) continue;
      for (int j = 1; j <= k - 1; ++j) {
        Coord z = x;
        z[static_cast<std::size_t>(b)] -= j;
        const mpz_class v = base * (k - j);
        auto& slot = target.num[static_cast<std::size_t>(b)][target.flat(z)];
        if (sign > 0) {
          slot -= v;
        } else {
          slot += v;
        }
      }
    }
  }
}

Flow crop(const Flow& f, int extent) {
  Flow out = Flow::zero(f.d, extent, f.den);
  const std::size_t cells = box_size(extent, f.d);
  for (std::size_t i = 0; i < cells; ++i) {
    const Coord z = unflat_in(i, extent, f.d);
    if (!inside(z, f.extent, f.d)) continue;
    for (int b = 0; b < f.d; ++b) out.num[static_cast<std::size_t>(b)][i] = f.num[static_cast<std::size_t>(b)][f.flat(z)];
  }
  return out;
}

}  // namespace

double to_double(const mpz_class& num, const mpz_class& den) {
  long en = 0;
  long ed = 0;
  const double mn = mpz_get_d_2exp(&en, num.get_mpz_t());
  const double md = mpz_get_d_2exp(&ed, den.get_mpz_t());
  if (mn == 0.0) return 0.0;
  return std::ldexp(mn / md, static_cast<int>(en - ed));
}

std::size_t ExactMeasure::flat(const Coord& z) const { return flat_in(z, extent, d); }

mpq_class ExactMeasure::at(const Coord& z) const {
  if (!inside(z, extent, d)) return 0;
  mpq_class q(num[flat(z)], den);
  q.canonicalize();
  return q;
}

double ExactMeasure::weight(const Coord& z) const {
  if (!inside(z, extent, d)) return 0.0;
  return to_double(num[flat(z)], den);
}

mpz_class ExactMeasure::total_numerator() const {
  mpz_class s = 0;
  for (const auto& v : num) s += v;
  return s;
}

bool exactly_equal(const ExactMeasure& a, const ExactMeasure& b) {
  if (a.d != b.d) return false;
  const int extent = std::max(a.extent, b.extent);
  const std::size_t cells = box_size(extent, a.d);
  for (std::size_t i = 0; i < cells; ++i) {
    const Coord z = unflat_in(i, extent, a.d);
    const mpz_class va = inside(z, a.extent, a.d) ? a.num[a.flat(z)] : mpz_class(0);
    const mpz_class vb = inside(z, b.extent, b.d) ? b.num[b.flat(z)] : mpz_class(0);
    if (va * b.den != vb * a.den) return false;
  }
  return true;
}

ExactMeasure point_mass(int d) {
  ExactMeasure m;
  m.d = d;
  m.extent = 1;
  m.num = {mpz_class(1)};
  m.den = 1;
  return m;
}

ExactMeasure to_exact(const BoxMeasure& bm) {
  ExactMeasure m;
  m.d = bm.dim();
  m.extent = bm.extent();
  m.den = static_cast<long>(bm.denominator());
  m.num.reserve(bm.numerators().size());
  for (auto v : bm.numerators()) m.num.emplace_back(static_cast<long>(v));
  return m;
}

ExactMeasure subtract(const ExactMeasure& a, const ExactMeasure& b) {
  require(a.d == b.d, "measure dimensions differ");
  ExactMeasure out;
  out.d = a.d;
  out.extent = std::max(a.extent, b.extent);
  out.den = a.den * b.den;
  const std::size_t cells = box_size(out.extent, out.d);
  out.num.resize(cells);
  for (std::size_t i = 0; i < cells; ++i) {
    const Coord z = unflat_in(i, out.extent, out.d);
    mpz_class v = 0;
    if (inside(z, a.extent, a.d)) v += a.num[a.flat(z)] * b.den;
    if (inside(z, b.extent, b.d)) v -= b.num[b.flat(z)] * a.den;
    out.num[i] = v;
  }
  return out;
}

Flow Flow::zero(int d, int extent, const mpz_class& den) {
  require(d >= 1 && d <= kMaxDim, "flow dimension must be 1..3");
  require(extent >= 0, "flow extent must be nonnegative");
  Flow f;
  f.d = d;
  f.extent = extent;
  f.den = den;
  for (int b = 0; b < d; ++b) f.num[static_cast<std::size_t>(b)].assign(box_size(extent, d), mpz_class(0));
  return f;
}

std::size_t Flow::flat(const Coord& z) const { return flat_in(z, extent, d); }

mpq_class Flow::at(const Coord& z, int b) const {
  if (!inside(z, extent, d)) return 0;
  mpq_class q(num[static_cast<std::size_t>(b)][flat(z)], den);
  q.canonicalize();
  return q;
}

double Flow::value(const Coord& z, int b) const {
  if (!inside(z, extent, d)) return 0.0;
  return to_double(num[static_cast<std::size_t>(b)][flat(z)], den);
}

double Flow::sum_sq() const {
  double s = 0.0;
  for (int b = 0; b < d; ++b) {
    for (const auto& v : num[static_cast<std::size_t>(b)]) {
      const double x = to_double(v, den);
      s += x * x;
    }
  }
  return s;
}

double Flow::sum_abs() const {
  double s = 0.0;
  for (int b = 0; b < d; ++b) {
    for (const auto& v : num[static_cast<std::size_t>(b)]) s += std::fabs(to_double(v, den));
  }
  return s;
}

double Flow::max_abs() const {
  mpz_class best = 0;
  for (int b = 0; b < d; ++b) {
    for (const auto& v : num[static_cast<std::size_t>(b)]) {
      if (abs(v) > best) best = abs(v);
    }
  }
  return to_double(best, den);
}

bool Flow::empty() const {
  for (int b = 0; b < d; ++b) {
    for (const auto& v : num[static_cast<std::size_t>(b)]) {
      if (v != 0) return false;
    }
  }
  return true;
}

int Flow::support_extent() const {
  int e = 0;
  const std::size_t cells = box_size(extent, d);
  for (std::size_t i = 0; i < cells; ++i) {
    bool nz = false;
    for (int b = 0; b < d; ++b) nz = nz || num[static_cast<std::size_t>(b)][i] != 0;
    if (!nz) continue;
    const Coord z = unflat_in(i, extent, d);
    for (int c = 0; c < d; ++c) e = std::max<int>(e, static_cast<int>(z[static_cast<std::size_t>(c)]) + 1);
  }
  return e;
}

Flow add(const Flow& a, const Flow& b) {
  require(a.d == b.d, "flow dimensions differ");
  const int extent = std::max(a.extent, b.extent);
  Flow out = Flow::zero(a.d, extent, a.den * b.den);
  const std::size_t cells = box_size(extent, a.d);
  for (std::size_t i = 0; i < cells; ++i) {
    const Coord z = unflat_in(i, extent, a.d);
    for (int c = 0; c < a.d; ++c) {
      const auto cc = static_cast<std::size_t>(c);
      mpz_class v = 0;
      if (inside(z, a.extent, a.d)) v += a.num[cc][a.flat(z)] * b.den;
      if (inside(z, b.extent, b.d)) v += b.num[cc][b.flat(z)] * a.den;
      out.num[cc][i] = v;
    }
  }
  return out;
}

ExactMeasure divergence(const Flow& phi) {
  ExactMeasure m;
  m.d = phi.d;
  m.extent = phi.extent + 1;
  m.den = phi.den;
  const std::size_t cells = box_size(m.extent, m.d);
  m.num.assign(cells, mpz_class(0));
  for (std::size_t i = 0; i < cells; ++i) {
    const Coord z = unflat_in(i, m.extent, m.d);
    mpz_class v = 0;
    for (int b = 0; b < phi.d; ++b) {
      const auto bb = static_cast<std::size_t>(b);
      if (inside(z, phi.extent, phi.d)) v += phi.num[bb][phi.flat(z)];
      Coord w = z;
      w[bb] -= 1;
      if (inside(w, phi.extent, phi.d)) v -= phi.num[bb][phi.flat(w)];
    }
    m.num[i] = v;
  }
  return m;
}

Flow step_flow(int k, int d) {
  require(k >= 2, "step_flow requires k >= 2");
  Flow f = Flow::zero(d, k, step_denominator(k, d));
  accumulate_step(f, k, d, +1);
  return f;
}

void sweep_point_to_cube(int ell_max, int d, const std::function<void(int, const Flow&)>& visit) {
  require(ell_max >= 1, "ell_max must be positive");
  mpz_class den = 1;
  for (int k = 2; k <= ell_max; ++k) den = lcm(den, step_denominator(k, d));
  Flow acc = Flow::zero(d, ell_max, den);
  visit(1, crop(acc, 1));
  for (int ell = 2; ell <= ell_max; ++ell) {
    accumulate_step(acc, ell, d, -1);
    visit(ell, crop(acc, ell));
  }
}

Flow point_to_cube_flow(int ell, int d) {
  require(ell >= 1, "point_to_cube_flow requires l >= 1");
  Flow out;
  sweep_point_to_cube(ell, d, [&](int l, const Flow& f) {
    if (l == ell) out = f;
  });
  return out;
}

Flow convolve_with_box(const Flow& psi, int ell) {
  require(ell >= 1, "box size must be positive");
  const int d = psi.d;
  const int extent = psi.extent + ell - 1;
  Flow out = Flow::zero(d, extent, psi.den * zpow(ell, d));
  const std::size_t cells = box_size(extent, d);
  for (int b = 0; b < d; ++b) {
    const auto bb = static_cast<std::size_t>(b);
    std::vector<mpz_class> cur(cells, mpz_class(0));
    for (std::size_t i = 0; i < cells; ++i) {
      const Coord z = unflat_in(i, extent, d);
      if (inside(z, psi.extent, d)) cur[i] = psi.num[bb][psi.flat(z)];
    }
    // Separable window sum over z - t e_axis, t = 0..l-1.
    for (int axis = 0; axis < d; ++axis) {
      std::vector<mpz_class> next(cells, mpz_class(0));
      std::size_t stride = 1;
      for (int c = d - 1; c > axis; --c) stride *= static_cast<std::size_t>(extent);
      for (std::size_t i = 0; i < cells; ++i) {
        const Coord z = unflat_in(i, extent, d);
        const auto pos = z[static_cast<std::size_t>(axis)];
        if (pos == 0) {
          next[i] = cur[i];
        } else {
          next[i] = next[i - stride] + cur[i];
          if (pos >= ell) next[i] -= cur[i - static_cast<std::size_t>(ell) * stride];
        }
      }
      cur.swap(next);
    }
    out.num[bb] = std::move(cur);
  }
  return out;
}

Flow point_to_qell_flow(int ell, int d) {
  require(ell >= 1, "point_to_qell_flow requires l >= 1");
  return qell_from_cube(point_to_cube_flow(ell, d), ell);
}

Flow qell_from_cube(const Flow& psi, int ell) {
  const int d = psi.d;
  Flow out = convolve_with_box(psi, ell);
  const mpz_class scale = zpow(ell, d);
  const std::size_t cells = box_size(psi.extent, d);
  for (std::size_t i = 0; i < cells; ++i) {
    const std::size_t j = out.flat(unflat_in(i, psi.extent, d));
    for (int b = 0; b < d; ++b) out.num[static_cast<std::size_t>(b)][j] += psi.num[static_cast<std::size_t>(b)][i] * scale;
  }
  return out;
}

double step_flow_constant(int d) {
  double best = 0.0;
  for (int k = 1; k <= d; ++k) {
    double tail = 0.0;
    for (int i = k; i <= d; ++i) tail += static_cast<double>(binom(d, i));
    best = std::max(best, tail / (k * static_cast<double>(binom(d, k))));
  }
  return best;
}

double g_d(int d, double ell) {
  require(d >= 1 && d <= kMaxDim, "g_d dimension must be 1..3");
  if (d == 1) return ell;
  if (d == 2) {
    require(ell >= 2.0, "g_2 requires l >= 2");
    return std::log(ell);
  }
  return 1.0;
}

}  // namespace waseplab
