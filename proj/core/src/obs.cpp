#include "waseplab/obs.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>

#include "waseplab/error.hpp"

namespace waseplab {

std::vector<double> omega_field(const Configuration& eta, const DensityField& u) {
  require(eta.torus() == u.torus, "configuration and profile live on different tori");
  std::vector<double> w(u.u.size());
  for (SiteIndex x = 0; x < w.size(); ++x) {
    const double ux = u.u[x];
    require(ux > 0.0 && ux < 1.0, "omega needs u strictly inside (0,1)");
    w[x] = (eta.eta(x) - ux) / (ux * (1.0 - ux));
  }
  return w;
}

LocalSet::LocalSet(int dim, std::vector<Coord> offs) : d(dim), offsets(std::move(offs)) {
  require(!offsets.empty(), "local set must be nonempty");
  for (const auto& a : offsets) {
    for (int i = 0; i < d; ++i) require(a[static_cast<std::size_t>(i)] <= 0, "local set must lie in the negative orthant");
  }
}

LocalSet LocalSet::origin(int d) { return LocalSet(d, {Coord{0, 0, 0}}); }

int LocalSet::ell0() const {
  std::int64_t side = 1;
  for (int i = 0; i < d; ++i) {
    std::int64_t lo = offsets.front()[static_cast<std::size_t>(i)];
    std::int64_t hi = lo;
    for (const auto& a : offsets) {
      lo = std::min(lo, a[static_cast<std::size_t>(i)]);
      hi = std::max(hi, a[static_cast<std::size_t>(i)]);
    }
    side = std::max(side, hi - lo + 1);
  }
  return static_cast<int>(side);
}

int LocalSet::ell1() const {
  std::int64_t side = 1;
  for (const auto& a : offsets) {
    for (int i = 0; i < d; ++i) side = std::max(side, 1 - a[static_cast<std::size_t>(i)]);
  }
  return static_cast<int>(side);
}

double omega_products(const std::vector<double>& omega, const Torus& torus, const LocalSet& A, SiteIndex x) {
  double p = 1.0;
  for (const auto& a : A.offsets) p *= omega[wrap(torus, x, a)];
  return p;
}

double omega_products(const Configuration& eta, const DensityField& u, const LocalSet& A, SiteIndex x) {
  return omega_products(omega_field(eta, u), u.torus, A, x);
}

std::vector<double> block_average(const std::vector<double>& omega, const Torus& torus, int ell) {
  require(ell >= 1 && 2 * ell < torus.side(), "block average requires 1 <= l < n/2");
  const auto q = box_measures(ell, torus.dim()).q;
  const auto support = q.support();
  std::vector<double> out(omega.size(), 0.0);
  for (SiteIndex x = 0; x < omega.size(); ++x) {
    double acc = 0.0;
    for (const auto& y : support) acc += omega[wrap(torus, x, y)] * q.weight(y);
    out[x] = acc;
  }
  return out;
}

FlowTable FlowTable::from(const Flow& phi) {
  FlowTable t;
  t.d = phi.d;
  t.extent = phi.extent;
  std::size_t cells = 1;
  for (int i = 0; i < phi.d; ++i) cells *= static_cast<std::size_t>(phi.extent);
  for (int b = 0; b < phi.d; ++b) {
    for (std::size_t k = 0; k < cells; ++k) {
      const auto& v = phi.num[static_cast<std::size_t>(b)][k];
      if (v == 0) continue;
      Coord z{0, 0, 0};
      std::size_t r = k;
      for (int c = phi.d - 1; c >= 0; --c) {
        z[static_cast<std::size_t>(c)] = static_cast<std::int64_t>(r % static_cast<std::size_t>(phi.extent));
        r /= static_cast<std::size_t>(phi.extent);
      }
      t.entries[static_cast<std::size_t>(b)].push_back(Entry{z, to_double(v, phi.den)});
    }
  }
  return t;
}

double FlowTable::sup() const {
  double m = 0.0;
  for (int b = 0; b < d; ++b) {
    for (const auto& e : entries[static_cast<std::size_t>(b)]) m = std::max(m, std::fabs(e.value));
  }
  return m;
}

std::shared_ptr<const FlowTable> cached_qell_flow(int ell, int d) {
  static std::mutex mu;
  static std::map<std::pair<int, int>, std::shared_ptr<const FlowTable>> cache;
  std::lock_guard<std::mutex> lock(mu);
  auto& slot = cache[{ell, d}];
  if (!slot) slot = std::make_shared<const FlowTable>(FlowTable::from(point_to_qell_flow(ell, d)));
  return slot;
}

std::vector<double> flow_convolve(const FlowTable& phi, int bprime, const std::vector<double>& a, const Torus& torus) {
  std::vector<double> out(a.size(), 0.0);
  for (const auto& e : phi.entries[static_cast<std::size_t>(bprime)]) {
    Coord minus{0, 0, 0};
    for (int i = 0; i < torus.dim(); ++i) minus[static_cast<std::size_t>(i)] = -e.z[static_cast<std::size_t>(i)];
    for (SiteIndex x = 0; x < a.size(); ++x) out[x] += e.value * a[wrap(torus, x, minus)];
  }
  return out;
}

FirstStage first_stage(const std::vector<double>& G, const LocalSet& A, int b, int ell, const Configuration& eta,
                       const DensityField& u) {
  const Torus& tor = u.torus;
  const int d = tor.dim();
  require(A.d == d, "local set dimension mismatch");
  require(b >= 0 && b < d, "direction out of range");
  require(G.size() == tor.sites(), "G size mismatch");
  require(ell >= A.ell1(), "scale must satisfy l >= l1");
  require(2 * ell < tor.side(), "scale must satisfy l < n/2");

  FirstStage fs{tor, b, ell, omega_field(eta, u), {}, u.u, cached_qell_flow(ell, d)};
  fs.omega_l = block_average(fs.omega, tor, ell);
  const double n = tor.side();

  std::vector<double> a(tor.sites());
  for (SiteIndex x = 0; x < tor.sites(); ++x) a[x] = omega_products(fs.omega, tor, A, x) * G[x];

  for (SiteIndex x = 0; x < tor.sites(); ++x) {
    const SiteIndex xb = tor.neighbor(x, b, +1);
    fs.V += a[x] * fs.omega[xb];
    fs.Vl += a[x] * fs.omega_l[xb];
  }

  fs.h.resize(static_cast<std::size_t>(d));
  fs.W_per_b.assign(static_cast<std::size_t>(d), 0.0);
  for (int bp = 0; bp < d; ++bp) {
    auto& h = fs.h[static_cast<std::size_t>(bp)];
    h = flow_convolve(*fs.phi, bp, a, tor);
    for (double v : h) fs.W_per_b[static_cast<std::size_t>(bp)] += v * v;
    fs.W += fs.W_per_b[static_cast<std::size_t>(bp)];
    for (SiteIndex x = 0; x < tor.sites(); ++x) {
      const SiteIndex xbp = tor.neighbor(x, bp, +1);
      const double hx = h[tor.neighbor(x, b, -1)];
      fs.Z += n * (u.u[xbp] - u.u[x]) * hx * fs.omega[x] * fs.omega[xbp];
      fs.identity_rhs += hx * (fs.omega[x] - fs.omega[xbp]);
    }
  }
  fs.identity_lhs = fs.V - fs.Vl;
  return fs;
}

SecondStage second_stage(const FirstStage& fs) {
  const Torus& tor = fs.torus;
  const int d = tor.dim();
  const double n = tor.side();
  const auto& w = fs.omega;
  SecondStage ss;
  ss.h2.resize(static_cast<std::size_t>(d * d));
  double Z = 0.0;
  for (int bp = 0; bp < d; ++bp) {
    // k_y = n (u_{y+b'} - u_y) h^{b'}_{y-b} omega_y
    std::vector<double> k(tor.sites());
    for (SiteIndex y = 0; y < tor.sites(); ++y) {
      const SiteIndex ybp = tor.neighbor(y, bp, +1);
      k[y] = n * (fs.u[ybp] - fs.u[y]) * fs.h[static_cast<std::size_t>(bp)][tor.neighbor(y, fs.b, -1)] * w[y];
      ss.Vt += k[y] * fs.omega_l[ybp];
      Z += k[y] * w[ybp];
    }
    for (int bpp = 0; bpp < d; ++bpp) {
      auto& h2 = ss.h2[static_cast<std::size_t>(bp * d + bpp)];
      h2 = flow_convolve(*fs.phi, bpp, k, tor);
      for (double v : h2) {
        ss.Wt += v * v;
        ss.sup_h2 = std::max(ss.sup_h2, std::fabs(v));
      }
      for (SiteIndex x = 0; x < tor.sites(); ++x) {
        const SiteIndex xbpp = tor.neighbor(x, bpp, +1);
        const double hx = h2[tor.neighbor(x, bp, -1)];
        ss.Zt += hx * n * (fs.u[xbpp] - fs.u[x]) * w[x] * w[xbpp];
        ss.identity_rhs += hx * (w[x] - w[xbpp]);
      }
    }
  }
  ss.identity_lhs = Z - ss.Vt;
  return ss;
}

int ell_of_n(int d, int n) {
  require(n >= 16, "ell_of_n needs n >= 16");
  require(d >= 1 && d <= kMaxDim, "dimension must be 1..3");
  double l = 0.0;
  if (d == 1) {
    l = std::floor(n / 8.0);
  } else if (d == 2) {
    l = std::round(n / std::sqrt(std::log(static_cast<double>(n))));
  } else {
    l = std::round(std::pow(static_cast<double>(n), 2.0 / 3.0));
  }
  return std::max(1, static_cast<int>(l));
}

}  // namespace waseplab
