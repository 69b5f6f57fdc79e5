#include "waseplab/master.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <ostream>

#include "waseplab/error.hpp"

namespace waseplab {

namespace {

std::size_t state_count(const Torus& tor) {
  require(tor.sites() <= kMaxMasterSites, "master equation limited to n^d <= 20 sites");
  return std::size_t{1} << tor.sites();
}

int bit(std::size_t s, SiteIndex x) { return static_cast<int>((s >> x) & 1u); }

void check_distribution(std::vector<double>& p) {
  double sum = 0.0;
  for (double& v : p) {
    if (v < -1e-12) throw NumericalError("probability below -1e-12");
    if (v < 0.0) v = 0.0;
    sum += v;
  }
  if (std::fabs(sum - 1.0) > 1e-10) throw NumericalError("probability mass drifted from 1");
}

std::vector<double> omegas(std::size_t s, const DensityField& u) {
  std::vector<double> w(u.u.size());
  for (SiteIndex x = 0; x < w.size(); ++x) w[x] = (bit(s, x) - u.u[x]) / (u.u[x] * (1.0 - u.u[x]));
  return w;
}

}  // namespace

StateDistribution product_measure_vector(const DensityField& u) {
  const std::size_t S = state_count(u.torus);
  StateDistribution out{u.torus, std::vector<double>(S)};
  for (std::size_t s = 0; s < S; ++s) {
    double m = 1.0;
    for (SiteIndex x = 0; x < u.u.size(); ++x) m *= bit(s, x) ? u.u[x] : 1.0 - u.u[x];
    out.p[s] = m;
  }
  return out;
}

std::vector<MasterEdge> master_edges(const RateTable& rates) {
  const Torus& tor = rates.torus;
  const auto d = static_cast<std::size_t>(tor.dim());
  std::vector<MasterEdge> edges;
  for (SiteIndex x = 0; x < tor.sites(); ++x) {
    for (int b = 0; b < tor.dim(); ++b) {
      const std::size_t e = x * d + static_cast<std::size_t>(b);
      edges.push_back(MasterEdge{x, tor.neighbor(x, b, +1), rates.forward[e], rates.backward[e]});
    }
  }
  return edges;
}

template <class Visit>
void for_each_jump(std::size_t s, const std::vector<MasterEdge>& edges, Visit&& visit) {
  for (const auto& e : edges) {
    const int ex = bit(s, e.x);
    const int ey = bit(s, e.y);
    if (ex == ey) continue;
    const std::size_t t = s ^ (std::size_t{1} << e.x) ^ (std::size_t{1} << e.y);
    visit(t, ex == 1 ? e.forward : e.backward, ex == 1 ? e.backward : e.forward);
  }
}

std::vector<double> apply_generator(const std::vector<double>& g, const RateTable& rates) {
  const std::size_t S = state_count(rates.torus);
  require(g.size() == S, "state function size mismatch");
  const auto edges = master_edges(rates);
  std::vector<double> out(S, 0.0);
  for (std::size_t s = 0; s < S; ++s) {
    double acc = 0.0;
    for_each_jump(s, edges, [&](std::size_t t, double r, double) { acc += r * (g[t] - g[s]); });
    out[s] = acc;
  }
  return out;
}

std::vector<double> apply_forward(const std::vector<double>& p, const RateTable& rates) {
  const std::size_t S = state_count(rates.torus);
  require(p.size() == S, "distribution size mismatch");
  const auto edges = master_edges(rates);
  std::vector<double> out(S, 0.0);
  for (std::size_t s = 0; s < S; ++s) {
    const double ps = p[s];
    if (ps == 0.0) continue;
    for_each_jump(s, edges, [&](std::size_t t, double r, double) {
      out[t] += r * ps;
      out[s] -= r * ps;
    });
  }
  return out;
}

std::vector<double> apply_adjoint(const std::vector<double>& g, const std::vector<double>& mu, const RateTable& rates) {
  const std::size_t S = state_count(rates.torus);
  require(g.size() == S && mu.size() == S, "state function size mismatch");
  const auto edges = master_edges(rates);
  std::vector<double> out(S, 0.0);
  for (std::size_t s = 0; s < S; ++s) {
    require(mu[s] > 0.0, "reference measure must be positive");
    double acc = 0.0;
    for_each_jump(s, edges, [&](std::size_t t, double r_st, double r_ts) {
      acc += r_ts * g[t] * mu[t] / mu[s] - r_st * g[s];
    });
    out[s] = acc;
  }
  return out;
}

double master_dt(const RateTable& rates) {
  const std::size_t S = state_count(rates.torus);
  const auto edges = master_edges(rates);
  double worst = 0.0;
  for (std::size_t s = 0; s < S; ++s) {
    double row = 0.0;
    for_each_jump(s, edges, [&](std::size_t, double r, double) { row += r; });
    worst = std::max(worst, row);
  }
  // Column s of L^T holds the exit rates of s twice in absolute value.
  return worst > 0.0 ? 0.1 / (2.0 * worst) : 1.0;
}

MasterSolution forward_solve(const StateDistribution& p0, const RateTable& rates, double T, double dt,
                             std::size_t store_every) {
  require(p0.torus == rates.torus, "distribution and rates live on different tori");
  require(T >= 0.0, "final time must be nonnegative");
  const double h_req = dt > 0.0 ? dt : master_dt(rates);
  const auto steps = std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(T / h_req - 1e-9)));
  const double h = T / static_cast<double>(steps);
  store_every = std::max<std::size_t>(1, store_every);

  MasterSolution sol;
  std::vector<double> p = p0.p;
  sol.times.push_back(0.0);
  sol.p.push_back(p);
  if (T == 0.0) return sol;
  std::vector<double> w(p.size());
  for (std::size_t k = 1; k <= steps; ++k) {
    const auto k1 = apply_forward(p, rates);
    for (std::size_t i = 0; i < p.size(); ++i) w[i] = p[i] + 0.5 * h * k1[i];
    const auto k2 = apply_forward(w, rates);
    for (std::size_t i = 0; i < p.size(); ++i) w[i] = p[i] + 0.5 * h * k2[i];
    const auto k3 = apply_forward(w, rates);
    for (std::size_t i = 0; i < p.size(); ++i) w[i] = p[i] + h * k3[i];
    const auto k4 = apply_forward(w, rates);
    for (std::size_t i = 0; i < p.size(); ++i) p[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    check_distribution(p);
    if (k % store_every == 0 || k == steps) {
      sol.times.push_back(static_cast<double>(k) * h);
      sol.p.push_back(p);
    }
  }
  return sol;
}

double relative_entropy(const std::vector<double>& p, const std::vector<double>& mu) {
  require(p.size() == mu.size(), "distribution sizes differ");
  double h = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    require(mu[i] > 0.0, "reference measure must be positive");
    if (p[i] > 0.0) h += p[i] * std::log(p[i] / mu[i]);
  }
  return h;
}

DirichletCarre dirichlet_and_carre(const std::vector<double>& f, const std::vector<double>& mu, const RateTable& rates) {
  const std::size_t S = state_count(rates.torus);
  require(f.size() == S && mu.size() == S, "state function size mismatch");
  double mass = 0.0;
  for (std::size_t s = 0; s < S; ++s) {
    require(f[s] >= 0.0, "density must be nonnegative");
    mass += f[s] * mu[s];
  }
  require(std::fabs(mass - 1.0) <= 1e-10, "f must be a density with respect to mu");

  const auto edges = master_edges(rates);
  DirichletCarre out;
  for (std::size_t s = 0; s < S; ++s) {
    const double rs = std::sqrt(f[s]);
    double dir = 0.0;
    double gam = 0.0;
    for_each_jump(s, edges, [&](std::size_t t, double r, double) {
      const double g = std::sqrt(f[t]) - rs;
      dir += g * g;
      gam += r * g * g;
    });
    out.dirichlet += dir * mu[s];
    out.carre += gam * mu[s];
  }
  const double n = rates.torus.side();
  if (out.carre < 0.5 * n * n * out.dirichlet - 1e-12 * (1.0 + out.carre)) {
    throw NumericalError("carre du champ fell below (n^2/2) D");
  }
  return out;
}

std::vector<double> adjoint_one(const DensityField& u, const std::vector<double>& udot, const RateTable& rates,
                                const EdgeField& F, AdjointMode mode) {
  const Torus& tor = u.torus;
  const std::size_t S = state_count(tor);
  require(udot.size() == u.u.size(), "du/dt size mismatch");
  for (double v : u.u) require(v > 0.0 && v < 1.0, "profile must lie strictly inside (0,1)");
  std::vector<double> J(S, 0.0);

  if (mode == AdjointMode::brute) {
    const auto mu = product_measure_vector(u).p;
    const auto edges = master_edges(rates);
    for (std::size_t s = 0; s < S; ++s) {
      double acc = 0.0;
      for_each_jump(s, edges, [&](std::size_t t, double r_st, double r_ts) { acc += r_ts * mu[t] / mu[s] - r_st; });
      const auto w = omegas(s, u);
      double dlogpsi = 0.0;
      for (SiteIndex x = 0; x < w.size(); ++x) dlogpsi += w[x] * udot[x];
      J[s] = acc - dlogpsi;
    }
    return J;
  }

  const double n = tor.side();
  require(!rates.cap_active, "closed form needs n >= 2 |F|, the rate cap must be inactive");
  const auto Lu = discrete_generator_L(u, F);
  const int d = tor.dim();
  std::vector<double> G(tor.sites() * static_cast<std::size_t>(d));
  for (SiteIndex x = 0; x < tor.sites(); ++x) {
    for (int b = 0; b < d; ++b) {
      const SiteIndex y = tor.neighbor(x, b, +1);
      const double du = u.u[y] - u.u[x];
      G[x * static_cast<std::size_t>(d) + static_cast<std::size_t>(b)] =
          n * du * F.at(x, b) * (u.u[x] + u.u[y] - 2.0 * u.u[x] * u.u[y]) - n * n * du * du;
    }
  }
  for (std::size_t s = 0; s < S; ++s) {
    const auto w = omegas(s, u);
    double acc = 0.0;
    for (SiteIndex x = 0; x < tor.sites(); ++x) {
      acc += w[x] * (Lu[x] - udot[x]);
      for (int b = 0; b < d; ++b) {
        acc += w[x] * w[tor.neighbor(x, b, +1)] * G[x * static_cast<std::size_t>(d) + static_cast<std::size_t>(b)];
      }
    }
    J[s] = acc;
  }
  return J;
}

EntropyReport yau_check(const StateDistribution& p0, const DensityField& u0, const EdgeField& F, double T,
                        std::size_t report_every, double dt) {
  require(p0.torus == u0.torus && F.torus == u0.torus, "inputs live on different tori");
  const RateTable rates = build_rates(F);
  const double h_req = dt > 0.0 ? dt : std::min(master_dt(rates), default_hydro_dt(u0.torus, F.sup()));
  const auto steps = static_cast<std::size_t>(std::ceil(T / h_req - 1e-9));
  require(steps >= 4, "yau_check needs at least four time steps");
  const double h = T / static_cast<double>(steps);
  report_every = std::max<std::size_t>(1, report_every);
  const std::size_t S = p0.p.size();

  struct Frame {
    std::vector<double> p;
    std::vector<double> u;
    double H;
  };
  auto make_frame = [&](std::vector<double> p, std::vector<double> u) {
    const auto mu = product_measure_vector(DensityField{u0.torus, u, 0.0}).p;
    const double H = relative_entropy(p, mu);
    return Frame{std::move(p), std::move(u), H};
  };

  EntropyReport rep;
  std::deque<Frame> win;
  win.push_back(make_frame(p0.p, u0.u));
  rep.sup_H = win.back().H;

  std::vector<double> p = p0.p;
  std::vector<double> u = u0.u;
  std::vector<double> w(S);
  for (std::size_t k = 1; k <= steps; ++k) {
    const auto k1 = apply_forward(p, rates);
    for (std::size_t i = 0; i < S; ++i) w[i] = p[i] + 0.5 * h * k1[i];
    const auto k2 = apply_forward(w, rates);
    for (std::size_t i = 0; i < S; ++i) w[i] = p[i] + 0.5 * h * k2[i];
    const auto k3 = apply_forward(w, rates);
    for (std::size_t i = 0; i < S; ++i) w[i] = p[i] + h * k3[i];
    const auto k4 = apply_forward(w, rates);
    for (std::size_t i = 0; i < S; ++i) p[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    check_distribution(p);
    u = hydro_rk4_step(u, F, h);

    win.push_back(make_frame(p, u));
    rep.sup_H = std::max(rep.sup_H, win.back().H);
    if (win.size() > 5) win.pop_front();
    if (win.size() < 5) continue;
    const std::size_t center = k - 2;
    if (center % report_every != 0) continue;

    const Frame& c = win[2];
    const DensityField uc{u0.torus, c.u, static_cast<double>(center) * h};
    const auto mu = product_measure_vector(uc).p;
    const auto udot = discrete_generator_L(uc, F);
    std::vector<double> f(S);
    for (std::size_t i = 0; i < S; ++i) f[i] = c.p[i] / mu[i];
    const auto dc = dirichlet_and_carre(f, mu, rates);
    const auto J = adjoint_one(uc, udot, rates, F, AdjointMode::brute);
    double corr = 0.0;
    for (std::size_t i = 0; i < S; ++i) corr += J[i] * c.p[i];

    // Exact derivative: sum pdot log(p/mu) - sum p d/dt log mu.
    const auto pdot = apply_forward(c.p, rates);
    double dH_exact = 0.0;
    for (std::size_t i = 0; i < S; ++i) {
      if (c.p[i] <= 0.0) continue;
      const auto wv = omegas(i, uc);
      double dlogmu = 0.0;
      for (SiteIndex x = 0; x < wv.size(); ++x) dlogmu += wv[x] * udot[x];
      dH_exact += pdot[i] * std::log(c.p[i] / mu[i]) - c.p[i] * dlogmu;
    }

    EntropyRow row;
    row.t = uc.t;
    row.H = c.H;
    row.dH = (-win[4].H + 8.0 * win[3].H - 8.0 * win[1].H + win[0].H) / (12.0 * h);
    row.dH_exact = dH_exact;
    row.dirichlet = dc.dirichlet;
    row.carre = dc.carre;
    row.correction = corr;
    row.slack = row.dH - (-dc.carre + corr);
    rep.max_slack = rep.rows.empty() ? row.slack : std::max(rep.max_slack, row.slack);
    rep.rows.push_back(row);
  }
  return rep;
}

void write_entropy_csv(const EntropyReport& rep, std::ostream& os) {
  os << "t,H,dH,dH_exact,dirichlet,carre,correction,slack\n";
  os.precision(12);
  for (const auto& r : rep.rows) {
    os << r.t << ',' << r.H << ',' << r.dH << ',' << r.dH_exact << ',' << r.dirichlet << ',' << r.carre << ','
       << r.correction << ',' << r.slack << '\n';
  }
}

double ibp_residual(const std::vector<double>& h, const std::vector<double>& f, SiteIndex x, SiteIndex y,
                    const DensityField& u) {
  const std::size_t S = state_count(u.torus);
  require(h.size() == S && f.size() == S, "state function size mismatch");
  require(x != y, "exchange needs two distinct sites");
  const std::size_t swap = (std::size_t{1} << x) | (std::size_t{1} << y);
  auto exchange = [&](std::size_t s) { return bit(s, x) != bit(s, y) ? s ^ swap : s; };
  for (std::size_t s = 0; s < S; ++s) {
    require(std::fabs(h[exchange(s)] - h[s]) <= 1e-14 * (1.0 + std::fabs(h[s])), "h must be exchange invariant");
  }
  const auto mu = product_measure_vector(u).p;
  const double ux = u.u[x];
  const double uy = u.u[y];
  double lhs = 0.0;
  double grad = 0.0;
  double pair = 0.0;
  for (std::size_t s = 0; s < S; ++s) {
    const double wx = (bit(s, x) - ux) / (ux * (1.0 - ux));
    const double wy = (bit(s, y) - uy) / (uy * (1.0 - uy));
    const double sxy = bit(s, x) * (1 - bit(s, y)) / (ux * (1.0 - uy));
    lhs += h[s] * (wy - wx) * f[s] * mu[s];
    grad += h[s] * sxy * (f[exchange(s)] - f[s]) * mu[s];
    pair += h[s] * wx * wy * f[s] * mu[s];
  }
  return lhs - grad + (uy - ux) * pair;
}

}  // namespace waseplab
