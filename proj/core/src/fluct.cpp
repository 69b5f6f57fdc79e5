#include "waseplab/fluct.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <numbers>
#include <ostream>

#include "waseplab/error.hpp"

namespace waseplab {

namespace {

double norm_factor(const Torus& tor) { return std::pow(static_cast<double>(tor.side()), -0.5 * tor.dim()); }

// Cell edges: 0, then every report time, with cells split to width <= max_cell.
std::vector<double> refine(const std::vector<double>& times, double max_cell) {
  std::vector<double> out;
  double prev = 0.0;
  for (double t : times) {
    if (max_cell > 0.0 && t > prev) {
      const auto pieces = static_cast<std::size_t>(std::ceil((t - prev) / max_cell - 1e-9));
      for (std::size_t k = 1; k < pieces; ++k) out.push_back(prev + (t - prev) * static_cast<double>(k) / static_cast<double>(pieces));
    }
    out.push_back(t);
    prev = t;
  }
  return out;
}

void check_times(const std::vector<double>& times, double T) {
  for (std::size_t i = 0; i < times.size(); ++i) {
    require(times[i] >= 0.0 && times[i] <= T + 1e-12, "report times must lie in [0, T]");
    require(i == 0 || times[i] >= times[i - 1], "report times must be sorted");
  }
}

}  // namespace

double fluctuation_field(const Configuration& eta, const DensityField& u, const std::vector<double>& f) {
  require(eta.torus() == u.torus && f.size() == u.u.size(), "fluctuation field inputs disagree in size");
  double s = 0.0;
  for (SiteIndex x = 0; x < f.size(); ++x) s += (eta.eta(x) - u.u[x]) * f[x];
  return s * norm_factor(u.torus);
}

FourierField FourierField::zeros(int d, int M) {
  require(d >= 1 && d <= kMaxDim && M >= 0, "invalid Fourier field shape");
  FourierField f;
  f.d = d;
  f.M = M;
  std::size_t size = 1;
  for (int i = 0; i < d; ++i) size *= static_cast<std::size_t>(2 * M + 1);
  f.c.assign(size, {0.0, 0.0});
  return f;
}

std::size_t FourierField::index(const std::array<int, kMaxDim>& m) const {
  std::size_t idx = 0;
  for (int i = 0; i < d; ++i) {
    const int mi = m[static_cast<std::size_t>(i)];
    require(mi >= -M && mi <= M, "mode outside the cutoff");
    idx = idx * static_cast<std::size_t>(2 * M + 1) + static_cast<std::size_t>(mi + M);
  }
  return idx;
}

std::array<int, kMaxDim> FourierField::mode(std::size_t i) const {
  std::array<int, kMaxDim> m{0, 0, 0};
  for (int k = d - 1; k >= 0; --k) {
    m[static_cast<std::size_t>(k)] = static_cast<int>(i % static_cast<std::size_t>(2 * M + 1)) - M;
    i /= static_cast<std::size_t>(2 * M + 1);
  }
  return m;
}

double FourierField::conjugate_asymmetry() const {
  double worst = 0.0;
  for (std::size_t i = 0; i < c.size(); ++i) {
    auto m = mode(i);
    for (auto& v : m) v = -v;
    worst = std::max(worst, std::abs(c[index(m)] - std::conj(c[i])));
  }
  return worst;
}

int default_mode_cutoff(int d) { return d == 1 ? 16 : d == 2 ? 8 : 5; }

FourierField fluctuation_modes(const Configuration& eta, const DensityField& u, int M) {
  const Torus& tor = u.torus;
  const int d = tor.dim();
  const int n = tor.side();
  FourierField out = FourierField::zeros(d, M);
  // table[m + M][k] = exp(2 pi i m k / n)
  std::vector<std::vector<std::complex<double>>> table(static_cast<std::size_t>(2 * M + 1));
  for (int m = -M; m <= M; ++m) {
    auto& row = table[static_cast<std::size_t>(m + M)];
    row.resize(static_cast<std::size_t>(n));
    for (int k = 0; k < n; ++k) row[static_cast<std::size_t>(k)] = std::polar(1.0, 2.0 * std::numbers::pi * m * k / n);
  }
  const double scale = norm_factor(tor);
  for (SiteIndex x = 0; x < tor.sites(); ++x) {
    const double w = eta.eta(x) - u.u[x];
    if (w == 0.0) continue;
    const Coord cx = tor.decode(x);
    for (std::size_t i = 0; i < out.c.size(); ++i) {
      const auto m = out.mode(i);
      std::complex<double> ph{1.0, 0.0};
      for (int a = 0; a < d; ++a) {
        ph *= table[static_cast<std::size_t>(m[static_cast<std::size_t>(a)] + M)][static_cast<std::size_t>(cx[static_cast<std::size_t>(a)])];
      }
      out.c[i] += w * ph;
    }
  }
  for (auto& v : out.c) v *= scale;
  return out;
}

double sobolev_norm(const FourierField& f, double k) {
  double s = 0.0;
  for (std::size_t i = 0; i < f.c.size(); ++i) {
    const auto m = f.mode(i);
    double m2 = 0.0;
    for (int a = 0; a < f.d; ++a) m2 += static_cast<double>(m[static_cast<std::size_t>(a)]) * m[static_cast<std::size_t>(a)];
    s += std::norm(f.c[i]) * std::pow(1.0 + m2, k);
  }
  return std::sqrt(s);
}

void write_fourier_csv(const FourierField& f, std::ostream& os) {
  for (int a = 0; a < f.d; ++a) os << 'm' << a << ',';
  os << "re,im\n";
  os.precision(12);
  for (std::size_t i = 0; i < f.c.size(); ++i) {
    const auto m = f.mode(i);
    for (int a = 0; a < f.d; ++a) os << m[static_cast<std::size_t>(a)] << ',';
    os << f.c[i].real() << ',' << f.c[i].imag() << '\n';
  }
}

QuadraticForm QuadraticForm::zeros(const Torus& torus, bool with_pairs) {
  QuadraticForm q;
  q.lin.assign(torus.sites(), 0.0);
  if (with_pairs) q.pair.assign(torus.sites() * static_cast<std::size_t>(torus.dim()), 0.0);
  return q;
}

double QuadraticForm::evaluate(const Configuration& eta) const {
  const Torus& tor = eta.torus();
  const auto d = static_cast<std::size_t>(tor.dim());
  double v = constant;
  for (SiteIndex x = 0; x < tor.sites(); ++x) {
    if (!eta.occupied(x)) continue;
    v += lin[x];
    if (pair.empty()) continue;
    for (std::size_t b = 0; b < d; ++b) {
      if (eta.occupied(tor.neighbor(x, static_cast<int>(b), +1))) v += pair[x * d + b];
    }
  }
  return v;
}

void QuadraticForm::add_centered_pair(const Torus& torus, SiteIndex x, int b, double coef, const std::vector<double>& u) {
  const SiteIndex y = torus.neighbor(x, b, +1);
  pair[x * static_cast<std::size_t>(torus.dim()) + static_cast<std::size_t>(b)] += coef;
  lin[x] -= coef * u[y];
  lin[y] -= coef * u[x];
  constant += coef * u[x] * u[y];
}

void QuadraticForm::add_centered_site(SiteIndex x, double coef, double ux) {
  lin[x] += coef;
  constant -= coef * ux;
}

namespace {

// Contribution of an occupied site x to a form, given the current eta.
double site_weight(const QuadraticForm& q, const Configuration& eta, SiteIndex x) {
  double v = q.lin[x];
  if (q.pair.empty()) return v;
  const Torus& tor = eta.torus();
  const auto d = static_cast<std::size_t>(tor.dim());
  for (std::size_t b = 0; b < d; ++b) {
    const SiteIndex xp = tor.neighbor(x, static_cast<int>(b), +1);
    const SiteIndex xm = tor.neighbor(x, static_cast<int>(b), -1);
    if (eta.occupied(xp) && xp != x) v += q.pair[x * d + b];
    if (eta.occupied(xm) && xm != x) v += q.pair[xm * d + b];
  }
  return v;
}

}  // namespace

std::vector<std::vector<double>> integrate_forms(const Trajectory& traj, const std::vector<double>& edges,
                                                 const FormBuilder& build, const ReplayHooks& hooks) {
  check_times(edges, traj.T);
  require(traj.jumps == traj.events.size(), "path integrals need a trajectory with retained events");
  Configuration eta = traj.initial;
  std::size_t next = 0;
  const auto& ev = traj.events;
  std::vector<std::vector<double>> out;
  std::vector<double> acc;
  double prev_edge = 0.0;

  for (std::size_t k = 0; k < edges.size(); ++k) {
    const double t0 = prev_edge;
    const double t1 = edges[k];
    if (t1 > t0) {
      const auto forms = build(t0, t1);
      if (acc.empty()) acc.assign(forms.size(), 0.0);
      require(forms.size() == acc.size(), "form count changed between cells");
      std::vector<double> val(forms.size());
      for (std::size_t j = 0; j < forms.size(); ++j) val[j] = forms[j].evaluate(eta);
      double tp = t0;
      while (next < ev.size() && ev[next].t <= t1) {
        const JumpEvent& e = ev[next];
        for (std::size_t j = 0; j < forms.size(); ++j) acc[j] += val[j] * (e.t - tp);
        for (std::size_t j = 0; j < forms.size(); ++j) val[j] -= site_weight(forms[j], eta, e.from);
        eta.set(e.from, false);
        for (std::size_t j = 0; j < forms.size(); ++j) val[j] += site_weight(forms[j], eta, e.to);
        eta.set(e.to, true);
        if (hooks.at_event) hooks.at_event(k, e);
        tp = e.t;
        ++next;
      }
      for (std::size_t j = 0; j < forms.size(); ++j) acc[j] += val[j] * (t1 - tp);
    }
    if (hooks.at_edge) hooks.at_edge(k, eta);
    out.push_back(acc);
    prev_edge = t1;
  }
  return out;
}

TestFunction TestFunction::fixed(std::vector<double> h) {
  TestFunction tf;
  const std::vector<double> zero(h.size(), 0.0);
  tf.value = [h](double) { return h; };
  tf.time_derivative = [zero](double) { return zero; };
  tf.time_dependent = false;
  return tf;
}

TestFunction TestFunction::backward(const std::vector<double>& f, double t, const HydroTrajectory& traj, std::size_t frames) {
  require(frames >= 2, "backward test function needs at least two frames");
  auto grid = std::make_shared<std::vector<std::vector<double>>>(frames);
  const double h = t / static_cast<double>(frames - 1);
  (*grid)[frames - 1] = f;
  for (std::size_t k = frames - 1; k-- > 0;) {
    (*grid)[k] = backward_semigroup((*grid)[k + 1], h * static_cast<double>(k), h * static_cast<double>(k + 1), traj);
  }
  auto interp = [grid, h, frames](double s) {
    const double pos = std::clamp(s / h, 0.0, static_cast<double>(frames - 1));
    const auto k = std::min(frames - 2, static_cast<std::size_t>(pos));
    const double w = pos - static_cast<double>(k);
    std::vector<double> out((*grid)[k].size());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = (1.0 - w) * (*grid)[k][i] + w * (*grid)[k + 1][i];
    return out;
  };
  TestFunction tf;
  tf.value = interp;
  const HydroTrajectory* tr = &traj;
  tf.time_derivative = [interp, tr](double s) {
    auto v = lambda_n(interp(s), tr->at(s), tr->field());
    for (auto& x : v) x = -x;
    return v;
  };
  tf.time_dependent = true;
  return tf;
}

DecompositionReport decompose(const Trajectory& traj, const TestFunction& H, const HydroTrajectory& u,
                              const RateTable& rates, const std::vector<double>& times, const DecomposeOptions& opt) {
  const Torus& tor = traj.initial.torus();
  require(u.torus() == tor && rates.torus == tor, "decompose inputs live on different tori");
  require(!rates.cap_active, "decomposition needs uncapped rates (n >= 2|F|)");
  require(u.final_time() >= traj.T - 1e-12, "hydro trajectory must cover [0, T]");
  check_times(times, traj.T);
  const int d = tor.dim();
  const auto dd = static_cast<std::size_t>(d);
  const double n = tor.side();
  const double scale = norm_factor(tor);
  const double qv_scale = std::pow(n, -static_cast<double>(d));
  const EdgeField& F = u.field();

  const std::vector<double> edges = refine(times, opt.max_cell);

  auto build = [&](double t0, double t1) {
    const double tm = 0.5 * (t0 + t1);
    const DensityField um = u.at(tm);
    const auto slope = u.slope(t0, t1);
    const auto h = H.value(tm);
    const auto dh = H.time_derivative(tm);
    const auto Lu = discrete_generator_L(um, F);
    const auto Lh = lambda_n(h, um, F);

    std::vector<QuadraticForm> forms;
    QuadraticForm R = QuadraticForm::zeros(tor, false);
    QuadraticForm A = QuadraticForm::zeros(tor, false);
    QuadraticForm Q = QuadraticForm::zeros(tor, true);
    QuadraticForm V = QuadraticForm::zeros(tor, true);
    for (SiteIndex x = 0; x < tor.sites(); ++x) {
      R.constant += scale * h[x] * (Lu[x] - slope[x]);
      A.add_centered_site(x, scale * (dh[x] + Lh[x]), um.u[x]);
      for (int b = 0; b < d; ++b) {
        const SiteIndex y = tor.neighbor(x, b, +1);
        const double dH = h[y] - h[x];
        Q.add_centered_pair(tor, x, b, -2.0 * n * scale * dH * F.at(x, b), um.u);
        const std::size_t e = x * dd + static_cast<std::size_t>(b);
        const double c = qv_scale * dH * dH;
        V.lin[x] += c * rates.forward[e];
        V.lin[y] += c * rates.backward[e];
        V.pair[e] -= c * (rates.forward[e] + rates.backward[e]);
      }
    }
    forms.push_back(std::move(R));
    forms.push_back(std::move(A));
    forms.push_back(std::move(Q));
    forms.push_back(std::move(V));
    return forms;
  };

  DecompositionReport rep;
  const auto h0 = H.value(0.0);
  const double X0 = fluctuation_field(traj.initial, u.at(0.0), h0);
  std::vector<double> Xe(edges.size());
  ReplayHooks hooks;
  hooks.at_edge = [&](std::size_t k, const Configuration& eta) {
    Xe[k] = fluctuation_field(eta, u.at(edges[k]), H.value(edges[k]));
  };
  std::vector<double> hc;
  std::size_t hc_cell = static_cast<std::size_t>(-1);
  hooks.at_event = [&](std::size_t cell, const JumpEvent& e) {
    if (cell != hc_cell) {
      const double t0 = cell == 0 ? 0.0 : edges[cell - 1];
      hc = H.value(0.5 * (t0 + edges[cell]));
      hc_cell = cell;
    }
    rep.max_jump = std::max(rep.max_jump, scale * std::fabs(hc[e.to] - hc[e.from]));
  };
  const auto integrals = integrate_forms(traj, edges, build, hooks);

  std::size_t k = 0;
  for (double t : times) {
    while (edges[k] < t) ++k;
    const auto& I = integrals[k];
    DecompositionRow row;
    row.t = t;
    row.X = Xe[k];
    row.X0 = X0;
    if (!I.empty()) {
      row.R = I[0];
      row.A = I[1];
      row.Q = I[2];
      row.QV = I[3];
    }
    row.M = row.X - row.X0 - row.R - row.A - row.Q;
    rep.rows.push_back(row);
  }
  return rep;
}

std::vector<double> quadratic_variation(const Trajectory& traj, const TestFunction& H, const RateTable& rates,
                                        const std::vector<double>& times, const DecomposeOptions& opt) {
  const Torus& tor = traj.initial.torus();
  require(rates.torus == tor, "rates live on a different torus");
  check_times(times, traj.T);
  const int d = tor.dim();
  const auto dd = static_cast<std::size_t>(d);
  const double qv_scale = std::pow(static_cast<double>(tor.side()), -static_cast<double>(d));
  const std::vector<double> edges = refine(times, opt.max_cell);
  auto build = [&](double t0, double t1) {
    const auto h = H.value(0.5 * (t0 + t1));
    QuadraticForm V = QuadraticForm::zeros(tor, true);
    for (SiteIndex x = 0; x < tor.sites(); ++x) {
      for (int b = 0; b < d; ++b) {
        const SiteIndex y = tor.neighbor(x, b, +1);
        const std::size_t e = x * dd + static_cast<std::size_t>(b);
        const double c = qv_scale * (h[y] - h[x]) * (h[y] - h[x]);
        V.lin[x] += c * rates.forward[e];
        V.lin[y] += c * rates.backward[e];
        V.pair[e] -= c * (rates.forward[e] + rates.backward[e]);
      }
    }
    return std::vector<QuadraticForm>{std::move(V)};
  };
  const auto integrals = integrate_forms(traj, edges, build);
  std::vector<double> out;
  std::size_t k = 0;
  for (double t : times) {
    while (edges[k] < t) ++k;
    out.push_back(integrals[k].empty() ? 0.0 : integrals[k][0]);
  }
  return out;
}

void write_decomposition_csv(const DecompositionReport& rep, std::ostream& os) {
  os << "t,X,X0term,R,A,Q,M,QV\n";
  os.precision(12);
  for (const auto& r : rep.rows) {
    os << r.t << ',' << r.X << ',' << r.X0 << ',' << r.R << ',' << r.A << ',' << r.Q << ',' << r.M << ',' << r.QV << '\n';
  }
}

double lattice_l2_sq(const std::vector<double>& f, const Torus& torus) {
  double s = 0.0;
  for (double v : f) s += v * v;
  return s * std::pow(static_cast<double>(torus.side()), -static_cast<double>(torus.dim()));
}

double limit_variance(const std::vector<double>& f, const HydroTrajectory& u, double t, std::size_t steps) {
  const Torus& tor = u.torus();
  require(f.size() == tor.sites(), "test function size mismatch");
  require(t >= 0.0 && t <= u.final_time() + 1e-12, "hydro trajectory must cover [0, t]");
  require(steps >= 1, "need at least one quadrature interval");
  if (t == 0.0) return 0.0;
  const int d = tor.dim();
  const double n = tor.side();
  const double vol = std::pow(n, -static_cast<double>(d));
  const double h = t / static_cast<double>(steps);

  auto integrand = [&](const std::vector<double>& v, double s) {
    const DensityField us = u.at(s);
    double acc = 0.0;
    for (SiteIndex x = 0; x < tor.sites(); ++x) {
      for (int b = 0; b < d; ++b) {
        const SiteIndex y = tor.neighbor(x, b, +1);
        const double mob = us.u[x] * (1.0 - us.u[x]) + us.u[y] * (1.0 - us.u[y]);
        const double g = n * (v[y] - v[x]);
        acc += mob * g * g;
      }
    }
    return acc * vol;
  };

  std::vector<double> v = f;
  double total = 0.5 * integrand(v, t);
  for (std::size_t k = steps; k-- > 0;) {
    const double s = h * static_cast<double>(k);
    v = backward_semigroup(v, s, s + h, u);
    total += (k == 0 ? 0.5 : 1.0) * integrand(v, s);
  }
  return total * h;
}

}  // namespace waseplab
