#include "waseplab/hydro.hpp"

#include <algorithm>
#include <cmath>

#include "waseplab/error.hpp"

namespace waseplab {

namespace {

std::size_t idx(SiteIndex x, int b, int d) { return static_cast<std::size_t>(x) * static_cast<std::size_t>(d) + static_cast<std::size_t>(b); }

void axpy(std::vector<double>& out, const std::vector<double>& a, double h, const std::vector<double>& k) {
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = a[i] + h * k[i];
}

}  // namespace

double EdgeField::sup() const {
  double m = 0.0;
  for (double v : values) m = std::max(m, std::fabs(v));
  return m;
}

EdgeField sample_dual_field(const VectorFieldSpec& spec, const Torus& torus) {
  require(spec.d == torus.dim(), "field and torus dimensions differ");
  const int d = torus.dim();
  const double n = torus.side();
  EdgeField out{torus, std::vector<double>(torus.sites() * static_cast<std::size_t>(d), 0.0)};
  if (spec.kind == FieldKind::zero) return out;
  for (SiteIndex x = 0; x < torus.sites(); ++x) {
    const Vec3 p = torus.position(x);
    for (int b = 0; b < d; ++b) {
      Vec3 q = p;
      q[static_cast<std::size_t>(b)] += 0.5 / n;
      out.values[idx(x, b, d)] = spec.components[static_cast<std::size_t>(b)].value(q, d);
    }
  }
  return out;
}

DensityField sample_profile(const TrigSeries& profile, const Torus& torus) {
  DensityField out{torus, std::vector<double>(torus.sites()), 0.0};
  for (SiteIndex x = 0; x < torus.sites(); ++x) out.u[x] = profile.value(torus.position(x), torus.dim());
  return out;
}

std::vector<double> discrete_generator_L(const DensityField& field, const EdgeField& F) {
  const Torus& tor = field.torus;
  const int d = tor.dim();
  const double n = tor.side();
  const double n2 = n * n;
  const auto& u = field.u;
  std::vector<double> out(tor.sites(), 0.0);
  for (SiteIndex x = 0; x < tor.sites(); ++x) {
    double acc = 0.0;
    const double ux = u[x];
    for (int b = 0; b < d; ++b) {
      const SiteIndex xp = tor.neighbor(x, b, +1);
      const SiteIndex xm = tor.neighbor(x, b, -1);
      const double up = u[xp];
      const double um = u[xm];
      acc += n2 * (up + um - 2.0 * ux);
      acc -= n * (F.values[idx(x, b, d)] * (ux + up - 2.0 * ux * up) -
                  F.values[idx(xm, b, d)] * (um + ux - 2.0 * um * ux));
    }
    out[x] = acc;
  }
  return out;
}

std::vector<double> lambda_n(const std::vector<double>& f, const DensityField& field, const EdgeField& F) {
  const Torus& tor = field.torus;
  const int d = tor.dim();
  const double n = tor.side();
  const double n2 = n * n;
  const auto& u = field.u;
  std::vector<double> out(tor.sites(), 0.0);
  for (SiteIndex x = 0; x < tor.sites(); ++x) {
    double acc = 0.0;
    const double fx = f[x];
    for (int b = 0; b < d; ++b) {
      const SiteIndex xp = tor.neighbor(x, b, +1);
      const SiteIndex xm = tor.neighbor(x, b, -1);
      acc += n2 * (f[xp] + f[xm] - 2.0 * fx);
      acc += (1.0 - 2.0 * u[xp]) * F.values[idx(x, b, d)] * n * (f[xp] - fx);
      acc += (1.0 - 2.0 * u[xm]) * F.values[idx(xm, b, d)] * n * (fx - f[xm]);
    }
    out[x] = acc;
  }
  return out;
}

double continuum_hydro_rhs(const TrigSeries& u, const VectorFieldSpec& F, const Vec3& x) {
  const int d = F.d;
  const double uv = u.value(x, d);
  const Vec3 gu = u.gradient(x, d);
  const Vec3 fv = F.value(x);
  double adv = 0.0;
  for (int i = 0; i < d; ++i) adv += gu[static_cast<std::size_t>(i)] * fv[static_cast<std::size_t>(i)];
  return u.laplacian(x, d) - 2.0 * ((1.0 - 2.0 * uv) * adv + uv * (1.0 - uv) * F.divergence(x));
}

double continuum_backward_operator(const TrigSeries& f, const TrigSeries& u, const VectorFieldSpec& F, const Vec3& x) {
  const int d = F.d;
  const Vec3 gf = f.gradient(x, d);
  const Vec3 fv = F.value(x);
  double adv = 0.0;
  for (int i = 0; i < d; ++i) adv += gf[static_cast<std::size_t>(i)] * fv[static_cast<std::size_t>(i)];
  return f.laplacian(x, d) + 2.0 * (1.0 - 2.0 * u.value(x, d)) * adv;
}

double eps1(double eps0, double sup_div, double T) {
  require(eps0 > 0.0 && eps0 <= 0.5, "eps0 must lie in (0, 1/2]");
  return eps0 / (eps0 + (1.0 - eps0) * std::exp(2.0 * sup_div * T));
}

double default_hydro_dt(const Torus& torus, double sup_F) {
  const double n = torus.side();
  return 0.2 / (2.0 * torus.dim() * n * n + 2.0 * n * sup_F);
}

double max_hydro_dt(const Torus& torus, double sup_F) { return 5.0 * default_hydro_dt(torus, sup_F); }

std::vector<double> hydro_rk4_step(const std::vector<double>& u, const EdgeField& F, double dt) {
  const Torus& tor = F.torus;
  DensityField w{tor, u, 0.0};
  const auto k1 = discrete_generator_L(w, F);
  axpy(w.u, u, 0.5 * dt, k1);
  const auto k2 = discrete_generator_L(w, F);
  axpy(w.u, u, 0.5 * dt, k2);
  const auto k3 = discrete_generator_L(w, F);
  axpy(w.u, u, dt, k3);
  const auto k4 = discrete_generator_L(w, F);
  std::vector<double> out(u.size());
  for (std::size_t i = 0; i < u.size(); ++i) out[i] = u[i] + dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
  return out;
}

HydroTrajectory::HydroTrajectory(Torus torus, EdgeField F, std::vector<double> times, std::vector<std::vector<double>> frames)
    : torus_(torus), F_(std::move(F)), times_(std::move(times)), frames_(std::move(frames)) {
  require(!times_.empty() && times_.size() == frames_.size(), "trajectory needs matching times and frames");
  for (std::size_t i = 1; i < times_.size(); ++i) require(times_[i] > times_[i - 1], "trajectory times must increase");
}

HydroTrajectory HydroTrajectory::constant(const DensityField& u0, const EdgeField& F, double T) {
  if (T <= 0.0) return HydroTrajectory(u0.torus, F, {0.0}, {u0.u});
  return HydroTrajectory(u0.torus, F, {0.0, T}, {u0.u, u0.u});
}

DensityField HydroTrajectory::at(double t) const {
  require(t >= times_.front() - 1e-12 && t <= times_.back() + 1e-12, "time outside the hydro trajectory");
  if (times_.size() == 1 || t <= times_.front()) return DensityField{torus_, frames_.front(), t};
  if (t >= times_.back()) return DensityField{torus_, frames_.back(), t};
  const auto it = std::upper_bound(times_.begin(), times_.end(), t);
  const std::size_t k = static_cast<std::size_t>(it - times_.begin());
  const double t0 = times_[k - 1];
  const double t1 = times_[k];
  const double w = (t - t0) / (t1 - t0);
  DensityField out{torus_, std::vector<double>(frames_[k].size()), t};
  for (std::size_t i = 0; i < out.u.size(); ++i) out.u[i] = (1.0 - w) * frames_[k - 1][i] + w * frames_[k][i];
  return out;
}

std::vector<double> HydroTrajectory::slope(double t0, double t1) const {
  require(t1 > t0, "slope needs t1 > t0");
  const auto a = at(t0);
  const auto b = at(t1);
  std::vector<double> out(a.u.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = (b.u[i] - a.u[i]) / (t1 - t0);
  return out;
}

std::vector<double> HydroTrajectory::derivative(double t) const { return discrete_generator_L(at(t), F_); }

HydroTrajectory solve_hydro(const DensityField& u0, const VectorFieldSpec& spec, double T, const HydroOptions& opt) {
  const int grid = 4 * u0.torus.side();
  return solve_hydro(u0, sample_dual_field(spec, u0.torus), spec.sup_norm(grid), T, opt);
}

HydroTrajectory solve_hydro(const DensityField& u0, const EdgeField& F, double sup_F, double T, const HydroOptions& opt) {
  require(T >= 0.0, "final time must be nonnegative");
  for (double v : u0.u) require(v > 0.0 && v < 1.0, "initial profile must lie strictly inside (0,1)");
  const Torus& tor = u0.torus;
  const double dt_req = opt.dt > 0.0 ? opt.dt : default_hydro_dt(tor, sup_F);
  require(dt_req <= max_hydro_dt(tor, sup_F), "time step violates the stability bound");
  if (T == 0.0) return HydroTrajectory(tor, F, {0.0}, {u0.u});

  const auto steps = static_cast<std::size_t>(std::ceil(T / dt_req - 1e-9));
  const double dt = T / static_cast<double>(steps);
  std::size_t stride = 1;
  if (opt.frame_dt > 0.0) {
    stride = std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(opt.frame_dt / dt)));
  } else if (opt.max_frames > 1) {
    stride = std::max<std::size_t>(1, (steps + opt.max_frames - 2) / (opt.max_frames - 1));
  }

  std::vector<double> times{0.0};
  std::vector<std::vector<double>> frames{u0.u};
  std::vector<double> u = u0.u;
  for (std::size_t s = 1; s <= steps; ++s) {
    u = hydro_rk4_step(u, F, dt);
    if (s % stride == 0 || s == steps) {
      times.push_back(static_cast<double>(s) * dt);
      frames.push_back(u);
    }
  }
  for (double v : u) {
    if (!std::isfinite(v)) throw NumericalError("hydro solution is not finite");
  }
  return HydroTrajectory(tor, F, std::move(times), std::move(frames));
}

std::vector<double> backward_semigroup(const std::vector<double>& f, double s, double t, const HydroTrajectory& traj, double dt) {
  require(s <= t, "backward_semigroup requires s <= t");
  const Torus& tor = traj.torus();
  require(f.size() == tor.sites(), "test function size mismatch");
  if (s == t) return f;
  const double h_req = dt > 0.0 ? dt : default_hydro_dt(tor, traj.field().sup());
  require(h_req <= max_hydro_dt(tor, traj.field().sup()), "time step violates the stability bound");
  const auto steps = static_cast<std::size_t>(std::ceil((t - s) / h_req - 1e-9));
  const double h = (t - s) / static_cast<double>(steps);
  const EdgeField& F = traj.field();

  // tau = t - r runs forward; dv/dtau = Lambda_{t - tau} v.
  std::vector<double> v = f;
  std::vector<double> w(v.size());
  for (std::size_t k = 0; k < steps; ++k) {
    const double r0 = t - static_cast<double>(k) * h;
    const auto u0 = traj.at(std::max(s, r0));
    const auto um = traj.at(std::max(s, r0 - 0.5 * h));
    const auto u1 = traj.at(std::max(s, r0 - h));
    const auto k1 = lambda_n(v, u0, F);
    axpy(w, v, 0.5 * h, k1);
    const auto k2 = lambda_n(w, um, F);
    axpy(w, v, 0.5 * h, k2);
    const auto k3 = lambda_n(w, um, F);
    axpy(w, v, h, k3);
    const auto k4 = lambda_n(w, u1, F);
    for (std::size_t i = 0; i < v.size(); ++i) v[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
  }
  return v;
}

}  // namespace waseplab
