#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "waseplab/error.hpp"
#include "waseplab/flows.hpp"
#include "waseplab/fluct.hpp"
#include "waseplab/harness.hpp"
#include "waseplab/hydro.hpp"
#include "waseplab/master.hpp"
#include "waseplab/obs.hpp"
#include "waseplab/rng.hpp"
#include "waseplab/stats.hpp"
#include "waseplab/wasep.hpp"

namespace waseplab {

namespace {

std::string point(int n) { return "n=" + std::to_string(n); }

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(6);
  os << v;
  return os.str();
}

struct Setup {
  Torus torus;
  DensityField u0;
  EdgeField F;
  RateTable rates;
  HydroTrajectory hydro;
  std::vector<double> f;
};

Setup make_setup(const ExperimentConfig& cfg, int n, bool need_hydro = true) {
  Torus tor(cfg.d, n);
  DensityField u0 = sample_profile(cfg.u0, tor);
  EdgeField F = sample_dual_field(cfg.F, tor);
  RateTable rates = build_rates(F);
  HydroOptions opt;
  opt.dt = cfg.dt;
  HydroTrajectory hydro = need_hydro ? solve_hydro(u0, F, cfg.F.sup_norm(4 * n), cfg.T, opt)
                                     : HydroTrajectory::constant(u0, F, cfg.T);
  auto f = sample_profile(cfg.f, tor).u;
  return Setup{tor, std::move(u0), std::move(F), std::move(rates), std::move(hydro), std::move(f)};
}

Trajectory run_replica(const Setup& s, const ExperimentConfig& cfg, int n, std::size_t i, bool keep_events) {
  const std::uint64_t ps = point_seed(cfg.seed, n);
  Configuration eta0 = sample_profile_measure(s.u0, ps, i);
  Philox rng(ps, i, 2);
  SimulateOptions opt;
  opt.keep_events = keep_events;
  Trajectory tr = simulate(eta0, s.rates, cfg.T, rng, {}, opt);
  tr.seed = ps;
  return tr;
}

// Integral over the unit torus of |grad f|^2; exact for trig polynomials on a
// grid finer than twice the top frequency.
double continuum_dirichlet(const TrigSeries& f, int d) {
  int top = 1;
  for (const auto& t : f.terms) {
    for (int m : t.m) top = std::max(top, std::abs(m));
  }
  const int g = 4 * top + 4;
  double s = 0.0;
  std::size_t cells = 1;
  for (int i = 0; i < d; ++i) cells *= static_cast<std::size_t>(g);
  for (std::size_t c = 0; c < cells; ++c) {
    Vec3 x{0.0, 0.0, 0.0};
    std::size_t r = c;
    for (int i = 0; i < d; ++i) {
      x[static_cast<std::size_t>(i)] = static_cast<double>(r % static_cast<std::size_t>(g)) / g;
      r /= static_cast<std::size_t>(g);
    }
    const Vec3 gr = f.gradient(x, d);
    for (int i = 0; i < d; ++i) s += gr[static_cast<std::size_t>(i)] * gr[static_cast<std::size_t>(i)];
  }
  return s / static_cast<double>(cells);
}

std::vector<double> report_grid(double T, int k) {
  std::vector<double> out;
  for (int i = 1; i <= k; ++i) out.push_back(T * i / k);
  return out;
}

}  // namespace

ExperimentResult run_hydro_rate(const ExperimentConfig& cfg, int workers) {
  cfg.validate();
  require(cfg.replicas >= 2, "insufficient replicas: a standard error needs at least two");
  ExperimentResult res;
  std::vector<double> ns, means, ses;
  std::ostringstream csv;
  csv.precision(12);
  csv << "n,mean_abs_error,se,replicas\n";
  for (int n : cfg.n) {
    const Setup s = make_setup(cfg, n);
    const DensityField uT = s.hydro.at(cfg.T);
    const double vol = std::pow(static_cast<double>(n), -cfg.d);
    auto errs = run_replicas<double>(static_cast<std::size_t>(cfg.replicas), workers, [&](std::size_t i) {
      const Trajectory tr = run_replica(s, cfg, n, i, false);
      double e = 0.0;
      for (SiteIndex x = 0; x < s.torus.sites(); ++x) e += (tr.final_state.eta(x) - uT.u[x]) * s.f[x];
      return std::fabs(e * vol);
    });
    const MeanSe m = mean_se(errs);
    res.row("hydro-rate", point(n), "mean_abs_error", m.mean, m.se, m.count);
    csv << n << ',' << m.mean << ',' << m.se << ',' << m.count << '\n';
    ns.push_back(n);
    means.push_back(m.mean);
    ses.push_back(m.se);
  }
  if (ns.size() >= 2) {
    const LogLogFit fit = loglog_fit(ns, means);
    res.row("hydro-rate", "all", "slope", fit.slope, loglog_slope_se(ns, means, ses),
            static_cast<std::size_t>(cfg.replicas));
    for (std::size_t i = 0; i < ns.size(); ++i) {
      res.row("hydro-rate", point(static_cast<int>(ns[i])), "fit_residual", fit.residuals[i]);
    }
    res.check("slope in [-0.65, -0.35]", fit.slope >= -0.65 && fit.slope <= -0.35, "slope=" + fmt(fit.slope));
  }
  res.details["hydro_rate.csv"] = csv.str();
  return res;
}

ExperimentResult run_equilibrium_clt(const ExperimentConfig& cfg, int workers) {
  cfg.validate();
  require(cfg.u0.is_constant(), "equilibrium CLT needs a constant initial density");
  const double rho = cfg.u0.constant;
  require(rho > 0.0 && rho < 1.0, "density must lie in (0,1)");
  require(cfg.F.sup_divergence(64) < 1e-9, "equilibrium CLT needs a divergence-free field");
  require(cfg.replicas >= 2, "insufficient replicas: a variance needs at least two");
  ExperimentResult res;
  std::ostringstream samples;
  samples.precision(12);
  samples << "n,replica,X\n";
  for (int n : cfg.n) {
    const Setup s = make_setup(cfg, n);
    const DensityField uT = s.hydro.at(cfg.T);
    auto xs = run_replicas<double>(static_cast<std::size_t>(cfg.replicas), workers, [&](std::size_t i) {
      const Trajectory tr = run_replica(s, cfg, n, i, false);
      return fluctuation_field(tr.final_state, uT, s.f);
    });
    const MeanSe m = mean_se(xs);
    const double target = rho * (1.0 - rho) * lattice_l2_sq(s.f, s.torus);
    const double rel = target > 0.0 ? m.var / target - 1.0 : m.var;
    const KsResult ks = ks_normal(xs, m.mean, std::sqrt(m.var));
    res.row("clt", point(n), "mean", m.mean, m.se, m.count);
    res.row("clt", point(n), "variance", m.var, m.var * std::sqrt(2.0 / static_cast<double>(m.count - 1)), m.count);
    res.row("clt", point(n), "target_variance", target);
    res.row("clt", point(n), "ks_statistic", ks.statistic);
    res.row("clt", point(n), "ks_p_value", ks.p_value);
    res.check("variance within 10% at " + point(n), std::fabs(rel) <= 0.10,
              "var=" + fmt(m.var) + " target=" + fmt(target));
    res.check("KS p > 0.01 at " + point(n), ks.p_value > 0.01, "p=" + fmt(ks.p_value));
    for (std::size_t i = 0; i < xs.size(); ++i) samples << n << ',' << i << ',' << xs[i] << '\n';

    // Low modes of the field for replica 0, as a spot check of the spectral view.
    const Trajectory tr0 = run_replica(s, cfg, n, 0, false);
    const int M = cfg.modes > 0 ? cfg.modes : default_mode_cutoff(cfg.d);
    const FourierField modes = fluctuation_modes(tr0.final_state, uT, M);
    std::ostringstream mcsv;
    write_fourier_csv(modes, mcsv);
    res.details["modes_" + point(n) + ".csv"] = mcsv.str();
    res.row("clt", point(n), "sobolev_norm_minus1_replica0", sobolev_norm(modes, -1.0));
  }
  res.details["clt_samples.csv"] = samples.str();
  return res;
}

ExperimentResult run_martingale(const ExperimentConfig& cfg, int workers) {
  cfg.validate();
  require(cfg.u0.is_constant(), "martingale check runs at equilibrium: u0 must be constant");
  const double rho = cfg.u0.constant;
  require(cfg.F.sup_divergence(64) < 1e-9, "martingale check needs a divergence-free field");
  require(cfg.replicas >= 2, "insufficient replicas");
  ExperimentResult res;
  std::ostringstream csv;
  csv.precision(12);
  csv << "n,replica,M,QV,R,A,Q\n";
  for (int n : cfg.n) {
    const Setup s = make_setup(cfg, n);
    require(!s.rates.cap_active, "rates hit the 1/2 floor; increase n");
    const auto times = report_grid(cfg.T, cfg.report_times);
    const TestFunction H = TestFunction::fixed(s.f);
    auto rows = run_replicas<DecompositionRow>(static_cast<std::size_t>(cfg.replicas), workers, [&](std::size_t i) {
      const Trajectory tr = run_replica(s, cfg, n, i, true);
      return decompose(tr, H, s.hydro, s.rates, times, {}).rows.back();
    });
    std::vector<double> M, QV;
    for (std::size_t i = 0; i < rows.size(); ++i) {
      M.push_back(rows[i].M);
      QV.push_back(rows[i].QV);
      csv << n << ',' << i << ',' << rows[i].M << ',' << rows[i].QV << ',' << rows[i].R << ',' << rows[i].A << ','
          << rows[i].Q << '\n';
    }
    const MeanSe mM = mean_se(M);
    const MeanSe mQ = mean_se(QV);
    const double target = cfg.T * 2.0 * rho * (1.0 - rho) * continuum_dirichlet(cfg.f, cfg.d);
    const double ratio = mM.var / mQ.mean;
    res.row("qv", point(n), "mean_QV", mQ.mean, mQ.se, mQ.count);
    res.row("qv", point(n), "target_QV", target);
    res.row("qv", point(n), "mean_M", mM.mean, mM.se, mM.count);
    res.row("qv", point(n), "var_M_over_mean_QV", ratio,
            ratio * std::sqrt(2.0 / static_cast<double>(mM.count - 1)), mM.count);
    res.check("E<M> within 5% of limit at " + point(n), std::fabs(mQ.mean / target - 1.0) <= 0.05,
              "E<M>=" + fmt(mQ.mean) + " limit=" + fmt(target));
    res.check("mean M within 3 SE of 0 at " + point(n), std::fabs(mM.mean) <= 3.0 * mM.se,
              "mean=" + fmt(mM.mean) + " se=" + fmt(mM.se));
    res.check("Var M / E<M> in [0.95, 1.05] at " + point(n), ratio >= 0.95 && ratio <= 1.05, "ratio=" + fmt(ratio));
  }
  res.details["martingale.csv"] = csv.str();
  return res;
}

ExperimentResult run_bg_decay(const ExperimentConfig& cfg, int workers) {
  cfg.validate();
  require(cfg.replicas >= 2, "insufficient replicas");
  ExperimentResult res;
  std::vector<double> ns, means, ses;
  std::ostringstream csv;
  csv.precision(12);
  csv << "n,mean_abs,se,replicas\n";
  const LocalSet A = LocalSet::origin(cfg.d);
  for (int n : cfg.n) {
    const Setup s = make_setup(cfg, n);
    const Torus& tor = s.torus;
    const double scale = std::pow(static_cast<double>(n), -0.5 * cfg.d);
    const int cells = 200;
    const auto edges = report_grid(cfg.T, cells);
    // A = {0}: the product over A is a single omega, paired with omega_{x+e_1}.
    require(A.offsets.size() == 1, "bg experiment uses the single-site local set");
    auto build = [&](double t0, double t1) {
      const DensityField um = s.hydro.at(0.5 * (t0 + t1));
      QuadraticForm q = QuadraticForm::zeros(tor, true);
      for (SiteIndex x = 0; x < tor.sites(); ++x) {
        // omega_x omega_y = (eta_x - u_x)(eta_y - u_y) / (chi_x chi_y), chi = u(1-u)
        const SiteIndex y = tor.neighbor(x, 0, +1);
        const double chi = um.u[x] * (1.0 - um.u[x]) * um.u[y] * (1.0 - um.u[y]);
        q.add_centered_pair(tor, x, 0, scale * s.f[x] / chi, um.u);
      }
      return std::vector<QuadraticForm>{std::move(q)};
    };
    auto vals = run_replicas<double>(static_cast<std::size_t>(cfg.replicas), workers, [&](std::size_t i) {
      const Trajectory tr = run_replica(s, cfg, n, i, true);
      if (cfg.T == 0.0) return 0.0;
      const auto I = integrate_forms(tr, edges, build);
      return std::fabs(I.back().empty() ? 0.0 : I.back()[0]);
    });
    const MeanSe m = mean_se(vals);
    res.row("bg", point(n), "mean_abs_integral", m.mean, m.se, m.count);
    csv << n << ',' << m.mean << ',' << m.se << ',' << m.count << '\n';
    ns.push_back(n);
    means.push_back(m.mean);
    ses.push_back(m.se);
  }
  bool decreasing = true;
  for (std::size_t i = 1; i < means.size(); ++i) decreasing = decreasing && means[i] < means[i - 1];
  std::string detail;
  for (double v : means) detail += fmt(v) + " ";
  res.check("estimate strictly decreasing in n", decreasing, detail);
  if (ns.size() >= 2 && std::all_of(means.begin(), means.end(), [](double v) { return v > 0.0; })) {
    const LogLogFit fit = loglog_fit(ns, means);
    res.row("bg", "all", "slope", fit.slope, loglog_slope_se(ns, means, ses), static_cast<std::size_t>(cfg.replicas));
  }
  res.details["bg.csv"] = csv.str();
  return res;
}

ExperimentResult run_entropy_growth(const ExperimentConfig& cfg, int /*workers*/) {
  cfg.validate();
  ExperimentResult res;
  std::vector<double> sups;
  for (int n : cfg.n) {
    Torus tor(cfg.d, n);
    require(tor.sites() <= kMaxMasterSites, "lattice too large for the master equation");
    const DensityField u0 = sample_profile(cfg.u0, tor);
    const EdgeField F = sample_dual_field(cfg.F, tor);
    const StateDistribution p0 = product_measure_vector(u0);
    const EntropyReport rep = yau_check(p0, u0, F, cfg.T, 1, cfg.dt);
    std::ostringstream csv;
    write_entropy_csv(rep, csv);
    res.details["entropy_" + point(n) + ".csv"] = csv.str();
    res.row("entropy", point(n), "sup_H", rep.sup_H);
    res.row("entropy", point(n), "max_yau_slack", rep.max_slack);
    res.check("Yau slack <= 1e-6 at " + point(n), rep.max_slack <= 1e-6, "slack=" + fmt(rep.max_slack));
    sups.push_back(rep.sup_H);
  }
  if (!sups.empty()) {
    const double first = sups.front();
    const double top = *std::max_element(sups.begin(), sups.end());
    std::string detail;
    for (double v : sups) detail += fmt(v) + " ";
    res.check("sup_t H grows by at most 20% across n", top <= 1.2 * first + 1e-12, detail);
  }
  return res;
}

ExperimentResult run_flow_sweep(const ExperimentConfig& cfg, int /*workers*/) {
  cfg.validate();
  ExperimentResult res;
  std::ostringstream csv;
  csv.precision(12);
  csv << "d,ell,sum_sq,g_d,energy_ratio,sum_abs_over_ell,max_abs,support_extent,divergence_exact\n";
  std::vector<double> energy, mass;
  bool exact = true;
  bool support = true;
  sweep_point_to_cube(cfg.ell_max, cfg.d, [&](int ell, const Flow& psi) {
    if (ell < cfg.ell_min) return;
    const Flow phi = qell_from_cube(psi, ell);
    const ExactMeasure target = subtract(point_mass(cfg.d), to_exact(box_measures(ell, cfg.d).q));
    const bool ok = exactly_equal(divergence(phi), target);
    const int ext = phi.support_extent();
    exact = exact && ok;
    support = support && ext <= 2 * ell - 1;
    const double ss = phi.sum_sq();
    const double g = g_d(cfg.d, ell);
    energy.push_back(ss / g);
    mass.push_back(phi.sum_abs() / ell);
    csv << cfg.d << ',' << ell << ',' << ss << ',' << g << ',' << ss / g << ',' << phi.sum_abs() / ell << ','
        << phi.max_abs() << ',' << ext << ',' << (ok ? 1 : 0) << '\n';
    res.row("flows", "d=" + std::to_string(cfg.d) + ",ell=" + std::to_string(ell), "energy_over_g", ss / g);
  });
  res.details["flows_d" + std::to_string(cfg.d) + ".csv"] = csv.str();
  res.check("divergence equals delta_0 - q_ell exactly", exact, "");
  res.check("support inside the box of side 2 ell - 1", support, "");
  if (!energy.empty()) {
    const auto [emin, emax] = std::minmax_element(energy.begin(), energy.end());
    const auto [amin, amax] = std::minmax_element(mass.begin(), mass.end());
    res.row("flows", "d=" + std::to_string(cfg.d), "energy_ratio_spread", *emax / *emin);
    res.row("flows", "d=" + std::to_string(cfg.d), "mass_ratio_spread", *amax / *amin);
    res.check("energy / g_d spread <= 4", *emax / *emin <= 4.0, "spread=" + fmt(*emax / *emin));
    res.check("sum|phi| / ell spread <= 4", *amax / *amin <= 4.0, "spread=" + fmt(*amax / *amin));
  }
  return res;
}

ExperimentResult run_simulate(const ExperimentConfig& cfg, int /*workers*/) {
  cfg.validate();
  ExperimentResult res;
  for (int n : cfg.n) {
    const Setup s = make_setup(cfg, n, false);
    const std::uint64_t ps = point_seed(cfg.seed, n);
    const Configuration eta0 = sample_profile_measure(s.u0, ps, 0);
    Philox rng(ps, 0, 2);
    const Trajectory tr = simulate(eta0, s.rates, cfg.T, rng, report_grid(cfg.T, cfg.report_times), {});
    std::ostringstream csv;
    write_snapshots_csv(tr, csv);
    res.details["snapshots_" + point(n) + ".csv"] = csv.str();
    res.row("simulate", point(n), "particles", static_cast<double>(tr.final_state.count()));
    res.row("simulate", point(n), "jumps", static_cast<double>(tr.jumps));
    res.row("simulate", point(n), "proposals", static_cast<double>(tr.proposals));
    res.check("particle number conserved at " + point(n), tr.final_state.count() == eta0.count(), "");
  }
  return res;
}

ExperimentResult run_solve_pde(const ExperimentConfig& cfg, int /*workers*/) {
  cfg.validate();
  ExperimentResult res;
  for (int n : cfg.n) {
    const Setup s = make_setup(cfg, n);
    std::ostringstream csv;
    csv.precision(12);
    csv << "t,site,u\n";
    double mass0 = 0.0, mass1 = 0.0, lo = 1.0, hi = 0.0;
    for (double v : s.u0.u) mass0 += v;
    for (double t : report_grid(cfg.T, cfg.report_times)) {
      const DensityField u = s.hydro.at(t);
      for (SiteIndex x = 0; x < s.torus.sites(); ++x) csv << t << ',' << x << ',' << u.u[x] << '\n';
    }
    for (double v : s.hydro.frames().back()) {
      mass1 += v;
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
    res.details["density_" + point(n) + ".csv"] = csv.str();
    res.row("solve-pde", point(n), "mass_drift", mass1 - mass0);
    res.row("solve-pde", point(n), "min_u", lo);
    res.row("solve-pde", point(n), "max_u", hi);
    res.check("mass conserved at " + point(n), std::fabs(mass1 - mass0) <= 1e-9 * static_cast<double>(s.torus.sites()),
              "drift=" + fmt(mass1 - mass0));
    res.check("density stays in [0,1] at " + point(n), lo >= 0.0 && hi <= 1.0, "");
  }
  return res;
}

ExperimentResult run_master_oracle(const ExperimentConfig& cfg, int /*workers*/) {
  cfg.validate();
  ExperimentResult res;
  for (int n : cfg.n) {
    Torus tor(cfg.d, n);
    require(tor.sites() <= kMaxMasterSites, "lattice too large for the master equation");
    const DensityField u0 = sample_profile(cfg.u0, tor);
    const EdgeField F = sample_dual_field(cfg.F, tor);
    const RateTable rates = build_rates(F);
    const auto udot = discrete_generator_L(u0, F);
    double diff = 0.0;
    if (!rates.cap_active) {
      const auto brute = adjoint_one(u0, udot, rates, F, AdjointMode::brute);
      const auto closed = adjoint_one(u0, udot, rates, F, AdjointMode::closed);
      for (std::size_t s = 0; s < brute.size(); ++s) diff = std::max(diff, std::fabs(brute[s] - closed[s]));
      res.check("adjoint brute vs closed <= 1e-10 at " + point(n), diff <= 1e-10, "diff=" + fmt(diff));
    }
    res.row("master-oracle", point(n), "adjoint_max_diff", diff);
    const EntropyReport rep = yau_check(product_measure_vector(u0), u0, F, cfg.T, 1, cfg.dt);
    std::ostringstream csv;
    write_entropy_csv(rep, csv);
    res.details["master_" + point(n) + ".csv"] = csv.str();
    res.row("master-oracle", point(n), "sup_H", rep.sup_H);
    res.row("master-oracle", point(n), "max_yau_slack", rep.max_slack);
    res.check("Yau slack <= 1e-6 at " + point(n), rep.max_slack <= 1e-6, "slack=" + fmt(rep.max_slack));
  }
  return res;
}

ExperimentFn experiment_by_name(const std::string& name) {
  if (name == "hydro-rate") return run_hydro_rate;
  if (name == "clt") return run_equilibrium_clt;
  if (name == "bg") return run_bg_decay;
  if (name == "entropy") return run_entropy_growth;
  if (name == "flows") return run_flow_sweep;
  if (name == "qv") return run_martingale;
  if (name == "simulate") return run_simulate;
  if (name == "solve-pde") return run_solve_pde;
  if (name == "master-oracle") return run_master_oracle;
  throw PreconditionError("unknown experiment: " + name);
}

std::vector<std::string> experiment_names() {
  return {"hydro-rate", "clt", "bg", "entropy", "flows", "qv", "simulate", "solve-pde", "master-oracle"};
}

}  // namespace waseplab
