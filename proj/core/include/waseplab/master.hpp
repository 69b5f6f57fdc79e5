#pragma once

#include <cstdint>
#include <iosfwd>
#include <vector>

#include "waseplab/hydro.hpp"
#include "waseplab/wasep.hpp"

namespace waseplab {

inline constexpr std::size_t kMaxMasterSites = 20;

/// Probability vector over Omega_n; configuration eta is the index whose
/// bit x is eta_x.
struct StateDistribution {
  Torus torus;
  std::vector<double> p;
};

StateDistribution product_measure_vector(const DensityField& u);

/// Oriented edge (x, x+e_b) with both jump rates.
struct MasterEdge {
  SiteIndex x;
  SiteIndex y;
  double forward;
  double backward;
};

std::vector<MasterEdge> master_edges(const RateTable& rates);

/// (L g)(eta) = sum_zeta r(eta, zeta) (g(zeta) - g(eta)).
std::vector<double> apply_generator(const std::vector<double>& g, const RateTable& rates);
/// Forward equation right-hand side: (L^T p)(eta) = sum_zeta r(zeta, eta) p(zeta) - q(eta) p(eta).
std::vector<double> apply_forward(const std::vector<double>& p, const RateTable& rates);
/// Adjoint of L in L^2(mu).
std::vector<double> apply_adjoint(const std::vector<double>& g, const std::vector<double>& mu, const RateTable& rates);

/// 0.1 / max_eta sum_zeta |L^T_{eta zeta}|.
double master_dt(const RateTable& rates);

struct MasterSolution {
  std::vector<double> times;
  std::vector<std::vector<double>> p;
};

MasterSolution forward_solve(const StateDistribution& p0, const RateTable& rates, double T, double dt = 0.0,
                             std::size_t store_every = 1);

double relative_entropy(const std::vector<double>& p, const std::vector<double>& mu);

struct DirichletCarre {
  double dirichlet = 0.0;  ///< D(sqrt f; mu)
  double carre = 0.0;      ///< int Gamma_n sqrt f dmu
};

DirichletCarre dirichlet_and_carre(const std::vector<double>& f, const std::vector<double>& mu, const RateTable& rates);

enum class AdjointMode { brute, closed };

/// J_t = L*_t 1 - d/dt log psi_t, per configuration. udot is du/dt.
std::vector<double> adjoint_one(const DensityField& u, const std::vector<double>& udot, const RateTable& rates,
                                const EdgeField& F, AdjointMode mode);

struct EntropyRow {
  double t = 0.0;
  double H = 0.0;
  double dH = 0.0;         ///< centered finite difference
  double dH_exact = 0.0;   ///< from the forward equation
  double dirichlet = 0.0;
  double carre = 0.0;
  double correction = 0.0; ///< int J f dmu
  double slack = 0.0;      ///< dH - (-carre + correction)
};

struct EntropyReport {
  std::vector<EntropyRow> rows;
  double sup_H = 0.0;
  double max_slack = 0.0;
};

/// Runs the master equation from p0 and the hydrodynamic profile from u0 in
/// lockstep and evaluates both sides of Yau's inequality every
/// report_every steps.
EntropyReport yau_check(const StateDistribution& p0, const DensityField& u0, const EdgeField& F, double T,
                        std::size_t report_every = 1, double dt = 0.0);

void write_entropy_csv(const EntropyReport& rep, std::ostream& os);

/// Integration by parts residual for the exchange x <-> y; h must satisfy
/// h(eta^{xy}) = h(eta).
double ibp_residual(const std::vector<double>& h, const std::vector<double>& f, SiteIndex x, SiteIndex y,
                    const DensityField& u);

}  // namespace waseplab
