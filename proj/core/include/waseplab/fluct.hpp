#pragma once

#include <complex>
#include <functional>
#include <iosfwd>
#include <vector>

#include "waseplab/hydro.hpp"
#include "waseplab/wasep.hpp"

namespace waseplab {

/// X(f) = n^{-d/2} sum_x (eta_x - u_x) f_x with f sampled at x/n.
double fluctuation_field(const Configuration& eta, const DensityField& u, const std::vector<double>& f);

/// Coefficients c(m) for ||m||_inf <= M, stored densely over [-M, M]^d.
struct FourierField {
  int d = 1;
  int M = 0;
  std::vector<std::complex<double>> c;

  static FourierField zeros(int d, int M);
  std::size_t index(const std::array<int, kMaxDim>& m) const;
  std::array<int, kMaxDim> mode(std::size_t i) const;
  std::complex<double>& at(const std::array<int, kMaxDim>& m) { return c[index(m)]; }
  const std::complex<double>& at(const std::array<int, kMaxDim>& m) const { return c[index(m)]; }
  /// Largest |c(-m) - conj c(m)|.
  double conjugate_asymmetry() const;
};

int default_mode_cutoff(int d);

/// X(phi_m) for phi_m(x) = exp(2 pi i m.x), all ||m||_inf <= M.
FourierField fluctuation_modes(const Configuration& eta, const DensityField& u, int M);

/// (sum_m |c(m)|^2 (1 + |m|^2)^k)^{1/2}
double sobolev_norm(const FourierField& c, double k);

void write_fourier_csv(const FourierField& c, std::ostream& os);

/// c + sum_x lin_x eta_x + sum_{x,b} pair_{x,b} eta_x eta_{x+b}.
struct QuadraticForm {
  double constant = 0.0;
  std::vector<double> lin;
  std::vector<double> pair;  ///< [x * d + b]

  static QuadraticForm zeros(const Torus& torus, bool with_pairs);
  double evaluate(const Configuration& eta) const;
  /// Adds coef (eta_x - u_x)(eta_y - u_y) for y = x + e_b.
  void add_centered_pair(const Torus& torus, SiteIndex x, int b, double coef, const std::vector<double>& u);
  /// Adds coef (eta_x - u_x).
  void add_centered_site(SiteIndex x, double coef, double ux);
};

/// Builds the integrands for one time cell [t0, t1].
using FormBuilder = std::function<std::vector<QuadraticForm>(double t0, double t1)>;

struct ReplayHooks {
  /// Called with the configuration at each cell edge, in order.
  std::function<void(std::size_t edge, const Configuration& eta)> at_edge;
  /// Called for every jump with the cell it falls in.
  std::function<void(std::size_t cell, const JumpEvent& ev)> at_event;
};

/// Integrates quadratic forms along a retained-event trajectory. The forms
/// are rebuilt on each cell of the partition; between events eta is
/// constant so each cell is integrated exactly. Returns the running
/// integrals at every cell edge: result[k][j] = int_0^{edges[k]} form j.
std::vector<std::vector<double>> integrate_forms(const Trajectory& traj, const std::vector<double>& edges,
                                                 const FormBuilder& build, const ReplayHooks& hooks = {});

/// Test function H_s on the lattice, possibly time dependent.
struct TestFunction {
  std::function<std::vector<double>(double)> value;
  /// d/ds H_s
  std::function<std::vector<double>(double)> time_derivative;
  bool time_dependent = false;

  static TestFunction fixed(std::vector<double> h);
  /// H_s = P_{s,t} f on a grid of frames, linearly interpolated; the time
  /// derivative is -Lambda_s H_s.
  static TestFunction backward(const std::vector<double>& f, double t, const HydroTrajectory& traj, std::size_t frames);
};

struct DecompositionRow {
  double t = 0.0;
  double X = 0.0;
  double X0 = 0.0;
  double R = 0.0;
  double A = 0.0;
  double Q = 0.0;
  double M = 0.0;
  double QV = 0.0;
};

struct DecompositionReport {
  std::vector<DecompositionRow> rows;
  double max_jump = 0.0;  ///< largest |jump| of X_t(H)
};

struct DecomposeOptions {
  /// Cells are refined until no cell exceeds this width; 0 uses the report
  /// times only (exact when u and H do not depend on time).
  double max_cell = 0.0;
};

/// X_t(H_t) = X_0(H_0) + R + A + Q + M at each report time, with M the
/// residual, and the running quadratic variation of M.
DecompositionReport decompose(const Trajectory& traj, const TestFunction& H, const HydroTrajectory& u,
                              const RateTable& rates, const std::vector<double>& times,
                              const DecomposeOptions& opt = {});

/// <M>_t at each report time.
std::vector<double> quadratic_variation(const Trajectory& traj, const TestFunction& H, const RateTable& rates,
                                        const std::vector<double>& times, const DecomposeOptions& opt = {});

void write_decomposition_csv(const DecompositionReport& rep, std::ostream& os);

/// int_0^t int 2u(1-u) |grad P_{s,t} f|^2 dx ds, trapezoid in s over `steps`
/// intervals, discrete gradients on the lattice.
double limit_variance(const std::vector<double>& f, const HydroTrajectory& u, double t, std::size_t steps = 200);

/// n^{-d} sum_x f_x^2, the lattice L^2 norm squared.
double lattice_l2_sq(const std::vector<double>& f, const Torus& torus);

}  // namespace waseplab
