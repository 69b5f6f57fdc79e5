#pragma once

#include <vector>

#include "waseplab/field_spec.hpp"
#include "waseplab/lattice.hpp"

namespace waseplab {

/// Real field on the sites of a torus.
struct DensityField {
  Torus torus;
  std::vector<double> u;
  double t = 0.0;

  double operator[](std::size_t i) const { return u[i]; }
};

/// F_b^n(x) = F(x/n + e_b/2n) . e_b, stored at [x * d + b].
struct EdgeField {
  Torus torus;
  std::vector<double> values;

  double at(SiteIndex x, int b) const { return values[static_cast<std::size_t>(x) * static_cast<std::size_t>(torus.dim()) + static_cast<std::size_t>(b)]; }
  double sup() const;
};

EdgeField sample_dual_field(const VectorFieldSpec& spec, const Torus& torus);
DensityField sample_profile(const TrigSeries& profile, const Torus& torus);

/// The discrete hydrodynamic operator applied to u.
std::vector<double> discrete_generator_L(const DensityField& u, const EdgeField& F);

/// Lambda_t^n f: discrete Laplacian plus (1-2u) F drift differences.
std::vector<double> lambda_n(const std::vector<double>& f, const DensityField& u, const EdgeField& F);

/// Continuum targets: Delta u - 2 div(u(1-u)F) and Delta f + 2(1-2u) F.grad f.
double continuum_hydro_rhs(const TrigSeries& u, const VectorFieldSpec& F, const Vec3& x);
double continuum_backward_operator(const TrigSeries& f, const TrigSeries& u, const VectorFieldSpec& F, const Vec3& x);

double eps1(double eps0, double sup_div, double T);

double default_hydro_dt(const Torus& torus, double sup_F);
/// Largest accepted step; RK4 stays stable well inside it.
double max_hydro_dt(const Torus& torus, double sup_F);

/// Stored solution of the semi-discrete equation du/dt = L^n u, sampled at
/// uniformly spaced frames and linearly interpolated between them.
class HydroTrajectory {
 public:
  HydroTrajectory(Torus torus, EdgeField F, std::vector<double> times, std::vector<std::vector<double>> frames);

  /// Stationary trajectory u(t) = u0 for every t in [0, T].
  static HydroTrajectory constant(const DensityField& u0, const EdgeField& F, double T);

  const Torus& torus() const { return torus_; }
  const EdgeField& field() const { return F_; }
  double final_time() const { return times_.back(); }
  const std::vector<double>& times() const { return times_; }
  const std::vector<std::vector<double>>& frames() const { return frames_; }

  DensityField at(double t) const;
  /// (u(t1) - u(t0)) / (t1 - t0) for the interpolated path.
  std::vector<double> slope(double t0, double t1) const;
  /// L^n u(t), the exact derivative of the semi-discrete solution at a frame.
  std::vector<double> derivative(double t) const;

 private:
  Torus torus_;
  EdgeField F_;
  std::vector<double> times_;
  std::vector<std::vector<double>> frames_;
};

struct HydroOptions {
  double dt = 0.0;         ///< 0 selects default_hydro_dt
  std::size_t max_frames = 2001;
  double frame_dt = 0.0;   ///< 0 lets max_frames decide the frame spacing
};

HydroTrajectory solve_hydro(const DensityField& u0, const VectorFieldSpec& spec, double T, const HydroOptions& opt = {});
HydroTrajectory solve_hydro(const DensityField& u0, const EdgeField& F, double sup_F, double T, const HydroOptions& opt = {});

/// One classical RK4 step of du/dt = L^n u.
std::vector<double> hydro_rk4_step(const std::vector<double>& u, const EdgeField& F, double dt);

/// P_{s,t} f: solves d_s v + Lambda_s v = 0 backwards from v_t = f with u
/// taken from the trajectory.
std::vector<double> backward_semigroup(const std::vector<double>& f, double s, double t, const HydroTrajectory& traj, double dt = 0.0);

}  // namespace waseplab
