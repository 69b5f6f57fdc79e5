#pragma once

#include <memory>
#include <vector>

#include "waseplab/flows.hpp"
#include "waseplab/hydro.hpp"
#include "waseplab/wasep.hpp"

namespace waseplab {

/// omega_x = (eta_x - u_x) / (u_x (1 - u_x)).
std::vector<double> omega_field(const Configuration& eta, const DensityField& u);

/// Finite offset set A inside the negative orthant.
struct LocalSet {
  int d = 1;
  std::vector<Coord> offsets;

  LocalSet(int d, std::vector<Coord> offsets);
  static LocalSet origin(int d);

  /// Side of the smallest cube containing A.
  int ell0() const;
  /// Smallest l with -A inside Lambda_l.
  int ell1() const;
};

double omega_products(const std::vector<double>& omega, const Torus& torus, const LocalSet& A, SiteIndex x);
double omega_products(const Configuration& eta, const DensityField& u, const LocalSet& A, SiteIndex x);

/// omega^l_x = sum_y omega_{x+y} q_l(y). Requires l < n/2.
std::vector<double> block_average(const std::vector<double>& omega, const Torus& torus, int ell);

/// Dense double copy of a flow, listing its nonzero entries per direction.
struct FlowTable {
  int d = 1;
  int extent = 0;
  struct Entry {
    Coord z;
    double value;
  };
  std::array<std::vector<Entry>, kMaxDim> entries;

  static FlowTable from(const Flow& phi);
  double sup() const;
};

/// phi_l for (l, d), built once per process.
std::shared_ptr<const FlowTable> cached_qell_flow(int ell, int d);

/// Sum_z phi(z; b') a_{x-z} on the torus.
std::vector<double> flow_convolve(const FlowTable& phi, int bprime, const std::vector<double>& a, const Torus& torus);

struct FirstStage {
  Torus torus;
  int b = 0;
  int ell = 1;
  std::vector<double> omega;
  std::vector<double> omega_l;
  std::vector<double> u;
  std::shared_ptr<const FlowTable> phi;

  double V = 0.0;
  double Vl = 0.0;
  std::vector<double> W_per_b;  ///< W^{l,b'}
  double W = 0.0;
  double Z = 0.0;
  std::vector<std::vector<double>> h;  ///< h^{l,b'}_x

  /// V - V^l and sum h_{x-b}^{l,b'} (omega_x - omega_{x+b'}).
  double identity_lhs = 0.0;
  double identity_rhs = 0.0;
};

FirstStage first_stage(const std::vector<double>& G, const LocalSet& A, int b, int ell, const Configuration& eta,
                       const DensityField& u);

struct SecondStage {
  double Vt = 0.0;
  double Wt = 0.0;
  double Zt = 0.0;
  std::vector<std::vector<double>> h2;  ///< h^{l,b',b''} at [b' * d + b'']
  double sup_h2 = 0.0;
  /// Z - V~ and sum h_{x-b'}^{l,b',b''} (omega_x - omega_{x+b''}).
  double identity_lhs = 0.0;
  double identity_rhs = 0.0;
};

SecondStage second_stage(const FirstStage& first);

/// Mesoscopic scale: d=1 floor(n/8), d=2 round(n / sqrt(ln n)), d=3 round(n^(2/3)).
int ell_of_n(int d, int n);

}  // namespace waseplab
