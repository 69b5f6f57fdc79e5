#pragma once

#include <array>
#include <functional>
#include <vector>

#include <gmpxx.h>

#include "waseplab/lattice.hpp"

namespace waseplab {

/// Signed measure on Z^d supported in [0, extent)^d, exact numerators over a
/// common positive denominator.
struct ExactMeasure {
  int d = 1;
  int extent = 0;
  std::vector<mpz_class> num;
  mpz_class den = 1;

  std::size_t flat(const Coord& z) const;
  mpq_class at(const Coord& z) const;
  double weight(const Coord& z) const;
  mpz_class total_numerator() const;
};

/// Exact equality of the represented rational measures.
bool exactly_equal(const ExactMeasure& a, const ExactMeasure& b);

ExactMeasure point_mass(int d);
ExactMeasure to_exact(const BoxMeasure& m);
ExactMeasure subtract(const ExactMeasure& a, const ExactMeasure& b);

/// Edge function phi(z; b) on Z^d x B, supported on z in [0, extent)^d.
struct Flow {
  int d = 1;
  int extent = 0;
  std::array<std::vector<mpz_class>, kMaxDim> num;
  mpz_class den = 1;

  static Flow zero(int d, int extent, const mpz_class& den);

  std::size_t flat(const Coord& z) const;
  mpq_class at(const Coord& z, int b) const;
  double value(const Coord& z, int b) const;

  double sum_sq() const;
  double sum_abs() const;
  double max_abs() const;
  bool empty() const;
  /// Largest extent actually carrying nonzero values.
  int support_extent() const;
};

Flow add(const Flow& a, const Flow& b);

/// z -> sum_b (phi(z;b) - phi(z-b;b)). "phi connects p to q" means
/// divergence(phi) = p - q.
ExactMeasure divergence(const Flow& phi);

/// psi^k: connects p_k to p_{k-1}, supported in Lambda_k. Requires k >= 2.
Flow step_flow(int k, int d);

/// psi~^l = -(psi^2 + ... + psi^l): connects delta_0 to p_l.
Flow point_to_cube_flow(int ell, int d);

/// phi_l = psi~^l + psi~^l * p_l: connects delta_0 to q_l, supported in
/// Lambda_{2l-1}.
Flow point_to_qell_flow(int ell, int d);

/// psi + psi * p_l for a psi~^l produced by point_to_cube_flow or the sweep.
Flow qell_from_cube(const Flow& psi, int ell);

/// psi~^l * p_l alone (connects p_l to q_l).
Flow convolve_with_box(const Flow& psi, int ell);

/// Visit psi~^l for l = 1..ell_max, built incrementally over one common
/// denominator. The flow handed to the visitor has extent l.
void sweep_point_to_cube(int ell_max, int d, const std::function<void(int, const Flow&)>& visit);

/// sup_k (1/k) binom(d,k)^{-1} sum_{i>=k} binom(d,i).
double step_flow_constant(int d);

/// d=1: l, d=2: ln l, d=3: 1.
double g_d(int d, double ell);

double to_double(const mpz_class& num, const mpz_class& den);

}  // namespace waseplab
