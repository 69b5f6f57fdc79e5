#pragma once

#include <cstdint>
#include <iosfwd>
#include <vector>

#include "waseplab/field_spec.hpp"
#include "waseplab/hydro.hpp"
#include "waseplab/lattice.hpp"
#include "waseplab/rng.hpp"

namespace waseplab {

/// Occupancy bits, little-endian within 64-bit words in site order.
class Configuration {
 public:
  explicit Configuration(const Torus& torus);
  Configuration(const Torus& torus, const std::vector<int>& occupancy);

  const Torus& torus() const { return torus_; }
  bool occupied(SiteIndex x) const { return (words_[x >> 6] >> (x & 63)) & 1u; }
  int eta(SiteIndex x) const { return occupied(x) ? 1 : 0; }
  void set(SiteIndex x, bool on);
  std::size_t count() const { return count_; }
  const std::vector<std::uint64_t>& words() const { return words_; }
  std::vector<int> occupancy() const;
  /// Occupancy as an integer, bit x = site x. Needs n^d <= 64.
  std::uint64_t as_bits() const;

  friend bool operator==(const Configuration& a, const Configuration& b) {
    return a.torus_ == b.torus_ && a.words_ == b.words_;
  }

 private:
  Torus torus_;
  std::vector<std::uint64_t> words_;
  std::size_t count_ = 0;
};

/// Jump rates r(x, x+e_b) and r(x+e_b, x) stored at [x * d + b].
struct RateTable {
  Torus torus;
  std::vector<double> forward;
  std::vector<double> backward;
  double max_rate = 0.0;
  bool cap_active = false;

  double jump_rate(SiteIndex from, int b, int sign) const;
};

/// n^2 max{1/2, 1 +- F/n} per oriented edge.
RateTable build_rates(const EdgeField& F);
RateTable build_rates(const VectorFieldSpec& spec, const Torus& torus);

Configuration sample_profile_measure(const DensityField& u, Philox& rng);
Configuration sample_profile_measure(const DensityField& u, std::uint64_t seed, std::uint64_t replica = 0);

struct JumpEvent {
  double t;
  SiteIndex from;
  SiteIndex to;
};

struct Snapshot {
  double t;
  Configuration eta;
};

struct Trajectory {
  Configuration initial;
  double T = 0.0;
  std::uint64_t seed = 0;
  std::vector<JumpEvent> events;
  std::vector<Snapshot> snapshots;
  Configuration final_state;
  std::uint64_t proposals = 0;
  std::uint64_t jumps = 0;
};

struct SimulateOptions {
  bool keep_events = true;
};

/// Exact CTMC sample on [0, T] by uniform thinning: every particle proposes
/// each of its 2d jumps at the table's max rate, proposals onto occupied
/// sites are dropped and the rest accepted with probability rate / max.
Trajectory simulate(const Configuration& eta0, const RateTable& rates, double T, Philox& rng,
                    const std::vector<double>& snapshot_times, const SimulateOptions& opt = {});
Trajectory simulate(const Configuration& eta0, const RateTable& rates, double T, std::uint64_t seed,
                    const std::vector<double>& snapshot_times, const SimulateOptions& opt = {});

void write_snapshots_csv(const Trajectory& traj, std::ostream& os);
/// Header: int32 d, int32 n, double T, uint64 seed, uint64 snapshot count;
/// then per snapshot a double time and the packed words.
void write_snapshots_binary(const Trajectory& traj, std::ostream& os);
std::vector<Snapshot> read_snapshots_binary(std::istream& is, int* d = nullptr, int* n = nullptr, double* T = nullptr,
                                            std::uint64_t* seed = nullptr);

}  // namespace waseplab
