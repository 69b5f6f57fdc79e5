#include "waseplab/wasep.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <istream>
#include <ostream>

#include "waseplab/error.hpp"

namespace waseplab {

Configuration::Configuration(const Torus& torus) : torus_(torus), words_((torus.sites() + 63) / 64, 0u) {}

Configuration::Configuration(const Torus& torus, const std::vector<int>& occupancy) : Configuration(torus) {
  require(occupancy.size() == torus.sites(), "occupancy size mismatch");
  for (SiteIndex x = 0; x < torus.sites(); ++x) {
    require(occupancy[x] == 0 || occupancy[x] == 1, "occupancy must be 0 or 1");
    set(x, occupancy[x] == 1);
  }
}

void Configuration::set(SiteIndex x, bool on) {
  const std::uint64_t mask = std::uint64_t{1} << (x & 63);
  std::uint64_t& w = words_[x >> 6];
  const bool was = (w & mask) != 0;
  if (was == on) return;
  w ^= mask;
  if (on) {
    ++count_;
  } else {
    --count_;
  }
}

std::vector<int> Configuration::occupancy() const {
  std::vector<int> out(torus_.sites());
  for (SiteIndex x = 0; x < torus_.sites(); ++x) out[x] = eta(x);
  return out;
}

std::uint64_t Configuration::as_bits() const {
  require(torus_.sites() <= 64, "configuration too large for a 64-bit index");
  return words_.empty() ? 0 : words_[0];
}

double RateTable::jump_rate(SiteIndex from, int b, int sign) const {
  const std::size_t d = static_cast<std::size_t>(torus.dim());
  if (sign > 0) return forward[from * d + static_cast<std::size_t>(b)];
  const SiteIndex to = torus.neighbor(from, b, -1);
  return backward[to * d + static_cast<std::size_t>(b)];
}

RateTable build_rates(const EdgeField& F) {
  const Torus& tor = F.torus;
  const double n = tor.side();
  const double n2 = n * n;
  RateTable r{tor, std::vector<double>(F.values.size()), std::vector<double>(F.values.size()), 0.0, false};
  for (std::size_t e = 0; e < F.values.size(); ++e) {
    const double f = F.values[e] / n;
    r.forward[e] = n2 * std::max(0.5, 1.0 + f);
    r.backward[e] = n2 * std::max(0.5, 1.0 - f);
    r.cap_active = r.cap_active || 1.0 + f < 0.5 || 1.0 - f < 0.5;
    r.max_rate = std::max({r.max_rate, r.forward[e], r.backward[e]});
  }
  if (F.values.empty()) r.max_rate = n2;
  return r;
}

RateTable build_rates(const VectorFieldSpec& spec, const Torus& torus) { return build_rates(sample_dual_field(spec, torus)); }

Configuration sample_profile_measure(const DensityField& u, Philox& rng) {
  Configuration eta(u.torus);
  for (SiteIndex x = 0; x < u.torus.sites(); ++x) {
    require(u.u[x] >= 0.0 && u.u[x] <= 1.0, "profile must lie in [0,1]");
    eta.set(x, rng.uniform() < u.u[x]);
  }
  return eta;
}

Configuration sample_profile_measure(const DensityField& u, std::uint64_t seed, std::uint64_t replica) {
  Philox rng(seed, replica, 1);
  return sample_profile_measure(u, rng);
}

Trajectory simulate(const Configuration& eta0, const RateTable& rates, double T, Philox& rng,
                    const std::vector<double>& snapshot_times, const SimulateOptions& opt) {
  require(eta0.torus() == rates.torus, "configuration and rate table live on different tori");
  require(T >= 0.0, "final time must be nonnegative");
  for (std::size_t i = 0; i < snapshot_times.size(); ++i) {
    require(snapshot_times[i] >= 0.0 && snapshot_times[i] <= T, "snapshot times must lie in [0, T]");
    require(i == 0 || snapshot_times[i] >= snapshot_times[i - 1], "snapshot times must be sorted");
  }

  const Torus& tor = eta0.torus();
  const int d = tor.dim();
  const auto dd = static_cast<std::size_t>(d);
  Trajectory traj{eta0, T, 0, {}, {}, eta0, 0, 0};
  Configuration eta = eta0;

  std::vector<SiteIndex> pos;
  pos.reserve(eta.count());
  for (SiteIndex x = 0; x < tor.sites(); ++x) {
    if (eta.occupied(x)) pos.push_back(x);
  }
  const std::size_t N = pos.size();
  const double R = rates.max_rate;
  const double total = static_cast<double>(N) * 2.0 * d * R;
  const std::uint64_t choices = static_cast<std::uint64_t>(N) * 2u * dd;

  std::size_t next_snap = 0;
  auto flush_snapshots = [&](double upto) {
    while (next_snap < snapshot_times.size() && snapshot_times[next_snap] < upto) {
      traj.snapshots.push_back(Snapshot{snapshot_times[next_snap], eta});
      ++next_snap;
    }
  };

  if (N == 0 || N == tor.sites() || T == 0.0) {
    flush_snapshots(std::nextafter(T, 2.0 * T + 1.0));
    traj.final_state = eta;
    return traj;
  }

  double t = 0.0;
  for (;;) {
    t += rng.exponential() / total;
    if (t > T) break;
    flush_snapshots(t);
    ++traj.proposals;
    const std::uint64_t c = rng.below(choices);
    const std::size_t i = static_cast<std::size_t>(c / (2u * dd));
    const int k = static_cast<int>(c % (2u * dd));
    const int b = k >> 1;
    const int sign = (k & 1) ? -1 : +1;
    const SiteIndex x = pos[i];
    const SiteIndex y = tor.neighbor(x, b, sign);
    if (eta.occupied(y)) continue;
    const double r = sign > 0 ? rates.forward[x * dd + static_cast<std::size_t>(b)]
                              : rates.backward[y * dd + static_cast<std::size_t>(b)];
    if (r < R && rng.uniform() * R >= r) continue;
    eta.set(x, false);
    eta.set(y, true);
    pos[i] = y;
    ++traj.jumps;
    if (opt.keep_events) traj.events.push_back(JumpEvent{t, x, y});
  }
  flush_snapshots(std::nextafter(T, 2.0 * T + 1.0));
  if (eta.count() != N) throw NumericalError("particle number changed during simulation");
  traj.final_state = eta;
  return traj;
}

Trajectory simulate(const Configuration& eta0, const RateTable& rates, double T, std::uint64_t seed,
                    const std::vector<double>& snapshot_times, const SimulateOptions& opt) {
  Philox rng(seed, 0, 2);
  Trajectory tr = simulate(eta0, rates, T, rng, snapshot_times, opt);
  tr.seed = seed;
  return tr;
}

void write_snapshots_csv(const Trajectory& traj, std::ostream& os) {
  os << "t,site,occupancy\n";
  for (const auto& s : traj.snapshots) {
    for (SiteIndex x = 0; x < s.eta.torus().sites(); ++x) os << s.t << ',' << x << ',' << s.eta.eta(x) << '\n';
  }
}

namespace {

template <class T>
void put(std::ostream& os, T v) {
  os.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <class T>
T get(std::istream& is) {
  T v{};
  is.read(reinterpret_cast<char*>(&v), sizeof(T));
  if (!is) throw PreconditionError("truncated snapshot stream");
  return v;
}

}  // namespace

void write_snapshots_binary(const Trajectory& traj, std::ostream& os) {
  static_assert(std::endian::native == std::endian::little, "binary snapshot format assumes a little-endian host");
  const Torus& tor = traj.initial.torus();
  put<std::int32_t>(os, tor.dim());
  put<std::int32_t>(os, tor.side());
  put<double>(os, traj.T);
  put<std::uint64_t>(os, traj.seed);
  put<std::uint64_t>(os, traj.snapshots.size());
  for (const auto& s : traj.snapshots) {
    put<double>(os, s.t);
    for (auto w : s.eta.words()) put<std::uint64_t>(os, w);
  }
}

std::vector<Snapshot> read_snapshots_binary(std::istream& is, int* d, int* n, double* T, std::uint64_t* seed) {
  const auto dd = get<std::int32_t>(is);
  const auto nn = get<std::int32_t>(is);
  const auto TT = get<double>(is);
  const auto ss = get<std::uint64_t>(is);
  const auto count = get<std::uint64_t>(is);
  if (d) *d = dd;
  if (n) *n = nn;
  if (T) *T = TT;
  if (seed) *seed = ss;
  const Torus tor(dd, nn);
  std::vector<Snapshot> out;
  for (std::uint64_t k = 0; k < count; ++k) {
    const double t = get<double>(is);
    Configuration eta(tor);
    const std::size_t words = (tor.sites() + 63) / 64;
    for (std::size_t w = 0; w < words; ++w) {
      const auto word = get<std::uint64_t>(is);
      for (int bit = 0; bit < 64; ++bit) {
        const std::size_t x = w * 64 + static_cast<std::size_t>(bit);
        if (x < tor.sites() && ((word >> bit) & 1u)) eta.set(static_cast<SiteIndex>(x), true);
      }
    }
    out.push_back(Snapshot{t, std::move(eta)});
  }
  return out;
}

}  // namespace waseplab
