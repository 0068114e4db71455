#include "cbflow/noise.hpp"

#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>
#include <string>

namespace cbflow {

namespace {

constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += kGolden;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

inline double to_unit(std::uint64_t bits) {
  // (0,1), never exactly 0 or 1.
  return (static_cast<double>(bits >> 11) + 0.5) * 0x1.0p-53;
}

// Dyadic node key: level in the top bits, index below. Indices are reduced
// (odd, or the level-0 endpoint), so keys are unique across levels.
inline std::uint64_t node_key(int level, std::uint64_t k) {
  return (static_cast<std::uint64_t>(level) << 42) | k;
}

}  // namespace

double counter_normal(std::uint64_t seed, std::uint64_t stream,
                      std::uint64_t counter) {
  const std::uint64_t state =
      splitmix64(seed ^ splitmix64(stream ^ 0x6A09E667F3BCC909ULL)) +
      counter * kGolden;
  const double u1 = to_unit(splitmix64(state));
  const double u2 = to_unit(splitmix64(state + kGolden));
  return std::sqrt(-2.0 * std::log(u1)) *
         std::cos(2.0 * 3.14159265358979323846 * u2);
}

// ---------------------------------------------------------------------------
// NoisePath helpers

std::uint64_t NoisePath::snap_index(double t, int level) const {
  const double h = horizon() * std::ldexp(1.0, -level);
  const double q = t / h;
  auto k = static_cast<std::uint64_t>(q);
  if (q - static_cast<double>(k) > 1.0 - 1e-9) ++k;
  const std::uint64_t last = std::uint64_t{1} << level;
  return k > last ? last : k;
}

void NoisePath::check_range(double t, const char* op) const {
  if (!(t >= 0.0 && t <= horizon() * (1.0 + 1e-12))) {
    throw std::invalid_argument(std::string(op) + ": time " +
                                std::to_string(t) + " outside [0, " +
                                std::to_string(horizon()) + "]");
  }
}

double NoisePath::value_at(double t, int level) const {
  check_range(t, "value_at");
  return grid_value(snap_index(t, level), level);
}

double NoisePath::interp(double t, int level) const {
  check_range(t, "interp");
  const double h = horizon() * std::ldexp(1.0, -level);
  const double q = t / h;
  auto k = static_cast<std::uint64_t>(q);
  double frac = q - static_cast<double>(k);
  if (frac > 1.0 - 1e-9) {
    ++k;
    frac = 0.0;
  }
  const double v0 = grid_value(k, level);
  if (frac < 1e-9) return v0;
  const double v1 = grid_value(k + 1, level);
  return v0 + frac * (v1 - v0);
}

double NoisePath::sup_abs_increment(double s, double t, int level) const {
  if (s > t) throw std::invalid_argument("sup_abs_increment: s > t");
  check_range(s, "sup_abs_increment");
  check_range(t, "sup_abs_increment");
  const double h = horizon() * std::ldexp(1.0, -level);
  const double ref = interp(s, level);
  // First grid point >= s.
  auto k0 = static_cast<std::uint64_t>(s / h);
  if (static_cast<double>(k0) * h < s - 1e-9 * h) ++k0;
  const std::uint64_t k1 = snap_index(t, level);
  if (k1 < k0) return 0.0;
  if (k1 - k0 > (std::uint64_t{1} << 26)) {
    throw std::invalid_argument("sup_abs_increment: grid too fine to scan");
  }
  double best = 0.0;
  for (std::uint64_t k = k0; k <= k1; ++k) {
    best = std::max(best, std::fabs(grid_value(k, level) - ref));
  }
  return best;
}

// ---------------------------------------------------------------------------
// BrownianPath

BrownianPath::BrownianPath(std::uint64_t seed, double horizon, int base_level,
                           int max_level)
    : seed_(seed),
      horizon_(horizon),
      base_level_(base_level),
      max_level_(max_level) {
  if (!(horizon > 0.0)) {
    throw std::invalid_argument("BrownianPath: horizon must be positive");
  }
  if (base_level < 0 || base_level > max_level) {
    throw std::invalid_argument("BrownianPath: bad base level");
  }
  refine_to(base_level);
}

BrownianPath::BrownianPath(double horizon, int max_level)
    : horizon_(horizon), max_level_(max_level), flat_(true) {
  if (!(horizon > 0.0)) {
    throw std::invalid_argument("BrownianPath: horizon must be positive");
  }
}

BrownianPath BrownianPath::flat(double horizon, int max_level) {
  return BrownianPath(horizon, max_level);
}

BrownianPath sample_path(std::uint64_t seed, double horizon, int base_level,
                         int max_level) {
  return BrownianPath(seed, horizon, base_level, max_level);
}

double BrownianPath::grid_value(std::uint64_t k, int level) const {
  if (level < 0 || level > max_level_) {
    throw RefinementLimitError("BrownianPath: level " + std::to_string(level) +
                               " exceeds refinement cap " +
                               std::to_string(max_level_));
  }
  if (k > (std::uint64_t{1} << level)) {
    throw std::invalid_argument("BrownianPath: grid index out of range");
  }
  if (flat_ || k == 0) return 0.0;
  std::lock_guard<std::mutex> lock(mu_);
  return node_value_locked(level, k);
}

double BrownianPath::node_value_locked(int level, std::uint64_t k) const {
  while (level > 0 && (k & 1) == 0) {
    k >>= 1;
    --level;
  }
  if (level == 0) {  // k == 1: the horizon endpoint
    const auto it = cache_.find(node_key(0, 1));
    if (it != cache_.end()) return it->second;
    const double v = counter_normal(seed_, /*stream=*/1, node_key(0, 1)) *
                     std::sqrt(horizon_);
    cache_.emplace(node_key(0, 1), v);
    return v;
  }
  const std::uint64_t key = node_key(level, k);
  const auto it = cache_.find(key);
  if (it != cache_.end()) return it->second;
  const double left = node_value_locked(level - 1, (k - 1) >> 1);
  const double right = node_value_locked(level - 1, (k + 1) >> 1);
  // Bridge midpoint of a level-(L-1) cell: sd = sqrt(cell length)/2.
  const double sd =
      0.5 * std::sqrt(horizon_ * std::ldexp(1.0, -(level - 1)));
  const double v = 0.5 * (left + right) +
                   sd * counter_normal(seed_, /*stream=*/1, key);
  cache_.emplace(key, v);
  return v;
}

void BrownianPath::refine_to(int level) {
  if (level < 0 || level > max_level_) {
    throw RefinementLimitError("refine_to: level out of range");
  }
  if (level > 22) {
    throw std::invalid_argument("refine_to: eager refinement beyond level 22");
  }
  if (flat_) return;
  std::lock_guard<std::mutex> lock(mu_);
  for (int L = 0; L <= level; ++L) {
    const std::uint64_t n = std::uint64_t{1} << L;
    for (std::uint64_t k = 1; k <= n; k += 2) node_value_locked(L, k);
  }
}

void BrownianPath::dump_binary(std::ostream& os, int level) const {
  if (level < 0 || level > 24) {
    throw std::invalid_argument("dump_binary: level out of [0, 24]");
  }
  os.write(reinterpret_cast<const char*>(&seed_), sizeof(seed_));
  os.write(reinterpret_cast<const char*>(&horizon_), sizeof(horizon_));
  const std::uint32_t lvl = static_cast<std::uint32_t>(level);
  os.write(reinterpret_cast<const char*>(&lvl), sizeof(lvl));
  for (int L = 0; L <= level; ++L) {
    const std::uint64_t n = std::uint64_t{1} << L;
    for (std::uint64_t k = 0; k <= n; ++k) {
      const double v = grid_value(k, L);
      os.write(reinterpret_cast<const char*>(&v), sizeof(v));
    }
  }
}

// ---------------------------------------------------------------------------
// Views

ReversedPath::ReversedPath(const NoisePath& base, double T)
    : base_(&base), T_(T) {
  if (!(T > 0.0) || T > base.horizon() * (1.0 + 1e-12)) {
    throw std::invalid_argument("ReversedPath: T outside (0, horizon]");
  }
  // Locate T on the base dyadic grid: T = t_num * horizon / 2^t_level.
  bool found = false;
  for (int p = 0; p <= base.max_level(); ++p) {
    const double q = T / (base.horizon() * std::ldexp(1.0, -p));
    const double r = std::nearbyint(q);
    if (std::fabs(q - r) < 1e-9 && r >= 1.0) {
      t_level_ = p;
      t_num_ = static_cast<std::uint64_t>(r);
      found = true;
      break;
    }
  }
  if (!found) {
    throw std::invalid_argument(
        "ReversedPath: T must be a dyadic point of the base path");
  }
  base_at_T_ = base.grid_value(t_num_, t_level_);
}

double ReversedPath::grid_value(std::uint64_t k, int level) const {
  if (level < 0 || level > max_level()) {
    throw RefinementLimitError("ReversedPath: level exceeds refinement cap");
  }
  const std::uint64_t n = std::uint64_t{1} << level;
  if (k > n) throw std::invalid_argument("ReversedPath: index out of range");
  // View point k/2^L * T maps to base time T - k/2^L * T, a base grid point
  // at level t_level + L with index t_num*2^L - t_num*k ... = t_num*(2^L - k).
  return base_at_T_ - base_->grid_value(t_num_ * (n - k), t_level_ + level);
}

}  // namespace cbflow
