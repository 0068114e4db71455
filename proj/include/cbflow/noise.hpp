#pragma once

#include <cstdint>
#include <iosfwd>
#include <mutex>
#include <stdexcept>
#include <unordered_map>

namespace cbflow {

/// Standard normal variate that is a pure function of (seed, stream, counter).
/// Two calls with the same triple return the same value, regardless of any
/// other draws made in between. Streams keep unrelated consumers (bridge
/// midpoints, Euler increments, ...) out of each other's counter space.
double counter_normal(std::uint64_t seed, std::uint64_t stream,
                      std::uint64_t counter);

/// Thrown when a query would need dyadic refinement beyond the path's cap.
class RefinementLimitError : public std::runtime_error {
 public:
  explicit RefinementLimitError(const std::string& what)
      : std::runtime_error(what) {}
};

/// Read interface shared by sampled Brownian paths and their views.
///
/// A path lives on [0, horizon]. Level-L grid points are t_k = k*horizon/2^L,
/// k = 0..2^L; grid_value(k, L) is the path value there. Values at nested
/// levels agree exactly, and every value is a pure function of (seed, k, L),
/// so callers may refine in any order.
class NoisePath {
 public:
  virtual ~NoisePath() = default;

  virtual double horizon() const = 0;
  virtual int max_level() const = 0;
  virtual double grid_value(std::uint64_t k, int level) const = 0;

  /// Value at the level-L grid point nearest below t (ties snap to t itself).
  double value_at(double t, int level) const;

  /// Piecewise-linear interpolation between the level-L neighbours of t.
  double interp(double t, int level) const;

  /// max over level-L grid points r in [s, t] of |B_r - B_s|.
  double sup_abs_increment(double s, double t, int level) const;

 protected:
  // Snap t to a grid index at the given level; within-one-part-in-1e9 of the
  // next point counts as that point, so exact-intent queries survive fp noise.
  std::uint64_t snap_index(double t, int level) const;
  void check_range(double t, const char* op) const;
};

/// Seeded Brownian motion on a refinable dyadic tree.
///
/// The base level is materialised eagerly; deeper values come from Brownian
/// bridge midpoints, midpoint = (left+right)/2 + N(0, dt/4), with the normal
/// keyed by (seed, dyadic node index). Refinement therefore commutes with
/// querying and is safe to perform lazily.
class BrownianPath : public NoisePath {
 public:
  static constexpr int kDefaultMaxLevel = 40;

  BrownianPath(std::uint64_t seed, double horizon, int base_level,
               int max_level = kDefaultMaxLevel);

  /// The identically-zero path (useful to drive solvers without noise).
  static BrownianPath flat(double horizon, int max_level = kDefaultMaxLevel);

  double horizon() const override { return horizon_; }
  int max_level() const override { return max_level_; }
  double grid_value(std::uint64_t k, int level) const override;

  std::uint64_t seed() const { return seed_; }
  int base_level() const { return base_level_; }
  bool is_flat() const { return flat_; }

  /// Materialise every node up to the given level.
  void refine_to(int level);

  /// Debug dump: header (seed, horizon, level), then level-major grid values.
  void dump_binary(std::ostream& os, int level) const;

 private:
  BrownianPath(double horizon, int max_level);  // flat path

  double node_value_locked(int level, std::uint64_t k) const;

  std::uint64_t seed_ = 0;
  double horizon_ = 1.0;
  int base_level_ = 0;
  int max_level_ = kDefaultMaxLevel;
  bool flat_ = false;
  mutable std::unordered_map<std::uint64_t, double> cache_;
  mutable std::mutex mu_;
};

/// sample_path(seed, horizon, base_level): a path with the base level drawn.
BrownianPath sample_path(std::uint64_t seed, double horizon, int base_level,
                         int max_level = BrownianPath::kDefaultMaxLevel);

/// View with value(t) = base(T) - base(T - t) on [0, T]; refinement requests
/// delegate to the underlying path. T must lie on the base path's dyadic
/// grid so that delegated queries are exact.
class ReversedPath : public NoisePath {
 public:
  ReversedPath(const NoisePath& base, double T);

  double horizon() const override { return T_; }
  int max_level() const override { return base_->max_level() - t_level_; }
  double grid_value(std::uint64_t k, int level) const override;

 private:
  const NoisePath* base_;
  double T_;
  std::uint64_t t_num_ = 1;  // T = t_num * base.horizon / 2^t_level
  int t_level_ = 0;
  double base_at_T_ = 0.0;
};

/// View with value(t) = -base(t).
class NegatedPath : public NoisePath {
 public:
  explicit NegatedPath(const NoisePath& base) : base_(&base) {}
  double horizon() const override { return base_->horizon(); }
  int max_level() const override { return base_->max_level(); }
  double grid_value(std::uint64_t k, int level) const override {
    return -base_->grid_value(k, level);
  }

 private:
  const NoisePath* base_;
};

}  // namespace cbflow
