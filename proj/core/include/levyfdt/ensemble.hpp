#pragma once

// Deterministic parallel ensemble bookkeeping.
//
// Trajectories are split into a fixed number of contiguous blocks decided by
// the trajectory count alone. Workers claim whole blocks, each block keeps its
// own running statistics, and blocks are merged in index order, so results do
// not depend on the worker count or the schedule.

#include <cstddef>
#include <functional>
#include <utility>
#include <vector>

namespace levyfdt {

/// Run fn(block) for block in [0, n_blocks) on up to `threads` workers
/// (0 = hardware concurrency). Exceptions from any block are rethrown after
/// all workers have stopped.
void parallel_blocks(std::size_t n_blocks, unsigned threads,
                     const std::function<void(std::size_t)>& fn);

unsigned resolve_threads(unsigned requested);

/// Running mean / M2 (Welford), mergeable in a fixed order (Chan et al.).
struct RunningStat {
  double count = 0.0;
  double mean = 0.0;
  double m2 = 0.0;

  void add(double v) {
    count += 1.0;
    const double d = v - mean;
    mean += d / count;
    m2 += d * (v - mean);
  }
  void merge(const RunningStat& o);
  double variance() const { return count > 1.0 ? m2 / (count - 1.0) : 0.0; }
};

/// Statistics of `n_series` time series of length `n_times` over an ensemble.
class EnsembleAccumulator {
 public:
  EnsembleAccumulator(std::size_t n_series, std::size_t n_times, std::size_t n_traj,
                      std::size_t n_blocks = 64);

  std::size_t n_blocks() const { return blocks_.size(); }
  std::size_t n_series() const { return n_series_; }
  std::size_t n_times() const { return n_times_; }
  std::size_t n_traj() const { return n_traj_; }

  /// Half-open trajectory range [first, second) of block b.
  std::pair<std::size_t, std::size_t> block_range(std::size_t b) const;

  /// Record value v of series s at time index t for the current trajectory of
  /// block b. Only the worker that owns block b may call this.
  void add(std::size_t b, std::size_t s, std::size_t t, double v) {
    blocks_[b][s * n_times_ + t].add(v);
  }

  /// Pooled mean and i.i.d. standard error per (series, time).
  std::vector<double> mean(std::size_t s) const;
  std::vector<double> stderr_iid(std::size_t s) const;

  /// Per-block means of series s (n_blocks x n_times, row-major) and weights.
  std::vector<double> block_means(std::size_t s) const;
  std::vector<double> block_weights() const;

  double included(std::size_t s, std::size_t t) const;

 private:
  std::size_t n_series_;
  std::size_t n_times_;
  std::size_t n_traj_;
  std::vector<std::vector<RunningStat>> blocks_;
};

/// Batch-means estimate of a quantity that is a linear function of block-level
/// series: `values` holds one row per block (row-major, n_cols per row).
struct BatchEstimate {
  std::vector<double> value;
  std::vector<double> stderr_;
};

BatchEstimate batch_means(const std::vector<double>& values, const std::vector<double>& weights,
                          std::size_t n_cols);

}  // namespace levyfdt
