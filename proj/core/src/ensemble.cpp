#include "levyfdt/ensemble.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <mutex>
#include <thread>

#include "levyfdt/errors.hpp"

namespace levyfdt {

unsigned resolve_threads(unsigned requested) {
  if (requested > 0) return requested;
  const unsigned hw = std::thread::hardware_concurrency();
  return hw > 0 ? hw : 1;
}

void parallel_blocks(std::size_t n_blocks, unsigned threads,
                     const std::function<void(std::size_t)>& fn) {
  const unsigned workers =
      static_cast<unsigned>(std::min<std::size_t>(resolve_threads(threads), n_blocks));
  if (workers <= 1) {
    for (std::size_t b = 0; b < n_blocks; ++b) fn(b);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::atomic<bool> stop{false};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  {
    std::vector<std::jthread> pool;
    pool.reserve(workers);
    for (unsigned w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        for (;;) {
          if (stop.load()) return;
          const std::size_t b = next.fetch_add(1);
          if (b >= n_blocks) return;
          try {
            fn(b);
          } catch (...) {
            std::lock_guard lock(failure_mutex);
            if (!failure) failure = std::current_exception();
            stop.store(true);
          }
        }
      });
    }
  }
  if (failure) std::rethrow_exception(failure);
}

void RunningStat::merge(const RunningStat& o) {
  if (o.count == 0.0) return;
  if (count == 0.0) {
    *this = o;
    return;
  }
  const double n = count + o.count;
  const double d = o.mean - mean;
  mean += d * o.count / n;
  m2 += o.m2 + d * d * count * o.count / n;
  count = n;
}

EnsembleAccumulator::EnsembleAccumulator(std::size_t n_series, std::size_t n_times,
                                         std::size_t n_traj, std::size_t n_blocks)
    : n_series_(n_series), n_times_(n_times), n_traj_(n_traj) {
  if (n_traj == 0) throw InvalidArgument("ensemble needs at least one trajectory");
  const std::size_t nb = std::max<std::size_t>(1, std::min(n_blocks, n_traj));
  blocks_.assign(nb, std::vector<RunningStat>(n_series * n_times));
}

std::pair<std::size_t, std::size_t> EnsembleAccumulator::block_range(std::size_t b) const {
  const std::size_t nb = blocks_.size();
  return {b * n_traj_ / nb, (b + 1) * n_traj_ / nb};
}

std::vector<double> EnsembleAccumulator::mean(std::size_t s) const {
  std::vector<double> out(n_times_);
  for (std::size_t t = 0; t < n_times_; ++t) {
    RunningStat total;
    for (const auto& blk : blocks_) total.merge(blk[s * n_times_ + t]);
    out[t] = total.mean;
  }
  return out;
}

std::vector<double> EnsembleAccumulator::stderr_iid(std::size_t s) const {
  std::vector<double> out(n_times_);
  for (std::size_t t = 0; t < n_times_; ++t) {
    RunningStat total;
    for (const auto& blk : blocks_) total.merge(blk[s * n_times_ + t]);
    out[t] = total.count > 1.0 ? std::sqrt(total.variance() / total.count) : 0.0;
  }
  return out;
}

double EnsembleAccumulator::included(std::size_t s, std::size_t t) const {
  double n = 0.0;
  for (const auto& blk : blocks_) n += blk[s * n_times_ + t].count;
  return n;
}

std::vector<double> EnsembleAccumulator::block_means(std::size_t s) const {
  std::vector<double> out(blocks_.size() * n_times_);
  for (std::size_t b = 0; b < blocks_.size(); ++b) {
    for (std::size_t t = 0; t < n_times_; ++t) out[b * n_times_ + t] = blocks_[b][s * n_times_ + t].mean;
  }
  return out;
}

std::vector<double> EnsembleAccumulator::block_weights() const {
  std::vector<double> w(blocks_.size());
  double total = 0.0;
  for (std::size_t b = 0; b < blocks_.size(); ++b) {
    // Series 0 at time 0 counts the trajectories a block contributed.
    w[b] = blocks_[b].empty() ? 0.0 : blocks_[b][0].count;
    total += w[b];
  }
  if (total > 0.0) {
    for (double& v : w) v /= total;
  }
  return w;
}

BatchEstimate batch_means(const std::vector<double>& values, const std::vector<double>& weights,
                          std::size_t n_cols) {
  const std::size_t nb = weights.size();
  BatchEstimate est{std::vector<double>(n_cols, 0.0), std::vector<double>(n_cols, 0.0)};
  std::size_t active = 0;
  for (double w : weights) active += w > 0.0 ? 1 : 0;
  for (std::size_t c = 0; c < n_cols; ++c) {
    double m = 0.0;
    for (std::size_t b = 0; b < nb; ++b) m += weights[b] * values[b * n_cols + c];
    double var = 0.0;
    for (std::size_t b = 0; b < nb; ++b) {
      const double d = values[b * n_cols + c] - m;
      var += weights[b] * weights[b] * d * d;
    }
    if (active > 1) var *= static_cast<double>(active) / static_cast<double>(active - 1);
    est.value[c] = m;
    est.stderr_[c] = std::sqrt(var);
  }
  return est;
}

}  // namespace levyfdt
