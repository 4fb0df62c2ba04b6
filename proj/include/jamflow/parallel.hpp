#pragma once

#include <condition_variable>
#include <cstdint>
#include <functional>
#include <mutex>
#include <span>
#include <thread>
#include <vector>

#include "jamflow/trees/histogram.hpp"

namespace jamflow {

struct RowRange {
  std::size_t begin{0};
  std::size_t end{0};

  std::size_t size() const noexcept { return end - begin; }
  friend bool operator==(RowRange const&, RowRange const&) = default;
};

struct PartitionPlan {
  std::size_t n_rows{0};
  std::vector<RowRange> ranges;  // one per partition, ascending and contiguous

  std::size_t n_parts() const noexcept { return ranges.size(); }
};

/// Contiguous ranges whose sizes differ by at most one; earlier parts take the
/// larger shares. Throws ConfigError when n_parts == 0.
PartitionPlan partition_rows(std::size_t n_rows, std::size_t n_parts);

/// Fixed set of threads running index-parallel loops. The calling thread takes part,
/// so a pool of size 1 spawns nothing.
class WorkerPool {
public:
  explicit WorkerPool(std::size_t n_workers);
  ~WorkerPool();
  WorkerPool(WorkerPool const&) = delete;
  WorkerPool& operator=(WorkerPool const&) = delete;

  std::size_t size() const noexcept { return threads_.size() + 1; }

  /// Runs fn(i) for every i in [0, n) and blocks until all finish. If any call
  /// throws, the exception from the lowest index is rethrown.
  void parallel_for(std::size_t n, std::function<void(std::size_t)> const& fn);

private:
  void worker_loop(std::stop_token stop);
  void drain();

  std::mutex mutex_;
  std::condition_variable_any wake_;
  std::condition_variable done_;
  std::function<void(std::size_t)> const* job_{nullptr};
  std::size_t job_size_{0};
  std::size_t next_{0};
  std::size_t finished_{0};
  std::uint64_t generation_{0};
  std::vector<std::exception_ptr> errors_;
  std::vector<std::jthread> threads_;
};

/// Cell-wise sum by a fixed pairwise tree over part order: round k adds part i+2^k
/// into part i for every i divisible by 2^(k+1). The result depends only on the parts
/// and their order. Throws ValidationError on shape mismatch or an empty input.
trees::GradHistogram reduce_histograms(std::vector<trees::GradHistogram> parts);
trees::GradHistogram reduce_histograms(std::span<trees::GradHistogram const> parts);

/// Builds node histograms partition by partition on the pool, then reduces them.
class PartitionedHistogramBuilder {
public:
  PartitionedHistogramBuilder(PartitionPlan plan, WorkerPool& pool)
      : plan_{std::move(plan)}, pool_{&pool} {}

  PartitionPlan const& plan() const noexcept { return plan_; }
  WorkerPool& pool() const noexcept { return *pool_; }

  /// `rows` must be ascending.
  trees::GradHistogram build(trees::BinnedMatrix const& binned,
                             std::shared_ptr<trees::HistogramLayout const> const& layout,
                             std::span<std::uint32_t const> rows, std::span<double const> g,
                             std::span<double const> h) const;

private:
  PartitionPlan plan_;
  WorkerPool* pool_;
};

}  // namespace jamflow
