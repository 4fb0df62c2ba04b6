#include "jamflow/parallel.hpp"

#include <algorithm>

#include "jamflow/errors.hpp"

namespace jamflow {

PartitionPlan partition_rows(std::size_t n_rows, std::size_t n_parts) {
  if (n_parts == 0) {
    throw ConfigError{"number of partitions must be at least 1"};
  }
  PartitionPlan plan{n_rows, {}};
  plan.ranges.reserve(n_parts);
  auto const base = n_rows / n_parts;
  auto const extra = n_rows % n_parts;
  std::size_t at = 0;
  for (std::size_t i = 0; i != n_parts; ++i) {
    auto const size = base + (i < extra ? 1 : 0);
    plan.ranges.push_back({at, at + size});
    at += size;
  }
  return plan;
}

// ---------------------------------------------------------------------------

WorkerPool::WorkerPool(std::size_t n_workers) {
  if (n_workers == 0) {
    throw ConfigError{"n_workers must be at least 1"};
  }
  threads_.reserve(n_workers - 1);
  for (std::size_t i = 1; i < n_workers; ++i) {
    threads_.emplace_back([this](std::stop_token stop) { worker_loop(stop); });
  }
}

WorkerPool::~WorkerPool() {
  for (auto& t : threads_) {
    t.request_stop();
  }
  wake_.notify_all();
}

void WorkerPool::drain() {
  for (;;) {
    std::size_t i = 0;
    std::function<void(std::size_t)> const* job = nullptr;
    {
      std::lock_guard lock{mutex_};
      if (job_ == nullptr || next_ >= job_size_) {
        return;
      }
      i = next_++;
      job = job_;
    }
    std::exception_ptr error;
    try {
      (*job)(i);
    } catch (...) {
      error = std::current_exception();
    }
    std::lock_guard lock{mutex_};
    errors_[i] = error;
    if (++finished_ == job_size_) {
      done_.notify_all();
    }
  }
}

void WorkerPool::worker_loop(std::stop_token stop) {
  std::uint64_t seen = 0;
  for (;;) {
    {
      std::unique_lock lock{mutex_};
      if (!wake_.wait(lock, stop, [&] { return generation_ != seen; })) {
        return;
      }
      seen = generation_;
    }
    drain();
  }
}

void WorkerPool::parallel_for(std::size_t n, std::function<void(std::size_t)> const& fn) {
  if (n == 0) {
    return;
  }
  if (threads_.empty()) {
    for (std::size_t i = 0; i != n; ++i) {
      fn(i);
    }
    return;
  }
  {
    std::lock_guard lock{mutex_};
    job_ = &fn;
    job_size_ = n;
    next_ = 0;
    finished_ = 0;
    errors_.assign(n, nullptr);
    ++generation_;
  }
  wake_.notify_all();
  drain();
  std::unique_lock lock{mutex_};
  done_.wait(lock, [&] { return finished_ == job_size_; });
  job_ = nullptr;
  auto const errors = std::move(errors_);
  lock.unlock();
  for (auto const& e : errors) {
    if (e) {
      std::rethrow_exception(e);
    }
  }
}

// ---------------------------------------------------------------------------

trees::GradHistogram reduce_histograms(std::vector<trees::GradHistogram> parts) {
  if (parts.empty()) {
    throw ValidationError{"cannot reduce an empty set of histograms"};
  }
  for (auto const& p : parts) {
    if (!p.same_shape(parts.front())) {
      throw ValidationError{"histogram parts have different shapes"};
    }
  }
  for (std::size_t step = 1; step < parts.size(); step *= 2) {
    for (std::size_t i = 0; i + step < parts.size(); i += 2 * step) {
      parts[i] += parts[i + step];
    }
  }
  return std::move(parts.front());
}

trees::GradHistogram reduce_histograms(std::span<trees::GradHistogram const> parts) {
  return reduce_histograms(std::vector<trees::GradHistogram>(parts.begin(), parts.end()));
}

trees::GradHistogram PartitionedHistogramBuilder::build(
    trees::BinnedMatrix const& binned, std::shared_ptr<trees::HistogramLayout const> const& layout,
    std::span<std::uint32_t const> rows, std::span<double const> g,
    std::span<double const> h) const {
  std::vector<trees::GradHistogram> parts(plan_.n_parts());
  pool_->parallel_for(plan_.n_parts(), [&](std::size_t p) {
    auto const& range = plan_.ranges[p];
    auto const lo = std::lower_bound(rows.begin(), rows.end(), range.begin);
    auto const hi = std::lower_bound(lo, rows.end(), range.end);
    parts[p] = trees::build_histograms(binned, layout, {lo, hi}, g, h);
  });
  return reduce_histograms(std::move(parts));
}

}  // namespace jamflow
