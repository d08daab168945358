#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "kwnn/geometry.hpp"
#include "kwnn/util.hpp"

namespace kwnn {

/// Distances sorted ascending; equal distances break by ascending training
/// index, so every query is fully deterministic.
struct QueryResult {
  std::vector<double> distances;
  std::vector<int> indices;
};

enum class PoolMode { Within, Outside };

/// Exact k-nearest-neighbour queries over scaled training records, by linear
/// scan with partial selection. Immutable after construction; concurrent
/// queries are safe.
class NeighbourIndex {
 public:
  NeighbourIndex(std::vector<double> records, int m, std::vector<int> labels,
                 int class_count, Metric metric)
      : records_(std::move(records)),
        labels_(std::move(labels)),
        m_(m),
        metric_(metric),
        class_members_(static_cast<std::size_t>(class_count)) {
    n_ = static_cast<int>(labels_.size());
    if (n_ < 1) throw std::invalid_argument("NeighbourIndex: empty training set");
    if (m_ < 1) throw std::invalid_argument("NeighbourIndex: need at least one feature");
    if (records_.size() != static_cast<std::size_t>(n_) * static_cast<std::size_t>(m_))
      throw std::invalid_argument("NeighbourIndex: records/labels size mismatch");
    for (double v : records_)
      if (!std::isfinite(v))
        throw std::invalid_argument("NeighbourIndex: non-finite feature value");
    for (int i = 0; i < n_; ++i) {
      int c = labels_[static_cast<std::size_t>(i)];
      if (c < 0 || c >= class_count)
        throw std::invalid_argument("NeighbourIndex: label out of range");
      class_members_[static_cast<std::size_t>(c)].push_back(i);
    }
  }

  int size() const { return n_; }
  int dims() const { return m_; }
  Metric metric() const { return metric_; }
  int class_count() const { return static_cast<int>(class_members_.size()); }
  const std::vector<int>& labels() const { return labels_; }
  const std::vector<int>& class_members(int c) const {
    return class_members_[static_cast<std::size_t>(c)];
  }
  std::span<const double> record(int i) const {
    return {records_.data() + static_cast<std::size_t>(i) * static_cast<std::size_t>(m_),
            static_cast<std::size_t>(m_)};
  }

  QueryResult query(std::span<const double> y, int k) const {
    check_query(y, k, n_);
    return scan(y, k, nullptr, -1);
  }

  QueryResult query_class(std::span<const double> y, int k, int c, PoolMode mode) const {
    const std::vector<int>* pool = resolve_pool(c, mode);
    int pool_size = mode == PoolMode::Within ? static_cast<int>(pool->size())
                                             : n_ - static_cast<int>(class_members(c).size());
    check_query(y, k, pool_size);
    if (mode == PoolMode::Within) return scan_pool(y, k, *pool, -1);
    return scan(y, k, &class_members(c), -1);
  }

  /// Leave-one-out query: a k+1 query on the full set, dropping the match of
  /// record t with itself (and only that one; zero-distance duplicates stay).
  QueryResult loo_query(int t, int k) const {
    check_record(t);
    if (k < 1) throw std::invalid_argument("loo_query: k must be >= 1");
    if (k > n_ - 1)
      throw std::invalid_argument("loo_query: k=" + std::to_string(k) +
                                  " exceeds pool of " + std::to_string(n_ - 1));
    QueryResult q = scan(record(t), k + 1, nullptr, -1);
    QueryResult out;
    out.distances.reserve(static_cast<std::size_t>(k));
    out.indices.reserve(static_cast<std::size_t>(k));
    for (std::size_t i = 0; i < q.indices.size() && static_cast<int>(out.indices.size()) < k; ++i) {
      if (q.indices[i] == t) continue;
      out.distances.push_back(q.distances[i]);
      out.indices.push_back(q.indices[i]);
    }
    return out;
  }

  /// Class-restricted query with record t removed from the pool.
  QueryResult loo_query_class(int t, int k, int c, PoolMode mode) const {
    check_record(t);
    bool t_in_pool = (mode == PoolMode::Within) ==
                     (labels_[static_cast<std::size_t>(t)] == c);
    int pool_size = mode == PoolMode::Within
                        ? static_cast<int>(class_members(c).size())
                        : n_ - static_cast<int>(class_members(c).size());
    if (t_in_pool) --pool_size;
    check_query(record(t), k, pool_size);
    if (mode == PoolMode::Within) return scan_pool(record(t), k, class_members(c), t);
    return scan(record(t), k, &class_members(c), t);
  }

  /// Batch interface for the evaluation harness; slots are independent, so the
  /// result never depends on the worker count.
  std::vector<QueryResult> query_batch(const std::vector<std::vector<double>>& queries,
                                       int k, int jobs = 1) const {
    std::vector<QueryResult> out(queries.size());
    detail::parallel_for(queries.size(), jobs, [&](std::size_t i) {
      out[i] = query(queries[i], k);
    });
    return out;
  }

 private:
  void check_record(int t) const {
    if (t < 0 || t >= n_)
      throw std::invalid_argument("record index " + std::to_string(t) + " out of range");
  }

  void check_query(std::span<const double> y, int k, int pool_size) const {
    if (y.size() != static_cast<std::size_t>(m_))
      throw std::invalid_argument("query: record has " + std::to_string(y.size()) +
                                  " features, index has " + std::to_string(m_));
    for (double v : y)
      if (!std::isfinite(v)) throw std::invalid_argument("query: non-finite value");
    if (k < 1) throw std::invalid_argument("query: k must be >= 1");
    if (k > pool_size)
      throw std::invalid_argument("query: k=" + std::to_string(k) +
                                  " exceeds pool of " + std::to_string(pool_size) +
                                  " records");
  }

  const std::vector<int>* resolve_pool(int c, PoolMode mode) const {
    if (c < 0 || c >= class_count())
      throw std::invalid_argument("query_class: class index out of range");
    return mode == PoolMode::Within ? &class_members_[static_cast<std::size_t>(c)]
                                    : nullptr;
  }

  static void select_smallest(std::vector<std::pair<double, int>>& cand, int k) {
    auto cmp = [](const auto& a, const auto& b) {
      return a.first < b.first || (a.first == b.first && a.second < b.second);
    };
    if (static_cast<std::size_t>(k) < cand.size()) {
      std::partial_sort(cand.begin(), cand.begin() + k, cand.end(), cmp);
      cand.resize(static_cast<std::size_t>(k));
    } else {
      std::sort(cand.begin(), cand.end(), cmp);
    }
  }

  // Scan over all records, optionally skipping a class (exclude_class) and a
  // single record (exclude).
  QueryResult scan(std::span<const double> y, int k,
                   const std::vector<int>* exclude_class, int exclude) const {
    std::vector<bool> skip;
    if (exclude_class) {
      skip.assign(static_cast<std::size_t>(n_), false);
      for (int i : *exclude_class) skip[static_cast<std::size_t>(i)] = true;
    }
    std::vector<std::pair<double, int>> cand;
    cand.reserve(static_cast<std::size_t>(n_));
    for (int i = 0; i < n_; ++i) {
      if (i == exclude) continue;
      if (exclude_class && skip[static_cast<std::size_t>(i)]) continue;
      cand.emplace_back(
          detail::minkowski_unchecked(record(i).data(), y.data(),
                                      static_cast<std::size_t>(m_), metric_),
          i);
    }
    select_smallest(cand, k);
    return to_result(cand);
  }

  QueryResult scan_pool(std::span<const double> y, int k, const std::vector<int>& pool,
                        int exclude) const {
    std::vector<std::pair<double, int>> cand;
    cand.reserve(pool.size());
    for (int i : pool) {
      if (i == exclude) continue;
      cand.emplace_back(
          detail::minkowski_unchecked(record(i).data(), y.data(),
                                      static_cast<std::size_t>(m_), metric_),
          i);
    }
    select_smallest(cand, k);
    return to_result(cand);
  }

  static QueryResult to_result(const std::vector<std::pair<double, int>>& cand) {
    QueryResult out;
    out.distances.reserve(cand.size());
    out.indices.reserve(cand.size());
    for (const auto& [d, i] : cand) {
      out.distances.push_back(d);
      out.indices.push_back(i);
    }
    return out;
  }

  std::vector<double> records_;
  std::vector<int> labels_;
  int n_ = 0;
  int m_ = 0;
  Metric metric_;
  std::vector<std::vector<int>> class_members_;
};

}  // namespace kwnn
