#pragma once

// Independent reference implementations used as oracles. Everything here
// recomputes results from first principles (full sorts, pair counting,
// explicit enumeration, literal refits) and must stay decoupled from the
// library code paths it checks.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "kwnn/classifiers.hpp"
#include "kwnn/dataset.hpp"
#include "kwnn/geometry.hpp"
#include "kwnn/kernels.hpp"

namespace oracle {

// Deterministic uniform doubles in [0,1) from the standard-specified mt19937_64
// engine (no std:: distributions; their output is implementation-defined).
class Rand {
 public:
  explicit Rand(std::uint64_t seed) : engine_(seed) {}
  double uniform() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  int uniform_int(int lo, int hi) {  // inclusive bounds
    return lo + static_cast<int>(engine_() % static_cast<std::uint64_t>(hi - lo + 1));
  }

 private:
  std::mt19937_64 engine_;
};

inline double minkowski(std::span<const double> x, std::span<const double> y,
                        kwnn::Metric metric) {
  double acc = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    double d = std::fabs(y[i] - x[i]);
    switch (metric) {
      case kwnn::Metric::Boscovich: acc += d; break;
      case kwnn::Metric::Euclidean: acc += d * d; break;
      case kwnn::Metric::Chebyshev: acc = std::max(acc, d); break;
    }
  }
  return metric == kwnn::Metric::Euclidean ? std::sqrt(acc) : acc;
}

struct Neighbour {
  double dist;
  int index;
};

// Full sort over an arbitrary candidate pool; ties by ascending index.
inline std::vector<Neighbour> sorted_neighbours(const std::vector<double>& records, int m,
                                                std::span<const double> y,
                                                kwnn::Metric metric,
                                                const std::vector<int>& pool) {
  std::vector<Neighbour> all;
  all.reserve(pool.size());
  for (int i : pool) {
    std::span<const double> row(records.data() + static_cast<std::size_t>(i) * m,
                                static_cast<std::size_t>(m));
    all.push_back({minkowski(row, y, metric), i});
  }
  std::sort(all.begin(), all.end(), [](const Neighbour& a, const Neighbour& b) {
    return a.dist < b.dist || (a.dist == b.dist && a.index < b.index);
  });
  return all;
}

inline std::vector<int> full_pool(int n, int exclude = -1) {
  std::vector<int> pool;
  for (int i = 0; i < n; ++i)
    if (i != exclude) pool.push_back(i);
  return pool;
}

// Raw literature weights, straight from their original closed forms.
inline std::vector<double> raw_dudani(std::span<const double> d) {
  std::size_t k = d.size();
  std::vector<double> w(k, 1.0);
  if (k == 1) return w;
  double span = d[k - 1] - d[0];
  for (std::size_t i = 0; i < k; ++i) w[i] = (d[k - 1] - d[i]) / span;
  return w;
}

inline std::vector<double> raw_gou2012(std::span<const double> d) {
  std::size_t k = d.size();
  std::vector<double> w(k, 1.0);
  if (k == 1) return w;
  double span = d[k - 1] - d[0];
  for (std::size_t i = 0; i < k; ++i)
    w[i] = (d[k - 1] - d[i]) / span * (d[k - 1] + d[0]) / (d[k - 1] + d[i]);
  return w;
}

inline std::vector<double> raw_macleod(std::span<const double> d) {
  std::size_t k = d.size();
  std::vector<double> w(k, 1.0);
  if (k == 1) return w;
  double span = d[k - 1] - d[0];
  for (std::size_t i = 0; i < k; ++i)
    w[i] = (d[k - 1] - d[i] + d[k - 1] - d[0]) / (2.0 * span);
  return w;
}

inline std::vector<double> raw_reciprocal(std::span<const double> d, double power) {
  std::vector<double> w(d.size());
  for (std::size_t i = 0; i < d.size(); ++i) w[i] = 1.0 / std::pow(d[i], power);
  return w;
}

inline std::vector<double> normalised(std::vector<double> w) {
  double total = std::accumulate(w.begin(), w.end(), 0.0);
  for (double& x : w) x /= total;
  return w;
}

// Weighted-vote class scores via full sort and direct kernel evaluation,
// including the three edge conventions.
inline std::vector<double> nn_reference_scores(const std::vector<double>& records, int m,
                                               const std::vector<int>& labels,
                                               int class_count, std::span<const double> y,
                                               kwnn::Metric metric,
                                               const kwnn::WeightScheme& scheme, int k,
                                               int exclude = -1) {
  auto all = sorted_neighbours(records, m, y, metric,
                               full_pool(static_cast<int>(labels.size()), exclude));
  std::vector<double> d(static_cast<std::size_t>(k));
  for (int i = 0; i < k; ++i) d[static_cast<std::size_t>(i)] = all[static_cast<std::size_t>(i)].dist;

  std::vector<double> w(static_cast<std::size_t>(k));
  double dk = d.back();
  if (scheme.dist.macleod) {
    w = kwnn::macleod_distance_weights(d);
  } else {
    const kwnn::Kernel& s = scheme.dist.kernel;
    if (dk == 0.0) {
      double v = s.improper() ? 1.0 : kwnn::kernel_eval(s, 0.0);
      std::fill(w.begin(), w.end(), v);
    } else if (d.front() == dk && kwnn::kernel_eval(s, 1.0) == 0.0) {
      std::fill(w.begin(), w.end(), 1.0);
    } else if (s.improper() && d.front() == 0.0) {
      for (int i = 0; i < k; ++i) w[static_cast<std::size_t>(i)] = d[static_cast<std::size_t>(i)] == 0.0 ? 1.0 : 0.0;
    } else {
      for (int i = 0; i < k; ++i)
        w[static_cast<std::size_t>(i)] = kwnn::kernel_eval(s, d[static_cast<std::size_t>(i)] / dk);
    }
  }
  for (int i = 1; i <= k; ++i)
    w[static_cast<std::size_t>(i - 1)] *=
        kwnn::kernel_eval(scheme.rank, static_cast<double>(i) / (k + 1.0));

  double total = std::accumulate(w.begin(), w.end(), 0.0);
  std::vector<double> scores(static_cast<std::size_t>(class_count), 0.0);
  for (int i = 0; i < k; ++i) {
    int cls = labels[static_cast<std::size_t>(all[static_cast<std::size_t>(i)].index)];
    scores[static_cast<std::size_t>(cls)] +=
        total > 0.0 ? w[static_cast<std::size_t>(i)] / total : 1.0 / k;
  }
  return scores;
}

// Keller memberships recomputed with full sorts (self excluded).
inline std::vector<double> fnn_reference_memberships(const std::vector<double>& records,
                                                     int m, const std::vector<int>& labels,
                                                     int class_count, kwnn::Metric metric,
                                                     int k) {
  int n = static_cast<int>(labels.size());
  std::vector<double> u(static_cast<std::size_t>(n) * class_count, 0.0);
  for (int t = 0; t < n; ++t) {
    std::span<const double> row(records.data() + static_cast<std::size_t>(t) * m,
                                static_cast<std::size_t>(m));
    auto all = sorted_neighbours(records, m, row, metric, full_pool(n, t));
    double* out = u.data() + static_cast<std::size_t>(t) * class_count;
    for (int i = 0; i < k; ++i)
      out[labels[static_cast<std::size_t>(all[static_cast<std::size_t>(i)].index)]] +=
          0.49 / k;
    out[labels[static_cast<std::size_t>(t)]] += 0.51;
  }
  return u;
}

inline std::vector<double> fnn_fuzzy_reference_scores(
    const std::vector<double>& records, int m, const std::vector<int>& labels,
    int class_count, std::span<const double> y, kwnn::Metric metric,
    const kwnn::WeightScheme& scheme, int k, const std::vector<double>& memberships) {
  int n = static_cast<int>(labels.size());
  auto all = sorted_neighbours(records, m, y, metric, full_pool(n));
  std::vector<double> d(static_cast<std::size_t>(k));
  for (int i = 0; i < k; ++i) d[static_cast<std::size_t>(i)] = all[static_cast<std::size_t>(i)].dist;
  std::vector<double> w_dist = scheme.dist.macleod
                                   ? kwnn::macleod_distance_weights(d)
                                   : kwnn::distance_weights(scheme.dist.kernel, d);
  std::vector<double> w_rank = kwnn::rank_weights(scheme.rank, k);
  std::vector<double> w(static_cast<std::size_t>(k));
  double total = 0.0;
  for (int i = 0; i < k; ++i) {
    w[static_cast<std::size_t>(i)] =
        w_rank[static_cast<std::size_t>(i)] * w_dist[static_cast<std::size_t>(i)];
    total += w[static_cast<std::size_t>(i)];
  }
  std::vector<double> scores(static_cast<std::size_t>(class_count), 0.0);
  for (int i = 0; i < k; ++i) {
    const double* u = memberships.data() +
                      static_cast<std::size_t>(all[static_cast<std::size_t>(i)].index) *
                          class_count;
    double wi = total > 0.0 ? w[static_cast<std::size_t>(i)] / total : 1.0 / k;
    for (int c = 0; c < class_count; ++c) scores[static_cast<std::size_t>(c)] += u[c] * wi;
  }
  return scores;
}

// FRNN cutoffs and scores recomputed with literal per-class full sorts.
inline std::pair<double, double> frnn_reference_cutoffs(const std::vector<double>& records,
                                                        int m,
                                                        const std::vector<int>& labels,
                                                        kwnn::Metric metric, int k) {
  int n = static_cast<int>(labels.size());
  double d_plus = 0.0, d_minus = 0.0;
  for (int t = 0; t < n; ++t) {
    std::span<const double> row(records.data() + static_cast<std::size_t>(t) * m,
                                static_cast<std::size_t>(m));
    std::vector<int> within, outside;
    for (int i = 0; i < n; ++i) {
      if (i == t) continue;
      (labels[static_cast<std::size_t>(i)] == labels[static_cast<std::size_t>(t)] ? within
                                                                                  : outside)
          .push_back(i);
    }
    if (!within.empty()) {
      auto s = sorted_neighbours(records, m, row, metric, within);
      d_plus = std::max(d_plus, s[static_cast<std::size_t>(
                                      std::min<int>(k, static_cast<int>(s.size())) - 1)]
                                    .dist);
    }
    if (!outside.empty()) {
      auto s = sorted_neighbours(records, m, row, metric, outside);
      d_minus = std::max(d_minus, s[static_cast<std::size_t>(
                                        std::min<int>(k, static_cast<int>(s.size())) - 1)]
                                      .dist);
    }
  }
  return {d_plus, d_minus};
}

struct FrnnReferenceScores {
  std::vector<double> lower, upper, mean;
};

inline FrnnReferenceScores frnn_reference_scores(const std::vector<double>& records, int m,
                                                 const std::vector<int>& labels,
                                                 int class_count, std::span<const double> y,
                                                 kwnn::Metric metric,
                                                 const kwnn::Kernel& rank_kernel,
                                                 const kwnn::Kernel& dist_kernel, int k,
                                                 double d_plus, double d_minus,
                                                 int exclude = -1) {
  int n = static_cast<int>(labels.size());
  std::vector<double> w = kwnn::rank_weights(rank_kernel, k);
  FrnnReferenceScores out;
  out.lower.assign(static_cast<std::size_t>(class_count), 1.0);
  out.upper.assign(static_cast<std::size_t>(class_count), 0.0);
  out.mean.assign(static_cast<std::size_t>(class_count), 0.0);
  auto ratio = [](double d, double cut) {
    return cut == 0.0 ? 0.0 : std::min(d / cut, 1.0);
  };
  for (int c = 0; c < class_count; ++c) {
    std::vector<int> within, outside;
    for (int i = 0; i < n; ++i) {
      if (i == exclude) continue;
      (labels[static_cast<std::size_t>(i)] == c ? within : outside).push_back(i);
    }
    if (!within.empty()) {
      auto s = sorted_neighbours(records, m, y, metric, within);
      int kk = std::min<int>(k, static_cast<int>(s.size()));
      double acc = 0.0, wacc = 0.0;
      for (int i = 0; i < kk; ++i) {
        acc += w[static_cast<std::size_t>(i)] *
               kwnn::kernel_eval(dist_kernel, ratio(s[static_cast<std::size_t>(i)].dist, d_plus));
        wacc += w[static_cast<std::size_t>(i)];
      }
      out.upper[static_cast<std::size_t>(c)] = acc / wacc;
    }
    if (!outside.empty()) {
      auto s = sorted_neighbours(records, m, y, metric, outside);
      int kk = std::min<int>(k, static_cast<int>(s.size()));
      double acc = 0.0, wacc = 0.0;
      for (int i = 0; i < kk; ++i) {
        acc += w[static_cast<std::size_t>(i)] *
               (1.0 - kwnn::kernel_eval(dist_kernel,
                                        ratio(s[static_cast<std::size_t>(i)].dist, d_minus)));
        wacc += w[static_cast<std::size_t>(i)];
      }
      out.lower[static_cast<std::size_t>(c)] = acc / wacc;
    }
    out.mean[static_cast<std::size_t>(c)] = 0.5 * (out.upper[static_cast<std::size_t>(c)] +
                                                   out.lower[static_cast<std::size_t>(c)]);
  }
  return out;
}

// AUROC by exhaustive pair counting.
inline double auroc_pairs(std::span<const double> scores, std::span<const int> labels,
                          int positive) {
  double favour = 0.0;
  std::size_t pairs = 0;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    if (labels[i] != positive) continue;
    for (std::size_t j = 0; j < scores.size(); ++j) {
      if (labels[j] == positive) continue;
      ++pairs;
      if (scores[i] > scores[j]) favour += 1.0;
      else if (scores[i] == scores[j]) favour += 0.5;
    }
  }
  if (pairs == 0) throw std::invalid_argument("auroc_pairs: single class");
  return favour / static_cast<double>(pairs);
}

inline double auroc_multiclass_pairs(std::span<const double> matrix,
                                     std::span<const int> labels, int class_count) {
  std::vector<int> present;
  for (int c = 0; c < class_count; ++c)
    if (std::find(labels.begin(), labels.end(), c) != labels.end()) present.push_back(c);
  double acc = 0.0;
  for (int c : present) {
    std::vector<double> col(labels.size());
    for (std::size_t i = 0; i < labels.size(); ++i)
      col[i] = matrix[i * static_cast<std::size_t>(class_count) + static_cast<std::size_t>(c)];
    acc += auroc_pairs(col, labels, c);
  }
  return acc / static_cast<double>(present.size());
}

// Exact one-sided Wilcoxon by explicit enumeration of all 2^n sign patterns.
struct WilcoxonEnumeration {
  double p_greater;
  double point_mass;
};

inline WilcoxonEnumeration wilcoxon_enumerate(std::span<const double> a,
                                              std::span<const double> b) {
  std::vector<double> d;
  for (std::size_t i = 0; i < a.size(); ++i)
    if (a[i] != b[i]) d.push_back(a[i] - b[i]);
  std::size_t n = d.size();
  if (n == 0) return {1.0, 1.0};
  if (n > 24) throw std::invalid_argument("wilcoxon_enumerate: too many pairs");

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) {
    return std::fabs(d[x]) < std::fabs(d[y]);
  });
  std::vector<double> rank(n);
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    while (j < n && std::fabs(d[order[j]]) == std::fabs(d[order[i]])) ++j;
    double avg = static_cast<double>(i + 1 + j) / 2.0;
    for (std::size_t t = i; t < j; ++t) rank[order[t]] = avg;
    i = j;
  }
  double observed = 0.0;
  for (std::size_t t = 0; t < n; ++t)
    if (d[t] > 0.0) observed += rank[t];

  std::uint64_t ge = 0, eq = 0;
  std::uint64_t patterns = std::uint64_t{1} << n;
  for (std::uint64_t mask = 0; mask < patterns; ++mask) {
    double w = 0.0;
    for (std::size_t t = 0; t < n; ++t)
      if (mask & (std::uint64_t{1} << t)) w += rank[t];
    if (w >= observed - 1e-9) {
      ++ge;
      if (std::fabs(w - observed) < 1e-9) ++eq;
    }
  }
  return {static_cast<double>(ge) / static_cast<double>(patterns),
          static_cast<double>(eq) / static_cast<double>(patterns)};
}

// Literal step-down definition.
inline std::vector<double> holm_reference(std::span<const double> p) {
  std::size_t m = p.size();
  std::vector<std::size_t> order(m);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t x, std::size_t y) { return p[x] < p[y]; });
  std::vector<double> adjusted(m);
  for (std::size_t i = 0; i < m; ++i) {
    double best = 0.0;
    for (std::size_t j = 0; j <= i; ++j)
      best = std::max(best, std::min(1.0, static_cast<double>(m - j) * p[order[j]]));
    adjusted[order[i]] = best;
  }
  return adjusted;
}

// Random classification instance generator shared by classifier tests.
struct Instance {
  kwnn::Dataset data;
};

inline Instance random_instance(Rand& rng, int n, int m, int classes,
                                double duplicate_rate = 0.0) {
  Instance inst;
  inst.data.name = "random";
  inst.data.n = n;
  inst.data.m = m;
  for (int c = 0; c < classes; ++c) inst.data.classes.push_back(std::string(1, char('a' + c)));
  inst.data.features.resize(static_cast<std::size_t>(n) * m);
  inst.data.labels.resize(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    int cls = rng.uniform_int(0, classes - 1);
    inst.data.labels[static_cast<std::size_t>(i)] = cls;
    if (i > 0 && rng.uniform() < duplicate_rate) {
      int src = rng.uniform_int(0, i - 1);
      for (int j = 0; j < m; ++j)
        inst.data.features[static_cast<std::size_t>(i) * m + j] =
            inst.data.features[static_cast<std::size_t>(src) * m + j];
    } else {
      double shift = static_cast<double>(cls);  // mild class separation
      for (int j = 0; j < m; ++j)
        inst.data.features[static_cast<std::size_t>(i) * m + j] =
            rng.uniform(-1.0, 1.0) + 0.6 * shift;
    }
  }
  return inst;
}

}  // namespace oracle
