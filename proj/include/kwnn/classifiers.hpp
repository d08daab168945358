#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include "kwnn/dataset.hpp"
#include "kwnn/kernels.hpp"
#include "kwnn/neighbour_index.hpp"
#include "kwnn/stats.hpp"

namespace kwnn {

enum class ClassifierKind { NN, FNN, FRNN };
enum class FnnMode { Crisp, Fuzzy };
// Enumerator order is the selection tie-break order.
enum class FrnnApprox { Lower = 0, Upper = 1, Mean = 2 };

inline std::string classifier_name(ClassifierKind k) {
  switch (k) {
    case ClassifierKind::NN: return "nn";
    case ClassifierKind::FNN: return "fnn";
    case ClassifierKind::FRNN: return "frnn";
  }
  return "?";
}

inline ClassifierKind parse_classifier(std::string_view name) {
  if (name == "nn") return ClassifierKind::NN;
  if (name == "fnn") return ClassifierKind::FNN;
  if (name == "frnn") return ClassifierKind::FRNN;
  throw std::invalid_argument("unknown classifier '" + std::string(name) + "'");
}

inline std::string approx_name(FrnnApprox a) {
  switch (a) {
    case FrnnApprox::Lower: return "lower";
    case FrnnApprox::Upper: return "upper";
    case FrnnApprox::Mean: return "mean";
  }
  return "?";
}

inline FnnMode parse_fnn_mode(std::string_view name) {
  if (name == "crisp") return FnnMode::Crisp;
  if (name == "fuzzy") return FnnMode::Fuzzy;
  throw std::invalid_argument("unknown fnn mode '" + std::string(name) + "'");
}

/// Distance weighting is a kernel applied to d_i/d_k, or the MacLeod rule,
/// which depends on d_1 as well and therefore is not a kernel.
struct DistanceRule {
  bool macleod = false;
  Kernel kernel = Kernel::linear();

  std::vector<double> weights(std::span<const double> distances) const {
    return macleod ? macleod_distance_weights(distances)
                   : distance_weights(kernel, distances);
  }
  std::string name() const { return macleod ? "macleod" : kernel_name(kernel); }
};

struct WeightScheme {
  Kernel rank = Kernel::constant();
  DistanceRule dist;
};

/// Per-class scores aligned with the dataset's class catalogue.
struct ClassScores {
  std::vector<double> values;
};

/// Index of the maximal score; ties go to the earliest catalogue class.
inline int argmax_class(const ClassScores& s) {
  if (s.values.empty()) throw std::invalid_argument("argmax_class: empty scores");
  int best = 0;
  for (int c = 1; c < static_cast<int>(s.values.size()); ++c)
    if (s.values[static_cast<std::size_t>(c)] > s.values[static_cast<std::size_t>(best)])
      best = c;
  return best;
}

struct ClassifierConfig {
  ClassifierKind kind = ClassifierKind::NN;
  Metric metric = Metric::Boscovich;
  DispersionMeasure scaling = DispersionMeasure::R1;
  std::string rank_kernel = "constant";
  std::string distance_kernel;  // empty: nn/frnn -> linear, fnn -> derived from q
  FnnMode fnn_mode = FnnMode::Crisp;
  double fnn_q = 3.0;
  std::optional<FrnnApprox> frnn_approx;  // nullopt: selected on validation AUROC
  std::vector<int> k_grid;                // empty: default grid
  std::optional<int> fixed_k;             // bypasses k selection
  MulticlassAveraging averaging = MulticlassAveraging::OneVsRest;
};

/// k candidates searched by leave-one-out selection: every k up to
/// min(40, n-1), then geometric steps (factor 1.25) up to min(4*sqrt(n), n-1).
inline std::vector<int> default_k_grid(int n_train) {
  if (n_train <= 2) return {1};
  std::vector<int> grid;
  int lin = std::min(40, n_train - 1);
  for (int k = 1; k <= lin; ++k) grid.push_back(k);
  int cap = std::min(static_cast<int>(4.0 * std::sqrt(static_cast<double>(n_train))),
                     n_train - 1);
  int k = lin;
  while (k < cap) {
    k = std::min(cap, static_cast<int>(std::ceil(static_cast<double>(k) * 1.25)));
    grid.push_back(k);
  }
  return grid;
}

inline WeightScheme resolve_scheme(const ClassifierConfig& cfg, int feature_count) {
  WeightScheme s;
  std::string rank = cfg.rank_kernel.empty() ? "constant" : cfg.rank_kernel;
  if (rank == "macleod")
    throw std::invalid_argument("macleod weights are distance-only; invalid as rank kernel");
  s.rank = kernel_from_name(rank, feature_count);

  std::string dist = cfg.distance_kernel;
  if (dist.empty() || dist == "auto") {
    if (cfg.kind == ClassifierKind::FNN) {
      if (!(cfg.fnn_q > 1.0))
        throw std::invalid_argument("fnn_q must be > 1");
      double e = 2.0 / (cfg.fnn_q - 1.0);
      if (e == 1.0)
        s.dist.kernel = Kernel::reciprocal_linear();
      else if (e == 2.0)
        s.dist.kernel = Kernel::reciprocal_quadratic();
      else
        s.dist.kernel = Kernel::reciprocal_power(e);
    } else {
      s.dist.kernel = Kernel::linear();
    }
  } else if (dist == "macleod") {
    if (cfg.kind == ClassifierKind::FRNN)
      throw std::invalid_argument("frnn cannot use macleod distance weights");
    s.dist.macleod = true;
  } else {
    s.dist.kernel = kernel_from_name(dist, feature_count);
  }

  if (cfg.kind == ClassifierKind::FRNN && !s.dist.kernel.fuzzy_negation())
    throw std::invalid_argument(
        "frnn distance kernel must be a fuzzy negation "
        "(linear, epanechnikov, quartic, samworth, sugeno or yager)");
  return s;
}

/// Keller-style fuzzified memberships: u(x,C) = 0.51*[x in C] + 0.49*n_C(x)/k,
/// with n_C counted over the k nearest neighbours of x, self excluded.
/// Returns an n x class_count row-major matrix whose rows sum to 1.
inline std::vector<double> fnn_fit_memberships(const NeighbourIndex& train, int k) {
  int n = train.size();
  int c = train.class_count();
  if (k < 1) throw std::invalid_argument("fnn_fit_memberships: k must be >= 1");
  if (k > n - 1)
    throw std::invalid_argument("fnn_fit_memberships: k=" + std::to_string(k) +
                                " needs at least " + std::to_string(k + 1) + " records");
  std::vector<double> u(static_cast<std::size_t>(n) * static_cast<std::size_t>(c), 0.0);
  for (int t = 0; t < n; ++t) {
    QueryResult q = train.loo_query(t, k);
    double* row = u.data() + static_cast<std::size_t>(t) * static_cast<std::size_t>(c);
    for (int idx : q.indices)
      row[train.labels()[static_cast<std::size_t>(idx)]] += 0.49 / static_cast<double>(k);
    row[train.labels()[static_cast<std::size_t>(t)]] += 0.51;
  }
  return u;
}

/// Cutoffs d*+ / d*-: maxima over training records of the k-th neighbour
/// distance within the record's own class (self excluded) and within its
/// complement. k is clamped per record to the available pool; empty pools are
/// skipped, so degenerate training sets yield 0 rather than failing.
inline std::pair<double, double> frnn_fit_cutoffs(const NeighbourIndex& train, int k) {
  if (k < 1) throw std::invalid_argument("frnn_fit_cutoffs: k must be >= 1");
  int n = train.size();
  double d_plus = 0.0, d_minus = 0.0;
  for (int t = 0; t < n; ++t) {
    int own = train.labels()[static_cast<std::size_t>(t)];
    int pool_within = static_cast<int>(train.class_members(own).size()) - 1;
    if (pool_within >= 1) {
      QueryResult q = train.loo_query_class(t, std::min(k, pool_within), own, PoolMode::Within);
      d_plus = std::max(d_plus, q.distances.back());
    }
    int pool_outside = n - static_cast<int>(train.class_members(own).size());
    if (pool_outside >= 1) {
      QueryResult q = train.loo_query_class(t, std::min(k, pool_outside), own, PoolMode::Outside);
      d_minus = std::max(d_minus, q.distances.back());
    }
  }
  return {d_plus, d_minus};
}

struct FittedCore {
  Scaler scaler;
  NeighbourIndex index;
  WeightScheme scheme;
  int k = 1;
  std::vector<std::string> classes;
};

struct FittedNN {
  FittedCore core;
};

struct FittedFNN {
  FittedCore core;
  FnnMode mode = FnnMode::Crisp;
  double q = 3.0;
  std::vector<double> memberships;  // n x classes, fuzzy mode only
};

struct FittedFRNN {
  FittedCore core;
  FrnnApprox approx = FrnnApprox::Mean;
  double cutoff_within = 0.0;
  double cutoff_outside = 0.0;
};

namespace detail {

inline double cutoff_ratio(double d, double cutoff) {
  if (cutoff == 0.0) return 0.0;
  return std::min(d / cutoff, 1.0);
}

// Class votes from combined weights; zero total weight (possible only through
// improper-kernel stipulations) falls back to uniform weights.
inline ClassScores vote(const std::vector<int>& labels, int class_count,
                        std::span<const int> neighbour_indices,
                        std::span<const double> weights) {
  ClassScores out;
  out.values.assign(static_cast<std::size_t>(class_count), 0.0);
  double total = 0.0;
  for (double w : weights) total += w;
  std::size_t k = neighbour_indices.size();
  if (total > 0.0) {
    for (std::size_t i = 0; i < k; ++i)
      out.values[static_cast<std::size_t>(
          labels[static_cast<std::size_t>(neighbour_indices[i])])] += weights[i] / total;
  } else {
    for (std::size_t i = 0; i < k; ++i)
      out.values[static_cast<std::size_t>(
          labels[static_cast<std::size_t>(neighbour_indices[i])])] +=
          1.0 / static_cast<double>(k);
  }
  return out;
}

inline std::vector<double> combined_weights(const WeightScheme& scheme,
                                            std::span<const double> distances) {
  std::vector<double> w_rank = rank_weights(scheme.rank, static_cast<int>(distances.size()));
  std::vector<double> w_dist = scheme.dist.weights(distances);
  return combine_weights(w_rank, w_dist);
}

// NN-style score from a neighbour query; shared by NN and crisp FNN.
inline ClassScores kernel_vote_score(const FittedCore& core, std::span<const double> scaled) {
  QueryResult q = core.index.query(scaled, core.k);
  std::vector<double> w = combined_weights(core.scheme, q.distances);
  return vote(core.index.labels(), core.index.class_count(), q.indices, w);
}

}  // namespace detail

inline ClassScores nn_score(const FittedNN& model, std::span<const double> record) {
  return detail::kernel_vote_score(model.core, apply_scaler(model.core.scaler, record));
}

inline ClassScores fnn_score(const FittedFNN& model, std::span<const double> record) {
  std::vector<double> scaled = apply_scaler(model.core.scaler, record);
  if (model.mode == FnnMode::Crisp) return detail::kernel_vote_score(model.core, scaled);
  const FittedCore& core = model.core;
  int c = core.index.class_count();
  QueryResult q = core.index.query(scaled, core.k);
  std::vector<double> w = detail::combined_weights(core.scheme, q.distances);
  double total = 0.0;
  for (double x : w) total += x;
  ClassScores out;
  out.values.assign(static_cast<std::size_t>(c), 0.0);
  std::size_t k = q.indices.size();
  for (std::size_t i = 0; i < k; ++i) {
    const double* u_row = model.memberships.data() +
                          static_cast<std::size_t>(q.indices[i]) * static_cast<std::size_t>(c);
    double wi = total > 0.0 ? w[i] / total : 1.0 / static_cast<double>(k);
    for (int j = 0; j < c; ++j) out.values[static_cast<std::size_t>(j)] += u_row[j] * wi;
  }
  return out;
}

namespace detail {

// Upper and lower approximation scores for every class.
inline std::pair<std::vector<double>, std::vector<double>> frnn_upper_lower(
    const FittedCore& core, double cutoff_within, double cutoff_outside,
    std::span<const double> scaled) {
  int c = core.index.class_count();
  int n = core.index.size();
  int k = core.k;
  std::vector<double> w = rank_weights(core.scheme.rank, k);
  std::vector<double> wsum(static_cast<std::size_t>(k) + 1, 0.0);
  for (int i = 0; i < k; ++i)
    wsum[static_cast<std::size_t>(i) + 1] = wsum[static_cast<std::size_t>(i)] +
                                            w[static_cast<std::size_t>(i)];
  const Kernel& s = core.scheme.dist.kernel;
  std::vector<double> upper(static_cast<std::size_t>(c), 0.0);
  std::vector<double> lower(static_cast<std::size_t>(c), 1.0);
  for (int cls = 0; cls < c; ++cls) {
    int pool_within = static_cast<int>(core.index.class_members(cls).size());
    int k_within = std::min(k, pool_within);
    if (k_within >= 1) {
      QueryResult q = core.index.query_class(scaled, k_within, cls, PoolMode::Within);
      double acc = 0.0;
      for (int i = 0; i < k_within; ++i)
        acc += w[static_cast<std::size_t>(i)] *
               kernel_eval(s, cutoff_ratio(q.distances[static_cast<std::size_t>(i)],
                                           cutoff_within));
      upper[static_cast<std::size_t>(cls)] = acc / wsum[static_cast<std::size_t>(k_within)];
    }
    int pool_outside = n - pool_within;
    int k_outside = std::min(k, pool_outside);
    if (k_outside >= 1) {
      QueryResult q = core.index.query_class(scaled, k_outside, cls, PoolMode::Outside);
      double acc = 0.0;
      for (int i = 0; i < k_outside; ++i)
        acc += w[static_cast<std::size_t>(i)] *
               (1.0 - kernel_eval(s, cutoff_ratio(q.distances[static_cast<std::size_t>(i)],
                                                  cutoff_outside)));
      lower[static_cast<std::size_t>(cls)] = acc / wsum[static_cast<std::size_t>(k_outside)];
    }
  }
  return {std::move(upper), std::move(lower)};
}

inline ClassScores pick_approx(const std::vector<double>& upper,
                               const std::vector<double>& lower, FrnnApprox approx) {
  ClassScores out;
  std::size_t c = upper.size();
  out.values.resize(c);
  for (std::size_t i = 0; i < c; ++i) {
    switch (approx) {
      case FrnnApprox::Upper: out.values[i] = upper[i]; break;
      case FrnnApprox::Lower: out.values[i] = lower[i]; break;
      case FrnnApprox::Mean: out.values[i] = 0.5 * (upper[i] + lower[i]); break;
    }
  }
  return out;
}

}  // namespace detail

/// All three approximations at once, indexed by FrnnApprox.
inline std::array<ClassScores, 3> frnn_score_all(const FittedFRNN& model,
                                                 std::span<const double> record) {
  std::vector<double> scaled = apply_scaler(model.core.scaler, record);
  auto [upper, lower] = detail::frnn_upper_lower(model.core, model.cutoff_within,
                                                 model.cutoff_outside, scaled);
  return {detail::pick_approx(upper, lower, FrnnApprox::Lower),
          detail::pick_approx(upper, lower, FrnnApprox::Upper),
          detail::pick_approx(upper, lower, FrnnApprox::Mean)};
}

inline ClassScores frnn_score(const FittedFRNN& model, std::span<const double> record) {
  std::vector<double> scaled = apply_scaler(model.core.scaler, record);
  auto [upper, lower] = detail::frnn_upper_lower(model.core, model.cutoff_within,
                                                 model.cutoff_outside, scaled);
  return detail::pick_approx(upper, lower, model.approx);
}

namespace detail {

/// Leave-one-out scorer over a training index. Scores of record t reproduce,
/// to rounding error, a model refitted on the training set without t: for FNN
/// the memberships of t's neighbours are rebuilt without t, and for FRNN the
/// cutoffs are recomputed for each held-out record via a shift/top-2
/// aggregation over precomputed neighbour prefixes.
class LooScorer {
 public:
  LooScorer(const NeighbourIndex& index, const WeightScheme& scheme,
            ClassifierKind kind, FnnMode fnn_mode, int k_max)
      : index_(index),
        scheme_(scheme),
        kind_(kind),
        fnn_mode_(fnn_mode),
        n_(index.size()),
        c_(index.class_count()),
        k_max_(k_max) {
    if (kind_ == ClassifierKind::FRNN) {
      build_class_lists();
    } else {
      build_full_lists();
    }
  }

  // n x c row-major LOO score matrix.
  std::vector<double> scores_flat(int k) const {
    std::vector<double> out(static_cast<std::size_t>(n_) * static_cast<std::size_t>(c_));
    for (int t = 0; t < n_; ++t) {
      ClassScores s = score_vote(t, k);
      for (int j = 0; j < c_; ++j)
        out[static_cast<std::size_t>(t) * static_cast<std::size_t>(c_) +
            static_cast<std::size_t>(j)] = s.values[static_cast<std::size_t>(j)];
    }
    return out;
  }

  // Matrices for lower/upper/mean, indexed by FrnnApprox.
  std::array<std::vector<double>, 3> scores_frnn_flat(int k) const {
    auto [d_plus, d_minus] = loo_cutoffs(k);
    std::array<std::vector<double>, 3> out;
    for (auto& m : out)
      m.resize(static_cast<std::size_t>(n_) * static_cast<std::size_t>(c_));
    std::vector<double> w = rank_weights(scheme_.rank, k);
    std::vector<double> wsum(static_cast<std::size_t>(k) + 1, 0.0);
    for (int i = 0; i < k; ++i)
      wsum[static_cast<std::size_t>(i) + 1] =
          wsum[static_cast<std::size_t>(i)] + w[static_cast<std::size_t>(i)];
    const Kernel& s = scheme_.dist.kernel;
    for (int t = 0; t < n_; ++t) {
      int own = index_.labels()[static_cast<std::size_t>(t)];
      for (int cls = 0; cls < c_; ++cls) {
        const auto& within = within_[at(t, cls)];
        int pool_within = static_cast<int>(index_.class_members(cls).size()) -
                          (own == cls ? 1 : 0);
        int kw = std::min(k, pool_within);
        double upper = 0.0;
        if (kw >= 1) {
          double acc = 0.0;
          for (int i = 0; i < kw; ++i)
            acc += w[static_cast<std::size_t>(i)] *
                   kernel_eval(s, cutoff_ratio(within.dist[static_cast<std::size_t>(i)],
                                               d_plus[static_cast<std::size_t>(t)]));
          upper = acc / wsum[static_cast<std::size_t>(kw)];
        }
        const auto& outside = outside_[at(t, cls)];
        int pool_outside = (n_ - 1) - pool_within;
        int ko = std::min(k, pool_outside);
        double lower = 1.0;
        if (ko >= 1) {
          double acc = 0.0;
          for (int i = 0; i < ko; ++i)
            acc += w[static_cast<std::size_t>(i)] *
                   (1.0 - kernel_eval(s, cutoff_ratio(outside.dist[static_cast<std::size_t>(i)],
                                                      d_minus[static_cast<std::size_t>(t)])));
          lower = acc / wsum[static_cast<std::size_t>(ko)];
        }
        std::size_t cell = static_cast<std::size_t>(t) * static_cast<std::size_t>(c_) +
                           static_cast<std::size_t>(cls);
        out[static_cast<std::size_t>(FrnnApprox::Lower)][cell] = lower;
        out[static_cast<std::size_t>(FrnnApprox::Upper)][cell] = upper;
        out[static_cast<std::size_t>(FrnnApprox::Mean)][cell] = 0.5 * (upper + lower);
      }
    }
    return out;
  }

  // Cutoffs of the model refitted without each record, exposed for testing.
  std::pair<std::vector<double>, std::vector<double>> loo_cutoffs(int k) const;

 private:
  struct List {
    std::vector<double> dist;
    std::vector<int> idx;
  };

  std::size_t at(int t, int cls) const {
    return static_cast<std::size_t>(t) * static_cast<std::size_t>(c_) +
           static_cast<std::size_t>(cls);
  }

  void build_full_lists() {
    int len = std::min(n_ - 1, k_max_ + 1);
    full_.resize(static_cast<std::size_t>(n_));
    if (len < 1) return;
    for (int t = 0; t < n_; ++t) {
      QueryResult q = index_.loo_query(t, len);
      full_[static_cast<std::size_t>(t)] = {std::move(q.distances), std::move(q.indices)};
    }
  }

  void build_class_lists() {
    within_.resize(static_cast<std::size_t>(n_) * static_cast<std::size_t>(c_));
    outside_.resize(static_cast<std::size_t>(n_) * static_cast<std::size_t>(c_));
    for (int t = 0; t < n_; ++t) {
      int own = index_.labels()[static_cast<std::size_t>(t)];
      for (int cls = 0; cls < c_; ++cls) {
        int pool_within = static_cast<int>(index_.class_members(cls).size()) -
                          (own == cls ? 1 : 0);
        int lw = std::min(pool_within, k_max_ + 1);
        if (lw >= 1) {
          QueryResult q = index_.loo_query_class(t, lw, cls, PoolMode::Within);
          within_[at(t, cls)] = {std::move(q.distances), std::move(q.indices)};
        }
        int pool_outside = (n_ - 1) - pool_within;
        int lo = std::min(pool_outside, k_max_ + 1);
        if (lo >= 1) {
          QueryResult q = index_.loo_query_class(t, lo, cls, PoolMode::Outside);
          outside_[at(t, cls)] = {std::move(q.distances), std::move(q.indices)};
        }
      }
    }
  }

  // NN / FNN scores for record t with the model state rebuilt without t.
  ClassScores score_vote(int t, int k) const {
    const List& lst = full_[static_cast<std::size_t>(t)];
    std::span<const double> d(lst.dist.data(), static_cast<std::size_t>(k));
    std::span<const int> idx(lst.idx.data(), static_cast<std::size_t>(k));
    std::vector<double> w = combined_weights(scheme_, d);
    if (kind_ == ClassifierKind::NN || fnn_mode_ == FnnMode::Crisp)
      return vote(index_.labels(), c_, idx, w);

    // Fuzzy FNN: memberships of each neighbour are recomputed over the
    // training set without t.
    double total = 0.0;
    for (double x : w) total += x;
    ClassScores out;
    out.values.assign(static_cast<std::size_t>(c_), 0.0);
    for (int i = 0; i < k; ++i) {
      int x = idx[static_cast<std::size_t>(i)];
      double wi = total > 0.0 ? w[static_cast<std::size_t>(i)] / total
                              : 1.0 / static_cast<double>(k);
      const List& xl = full_[static_cast<std::size_t>(x)];
      int own = index_.labels()[static_cast<std::size_t>(x)];
      int taken = 0;
      std::size_t pos = 0;
      // First k neighbours of x after dropping t.
      std::vector<int> counts(static_cast<std::size_t>(c_), 0);
      while (taken < k && pos < xl.idx.size()) {
        int nb = xl.idx[pos++];
        if (nb == t) continue;
        ++counts[static_cast<std::size_t>(index_.labels()[static_cast<std::size_t>(nb)])];
        ++taken;
      }
      if (taken < k)
        throw std::logic_error("LooScorer: insufficient neighbour prefix for fuzzy FNN");
      for (int j = 0; j < c_; ++j) {
        double u = 0.49 * static_cast<double>(counts[static_cast<std::size_t>(j)]) /
                   static_cast<double>(k);
        if (j == own) u += 0.51;
        out.values[static_cast<std::size_t>(j)] += u * wi;
      }
    }
    return out;
  }

  const NeighbourIndex& index_;
  WeightScheme scheme_;
  ClassifierKind kind_;
  FnnMode fnn_mode_;
  int n_;
  int c_;
  int k_max_;
  std::vector<List> full_;
  std::vector<List> within_;   // (t, class) -> neighbours of t within class, t excluded
  std::vector<List> outside_;  // (t, class) -> neighbours of t outside class, t excluded
};

inline std::pair<std::vector<double>, std::vector<double>> LooScorer::loo_cutoffs(
    int k) const {
  constexpr double none = -1.0;
  const std::vector<int>& labels = index_.labels();

  // Within side: record r contributes its k-th own-class neighbour distance,
  // recomputed as if record t were absent. Removing t shifts r's k-th
  // neighbour only when t sits among the first k entries of r's own-class
  // list; aggregation over r then needs, per class, the maximum over
  // same-class contributors excluding one record (top-2 trick), the maximum
  // over other-class contributors, and per-record overrides for the shifted
  // positions.
  std::vector<double> amax_w(static_cast<std::size_t>(c_), none);
  std::vector<double> c1_w(static_cast<std::size_t>(c_), none);
  std::vector<int> c1_arg_w(static_cast<std::size_t>(c_), -1);
  std::vector<double> c2_w(static_cast<std::size_t>(c_), none);
  std::vector<double> ov_plus(static_cast<std::size_t>(n_), none);

  // Outside side, symmetric roles: same-class t keeps the pool intact (top-2
  // over A needed to exclude t == r), different-class t shrinks the pool.
  std::vector<double> a1_o(static_cast<std::size_t>(c_), none);
  std::vector<int> a1_arg_o(static_cast<std::size_t>(c_), -1);
  std::vector<double> a2_o(static_cast<std::size_t>(c_), none);
  std::vector<double> cmax_o(static_cast<std::size_t>(c_), none);
  std::vector<double> ov_minus(static_cast<std::size_t>(n_), none);

  auto push_top2 = [](double value, int arg, double& v1, int& arg1, double& v2) {
    if (value > v1) {
      v2 = v1;
      v1 = value;
      arg1 = arg;
    } else if (value > v2) {
      v2 = value;
    }
  };

  for (int r = 0; r < n_; ++r) {
    int own = labels[static_cast<std::size_t>(r)];
    const List& wl = within_[at(r, own)];
    int p = static_cast<int>(index_.class_members(own).size()) - 1;
    if (p >= 1) {
      int kp = std::min(k, p);
      amax_w[static_cast<std::size_t>(own)] =
          std::max(amax_w[static_cast<std::size_t>(own)],
                   wl.dist[static_cast<std::size_t>(kp - 1)]);
      if (p >= 2) {
        int kpp = std::min(k, p - 1);
        double c_val = wl.dist[static_cast<std::size_t>(kpp - 1)];
        double b_val = wl.dist[static_cast<std::size_t>(kpp)];
        push_top2(c_val, r, c1_w[static_cast<std::size_t>(own)],
                  c1_arg_w[static_cast<std::size_t>(own)],
                  c2_w[static_cast<std::size_t>(own)]);
        for (int j = 0; j < kpp; ++j) {
          int tt = wl.idx[static_cast<std::size_t>(j)];
          ov_plus[static_cast<std::size_t>(tt)] =
              std::max(ov_plus[static_cast<std::size_t>(tt)], b_val);
        }
      }
    }
    const List& ol = outside_[at(r, own)];
    int q = n_ - static_cast<int>(index_.class_members(own).size());
    if (q >= 1) {
      int kq = std::min(k, q);
      push_top2(ol.dist[static_cast<std::size_t>(kq - 1)], r,
                a1_o[static_cast<std::size_t>(own)],
                a1_arg_o[static_cast<std::size_t>(own)],
                a2_o[static_cast<std::size_t>(own)]);
      if (q >= 2) {
        int kqq = std::min(k, q - 1);
        double c_val = ol.dist[static_cast<std::size_t>(kqq - 1)];
        double b_val = ol.dist[static_cast<std::size_t>(kqq)];
        cmax_o[static_cast<std::size_t>(own)] =
            std::max(cmax_o[static_cast<std::size_t>(own)], c_val);
        for (int j = 0; j < kqq; ++j) {
          int tt = ol.idx[static_cast<std::size_t>(j)];
          ov_minus[static_cast<std::size_t>(tt)] =
              std::max(ov_minus[static_cast<std::size_t>(tt)], b_val);
        }
      }
    }
  }

  std::vector<double> best_a_w(static_cast<std::size_t>(c_), none);
  std::vector<double> best_c_o(static_cast<std::size_t>(c_), none);
  for (int g = 0; g < c_; ++g)
    for (int d = 0; d < c_; ++d) {
      if (d == g) continue;
      best_a_w[static_cast<std::size_t>(g)] = std::max(
          best_a_w[static_cast<std::size_t>(g)], amax_w[static_cast<std::size_t>(d)]);
      best_c_o[static_cast<std::size_t>(g)] = std::max(
          best_c_o[static_cast<std::size_t>(g)], cmax_o[static_cast<std::size_t>(d)]);
    }

  std::vector<double> d_plus(static_cast<std::size_t>(n_), 0.0);
  std::vector<double> d_minus(static_cast<std::size_t>(n_), 0.0);
  for (int t = 0; t < n_; ++t) {
    int g = labels[static_cast<std::size_t>(t)];
    double same_c = c1_arg_w[static_cast<std::size_t>(g)] != t
                        ? c1_w[static_cast<std::size_t>(g)]
                        : c2_w[static_cast<std::size_t>(g)];
    double plus = std::max({best_a_w[static_cast<std::size_t>(g)], same_c,
                            ov_plus[static_cast<std::size_t>(t)]});
    d_plus[static_cast<std::size_t>(t)] = plus > none ? std::max(plus, 0.0) : 0.0;

    double same_a = a1_arg_o[static_cast<std::size_t>(g)] != t
                        ? a1_o[static_cast<std::size_t>(g)]
                        : a2_o[static_cast<std::size_t>(g)];
    double minus = std::max({same_a, best_c_o[static_cast<std::size_t>(g)],
                             ov_minus[static_cast<std::size_t>(t)]});
    d_minus[static_cast<std::size_t>(t)] = minus > none ? std::max(minus, 0.0) : 0.0;
  }
  return {std::move(d_plus), std::move(d_minus)};
}

}  // namespace detail

struct KSelection {
  int k = 1;
  FrnnApprox approx = FrnnApprox::Lower;
  double loo_auroc = std::numeric_limits<double>::quiet_NaN();
};

namespace detail {

inline int loo_k_cap(ClassifierKind kind, FnnMode mode, int n) {
  if (kind == ClassifierKind::FNN && mode == FnnMode::Fuzzy) return n - 2;
  return n - 1;
}

inline KSelection select_k_impl(const NeighbourIndex& index, const WeightScheme& scheme,
                                ClassifierKind kind, FnnMode fnn_mode,
                                std::optional<FrnnApprox> fixed_approx,
                                std::span<const int> grid_in,
                                MulticlassAveraging averaging) {
  int n = index.size();
  int cap = loo_k_cap(kind, fnn_mode, n);
  std::vector<int> grid;
  for (int k : grid_in)
    if (k >= 1 && k <= cap) grid.push_back(k);
  std::sort(grid.begin(), grid.end());
  grid.erase(std::unique(grid.begin(), grid.end()), grid.end());

  KSelection best;
  best.approx = fixed_approx.value_or(FrnnApprox::Lower);
  if (grid.empty()) return best;
  best.k = grid.front();

  int present = 0;
  {
    std::vector<bool> seen(static_cast<std::size_t>(index.class_count()), false);
    for (int l : index.labels())
      if (!seen[static_cast<std::size_t>(l)]) {
        seen[static_cast<std::size_t>(l)] = true;
        ++present;
      }
  }
  if (present < 2) return best;  // AUROC undefined; keep smallest k

  LooScorer scorer(index, scheme, kind, fnn_mode, grid.back());
  double best_auroc = -1.0;
  for (int k : grid) {
    if (kind == ClassifierKind::FRNN) {
      auto mats = scorer.scores_frnn_flat(k);
      for (FrnnApprox approx : {FrnnApprox::Lower, FrnnApprox::Upper, FrnnApprox::Mean}) {
        if (fixed_approx && *fixed_approx != approx) continue;
        double auroc = auroc_multiclass(mats[static_cast<std::size_t>(approx)],
                                        index.labels(), index.class_count(), averaging);
        if (auroc > best_auroc) {
          best_auroc = auroc;
          best = {k, approx, auroc};
        }
      }
    } else {
      std::vector<double> mat = scorer.scores_flat(k);
      double auroc = auroc_multiclass(mat, index.labels(), index.class_count(), averaging);
      if (auroc > best_auroc) {
        best_auroc = auroc;
        best = {k, fixed_approx.value_or(FrnnApprox::Lower), auroc};
      }
    }
  }
  return best;
}

}  // namespace detail

using FittedClassifier = std::variant<FittedNN, FittedFNN, FittedFRNN>;

inline FittedClassifier fit_classifier(const Dataset& train, const ClassifierConfig& cfg) {
  if (train.n < 1) throw std::invalid_argument("fit_classifier: empty training set");
  Scaler scaler = fit_scaler(train, cfg.scaling);
  NeighbourIndex index(scale_features(scaler, train), train.m, train.labels,
                       static_cast<int>(train.classes.size()), cfg.metric);
  WeightScheme scheme = resolve_scheme(cfg, train.m);

  int k;
  FrnnApprox approx = cfg.frnn_approx.value_or(FrnnApprox::Mean);
  if (cfg.fixed_k) {
    k = *cfg.fixed_k;
    if (k < 1) throw std::invalid_argument("fit_classifier: fixed k must be >= 1");
    if (k > train.n)
      throw std::invalid_argument("fit_classifier: fixed k exceeds training size");
    if (cfg.kind == ClassifierKind::FRNN && !cfg.frnn_approx) {
      std::array<int, 1> single{k};
      approx = detail::select_k_impl(index, scheme, cfg.kind, cfg.fnn_mode, std::nullopt,
                                     single, cfg.averaging)
                   .approx;
    }
  } else {
    std::vector<int> grid = cfg.k_grid.empty() ? default_k_grid(train.n) : cfg.k_grid;
    KSelection sel = detail::select_k_impl(index, scheme, cfg.kind, cfg.fnn_mode,
                                           cfg.frnn_approx, grid, cfg.averaging);
    k = sel.k;
    if (cfg.kind == ClassifierKind::FRNN) approx = sel.approx;
  }

  switch (cfg.kind) {
    case ClassifierKind::NN:
      return FittedNN{{std::move(scaler), std::move(index), scheme, k, train.classes}};
    case ClassifierKind::FNN: {
      FittedFNN model{{std::move(scaler), std::move(index), scheme, k, train.classes},
                      cfg.fnn_mode,
                      cfg.fnn_q,
                      {}};
      if (cfg.fnn_mode == FnnMode::Fuzzy) {
        int mk = std::min(model.core.k, model.core.index.size() - 1);
        if (mk < 1)
          throw std::invalid_argument("fit_classifier: fuzzy FNN needs >= 2 records");
        model.core.k = mk;
        model.memberships = fnn_fit_memberships(model.core.index, mk);
      }
      return model;
    }
    case ClassifierKind::FRNN: {
      auto [d_plus, d_minus] = frnn_fit_cutoffs(index, k);
      return FittedFRNN{{std::move(scaler), std::move(index), scheme, k, train.classes},
                        approx, d_plus, d_minus};
    }
  }
  throw std::invalid_argument("fit_classifier: invalid classifier kind");
}

/// Leave-one-out k (and approximation, for FRNN) selection on training data.
inline KSelection select_k(const Dataset& train, const ClassifierConfig& cfg,
                           std::span<const int> k_grid) {
  if (k_grid.empty()) throw std::invalid_argument("select_k: empty k grid");
  Scaler scaler = fit_scaler(train, cfg.scaling);
  NeighbourIndex index(scale_features(scaler, train), train.m, train.labels,
                       static_cast<int>(train.classes.size()), cfg.metric);
  WeightScheme scheme = resolve_scheme(cfg, train.m);
  return detail::select_k_impl(index, scheme, cfg.kind, cfg.fnn_mode, cfg.frnn_approx,
                               k_grid, cfg.averaging);
}

inline ClassScores score(const FittedClassifier& model, std::span<const double> record) {
  return std::visit(
      [&](const auto& m) -> ClassScores {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, FittedNN>) return nn_score(m, record);
        else if constexpr (std::is_same_v<T, FittedFNN>) return fnn_score(m, record);
        else return frnn_score(m, record);
      },
      model);
}

inline const FittedCore& core_of(const FittedClassifier& model) {
  return std::visit([](const auto& m) -> const FittedCore& { return m.core; }, model);
}

inline std::string predict(const FittedClassifier& model, std::span<const double> record) {
  ClassScores s = score(model, record);
  return core_of(model).classes[static_cast<std::size_t>(argmax_class(s))];
}

}  // namespace kwnn
