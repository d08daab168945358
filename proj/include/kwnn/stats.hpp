#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace kwnn {

/// AUROC in Mann-Whitney form: the probability that a random positive
/// outranks a random negative, ties counted one half. Computed from average
/// ranks, which is numerically exact for the half-integer rank sums involved.
inline double auroc_binary(std::span<const double> scores, std::span<const int> labels,
                           int positive) {
  if (scores.size() != labels.size())
    throw std::invalid_argument("auroc_binary: scores/labels length mismatch");
  std::size_t n = scores.size();
  std::size_t n_pos = 0;
  for (int l : labels) n_pos += (l == positive);
  std::size_t n_neg = n - n_pos;
  if (n_pos == 0 || n_neg == 0)
    throw std::invalid_argument("auroc_binary: need both a positive and a negative");

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });

  double rank_sum_pos = 0.0;
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    while (j < n && scores[order[j]] == scores[order[i]]) ++j;
    double avg_rank = static_cast<double>(i + 1 + j) / 2.0;  // 1-based average
    for (std::size_t t = i; t < j; ++t)
      if (labels[order[t]] == positive) rank_sum_pos += avg_rank;
    i = j;
  }
  double u = rank_sum_pos - static_cast<double>(n_pos) * (static_cast<double>(n_pos) + 1.0) / 2.0;
  return u / (static_cast<double>(n_pos) * static_cast<double>(n_neg));
}

enum class MulticlassAveraging { OneVsRest, OneVsOne };

/// Macro AUROC over the classes present in the labels. One-vs-rest by
/// default; one-vs-one is the Hand & Till pairwise mean.
inline double auroc_multiclass(std::span<const double> score_matrix,
                               std::span<const int> labels, int class_count,
                               MulticlassAveraging averaging = MulticlassAveraging::OneVsRest) {
  std::size_t n = labels.size();
  if (n == 0) throw std::invalid_argument("auroc_multiclass: empty input");
  if (score_matrix.size() != n * static_cast<std::size_t>(class_count))
    throw std::invalid_argument("auroc_multiclass: matrix size mismatch");
  std::vector<int> counts(static_cast<std::size_t>(class_count), 0);
  for (int l : labels) {
    if (l < 0 || l >= class_count)
      throw std::invalid_argument("auroc_multiclass: label out of range");
    ++counts[static_cast<std::size_t>(l)];
  }
  std::vector<int> present;
  for (int c = 0; c < class_count; ++c)
    if (counts[static_cast<std::size_t>(c)] > 0) present.push_back(c);
  if (present.size() < 2)
    throw std::invalid_argument("auroc_multiclass: need at least two classes present");

  auto column = [&](int c, std::span<const std::size_t> rows) {
    std::vector<double> v;
    v.reserve(rows.size());
    for (std::size_t r : rows)
      v.push_back(score_matrix[r * static_cast<std::size_t>(class_count) +
                               static_cast<std::size_t>(c)]);
    return v;
  };

  if (averaging == MulticlassAveraging::OneVsRest) {
    std::vector<std::size_t> all(n);
    std::iota(all.begin(), all.end(), std::size_t{0});
    double acc = 0.0;
    for (int c : present) {
      std::vector<double> col = column(c, all);
      acc += auroc_binary(col, labels, c);
    }
    return acc / static_cast<double>(present.size());
  }

  double acc = 0.0;
  std::size_t pairs = 0;
  for (std::size_t a = 0; a < present.size(); ++a)
    for (std::size_t b = a + 1; b < present.size(); ++b) {
      int ca = present[a], cb = present[b];
      std::vector<std::size_t> rows;
      std::vector<int> sub_labels;
      for (std::size_t r = 0; r < n; ++r)
        if (labels[r] == ca || labels[r] == cb) {
          rows.push_back(r);
          sub_labels.push_back(labels[r]);
        }
      std::vector<double> col_a = column(ca, rows);
      std::vector<double> col_b = column(cb, rows);
      acc += 0.5 * (auroc_binary(col_a, sub_labels, ca) +
                    auroc_binary(col_b, sub_labels, cb));
      ++pairs;
    }
  return acc / static_cast<double>(pairs);
}

struct WilcoxonResult {
  double p = 1.0;
  double w_plus = 0.0;
  int n_effective = 0;  // pairs left after dropping zero differences
  bool degenerate = false;
  bool exact = false;
  double point_mass = 0.0;  // P(W = w_obs) under the exact null (exact mode only)
};

/// One-sided Wilcoxon signed-rank test of a > b. Zero differences are
/// dropped (Wilcoxon's rule), tied |d| get average ranks. Exact p by the full
/// sign-assignment distribution for n_effective <= 20, otherwise a normal
/// approximation with tie-corrected variance and continuity correction.
inline WilcoxonResult wilcoxon_one_sided(std::span<const double> a,
                                         std::span<const double> b) {
  if (a.size() != b.size())
    throw std::invalid_argument("wilcoxon_one_sided: length mismatch");
  if (a.empty()) throw std::invalid_argument("wilcoxon_one_sided: empty input");

  std::vector<double> diff;
  diff.reserve(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    double d = a[i] - b[i];
    if (d != 0.0) diff.push_back(d);
  }
  WilcoxonResult res;
  res.n_effective = static_cast<int>(diff.size());
  if (diff.empty()) {
    res.degenerate = true;
    res.exact = true;
    res.p = 1.0;
    res.point_mass = 1.0;
    return res;
  }

  std::size_t n = diff.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) {
    return std::fabs(diff[x]) < std::fabs(diff[y]);
  });
  std::vector<double> rank(n);
  std::vector<std::size_t> tie_sizes;
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    while (j < n && std::fabs(diff[order[j]]) == std::fabs(diff[order[i]])) ++j;
    double avg = static_cast<double>(i + 1 + j) / 2.0;
    for (std::size_t t = i; t < j; ++t) rank[order[t]] = avg;
    tie_sizes.push_back(j - i);
    i = j;
  }
  double w_plus = 0.0;
  for (std::size_t t = 0; t < n; ++t)
    if (diff[t] > 0.0) w_plus += rank[t];
  res.w_plus = w_plus;

  if (n <= 20) {
    // Distribution of W+ over all 2^n sign assignments, on doubled ranks so
    // every value is integral.
    std::vector<long long> r2(n);
    long long total = 0;
    for (std::size_t t = 0; t < n; ++t) {
      r2[t] = std::llround(2.0 * rank[t]);
      total += r2[t];
    }
    std::vector<std::uint64_t> dp(static_cast<std::size_t>(total) + 1, 0);
    dp[0] = 1;
    for (std::size_t t = 0; t < n; ++t)
      for (long long s = total; s >= r2[t]; --s)
        dp[static_cast<std::size_t>(s)] += dp[static_cast<std::size_t>(s - r2[t])];
    long long obs = std::llround(2.0 * w_plus);
    std::uint64_t tail = 0;
    for (long long s = obs; s <= total; ++s) tail += dp[static_cast<std::size_t>(s)];
    double denom = std::ldexp(1.0, static_cast<int>(n));  // 2^n
    res.p = static_cast<double>(tail) / denom;
    res.point_mass = static_cast<double>(dp[static_cast<std::size_t>(obs)]) / denom;
    res.exact = true;
    return res;
  }

  double nd = static_cast<double>(n);
  double mean = nd * (nd + 1.0) / 4.0;
  double var = nd * (nd + 1.0) * (2.0 * nd + 1.0) / 24.0;
  for (std::size_t t : tie_sizes) {
    double td = static_cast<double>(t);
    var -= (td * td * td - td) / 48.0;
  }
  double sigma = std::sqrt(var);
  double z = (w_plus - mean - 0.5) / sigma;
  res.p = std::clamp(0.5 * std::erfc(z / std::sqrt(2.0)), 0.0, 1.0);
  res.exact = false;
  return res;
}

/// Step-down familywise correction: sort ascending, multiply the j-th
/// smallest by (m-j+1) capped at 1, enforce monotonicity with a running max,
/// return in the original order.
inline std::vector<double> holm_bonferroni(std::span<const double> p_values) {
  std::size_t m = p_values.size();
  for (double p : p_values)
    if (!(p >= 0.0 && p <= 1.0))
      throw std::invalid_argument("holm_bonferroni: p-values must lie in [0,1]");
  std::vector<std::size_t> order(m);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return p_values[a] < p_values[b]; });
  std::vector<double> adjusted(m);
  double running = 0.0;
  for (std::size_t j = 0; j < m; ++j) {
    double term = std::min(1.0, static_cast<double>(m - j) * p_values[order[j]]);
    running = std::max(running, term);
    adjusted[order[j]] = running;
  }
  return adjusted;
}

}  // namespace kwnn
