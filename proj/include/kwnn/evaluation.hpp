#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "kwnn/classifiers.hpp"
#include "kwnn/dataset.hpp"
#include "kwnn/stats.hpp"
#include "kwnn/util.hpp"

namespace kwnn {

struct FoldOutcome {
  int fold = 0;
  double auroc = std::numeric_limits<double>::quiet_NaN();
  bool valid = false;  // false when the test split held a single class
  int k_selected = 0;
  bool has_approx = false;
  FrnnApprox approx = FrnnApprox::Mean;
  double wall_ms = 0.0;
};

struct EvaluationResult {
  std::string dataset;
  std::string config_digest;
  std::vector<FoldOutcome> folds;
  int folds_used = 0;
  double mean_auroc = std::numeric_limits<double>::quiet_NaN();
  std::vector<std::string> warnings;
};

/// Per-fold protocol: the scaler and the classifier (including leave-one-out
/// k selection) are fitted on the training folds only, then the held-out fold
/// is scored and summarised as multiclass AUROC. Deterministic given the seed;
/// folds may run concurrently but aggregate in fixed order.
inline EvaluationResult cross_validate(const Dataset& data, const ClassifierConfig& cfg,
                                       int folds = 5, std::uint64_t seed = 0,
                                       int jobs = 1) {
  if (folds < 2) throw std::invalid_argument("cross_validate: need folds >= 2");
  std::vector<int> class_counts(data.classes.size(), 0);
  for (int l : data.labels) ++class_counts[static_cast<std::size_t>(l)];
  for (std::size_t c = 0; c < class_counts.size(); ++c)
    if (class_counts[c] == 1)
      throw std::invalid_argument("cross_validate: class '" + data.classes[c] +
                                  "' has a single record");

  FoldAssignment fa = stratified_folds(data, folds, seed);
  EvaluationResult res;
  res.dataset = data.name;
  res.folds.resize(static_cast<std::size_t>(folds));

  detail::parallel_for(static_cast<std::size_t>(folds), jobs, [&](std::size_t f) {
    auto started = std::chrono::steady_clock::now();
    FoldOutcome out;
    out.fold = static_cast<int>(f);
    std::vector<int> train_rows = fa.complement(static_cast<int>(f));
    std::vector<int> test_rows = fa.members(static_cast<int>(f));
    Dataset train = subset(data, train_rows);
    FittedClassifier model = fit_classifier(train, cfg);
    const FittedCore& core = core_of(model);
    out.k_selected = core.k;
    if (cfg.kind == ClassifierKind::FRNN) {
      out.has_approx = true;
      out.approx = std::get<FittedFRNN>(model).approx;
    }

    std::size_t cc = data.classes.size();
    std::vector<double> matrix(test_rows.size() * cc);
    std::vector<int> labels(test_rows.size());
    for (std::size_t i = 0; i < test_rows.size(); ++i) {
      ClassScores s = score(model, data.row(test_rows[i]));
      for (std::size_t j = 0; j < cc; ++j) matrix[i * cc + j] = s.values[j];
      labels[i] = data.labels[static_cast<std::size_t>(test_rows[i])];
    }
    bool multi = false;
    for (std::size_t i = 1; i < labels.size(); ++i)
      if (labels[i] != labels[0]) {
        multi = true;
        break;
      }
    if (multi) {
      out.auroc = auroc_multiclass(matrix, labels, static_cast<int>(cc), cfg.averaging);
      out.valid = true;
    }
    out.wall_ms = std::chrono::duration<double, std::milli>(
                      std::chrono::steady_clock::now() - started)
                      .count();
    res.folds[f] = out;
  });

  double acc = 0.0;
  for (const FoldOutcome& out : res.folds) {
    if (out.valid) {
      acc += out.auroc;
      ++res.folds_used;
    } else {
      res.warnings.push_back("fold " + std::to_string(out.fold) +
                             " held a single class and was excluded");
    }
  }
  if (res.folds_used > 0) res.mean_auroc = acc / res.folds_used;
  return res;
}

/// One paired comparison: per-dataset mean AUROCs of config a vs config b,
/// tested one-sided (a > b), Holm-corrected within its family.
struct PairedComparison {
  std::string label;
  std::string family;
  std::vector<double> a;
  std::vector<double> b;
};

struct ComparisonRow {
  std::string label;
  std::string family;
  int n = 0;
  int n_effective = 0;
  int wins = 0;
  int ties = 0;
  int losses = 0;
  double p_raw = 1.0;
  double p_adjusted = 1.0;
  bool degenerate = false;
};

struct ComparisonReport {
  std::vector<ComparisonRow> rows;
};

inline ComparisonReport compare_configs(const std::vector<PairedComparison>& comparisons) {
  ComparisonReport report;
  report.rows.reserve(comparisons.size());
  for (const PairedComparison& cmp : comparisons) {
    if (cmp.a.size() != cmp.b.size())
      throw std::invalid_argument("compare_configs: '" + cmp.label +
                                  "' pairs " + std::to_string(cmp.a.size()) + " vs " +
                                  std::to_string(cmp.b.size()) + " values");
    if (cmp.a.empty())
      throw std::invalid_argument("compare_configs: '" + cmp.label + "' is empty");
    ComparisonRow row;
    row.label = cmp.label;
    row.family = cmp.family;
    row.n = static_cast<int>(cmp.a.size());
    for (std::size_t i = 0; i < cmp.a.size(); ++i) {
      if (cmp.a[i] > cmp.b[i]) ++row.wins;
      else if (cmp.a[i] < cmp.b[i]) ++row.losses;
      else ++row.ties;
    }
    WilcoxonResult w = wilcoxon_one_sided(cmp.a, cmp.b);
    row.p_raw = w.p;
    row.n_effective = w.n_effective;
    row.degenerate = w.degenerate;
    report.rows.push_back(std::move(row));
  }

  // Holm within each family, preserving row order.
  std::vector<std::string> families;
  for (const ComparisonRow& row : report.rows)
    if (std::find(families.begin(), families.end(), row.family) == families.end())
      families.push_back(row.family);
  for (const std::string& fam : families) {
    std::vector<std::size_t> members;
    std::vector<double> raw;
    for (std::size_t i = 0; i < report.rows.size(); ++i)
      if (report.rows[i].family == fam) {
        members.push_back(i);
        raw.push_back(report.rows[i].p_raw);
      }
    std::vector<double> adj = holm_bonferroni(raw);
    for (std::size_t i = 0; i < members.size(); ++i)
      report.rows[members[i]].p_adjusted = adj[i];
  }
  return report;
}

}  // namespace kwnn
