#pragma once

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <istream>
#include <ostream>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "kwnn/geometry.hpp"
#include "kwnn/util.hpp"

namespace kwnn {

/// Numeric feature matrix with class labels. The class catalogue is fixed in
/// order of first appearance at load time; that order breaks every downstream
/// argmax tie, so it must never be re-sorted.
struct Dataset {
  std::string name;
  int n = 0;
  int m = 0;
  std::vector<double> features;  // row-major n*m
  std::vector<int> labels;       // indices into classes
  std::vector<std::string> classes;

  std::span<const double> row(int i) const {
    return {features.data() + static_cast<std::size_t>(i) * static_cast<std::size_t>(m),
            static_cast<std::size_t>(m)};
  }
};

/// Selects the label column either by 0-based position (negative counts from
/// the end) or by header name.
struct LabelColumn {
  bool by_name = false;
  int index = -1;  // default: last column
  std::string name;

  static LabelColumn by_index(int i) {
    LabelColumn c;
    c.index = i;
    return c;
  }
  static LabelColumn named(std::string n) {
    LabelColumn c;
    c.by_name = true;
    c.name = std::move(n);
    return c;
  }
  /// CLI form: an integer selects by position, anything else by header name.
  static LabelColumn parse(std::string_view text) {
    if (text.empty()) return LabelColumn{};
    char* end = nullptr;
    std::string s(text);
    long v = std::strtol(s.c_str(), &end, 10);
    if (end && *end == '\0' && end != s.c_str()) return by_index(static_cast<int>(v));
    return named(std::move(s));
  }
};

namespace detail {

// Splits one CSV record, honouring double-quoted fields with "" escapes.
inline std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    char c = line[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          cell += '"';
          ++i;
        } else {
          quoted = false;
        }
      } else {
        cell += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      cells.push_back(std::move(cell));
      cell.clear();
    } else {
      cell += c;
    }
  }
  cells.push_back(std::move(cell));
  return cells;
}

inline bool parse_finite_double(const std::string& cell, double& out) {
  if (cell.empty()) return false;
  const char* begin = cell.c_str();
  char* end = nullptr;
  double v = std::strtod(begin, &end);
  if (end != begin + cell.size()) return false;
  if (!std::isfinite(v)) return false;
  out = v;
  return true;
}

inline std::string trim(const std::string& s) {
  std::size_t b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  std::size_t e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

}  // namespace detail

/// Reads a comma-delimited dataset. The header row is optional: the first row
/// counts as data only if every non-label cell parses as a finite real. When
/// the label column is selected by name a header is required. Scientific
/// notation is accepted; missing or non-numeric feature cells are errors that
/// name the offending row and column.
inline Dataset load_csv(std::istream& in, const LabelColumn& label = LabelColumn{},
                        std::string dataset_name = "dataset") {
  std::vector<std::vector<std::string>> rows;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    rows.push_back(detail::split_csv_line(line));
  }
  if (rows.empty()) throw std::runtime_error(dataset_name + ": empty dataset");

  std::size_t width = rows[0].size();
  if (width < 2)
    throw std::runtime_error(dataset_name + ": need at least one feature column and a label column");

  auto resolve_index = [&](int idx) {
    long w = static_cast<long>(width);
    long r = idx < 0 ? w + idx : idx;
    if (r < 0 || r >= w)
      throw std::runtime_error(dataset_name + ": label column index " +
                               std::to_string(idx) + " out of range for " +
                               std::to_string(width) + " columns");
    return static_cast<std::size_t>(r);
  };

  std::size_t label_col;
  bool has_header;
  std::vector<std::string> header;
  if (label.by_name) {
    header = rows[0];
    label_col = width;
    for (std::size_t j = 0; j < width; ++j)
      if (detail::trim(header[j]) == label.name) {
        label_col = j;
        break;
      }
    if (label_col == width)
      throw std::runtime_error(dataset_name + ": label column '" + label.name +
                               "' not found in header row");
    has_header = true;
  } else {
    label_col = resolve_index(label.index);
    // First row is data only if all its feature cells are numeric.
    has_header = false;
    for (std::size_t j = 0; j < width; ++j) {
      if (j == label_col) continue;
      double v;
      if (!detail::parse_finite_double(detail::trim(rows[0][j]), v)) {
        has_header = true;
        break;
      }
    }
  }

  std::size_t first_data = has_header ? 1 : 0;
  if (first_data >= rows.size()) throw std::runtime_error(dataset_name + ": empty dataset");

  Dataset ds;
  ds.name = std::move(dataset_name);
  ds.m = static_cast<int>(width - 1);
  std::unordered_map<std::string, int> class_index;
  auto column_label = [&](std::size_t j) {
    if (!header.empty()) return detail::trim(header[j]);
    return "column " + std::to_string(j + 1);
  };

  for (std::size_t r = first_data; r < rows.size(); ++r) {
    const auto& cells = rows[r];
    if (cells.size() != width)
      throw std::runtime_error(ds.name + ": row " + std::to_string(r + 1) + " has " +
                               std::to_string(cells.size()) + " cells, expected " +
                               std::to_string(width));
    for (std::size_t j = 0; j < width; ++j) {
      if (j == label_col) continue;
      std::string cell = detail::trim(cells[j]);
      double v;
      if (cell.empty())
        throw std::runtime_error(ds.name + ": missing value at row " +
                                 std::to_string(r + 1) + ", " + column_label(j));
      if (!detail::parse_finite_double(cell, v))
        throw std::runtime_error(ds.name + ": row " + std::to_string(r + 1) + ", " +
                                 column_label(j) + ": cannot parse '" + cell +
                                 "' as a finite number");
      ds.features.push_back(v);
    }
    std::string lab = detail::trim(cells[label_col]);
    auto [it, inserted] = class_index.try_emplace(lab, static_cast<int>(ds.classes.size()));
    if (inserted) ds.classes.push_back(lab);
    ds.labels.push_back(it->second);
  }
  ds.n = static_cast<int>(ds.labels.size());
  return ds;
}

inline Dataset load_csv_file(const std::string& path,
                             const LabelColumn& label = LabelColumn{},
                             std::string dataset_name = "") {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open '" + path + "'");
  if (dataset_name.empty()) {
    std::size_t slash = path.find_last_of("/\\");
    std::string stem = slash == std::string::npos ? path : path.substr(slash + 1);
    std::size_t dot = stem.find_last_of('.');
    dataset_name = dot == std::string::npos ? stem : stem.substr(0, dot);
  }
  return load_csv(in, label, std::move(dataset_name));
}

/// Writes features with shortest exact decimal representation, so a reload
/// reproduces them bit for bit.
inline void save_csv(const Dataset& ds, std::ostream& out) {
  for (int j = 0; j < ds.m; ++j) out << 'f' << j << ',';
  out << "class\n";
  for (int i = 0; i < ds.n; ++i) {
    auto r = ds.row(i);
    for (double v : r) out << detail::format_double(v) << ',';
    out << ds.classes[static_cast<std::size_t>(ds.labels[static_cast<std::size_t>(i)])]
        << '\n';
  }
}

/// Row subset that keeps the full class catalogue (and therefore the
/// tie-breaking order) of the parent dataset.
inline Dataset subset(const Dataset& ds, std::span<const int> row_indices) {
  Dataset out;
  out.name = ds.name;
  out.m = ds.m;
  out.classes = ds.classes;
  out.n = static_cast<int>(row_indices.size());
  out.features.reserve(row_indices.size() * static_cast<std::size_t>(ds.m));
  out.labels.reserve(row_indices.size());
  for (int i : row_indices) {
    auto r = ds.row(i);
    out.features.insert(out.features.end(), r.begin(), r.end());
    out.labels.push_back(ds.labels[static_cast<std::size_t>(i)]);
  }
  return out;
}

/// Per-attribute divisors fitted on training data. Zero-dispersion attributes
/// get divisor 1 so they contribute nothing to within-distribution distances
/// without any column bookkeeping.
struct Scaler {
  std::vector<double> divisors;
  DispersionMeasure measure = DispersionMeasure::None;
};

inline Scaler fit_scaler(const Dataset& train, DispersionMeasure measure) {
  Scaler s;
  s.measure = measure;
  s.divisors.assign(static_cast<std::size_t>(train.m), 1.0);
  if (measure == DispersionMeasure::None) return s;
  if (train.n < 1) throw std::invalid_argument("fit_scaler: empty training set");
  std::vector<double> column(static_cast<std::size_t>(train.n));
  for (int j = 0; j < train.m; ++j) {
    for (int i = 0; i < train.n; ++i)
      column[static_cast<std::size_t>(i)] =
          train.features[static_cast<std::size_t>(i) * static_cast<std::size_t>(train.m) +
                         static_cast<std::size_t>(j)];
    double d = dispersion(column, measure);
    if (d > 0.0) s.divisors[static_cast<std::size_t>(j)] = d;
  }
  return s;
}

inline std::vector<double> apply_scaler(const Scaler& scaler,
                                        std::span<const double> record) {
  if (record.size() != scaler.divisors.size())
    throw std::invalid_argument("apply_scaler: dimension mismatch (" +
                                std::to_string(record.size()) + " vs " +
                                std::to_string(scaler.divisors.size()) + ")");
  std::vector<double> out(record.size());
  for (std::size_t j = 0; j < record.size(); ++j) out[j] = record[j] / scaler.divisors[j];
  return out;
}

inline std::vector<double> scale_features(const Scaler& scaler, const Dataset& ds) {
  if (static_cast<std::size_t>(ds.m) != scaler.divisors.size())
    throw std::invalid_argument("scale_features: dimension mismatch");
  std::vector<double> out(ds.features.size());
  for (int i = 0; i < ds.n; ++i)
    for (int j = 0; j < ds.m; ++j) {
      std::size_t at = static_cast<std::size_t>(i) * static_cast<std::size_t>(ds.m) +
                       static_cast<std::size_t>(j);
      out[at] = ds.features[at] / scaler.divisors[static_cast<std::size_t>(j)];
    }
  return out;
}

struct FoldAssignment {
  std::vector<int> fold_of;
  int fold_count = 0;

  std::vector<int> members(int fold) const {
    std::vector<int> out;
    for (std::size_t i = 0; i < fold_of.size(); ++i)
      if (fold_of[i] == fold) out.push_back(static_cast<int>(i));
    return out;
  }
  std::vector<int> complement(int fold) const {
    std::vector<int> out;
    for (std::size_t i = 0; i < fold_of.size(); ++i)
      if (fold_of[i] != fold) out.push_back(static_cast<int>(i));
    return out;
  }
};

/// Deterministic stratified assignment: per class (in catalogue order) the
/// records are shuffled with the seeded generator and dealt round-robin onto
/// a fold cursor that carries across classes, so per-class counts differ by
/// at most one and total fold sizes stay balanced.
inline FoldAssignment stratified_folds(const Dataset& data, int folds,
                                       std::uint64_t seed) {
  if (folds < 2) throw std::invalid_argument("stratified_folds: need folds >= 2");
  if (folds > data.n)
    throw std::invalid_argument("stratified_folds: " + std::to_string(folds) +
                                " folds exceed " + std::to_string(data.n) + " records");
  FoldAssignment fa;
  fa.fold_count = folds;
  fa.fold_of.assign(static_cast<std::size_t>(data.n), -1);
  detail::SplitMix64 rng(seed);
  int cursor = 0;
  for (std::size_t c = 0; c < data.classes.size(); ++c) {
    std::vector<int> members;
    for (int i = 0; i < data.n; ++i)
      if (data.labels[static_cast<std::size_t>(i)] == static_cast<int>(c))
        members.push_back(i);
    detail::seeded_shuffle(members, rng);
    for (int i : members) {
      fa.fold_of[static_cast<std::size_t>(i)] = cursor;
      cursor = (cursor + 1) % folds;
    }
  }
  return fa;
}

}  // namespace kwnn
