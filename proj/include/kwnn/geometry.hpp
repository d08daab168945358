#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace kwnn {

/// Minkowski p-distance with p restricted to the three cases used throughout:
/// Boscovich (p=1), Euclidean (p=2) and Chebyshev (p=inf).
enum class Metric { Boscovich, Euclidean, Chebyshev };

/// Per-attribute dispersion used for rescaling. R1 = mean absolute deviation
/// around the median, R2 = population standard deviation, RInf = half-range,
/// RInfStar = half the interquartile range, None = no rescaling.
enum class DispersionMeasure { R1, R2, RInf, RInfStar, None };

inline std::string metric_name(Metric m) {
  switch (m) {
    case Metric::Boscovich: return "boscovich";
    case Metric::Euclidean: return "euclidean";
    case Metric::Chebyshev: return "chebyshev";
  }
  return "?";
}

inline Metric parse_metric(std::string_view name) {
  if (name == "boscovich" || name == "manhattan" || name == "p1") return Metric::Boscovich;
  if (name == "euclidean" || name == "p2") return Metric::Euclidean;
  if (name == "chebyshev" || name == "pinf") return Metric::Chebyshev;
  throw std::invalid_argument("unknown metric '" + std::string(name) +
                              "' (expected boscovich, euclidean or chebyshev)");
}

inline std::string scaling_name(DispersionMeasure m) {
  switch (m) {
    case DispersionMeasure::R1: return "r1";
    case DispersionMeasure::R2: return "r2";
    case DispersionMeasure::RInf: return "rinf";
    case DispersionMeasure::RInfStar: return "rinfstar";
    case DispersionMeasure::None: return "none";
  }
  return "?";
}

inline DispersionMeasure parse_scaling(std::string_view name) {
  if (name == "r1") return DispersionMeasure::R1;
  if (name == "r2") return DispersionMeasure::R2;
  if (name == "rinf") return DispersionMeasure::RInf;
  if (name == "rinfstar") return DispersionMeasure::RInfStar;
  if (name == "none") return DispersionMeasure::None;
  throw std::invalid_argument("unknown scaling '" + std::string(name) +
                              "' (expected r1, r2, rinf, rinfstar or none)");
}

namespace detail {

// Hot path used by the neighbour index after inputs were validated once.
inline double minkowski_unchecked(const double* x, const double* y, std::size_t m,
                                  Metric metric) {
  double acc = 0.0;
  switch (metric) {
    case Metric::Boscovich:
      for (std::size_t i = 0; i < m; ++i) acc += std::fabs(y[i] - x[i]);
      return acc;
    case Metric::Euclidean:
      for (std::size_t i = 0; i < m; ++i) {
        double d = y[i] - x[i];
        acc += d * d;
      }
      return std::sqrt(acc);
    case Metric::Chebyshev:
      for (std::size_t i = 0; i < m; ++i) acc = std::max(acc, std::fabs(y[i] - x[i]));
      return acc;
  }
  return acc;
}

}  // namespace detail

inline double minkowski_distance(std::span<const double> x, std::span<const double> y,
                                 Metric metric) {
  if (x.size() != y.size())
    throw std::invalid_argument("minkowski_distance: dimension mismatch (" +
                                std::to_string(x.size()) + " vs " +
                                std::to_string(y.size()) + ")");
  if (x.empty()) throw std::invalid_argument("minkowski_distance: empty vectors");
  for (std::size_t i = 0; i < x.size(); ++i)
    if (!std::isfinite(x[i]) || !std::isfinite(y[i]))
      throw std::invalid_argument("minkowski_distance: non-finite input at position " +
                                  std::to_string(i));
  return detail::minkowski_unchecked(x.data(), y.data(), x.size(), metric);
}

/// Minimiser of (1/n sum |x_i - z|^p)^(1/p): median (lower order statistic for
/// even counts), mean, or midrange for p = 1, 2, inf.
inline double p_centre(std::span<const double> values, Metric p) {
  if (values.empty()) throw std::invalid_argument("p_centre: empty input");
  switch (p) {
    case Metric::Boscovich: {
      std::vector<double> v(values.begin(), values.end());
      std::size_t mid = (v.size() - 1) / 2;
      std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid), v.end());
      return v[mid];
    }
    case Metric::Euclidean:
      return std::accumulate(values.begin(), values.end(), 0.0) /
             static_cast<double>(values.size());
    case Metric::Chebyshev: {
      auto [lo, hi] = std::minmax_element(values.begin(), values.end());
      return (*lo + *hi) / 2.0;
    }
  }
  throw std::invalid_argument("p_centre: invalid metric");
}

namespace detail {

// Empirical quantile with linear interpolation between order statistics
// (position q*(n-1), 0-based). `sorted` must be ascending.
inline double interpolated_quantile(const std::vector<double>& sorted, double q) {
  double h = q * static_cast<double>(sorted.size() - 1);
  std::size_t lo = static_cast<std::size_t>(h);
  double frac = h - static_cast<double>(lo);
  if (frac == 0.0) return sorted[lo];
  return sorted[lo] + frac * (sorted[lo + 1] - sorted[lo]);
}

}  // namespace detail

inline double dispersion(std::span<const double> values, DispersionMeasure measure) {
  if (values.empty()) throw std::invalid_argument("dispersion: empty input");
  if (measure == DispersionMeasure::None)
    throw std::invalid_argument("dispersion: measure None has no value");
  std::size_t n = values.size();
  switch (measure) {
    case DispersionMeasure::R1: {
      std::vector<double> v(values.begin(), values.end());
      std::sort(v.begin(), v.end());
      // Midpoint median: any z between the two middle order statistics gives
      // the same mean absolute deviation.
      double med = (n % 2 == 1) ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
      double acc = 0.0;
      for (double x : v) acc += std::fabs(x - med);
      return acc / static_cast<double>(n);
    }
    case DispersionMeasure::R2: {
      double mean = std::accumulate(values.begin(), values.end(), 0.0) /
                    static_cast<double>(n);
      double acc = 0.0;
      for (double x : values) {
        double d = x - mean;
        acc += d * d;
      }
      return std::sqrt(acc / static_cast<double>(n));
    }
    case DispersionMeasure::RInf: {
      auto [lo, hi] = std::minmax_element(values.begin(), values.end());
      return (*hi - *lo) / 2.0;
    }
    case DispersionMeasure::RInfStar: {
      std::vector<double> v(values.begin(), values.end());
      std::sort(v.begin(), v.end());
      return (detail::interpolated_quantile(v, 0.75) -
              detail::interpolated_quantile(v, 0.25)) /
             2.0;
    }
    case DispersionMeasure::None: break;
  }
  throw std::invalid_argument("dispersion: invalid measure");
}

}  // namespace kwnn
