#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace kwnn {

enum class KernelKind {
  Constant,
  Linear,
  Epanechnikov,
  Quartic,
  Samworth,
  Sugeno,
  Yager,
  Laplace,
  ReciprocalLinear,
  ReciprocalQuadratic,
  ReciprocalPower,  // a^(-e); generalises the two reciprocal kernels
};

/// A decreasing weight profile on [0,1]. Proper kernels are finite at 0;
/// improper kernels (the reciprocal family) diverge at 0 and are only defined
/// on (0,1]. The six fuzzy negations satisfy f(0)=1 and f(1)=0.
class Kernel {
 public:
  Kernel() : kind_(KernelKind::Constant) {}

  static Kernel constant() { return Kernel(KernelKind::Constant); }
  static Kernel linear() { return Kernel(KernelKind::Linear); }
  static Kernel epanechnikov() { return Kernel(KernelKind::Epanechnikov); }
  static Kernel quartic() { return Kernel(KernelKind::Quartic); }
  static Kernel samworth(int dims) {
    if (dims < 1) throw std::invalid_argument("samworth kernel: dims must be >= 1");
    Kernel k(KernelKind::Samworth);
    k.samworth_dims_ = dims;
    return k;
  }
  static Kernel sugeno() { return Kernel(KernelKind::Sugeno); }
  static Kernel yager() { return Kernel(KernelKind::Yager); }
  static Kernel laplace() { return Kernel(KernelKind::Laplace); }
  static Kernel reciprocal_linear() { return Kernel(KernelKind::ReciprocalLinear); }
  static Kernel reciprocal_quadratic() { return Kernel(KernelKind::ReciprocalQuadratic); }
  static Kernel reciprocal_power(double exponent) {
    if (!(exponent > 0.0))
      throw std::invalid_argument("reciprocal_power kernel: exponent must be > 0");
    Kernel k(KernelKind::ReciprocalPower);
    k.exponent_ = exponent;
    return k;
  }

  KernelKind kind() const { return kind_; }

  bool improper() const {
    return kind_ == KernelKind::ReciprocalLinear ||
           kind_ == KernelKind::ReciprocalQuadratic ||
           kind_ == KernelKind::ReciprocalPower;
  }

  bool fuzzy_negation() const {
    switch (kind_) {
      case KernelKind::Linear:
      case KernelKind::Epanechnikov:
      case KernelKind::Quartic:
      case KernelKind::Samworth:
      case KernelKind::Sugeno:
      case KernelKind::Yager:
        return true;
      default:
        return false;
    }
  }

  int samworth_dims() const { return samworth_dims_; }
  double exponent() const { return exponent_; }

  bool operator==(const Kernel&) const = default;

 private:
  explicit Kernel(KernelKind kind) : kind_(kind) {}

  KernelKind kind_;
  int samworth_dims_ = 1;
  double exponent_ = 1.0;
};

inline double kernel_eval(const Kernel& kernel, double a) {
  if (kernel.improper()) {
    if (!(a > 0.0 && a <= 1.0))
      throw std::invalid_argument(
          "kernel_eval: improper kernel argument must lie in (0,1], got " +
          std::to_string(a));
  } else if (!(a >= 0.0 && a <= 1.0)) {
    throw std::invalid_argument("kernel_eval: argument must lie in [0,1], got " +
                                std::to_string(a));
  }
  switch (kernel.kind()) {
    case KernelKind::Constant: return 1.0;
    case KernelKind::Linear: return 1.0 - a;
    case KernelKind::Epanechnikov: return 1.0 - a * a;
    case KernelKind::Quartic: {
      double t = 1.0 - a * a;
      return t * t;
    }
    case KernelKind::Samworth:
      return 1.0 - std::pow(a, 2.0 / static_cast<double>(kernel.samworth_dims()));
    case KernelKind::Sugeno: return (1.0 - a) / (1.0 + a);
    case KernelKind::Yager: {
      double t = 1.0 - std::sqrt(a);
      return t * t;
    }
    case KernelKind::Laplace: return std::exp(-a);
    case KernelKind::ReciprocalLinear: return 1.0 / a;
    case KernelKind::ReciprocalQuadratic: return 1.0 / (a * a);
    case KernelKind::ReciprocalPower: return std::pow(a, -kernel.exponent());
  }
  throw std::invalid_argument("kernel_eval: invalid kernel");
}

/// Rank weights w_i = f(i / (k+1)), i = 1..k. Arguments stay inside (0,1),
/// so improper kernels are always finite here.
inline std::vector<double> rank_weights(const Kernel& kernel, int k) {
  if (k < 1) throw std::invalid_argument("rank_weights: k must be >= 1");
  std::vector<double> w(static_cast<std::size_t>(k));
  for (int i = 1; i <= k; ++i)
    w[static_cast<std::size_t>(i - 1)] =
        kernel_eval(kernel, static_cast<double>(i) / static_cast<double>(k + 1));
  return w;
}

/// Finite-k optimal rank weights
///   s_i = (1/k) (1 + m/2 - m/(2 k^(2/m)) (i^(1+2/m) - (i-1)^(1+2/m))).
/// They sum to 1 (the i-terms telescope to k^(1+2/m)) and are positive and
/// non-increasing.
inline std::vector<double> samworth_finite_weights(int k, int m) {
  if (k < 1) throw std::invalid_argument("samworth_finite_weights: k must be >= 1");
  if (m < 1) throw std::invalid_argument("samworth_finite_weights: m must be >= 1");
  double md = static_cast<double>(m);
  double kd = static_cast<double>(k);
  double exp1 = 1.0 + 2.0 / md;
  double coeff = md / (2.0 * std::pow(kd, 2.0 / md));
  std::vector<double> s(static_cast<std::size_t>(k));
  double prev_pow = 0.0;  // (i-1)^(1+2/m)
  for (int i = 1; i <= k; ++i) {
    double cur_pow = std::pow(static_cast<double>(i), exp1);
    s[static_cast<std::size_t>(i - 1)] =
        (1.0 + md / 2.0 - coeff * (cur_pow - prev_pow)) / kd;
    prev_pow = cur_pow;
  }
  return s;
}

namespace detail {

inline void validate_distances(std::span<const double> distances, const char* who) {
  if (distances.empty())
    throw std::invalid_argument(std::string(who) + ": empty distance vector");
  double prev = 0.0;
  for (std::size_t i = 0; i < distances.size(); ++i) {
    double d = distances[i];
    if (!(d >= 0.0) || !std::isfinite(d))
      throw std::invalid_argument(std::string(who) +
                                  ": distances must be finite and non-negative");
    if (i > 0 && d < prev)
      throw std::invalid_argument(std::string(who) +
                                  ": distances must be sorted ascending");
    prev = d;
  }
}

}  // namespace detail

/// Distance weights s_i = f(d_i / d_k) with the three edge-case conventions,
/// applied in this order:
///   1. d_k = 0: every d*_i := 0 (improper kernels then fall under rule 3,
///      where every position is a zero position and gets weight 1).
///   2. d_1 = d_k and f(1) = 0: every weight := 1.
///   3. improper kernel with some d*_i = 0: those positions get weight 1,
///      all others weight 0.
inline std::vector<double> distance_weights(const Kernel& kernel,
                                            std::span<const double> distances) {
  detail::validate_distances(distances, "distance_weights");
  std::size_t k = distances.size();
  std::vector<double> w(k);
  double dk = distances.back();
  if (dk == 0.0) {
    double value = kernel.improper() ? 1.0 : kernel_eval(kernel, 0.0);
    for (auto& x : w) x = value;
    return w;
  }
  if (distances.front() == dk && kernel_eval(kernel, 1.0) == 0.0) {
    for (auto& x : w) x = 1.0;
    return w;
  }
  if (kernel.improper() && distances.front() == 0.0) {
    for (std::size_t i = 0; i < k; ++i) w[i] = distances[i] == 0.0 ? 1.0 : 0.0;
    return w;
  }
  for (std::size_t i = 0; i < k; ++i) w[i] = kernel_eval(kernel, distances[i] / dk);
  return w;
}

/// MacLeod weights s_i = 2 - d*_i - d*_1. Distance-only: the dependence on
/// d_1 means this rule does not generalise to a kernel. Degenerate all-equal
/// inputs (d_1 = d_k > 0) give all-zero raw weights and fall back to all-ones.
inline std::vector<double> macleod_distance_weights(std::span<const double> distances) {
  detail::validate_distances(distances, "macleod_distance_weights");
  std::size_t k = distances.size();
  if (k == 1) return {1.0};
  double dk = distances.back();
  std::vector<double> w(k);
  if (dk == 0.0) {
    for (auto& x : w) x = 2.0;
    return w;
  }
  double d1 = distances.front() / dk;
  bool all_zero = true;
  for (std::size_t i = 0; i < k; ++i) {
    w[i] = 2.0 - distances[i] / dk - d1;
    if (w[i] != 0.0) all_zero = false;
  }
  if (all_zero)
    for (auto& x : w) x = 1.0;
  return w;
}

/// Elementwise product of rank and distance weights.
inline std::vector<double> combine_weights(std::span<const double> rank,
                                           std::span<const double> dist) {
  if (rank.size() != dist.size())
    throw std::invalid_argument("combine_weights: length mismatch (" +
                                std::to_string(rank.size()) + " vs " +
                                std::to_string(dist.size()) + ")");
  std::vector<double> w(rank.size());
  for (std::size_t i = 0; i < rank.size(); ++i) w[i] = rank[i] * dist[i];
  return w;
}

/// Config-string names: constant, linear, epanechnikov, quartic, samworth,
/// sugeno, yager, laplace, recip, recip2. "macleod" is not a kernel; the
/// classifier layer handles it as a distance-weight rule.
inline Kernel kernel_from_name(std::string_view name, int samworth_dims) {
  if (name == "constant") return Kernel::constant();
  if (name == "linear") return Kernel::linear();
  if (name == "epanechnikov") return Kernel::epanechnikov();
  if (name == "quartic") return Kernel::quartic();
  if (name == "samworth") return Kernel::samworth(samworth_dims);
  if (name == "sugeno") return Kernel::sugeno();
  if (name == "yager") return Kernel::yager();
  if (name == "laplace") return Kernel::laplace();
  if (name == "recip") return Kernel::reciprocal_linear();
  if (name == "recip2") return Kernel::reciprocal_quadratic();
  throw std::invalid_argument("unknown kernel '" + std::string(name) + "'");
}

inline bool is_kernel_name(std::string_view name) {
  static constexpr std::string_view names[] = {
      "constant", "linear", "epanechnikov", "quartic", "samworth",
      "sugeno",   "yager",  "laplace",      "recip",   "recip2"};
  for (auto n : names)
    if (n == name) return true;
  return false;
}

inline std::string kernel_name(const Kernel& kernel) {
  switch (kernel.kind()) {
    case KernelKind::Constant: return "constant";
    case KernelKind::Linear: return "linear";
    case KernelKind::Epanechnikov: return "epanechnikov";
    case KernelKind::Quartic: return "quartic";
    case KernelKind::Samworth: return "samworth";
    case KernelKind::Sugeno: return "sugeno";
    case KernelKind::Yager: return "yager";
    case KernelKind::Laplace: return "laplace";
    case KernelKind::ReciprocalLinear: return "recip";
    case KernelKind::ReciprocalQuadratic: return "recip2";
    case KernelKind::ReciprocalPower: return "recip_pow";
  }
  return "?";
}

}  // namespace kwnn
