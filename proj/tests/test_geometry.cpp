#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <limits>
#include <vector>

#include "kwnn/geometry.hpp"
#include "oracles.hpp"

using kwnn::DispersionMeasure;
using kwnn::Metric;

TEST_CASE("minkowski distance basic values") {
  std::vector<double> a{0.0, 0.0}, b{1.0, 2.0}, c{3.0, 4.0};
  CHECK(kwnn::minkowski_distance(a, b, Metric::Boscovich) == 3.0);
  CHECK(kwnn::minkowski_distance(a, c, Metric::Euclidean) == 5.0);
  CHECK(kwnn::minkowski_distance(a, b, Metric::Chebyshev) == 2.0);
}

TEST_CASE("minkowski distance rejects bad input") {
  std::vector<double> a{0.0, 0.0}, b{1.0};
  CHECK_THROWS_AS(kwnn::minkowski_distance(a, b, Metric::Boscovich), std::invalid_argument);
  std::vector<double> nan{0.0, std::numeric_limits<double>::quiet_NaN()};
  CHECK_THROWS_AS(kwnn::minkowski_distance(a, nan, Metric::Euclidean), std::invalid_argument);
  std::vector<double> empty;
  CHECK_THROWS_AS(kwnn::minkowski_distance(empty, empty, Metric::Boscovich),
                  std::invalid_argument);
}

TEST_CASE("minkowski distance is symmetric, zero iff equal, triangle inequality") {
  oracle::Rand rng(11);
  for (int trial = 0; trial < 200; ++trial) {
    int m = rng.uniform_int(1, 6);
    std::vector<double> x(m), y(m), z(m);
    for (int j = 0; j < m; ++j) {
      x[j] = rng.uniform(-5, 5);
      y[j] = rng.uniform(-5, 5);
      z[j] = rng.uniform(-5, 5);
    }
    for (Metric metric : {Metric::Boscovich, Metric::Euclidean, Metric::Chebyshev}) {
      double xy = kwnn::minkowski_distance(x, y, metric);
      double yx = kwnn::minkowski_distance(y, x, metric);
      double xz = kwnn::minkowski_distance(x, z, metric);
      double yz = kwnn::minkowski_distance(y, z, metric);
      CHECK(xy == yx);
      CHECK(xz <= xy + yz + 1e-12);
      CHECK(kwnn::minkowski_distance(x, x, metric) == 0.0);
    }
  }
}

TEST_CASE("p_centre basic values") {
  std::vector<double> a{0.0, 2.0};
  CHECK(kwnn::p_centre(a, Metric::Euclidean) == 1.0);
  std::vector<double> b{5.0, 0.0, 1.0};
  CHECK(kwnn::p_centre(b, Metric::Boscovich) == 1.0);
  std::vector<double> c{0.0, 4.0};
  CHECK(kwnn::p_centre(c, Metric::Chebyshev) == 2.0);
  std::vector<double> empty;
  CHECK_THROWS_AS(kwnn::p_centre(empty, Metric::Boscovich), std::invalid_argument);
}

TEST_CASE("p_centre even count takes the lower median") {
  std::vector<double> v{4.0, 1.0, 3.0, 2.0};
  CHECK(kwnn::p_centre(v, Metric::Boscovich) == 2.0);
}

TEST_CASE("p_centre minimises the p-radius objective (grid oracle)") {
  oracle::Rand rng(23);
  auto objective = [](std::span<const double> v, double z, Metric p) {
    double acc = 0.0;
    for (double x : v) {
      double d = std::fabs(x - z);
      acc += p == Metric::Boscovich ? d : d * d;
    }
    acc /= static_cast<double>(v.size());
    return p == Metric::Boscovich ? acc : std::sqrt(acc);
  };
  for (int trial = 0; trial < 50; ++trial) {
    int n = rng.uniform_int(1, 12);
    std::vector<double> v(n);
    for (double& x : v) x = rng.uniform(-3, 3);
    for (Metric p : {Metric::Boscovich, Metric::Euclidean}) {
      double centre = kwnn::p_centre(v, p);
      double at_centre = objective(v, centre, p);
      for (int g = 0; g <= 120; ++g) {
        double z = -3.5 + 7.0 * g / 120.0;
        CHECK(at_centre <= objective(v, z, p) + 1e-9);
      }
    }
  }
}

TEST_CASE("dispersion basic values") {
  std::vector<double> a{0.0, 2.0};
  CHECK(kwnn::dispersion(a, DispersionMeasure::R2) == 1.0);
  std::vector<double> b{0.0, 1.0, 2.0};
  CHECK(kwnn::dispersion(b, DispersionMeasure::R1) == Catch::Approx(2.0 / 3.0).margin(1e-15));
  std::vector<double> c{0.0, 4.0};
  CHECK(kwnn::dispersion(c, DispersionMeasure::RInf) == 2.0);
  std::vector<double> flat{5.0, 5.0, 5.0};
  for (auto measure : {DispersionMeasure::R1, DispersionMeasure::R2,
                       DispersionMeasure::RInf, DispersionMeasure::RInfStar})
    CHECK(kwnn::dispersion(flat, measure) == 0.0);
}

TEST_CASE("dispersion error paths") {
  std::vector<double> empty;
  CHECK_THROWS_AS(kwnn::dispersion(empty, DispersionMeasure::R2), std::invalid_argument);
  std::vector<double> v{1.0};
  CHECK_THROWS_AS(kwnn::dispersion(v, DispersionMeasure::None), std::invalid_argument);
}

TEST_CASE("dispersion interquartile half-range uses linear interpolation") {
  // n=5: quartile positions 1 and 3 (0-based), no interpolation needed.
  std::vector<double> v{0.0, 1.0, 2.0, 3.0, 4.0};
  CHECK(kwnn::dispersion(v, DispersionMeasure::RInfStar) == 1.0);
  // n=4: positions 0.75 and 2.25 interpolate between order statistics.
  std::vector<double> w{0.0, 1.0, 2.0, 3.0};
  double q25 = 0.0 + 0.75 * (1.0 - 0.0);
  double q75 = 2.0 + 0.25 * (3.0 - 2.0);
  CHECK(kwnn::dispersion(w, DispersionMeasure::RInfStar) ==
        Catch::Approx((q75 - q25) / 2.0).margin(1e-15));
}

TEST_CASE("dispersion homogeneity and translation invariance") {
  oracle::Rand rng(31);
  for (int trial = 0; trial < 100; ++trial) {
    int n = rng.uniform_int(1, 15);
    std::vector<double> v(n);
    for (double& x : v) x = rng.uniform(-4, 4);
    double c = rng.uniform(-3, 3);
    for (auto measure : {DispersionMeasure::R1, DispersionMeasure::R2,
                         DispersionMeasure::RInf, DispersionMeasure::RInfStar}) {
      double base = kwnn::dispersion(v, measure);
      std::vector<double> scaled(v), shifted(v);
      for (double& x : scaled) x *= c;
      for (double& x : shifted) x += c;
      CHECK(kwnn::dispersion(scaled, measure) ==
            Catch::Approx(std::fabs(c) * base).margin(1e-12));
      CHECK(kwnn::dispersion(shifted, measure) == Catch::Approx(base).margin(1e-12));
    }
  }
}

TEST_CASE("p-radius at the p-centre matches the dispersion formulas") {
  oracle::Rand rng(47);
  for (int trial = 0; trial < 50; ++trial) {
    int n = rng.uniform_int(1, 20);
    std::vector<double> v(n);
    for (double& x : v) x = rng.uniform(-2, 2);

    double med = kwnn::p_centre(v, Metric::Boscovich);
    double mean = kwnn::p_centre(v, Metric::Euclidean);
    double r1 = 0.0, r2 = 0.0;
    for (double x : v) {
      r1 += std::fabs(x - med);
      r2 += (x - mean) * (x - mean);
    }
    r1 /= n;
    r2 = std::sqrt(r2 / n);
    CHECK(kwnn::dispersion(v, DispersionMeasure::R1) == Catch::Approx(r1).margin(1e-12));
    CHECK(kwnn::dispersion(v, DispersionMeasure::R2) == Catch::Approx(r2).margin(1e-12));
  }
}

TEST_CASE("metric and scaling names round-trip") {
  for (Metric m : {Metric::Boscovich, Metric::Euclidean, Metric::Chebyshev})
    CHECK(kwnn::parse_metric(kwnn::metric_name(m)) == m);
  for (auto s : {DispersionMeasure::R1, DispersionMeasure::R2, DispersionMeasure::RInf,
                 DispersionMeasure::RInfStar, DispersionMeasure::None})
    CHECK(kwnn::parse_scaling(kwnn::scaling_name(s)) == s);
  CHECK_THROWS_AS(kwnn::parse_metric("cosine"), std::invalid_argument);
}
