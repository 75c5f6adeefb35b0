#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "helpers.hpp"
#include "metrics.hpp"

using namespace longmed;
using namespace testutil;

TEST_CASE("hand-computed triple") {
  const std::vector<double> est = {2.1, 2.2, 2.3};
  const std::vector<double> lo = {1.9, 2.3, 2.0};   // middle interval misses
  const std::vector<double> hi = {2.5, 2.6, 2.4};
  const MetricRow r = performance_metrics("q", "param", est, lo, hi, 2.0);

  CHECK_FALSE(r.absolute);
  CHECK(r.reps == 3);
  CHECK(r.bias == doctest::Approx(0.1).epsilon(1e-14));          // 0.6 / (3*2)
  CHECK(r.emp_se == doctest::Approx(0.1).epsilon(1e-14));        // sd of {2.1,2.2,2.3}
  CHECK(r.rmse == doctest::Approx(std::sqrt(0.14 / 3.0) / 2.0).epsilon(1e-14));
  CHECK(r.coverage == doctest::Approx(2.0 / 3.0).epsilon(1e-14));
  CHECK(r.mc_se_bias == doctest::Approx(0.1 / std::sqrt(3.0)).epsilon(1e-14));
}

TEST_CASE("exact estimation gives zero error and full coverage") {
  const std::vector<double> est(5, 7.0);
  const std::vector<double> lo(5, 6.5);
  const std::vector<double> hi(5, 7.5);
  const MetricRow r = performance_metrics("q", "effect", est, lo, hi, 7.0);
  CHECK(r.bias == 0.0);
  CHECK(r.emp_se == 0.0);
  CHECK(r.rmse == 0.0);
  CHECK(r.mc_se_bias == 0.0);
  CHECK(r.coverage == 1.0);
}

TEST_CASE("coverage counts interval hits, endpoints inclusive") {
  const std::vector<double> est = {1.0, 1.0, 1.0, 1.0};
  const std::vector<double> lo = {0.5, 1.2, 1.0, 0.9};
  const std::vector<double> hi = {1.5, 1.4, 1.1, 0.95};
  // truth 1.0: hit, miss (low side), hit (endpoint), miss (high side)
  const MetricRow r = performance_metrics("q", "param", est, lo, hi, 1.0);
  CHECK(r.coverage == doctest::Approx(0.5).epsilon(1e-14));
}

TEST_CASE("zero generating value switches to absolute error") {
  const std::vector<double> est = {0.1, -0.1, 0.3, -0.3};
  const std::vector<double> lo = {-1.0, -1.0, -1.0, -1.0};
  const std::vector<double> hi = {1.0, 1.0, 1.0, 1.0};
  const MetricRow r = performance_metrics("q", "effect", est, lo, hi, 0.0);
  CHECK(r.absolute);
  CHECK(r.bias == doctest::Approx(0.0).epsilon(1e-14));
  CHECK(r.rmse == doctest::Approx(std::sqrt(0.05)).epsilon(1e-14));  // sqrt(0.2/4)
  CHECK(r.coverage == 1.0);
}

TEST_CASE("negative generating value keeps rmse positive and bias oriented") {
  const std::vector<double> est = {-2.1, -2.2, -2.3};
  const std::vector<double> lo = {-3.0, -3.0, -3.0};
  const std::vector<double> hi = {-1.0, -1.0, -1.0};
  const MetricRow r = performance_metrics("q", "param", est, lo, hi, -2.0);
  // overshooting in magnitude reads as positive relative bias
  CHECK(r.bias == doctest::Approx(0.1).epsilon(1e-14));
  CHECK(r.rmse > 0.0);
}

TEST_CASE("independent recomputation on random draws") {
  auto g = rng(501);
  for (int rep = 0; rep < 25; ++rep) {
    const int s = 2 + static_cast<int>(g() % 40);
    const double truth = random_in(g, -3.0, 3.0);
    std::vector<double> est(s), lo(s), hi(s);
    for (int i = 0; i < s; ++i) {
      est[i] = truth + random_in(g, -0.5, 0.5);
      lo[i] = est[i] - random_in(g, 0.0, 0.8);
      hi[i] = est[i] + random_in(g, 0.0, 0.8);
    }
    const MetricRow r = performance_metrics("q", "derived", est, lo, hi, truth);

    double mean = 0.0;
    for (double v : est) mean += v;
    mean /= s;
    double var = 0.0, msq = 0.0;
    int cov = 0;
    for (int i = 0; i < s; ++i) {
      var += (est[i] - mean) * (est[i] - mean);
      msq += (est[i] - truth) * (est[i] - truth);
      cov += lo[i] <= truth && truth <= hi[i];
    }
    var /= s - 1;
    const bool absolute = truth == 0.0;
    const double scale = absolute ? 1.0 : truth;
    CHECK(std::abs(r.bias - (mean - truth) / scale) < 1e-12);
    CHECK(std::abs(r.emp_se - std::sqrt(var)) < 1e-12);
    CHECK(std::abs(r.rmse - std::sqrt(msq / s) / std::abs(scale)) < 1e-12);
    CHECK(r.coverage == doctest::Approx(double(cov) / s).epsilon(1e-14));
    CHECK(std::abs(r.mc_se_bias - std::sqrt(var / s)) < 1e-12);
    CHECK(r.reps == s);
  }
}

TEST_CASE("degenerate inputs are rejected") {
  const std::vector<double> one = {1.0};
  const std::vector<double> two = {1.0, 2.0};
  CHECK_THROWS_AS(performance_metrics("q", "param", one, one, one, 1.0),
                  std::invalid_argument);
  CHECK_THROWS_AS(performance_metrics("q", "param", two, one, two, 1.0),
                  std::invalid_argument);
}
