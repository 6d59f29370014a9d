#include <doctest.h>

#include <cmath>
#include <vector>

#include "compstat/stats.hpp"
#include "compstat/types.hpp"

using namespace compstat;
using doctest::Approx;

TEST_SUITE("stats") {

TEST_CASE("chi-square survival function matches reference values") {
  // Reference values from an independent implementation of the regularized
  // incomplete gamma function.
  CHECK(stats::chi_square_sf(20.0, 1) == Approx(7.744216431044088e-06).epsilon(1e-12));
  CHECK(stats::chi_square_sf(16.2, 1) == Approx(5.699411623331848e-05).epsilon(1e-12));
  CHECK(stats::chi_square_sf(3.841458820694124, 1) == Approx(0.05).epsilon(1e-12));
  CHECK(stats::chi_square_sf(0.0, 1) == Approx(1.0));
  CHECK(stats::chi_square_sf(-3.0, 4) == Approx(1.0));
  CHECK(stats::chi_square_sf(13.276704135987622, 4) == Approx(0.01).epsilon(1e-12));
  CHECK_THROWS_AS(stats::chi_square_sf(1.0, 0), Error);
}

TEST_CASE("normal quantile matches reference values") {
  CHECK(stats::normal_quantile(0.975) == Approx(1.959963984540054).epsilon(1e-13));
  CHECK(stats::normal_quantile(0.995) == Approx(2.5758293035489004).epsilon(1e-13));
  CHECK(stats::normal_quantile(0.5) == Approx(0.0).scale(1.0));
  CHECK(stats::normal_quantile(0.025) == Approx(-1.959963984540054).epsilon(1e-13));
  CHECK(stats::z_for_confidence(0.95) == Approx(1.959963984540054).epsilon(1e-13));
  CHECK(stats::z_for_confidence(0.99) == Approx(2.5758293035489004).epsilon(1e-13));
  CHECK_THROWS_AS(stats::normal_quantile(0.0), Error);
  CHECK_THROWS_AS(stats::normal_quantile(1.0), Error);
}

TEST_CASE("normal quantile inverts the normal cdf") {
  for (double x = -5.0; x <= 5.0; x += 0.25) {
    const double p = 0.5 * std::erfc(-x / std::sqrt(2.0));
    CHECK(stats::normal_quantile(p) == Approx(x).epsilon(1e-10).scale(1.0));
  }
}

TEST_CASE("log choose") {
  CHECK(stats::log_choose(20, 10) == Approx(std::log(184756.0)).epsilon(1e-13));
  CHECK(stats::log_choose(5, 0) == Approx(0.0).scale(1.0));
  CHECK(stats::log_choose(5, 5) == Approx(0.0).scale(1.0));
  CHECK_THROWS_AS(stats::log_choose(3, 4), Error);
}

TEST_CASE("ols recovers an exact line") {
  const std::vector<double> x{1, 2, 3, 4, 5};
  const std::vector<double> y{3, 5, 7, 9, 11};  // y = 2x + 1
  const auto fit = stats::ols_fit(x, y, {});
  CHECK(fit.slope == Approx(2.0).epsilon(1e-12));
  CHECK(fit.intercept == Approx(1.0).epsilon(1e-12));
  CHECK(fit.slope_se == 0.0);
}

TEST_CASE("ols slope standard error propagates point noise") {
  const std::vector<double> x{0, 1};
  const std::vector<double> y{0, 1};
  const std::vector<double> se{0.3, 0.4};
  // weights are ±1/(x1-x0), so var = se0^2 + se1^2
  const auto fit = stats::ols_fit(x, y, se);
  CHECK(fit.slope_se == Approx(0.5).epsilon(1e-12));
}

TEST_CASE("ols input validation") {
  CHECK_THROWS_AS(stats::ols_fit(std::vector<double>{1}, std::vector<double>{1}, {}), Error);
  CHECK_THROWS_AS(stats::ols_fit(std::vector<double>{1, 1}, std::vector<double>{1, 2}, {}), Error);
  CHECK_THROWS_AS(
      stats::ols_fit(std::vector<double>{1, 2}, std::vector<double>{1, 2}, std::vector<double>{1}),
      Error);
}

}  // TEST_SUITE
