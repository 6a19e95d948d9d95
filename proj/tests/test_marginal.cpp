#include <doctest.h>

#include <cmath>

#include "auction/errors.hpp"
#include "auction/marginal.hpp"
#include "auction/numeric.hpp"

using namespace auction;

TEST_CASE("uniform closed forms") {
  const ValueDistribution u = ValueDistribution::uniform(0.0, 1.0);
  CHECK(u.cdf(0.25) == doctest::Approx(0.25));
  CHECK(u.quantile(0.25) == doctest::Approx(0.25));
  CHECK(u.pdf(0.7) == doctest::Approx(1.0));
  CHECK_THROWS_AS(u.cdf(1.5), std::domain_error);
  CHECK_THROWS_AS(u.quantile(1.5), std::domain_error);
}

TEST_CASE("scaled beta symmetry and consistency") {
  const ValueDistribution b = ValueDistribution::scaled_beta(2.0, 2.0, 0.5, 1.5);
  CHECK(b.cdf(1.0) == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(b.cdf(0.5) == doctest::Approx(0.0));
  CHECK(b.cdf(1.5) == doctest::Approx(1.0));
  // closed form for Beta(2,2): 3x^2 - 2x^3
  for (double x : {0.1, 0.3, 0.6, 0.9})
    CHECK(b.cdf(0.5 + x) == doctest::Approx(3 * x * x - 2 * x * x * x).epsilon(1e-10));
  const ValueDistribution g = ValueDistribution::scaled_beta(3.0, 2.0, 0.47, 1.56);
  // x^3(4-3x) at the engineer's estimate
  const double x = (1.0 - 0.47) / (1.56 - 0.47);
  CHECK(g.cdf(1.0) == doctest::Approx(x * x * x * (4.0 - 3.0 * x)).epsilon(1e-10));
}

TEST_CASE("pdf integrates to one") {
  for (const ValueDistribution& d :
       {ValueDistribution::uniform(0.5, 1.5), ValueDistribution::scaled_beta(2.0, 2.0, 0.5, 1.5),
        ValueDistribution::scaled_beta(3.0, 2.0, 0.47, 1.56)}) {
    const double mass =
        integrate([&](double v) { return d.pdf(v); }, d.lower(), d.upper(), 1e-10);
    CHECK(mass == doctest::Approx(1.0).epsilon(1e-6));
  }
}

TEST_CASE("quantile inverts cdf") {
  for (const ValueDistribution& d :
       {ValueDistribution::uniform(0.5, 1.5), ValueDistribution::scaled_beta(2.5, 1.7, 0.4, 1.2)})
    for (double u : {0.01, 0.2, 0.5, 0.8, 0.99})
      CHECK(d.cdf(d.quantile(u)) == doctest::Approx(u).epsilon(1e-8));
}

TEST_CASE("grid marginal approximates the generating distribution") {
  const ValueDistribution exact = ValueDistribution::scaled_beta(2.0, 2.0, 0.5, 1.5);
  const int knots = 20;
  Eigen::ArrayXd v(knots), f(knots);
  for (int i = 0; i < knots; ++i) {
    v(i) = 0.5 + i / (knots - 1.0);
    f(i) = exact.cdf(v(i));
  }
  const ValueDistribution grid = ValueDistribution::grid_monotone(v, f);
  double worst = 0.0;
  for (int k = 0; k <= 400; ++k) {
    const double x = 0.5 + k / 400.0;
    worst = std::max(worst, std::abs(grid.cdf(x) - exact.cdf(x)));
    CHECK(grid.pdf(x) >= 0.0);
  }
  CHECK(worst < 1e-3);
  for (double u : {0.05, 0.3, 0.5, 0.9})
    CHECK(grid.cdf(grid.quantile(u)) == doctest::Approx(u).epsilon(1e-4));
}

TEST_CASE("grid construction rejects bad knots") {
  Eigen::ArrayXd v(3), f(3);
  v << 0.0, 0.5, 1.0;
  f << 0.0, 0.5, 1.0;
  CHECK_NOTHROW(ValueDistribution::grid_monotone(v, f));
  Eigen::ArrayXd f_flat(3);
  f_flat << 0.0, 0.0, 1.0;
  CHECK_THROWS_AS(ValueDistribution::grid_monotone(v, f_flat), ConfigError);
  Eigen::ArrayXd v_bad(3);
  v_bad << 0.0, 0.6, 0.6;
  CHECK_THROWS_AS(ValueDistribution::grid_monotone(v_bad, f), ConfigError);
  Eigen::ArrayXd f_off(3);
  f_off << 0.1, 0.5, 1.0;
  CHECK_THROWS_AS(ValueDistribution::grid_monotone(v, f_off), ConfigError);
}

TEST_CASE("density floor diagnostic") {
  CHECK(ValueDistribution::uniform(0.0, 1.0).density_floor_ok());
  // a nearly flat stretch of a grid CDF is the textbook violation
  Eigen::ArrayXd v(4), f(4);
  v << 0.0, 0.4, 0.6, 1.0;
  f << 0.0, 0.5 - 5e-11, 0.5 + 5e-11, 1.0;
  const ValueDistribution d = ValueDistribution::grid_monotone(v, f);
  CHECK_FALSE(d.density_floor_ok());
  CHECK(d.min_density() < 1e-6);
}

TEST_CASE("grid csv round trip") {
  const ValueDistribution exact = ValueDistribution::scaled_beta(2.0, 2.0, 0.5, 1.5);
  Eigen::ArrayXd v(8), f(8);
  for (int i = 0; i < 8; ++i) {
    v(i) = 0.5 + i / 7.0;
    f(i) = exact.cdf(v(i));
  }
  const ValueDistribution d = ValueDistribution::grid_monotone(v, f);
  const std::string path = "marginal_roundtrip.csv";
  d.grid_to_csv(path);
  const ValueDistribution back = ValueDistribution::grid_from_csv(path);
  for (double x : {0.55, 0.8, 1.02, 1.31})
    CHECK(back.cdf(x) == doctest::Approx(d.cdf(x)).epsilon(1e-15));
  std::remove(path.c_str());
}
