#include <doctest.h>

#include <cmath>

#include "auction/equilibrium.hpp"
#include "auction/errors.hpp"
#include "auction/outcomes.hpp"
#include "auction/simulate.hpp"

using namespace auction;

namespace {

AuctionEnvironment field_env(int n, double kappa, AuctionFormat fmt, double theta = 5.54) {
  return {n, kappa, fmt, ValueDistribution::scaled_beta(3.0, 2.0, 0.47, 1.56),
          CopulaModel::frank(theta)};
}

double ipow(double x, int k) {
  double r = 1.0;
  for (int i = 0; i < k; ++i) r *= x;
  return r;
}

}  // namespace

TEST_CASE("failure probability formulas") {
  const AuctionEnvironment hard9 = field_env(9, 0.05, HardBidRequirement{});
  CHECK(failure_probability(hard9, 0.186) == doctest::Approx(0.480).epsilon(0.002));
  const AuctionEnvironment hard12 = field_env(12, 0.05, HardBidRequirement{});
  CHECK(failure_probability(hard12, 0.134) == doctest::Approx(0.508).epsilon(0.002));
  CHECK(failure_probability(hard9, 0.0) == doctest::Approx(1.0));
  CHECK(failure_probability(hard9, 1.0) == doctest::Approx(0.0));

  const AuctionEnvironment soft = field_env(10, 0.05, SoftBidRequirement{});
  const double p = 0.3;
  CHECK(failure_probability(soft, p) ==
        doctest::Approx(ipow(0.7, 10) + 0.5 * 10 * 0.3 * ipow(0.7, 9)).epsilon(1e-12));

  // reserve with independence: bidding probability factors as p F(r)
  AuctionEnvironment res{10, 0.05, ReservePrice{1.0}, ValueDistribution::uniform(0.0, 1.0),
                         CopulaModel::independence()};
  res.values = ValueDistribution::scaled_beta(3.0, 2.0, 0.47, 1.56);
  const double fr = res.values.cdf(1.0);
  CHECK(failure_probability(res, 0.2) == doctest::Approx(ipow(1.0 - 0.2 * fr, 10)).epsilon(1e-12));
}

TEST_CASE("failure probability decreases with entry, every format") {
  for (const AuctionFormat fmt :
       {AuctionFormat(HardBidRequirement{}), AuctionFormat(SoftBidRequirement{}),
        AuctionFormat(ReservePrice{1.0})}) {
    const AuctionEnvironment env = field_env(8, 0.05, fmt);
    double prev = 2.0;
    for (int k = 0; k <= 25; ++k) {
      const double f = failure_probability(env, k / 25.0);
      CHECK(f <= prev + 1e-12);
      prev = f;
    }
  }
}

TEST_CASE("hard-minus-reserve failure identity at equal entry") {
  const AuctionEnvironment hard = field_env(9, 0.05, HardBidRequirement{});
  const AuctionEnvironment res = field_env(9, 0.05, ReservePrice{1.0});
  for (double p : {0.1, 0.25, 0.6}) {
    const double q = res.copula.cdf(res.values.cdf(1.0), p);
    const double expect = (ipow(1.0 - p, 9) - ipow(1.0 - q, 9)) + 9 * p * ipow(1.0 - p, 8);
    CHECK(failure_probability(hard, p) - failure_probability(res, p) ==
          doctest::Approx(expect).epsilon(1e-12));
  }
}

TEST_CASE("bidding probability under a binding reserve stays below p") {
  const AuctionEnvironment res = field_env(9, 0.05, ReservePrice{1.0});
  for (double p : {0.1, 0.3, 0.7}) {
    const double q = prob_bidding(res, p);
    CHECK(q > 0.0);
    CHECK(q < p);
  }
  const AuctionEnvironment hard = field_env(9, 0.05, HardBidRequirement{});
  CHECK(prob_bidding(hard, 0.3) == doctest::Approx(0.3));
}

TEST_CASE("expected winning bid closed form and range") {
  AuctionEnvironment env{2, 0.1, HardBidRequirement{}, ValueDistribution::uniform(0.0, 1.0),
                         CopulaModel::independence()};
  CHECK(expected_winning_bid(env, 1.0) == doctest::Approx(2.0 / 3.0).epsilon(1e-8));
  // soft variant: the bidding function is (1+v)/2 for every p here, so the
  // winner is always the better of two independent uniforms (the rival or the
  // government draw) and the conditional winning bid is 2/3 at any p
  AuctionEnvironment soft = env;
  soft.format = SoftBidRequirement{};
  for (double p : {0.05, 0.4, 0.8, 1.0})
    CHECK(expected_winning_bid(soft, p) == doctest::Approx(2.0 / 3.0).epsilon(1e-8));
  for (const AuctionFormat fmt :
       {AuctionFormat(HardBidRequirement{}), AuctionFormat(SoftBidRequirement{}),
        AuctionFormat(ReservePrice{1.0})}) {
    const AuctionEnvironment e = field_env(10, 0.03, fmt);
    for (double p : {0.15, 0.4, 0.9}) {
      const double k = expected_winning_bid(e, p);
      CHECK(k >= e.values.lower());
      CHECK(k <= e.values.upper());
    }
  }
}

TEST_CASE("undefined winning bid is an explicit marker") {
  const AuctionEnvironment env = field_env(10, 0.03, HardBidRequirement{});
  CHECK_THROWS_AS(expected_winning_bid(env, 0.0), NumericError);
  const OutcomeReport rep = outcome_report(env, 0.0);
  CHECK(rep.prob_failure == doctest::Approx(1.0));
  CHECK_FALSE(rep.expected_winning_bid.has_value());
  const OutcomeReport ok = outcome_report(env, 0.3);
  CHECK(ok.expected_winning_bid.has_value());
}

TEST_CASE("unconditional cost identities") {
  AuctionEnvironment indep{2, 0.1, HardBidRequirement{}, ValueDistribution::uniform(0.0, 1.0),
                           CopulaModel::independence()};
  CHECK(unconditional_cost(indep, 0.0) == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(unconditional_cost(indep, 1.0) == doctest::Approx(2.0 / 3.0).epsilon(1e-8));

  const AuctionEnvironment env = field_env(5, 0.03, HardBidRequirement{});
  const double p = 0.3;
  const double succ = prob_at_least_two(p, 5);
  const double glue = succ * expected_winning_bid(env, p) + (1.0 - succ) * env.values.upper();
  CHECK(unconditional_cost(env, p) == doctest::Approx(glue).epsilon(1e-9));
  CHECK_THROWS_AS(unconditional_cost(field_env(5, 0.03, ReservePrice{1.0}), 0.3),
                  std::domain_error);
}

TEST_CASE("winning bid matches the simulation oracle") {
  const AuctionEnvironment env = field_env(7, 0.03, HardBidRequirement{});
  const double p = 0.35;
  const MonteCarloOutcomes mc = simulate_outcomes(env, p, 200000, 99);
  CHECK(std::abs(mc.failure_prob - failure_probability(env, p)) < 3.0 * mc.failure_se);
  CHECK(std::abs(mc.mean_winning_bid - expected_winning_bid(env, p)) < 3.0 * mc.winning_bid_se);
}

TEST_CASE("theta effect decomposition is internally consistent") {
  const AuctionEnvironment env = field_env(10, 0.033, HardBidRequirement{});
  const ThetaEffectDecomposition d = decompose_theta_effect(env);
  CHECK(d.information <= 0.0);
  CHECK(d.total ==
        doctest::Approx(d.full_difference).epsilon(1e-4));

  // analytic information-effect integral as an oracle for the hard format
  const int n = env.n;
  const double succ = prob_at_least_two(d.p_star, n);
  const double analytic =
      -(n * (n - 1.0) / succ) *
      integrate(
          [&](double v) {
            const CopulaPartials cp = env.copula.partials(env.values.cdf(v), d.p_star);
            const double c = env.copula.cdf(env.values.cdf(v), d.p_star);
            return cp.dtheta * std::pow(1.0 - c, n - 2) * c;
          },
          env.values.lower(), env.values.upper(), 1e-10);
  CHECK(analytic <= 0.0);
  CHECK(d.information == doctest::Approx(analytic).epsilon(1e-3));

  // with no dependence on theta the information integrand vanishes identically
  const CopulaModel indep = CopulaModel::independence();
  for (double x : {0.2, 0.5, 0.8})
    CHECK(indep.partials(x, 0.4).dtheta == 0.0);
}

TEST_CASE("decomposition detects vanished equilibria") {
  // above the informativeness threshold entry is zero and the stencil fails
  const AuctionEnvironment env = field_env(10, 0.033, HardBidRequirement{}, 12.0);
  CHECK_THROWS_AS(decompose_theta_effect(env), NumericError);
}

TEST_CASE("reserve format decomposition runs") {
  const AuctionEnvironment env = field_env(10, 0.033, ReservePrice{1.0});
  const ThetaEffectDecomposition d = decompose_theta_effect(env);
  CHECK(d.information <= 1e-12);
  CHECK(d.total == doctest::Approx(d.full_difference).epsilon(1e-4));
}
