#include <doctest.h>

#include <cmath>
#include <cstdlib>

#include "coop/montecarlo.hpp"

using namespace coop;

namespace {

ProtocolConfig make(Protocol p, int n, double rate)
{
  ProtocolConfig c;
  c.protocol = p;
  c.n_nodes = n;
  c.rate_bpcu = rate;
  return c;
}

double direct_outage(double rate, double snr_db)
{
  return -std::expm1(-(std::exp2(rate) - 1.0) / snr_linear(snr_db));
}

} // namespace

TEST_CASE("confidence interval")
{
  auto [lo0, hi0] = outage_confidence_interval(0, 1000);
  CHECK(lo0 == 0.0);
  CHECK(hi0 > 0.0);
  CHECK(hi0 < 0.01);
  // Wilson: 3.8415 / (1000 + 3.8415)
  CHECK(hi0 == doctest::Approx(1.96 * 1.96 / (1000.0 + 1.96 * 1.96)).epsilon(1e-6));
  auto [lo, hi] = outage_confidence_interval(500, 10000);
  CHECK(lo == doctest::Approx(0.05 - 1.96 * std::sqrt(0.05 * 0.95 / 10000)).epsilon(1e-6));
  CHECK(hi == doctest::Approx(0.05 + 1.96 * std::sqrt(0.05 * 0.95 / 10000)).epsilon(1e-6));
  auto [lo_all, hi_all] = outage_confidence_interval(10, 10);
  CHECK(hi_all <= 1.0);
  CHECK(lo_all < 1.0);
  CHECK_THROWS_AS(outage_confidence_interval(5, 0), std::invalid_argument);
  CHECK_THROWS_AS(outage_confidence_interval(11, 10), std::invalid_argument);
}

TEST_CASE("direct outage matches the exponential law")
{
  const auto c = make(Protocol::Direct, 1, 1.0);
  for (double db : {0.0, 10.0, 20.0}) {
    const auto e = estimate_outage(c, LinkSnrProfile(db), 200000, 42);
    const double p = direct_outage(1.0, db);
    CHECK(std::abs(e.p_hat - p) <= 4.0 * std::sqrt(p * (1 - p) / 200000));
    CHECK(e.ci_low <= e.p_hat);
    CHECK(e.ci_high >= e.p_hat);
    CHECK(e.seed == 42);
    CHECK(e.snr_db == db);
    CHECK(e.rate_bpcu == 1.0);
    CHECK_NOTHROW(e.validate());
  }
}

TEST_CASE("direct link offsets shift the outage curve")
{
  const auto c = make(Protocol::Direct, 1, 1.0);
  LinkSnrProfile profile(10.0);
  profile.set_offset_db(LinkId::direct(0), -10.0);
  const auto e = estimate_outage(c, profile, 200000, 3);
  const double p = direct_outage(1.0, 0.0);
  CHECK(std::abs(e.p_hat - p) <= 4.0 * std::sqrt(p * (1 - p) / 200000));
}

TEST_CASE("zero rate gives zero outage")
{
  const auto e = estimate_outage(make(Protocol::Naf, 2, 0.0), LinkSnrProfile(0.0), 10000, 1);
  CHECK(e.outages == 0);
  CHECK(e.p_hat == 0.0);
  CHECK(e.low_confidence);
}

TEST_CASE("estimates are reproducible and independent of the worker count")
{
  for (auto [p, n] : std::vector<std::pair<Protocol, int>>{{Protocol::Naf, 2}, {Protocol::DdfMulti, 3},
                                                         {Protocol::CmaNaf, 2}}) {
    const auto c = make(p, n, 1.0);
    const LinkSnrProfile profile(10.0);
    const auto one = estimate_outage(c, profile, 20000, 11, 1);
    const auto four = estimate_outage(c, profile, 20000, 11, 4);
    const auto sixteen = estimate_outage(c, profile, 20000, 11, 16);
    CHECK(one.outages == four.outages);
    CHECK(one.outages == sixteen.outages);
    CHECK(estimate_outage(c, profile, 20000, 11, 4).outages == four.outages);
    CHECK(estimate_outage(c, profile, 20000, 12, 4).outages != four.outages);
  }
}

TEST_CASE("worker count from the environment")
{
  ::setenv("COOPSIM_WORKERS", "3", 1);
  CHECK(default_worker_count() == 3);
  ::setenv("COOPSIM_WORKERS", "junk", 1);
  CHECK(default_worker_count() >= 1);
  ::unsetenv("COOPSIM_WORKERS");
  CHECK(default_worker_count() >= 1);
}

TEST_CASE("confidence intervals cover the true probability")
{
  const auto c = make(Protocol::Direct, 1, 1.0);
  const double db = 10.0;
  const double p = direct_outage(1.0, db);
  // 1000 repetitions keep the binomial slack near three standard errors of 95% coverage.
  int covered = 0;
  for (std::uint64_t seed = 0; seed < 1000; ++seed) {
    const auto e = estimate_outage(c, LinkSnrProfile(db), 2000, 1000 + seed);
    covered += e.ci_low <= p && p <= e.ci_high;
  }
  CHECK(covered >= 930);
}

TEST_CASE("exponent fit recovers a synthetic slope")
{
  SweepResult s;
  for (double db : {10.0, 20.0, 30.0, 40.0}) {
    OutageEstimate e;
    e.trials = 1000000000000;
    e.p_hat = 0.3 * std::pow(snr_linear(db), -2.0);
    e.outages = static_cast<std::int64_t>(std::llround(e.p_hat * e.trials));
    e.snr_db = db;
    s.points.push_back(e);
  }
  const auto fit = estimate_exponent(s, 50);
  CHECK(fit.slope == doctest::Approx(2.0).epsilon(1e-3));
  CHECK(fit.intercept == doctest::Approx(-std::log10(0.3)).epsilon(1e-3));
  CHECK(fit.log10_rho.size() == 4);
  // Only two points carry enough outages at min_outages = 1e6.
  CHECK(estimate_exponent(s, 1000000).log10_rho.size() == 2);
  CHECK_THROWS_AS(estimate_exponent(s, 100000000), std::invalid_argument);
  for (double res : fit.residuals)
    CHECK(std::abs(res) < 1e-6);
}

TEST_CASE("sweep uses one seed per grid point")
{
  const auto c = make(Protocol::Naf, 2, 2.0);
  const std::vector<double> grid{0.0, 10.0, 20.0, 30.0};
  const auto s = sweep(c, LinkSnrProfile(), grid, 20000, 5);
  REQUIRE(s.points.size() == 4);
  CHECK(s.protocol == Protocol::Naf);
  CHECK_NOTHROW(s.validate());
  for (std::size_t k = 0; k < grid.size(); ++k) {
    CHECK(s.points[k].seed == 5 + k);
    CHECK(s.points[k].snr_db == grid[k]);
    CHECK(s.points[k].outages == estimate_outage(c, LinkSnrProfile(grid[k]), 20000, 5 + k).outages);
    if (k > 0)
      CHECK(s.points[k].p_hat <= s.points[k - 1].p_hat);
  }
}

TEST_CASE("cooperation beats direct transmission at high SNR")
{
  const LinkSnrProfile profile(30.0);
  const auto direct = estimate_outage(make(Protocol::Direct, 1, 2.0), profile, 200000, 9);
  const auto naf = estimate_outage(make(Protocol::Naf, 2, 2.0), profile, 200000, 9);
  const auto ddf = estimate_outage(make(Protocol::Ddf, 2, 2.0), profile, 200000, 9);
  CHECK(naf.ci_high < direct.ci_low);
  CHECK(ddf.ci_high < direct.ci_low);
}

TEST_CASE("single-point sweep wraps the estimator")
{
  const auto c = make(Protocol::Direct, 1, 1.0);
  const std::vector<double> grid{12.0};
  const auto s = sweep(c, LinkSnrProfile(), grid, 5000, 21);
  REQUIRE(s.points.size() == 1);
  const auto e = estimate_outage(c, LinkSnrProfile(12.0), 5000, 21);
  CHECK(s.points[0].outages == e.outages);
  CHECK(s.points[0].ci_high == e.ci_high);
}

TEST_CASE("direct outage falls strictly with SNR")
{
  const std::vector<double> grid{10.0, 20.0, 30.0};
  const auto s = sweep(make(Protocol::Direct, 1, 1.0), LinkSnrProfile(), grid, 100000, 31);
  CHECK(s.points[0].p_hat > s.points[1].p_hat);
  CHECK(s.points[1].p_hat > s.points[2].p_hat);
}

TEST_CASE("NAF with a noiseless source-relay link beats direct at 40 dB")
{
  LinkSnrProfile profile(40.0);
  profile.set_noiseless(LinkId::inter_node(1, 0));
  const auto naf = estimate_outage(make(Protocol::Naf, 2, 2.0), profile, 1000000, 41);
  const auto direct = estimate_outage(make(Protocol::Direct, 1, 2.0), LinkSnrProfile(40.0), 1000000, 41);
  CHECK(naf.p_hat < direct.p_hat);
}

TEST_CASE("two-source CMA-NAF shows second-order diversity")
{
  const std::vector<double> grid{20.0, 25.0, 30.0};
  const auto s = sweep(make(Protocol::CmaNaf, 2, 2.0), LinkSnrProfile(), grid, 300000, 51);
  const auto fit = estimate_exponent(s, 50);
  CHECK(fit.log10_rho.size() == 3);
  CHECK(fit.slope >= 1.6);
  CHECK(fit.slope <= 2.4);
}
