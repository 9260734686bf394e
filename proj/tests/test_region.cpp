#include <doctest.h>

#include <array>
#include <cmath>

#include "coop/dmt.hpp"

using namespace coop;

TEST_CASE("bisection finds the feasibility threshold")
{
  auto t = bisect_threshold(0.0, 2.0, [](double x) { return x >= 0.7; });
  REQUIRE(t);
  CHECK(*t == doctest::Approx(0.7).epsilon(1e-11));
  CHECK(*bisect_threshold(0.0, 2.0, [](double) { return true; }) == 0.0);
  CHECK_FALSE(bisect_threshold(0.0, 2.0, [](double) { return false; }));
}

TEST_CASE("nested grid minimum of a smooth bowl")
{
  const GridObjective bowl = [](std::span<const double> x) -> std::optional<double> {
    return (x[0] - 0.3137) * (x[0] - 0.3137) + std::abs(x[1] - 0.7071);
  };
  auto m = nested_grid_minimize({{0.0, 0.0}, {1.0, 1.0}}, bowl, 1e-3);
  REQUIRE(m);
  CHECK(m->point[0] == doctest::Approx(0.3137).epsilon(1e-3));
  CHECK(m->point[1] == doctest::Approx(0.7071).epsilon(1e-3));
  CHECK(m->value < 1e-3);
}

TEST_CASE("nested grid handles infeasible points and box edges")
{
  const GridObjective edge = [](std::span<const double> x) -> std::optional<double> {
    if (x[0] < 0.25)
      return std::nullopt;
    return x[0];
  };
  auto m = nested_grid_minimize({{0.0}, {0.97}}, edge, 1e-3);
  REQUIRE(m);
  CHECK(m->value == doctest::Approx(0.25).epsilon(1e-9));

  const GridObjective top = [](std::span<const double> x) -> std::optional<double> { return -x[0]; };
  CHECK(nested_grid_minimize({{0.0}, {0.97}}, top, 1e-3)->value == doctest::Approx(-0.97).epsilon(1e-12));

  const GridObjective never = [](std::span<const double>) -> std::optional<double> { return std::nullopt; };
  CHECK_FALSE(nested_grid_minimize({{0.0}, {1.0}}, never, 1e-3));
}

TEST_CASE("region membership")
{
  CHECK(in_naf_region(0.0, 0.0, 0.0, 0.0) == false);
  CHECK(in_naf_region(1.0, 1.0, 0.0, 0.0));
  CHECK(in_naf_region(0.5, 0.0, 0.0, 0.5));
  CHECK_FALSE(in_naf_region(0.4, 1.0, 0.0, 0.5));
  CHECK(in_ddf_region(1.0, 0.0, 0.5, 0.5));
  CHECK_FALSE(in_ddf_region(1.0, 0.0, 0.6, 0.3));
  const std::array<double, 1> f{0.5};
  const std::array<double, 2> vt{1.0, 0.4};
  CHECK(in_ddf_multi_region(f, vt, 0.3));
  CHECK_FALSE(in_ddf_multi_region(f, vt, 0.29));
  CHECK_THROWS_AS(in_ddf_multi_region(f, f, 0.3), std::invalid_argument);
  const std::array<double, 2> v{1.0, 1.0};
  const std::array<double, 2> t{0.0, 0.0};
  CHECK(in_cma_region(3u, v, t, 0.0));
  CHECK_FALSE(in_cma_region(1u, v, t, 0.0));
  CHECK_THROWS_AS(in_cma_region(4u, v, t, 0.0), std::invalid_argument);
}

TEST_CASE("region infima reproduce the closed forms")
{
  for (double r : {0.0, 0.1, 0.3, 0.5, 0.7, 0.95}) {
    CHECK(std::abs(region_infimum_naf(r, 1e-3) - dmt_closed_form(Protocol::Naf, 2, r)) <= 5e-3);
    CHECK(std::abs(region_infimum_ddf(r, 1e-3) - dmt_closed_form(Protocol::Ddf, 2, r)) <= 5e-3);
    for (int n : {2, 3}) {
      CHECK(std::abs(region_infimum_ddf_multi(n, r, 1e-3) - dmt_closed_form(Protocol::DdfMulti, n, r)) <= 5e-3);
      CHECK(std::abs(region_infimum_cma(n, r, 1e-3) - dmt_closed_form(Protocol::CmaNaf, n, r)) <= 5e-3);
    }
  }
}

TEST_CASE("region infima stay within two grid steps on the full rate grid")
{
  const double res = 1e-3;
  for (int k = 1; k <= 19; ++k) {
    const double r = 0.05 * k;
    CHECK(std::abs(region_infimum_naf(r, res) - dmt_closed_form(Protocol::Naf, 2, r)) <= 2 * res);
    CHECK(std::abs(region_infimum_ddf(r, res) - dmt_closed_form(Protocol::Ddf, 2, r)) <= 2 * res);
    CHECK(std::abs(region_infimum_ddf_multi(3, r, res) - dmt_closed_form(Protocol::DdfMulti, 3, r)) <= 2 * res);
    CHECK(std::abs(region_infimum_cma(3, r, res) - dmt_closed_form(Protocol::CmaNaf, 3, r)) <= 2 * res);
  }
}

TEST_CASE("region minimizers are feasible and attain the reported value")
{
  for (double r : {0.2, 0.4, 0.6, 0.8}) {
    const auto naf = solve_region_naf(r, 1e-3);
    CHECK_NOTHROW(naf.at.validate());
    CHECK(in_naf_region(naf.at.v[0], naf.at.v[1], naf.at.u[0], r));
    CHECK(naf.at.v[0] + naf.at.v[1] + naf.at.u[0] == doctest::Approx(naf.d).epsilon(1e-9));

    const auto ddf = solve_region_ddf(r, 1e-3);
    CHECK_NOTHROW(ddf.at.validate());
    CHECK(in_ddf_region(ddf.at.v[0], ddf.at.v[1], ddf.at.f[0], r));
    CHECK(ddf.at.v[0] + ddf.at.v[1] + ddf.at.u[0] == doctest::Approx(ddf.d).epsilon(1e-9));

    const auto multi = solve_region_ddf_multi(3, r, 1e-3);
    CHECK_NOTHROW(multi.at.validate());
    CHECK(in_ddf_multi_region(multi.at.f, multi.at.v, r + 1e-9));
    double sum = 0.0;
    for (double x : multi.at.v)
      sum += x;
    for (double x : multi.at.u)
      sum += x;
    CHECK(sum == doctest::Approx(multi.d).epsilon(1e-9));

    const auto cma = solve_region_cma(3, r, 1e-3);
    CHECK_NOTHROW(cma.at.validate());
    std::vector<double> t(3);
    double total = 0.0;
    for (int j = 0; j < 3; ++j) {
      t[j] = cma.at.v[j] + cma.at.u[j];
      total += t[j];
    }
    CHECK(total == doctest::Approx(cma.d).epsilon(1e-9));
    bool feasible = false;
    for (unsigned mask = 1; mask < 8; ++mask)
      feasible = feasible || in_cma_region(mask, cma.at.v, t, r);
    CHECK(feasible);
  }
}

TEST_CASE("region solver argument checks")
{
  CHECK_THROWS_AS(region_infimum_naf(1.2, 1e-3), std::domain_error);
  CHECK_THROWS_AS(region_infimum_ddf(0.5, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(region_infimum_ddf_multi(5, 0.5, 1e-3), std::invalid_argument);
  CHECK_THROWS_AS(region_infimum_cma(1, 0.5, 1e-3), std::invalid_argument);
}
