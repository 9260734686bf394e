#include "coop/dmt.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace coop {

namespace {

constexpr double kSlack = 1e-12;

double pos(double x)
{
  return std::max(0.0, x);
}

std::vector<double> axis(double lo, double hi, double step)
{
  std::vector<double> out;
  if (hi - lo <= kSlack)
    return {lo};
  const auto count = static_cast<long>(std::floor((hi - lo) / step + kSlack));
  for (long k = 0; k <= count; ++k)
    out.push_back(std::min(hi, lo + static_cast<double>(k) * step));
  if (hi - out.back() > kSlack)
    out.push_back(hi);
  return out;
}

// Grid points of a local box, anchored at the candidate so it stays on the refined lattice.
std::vector<double> local_axis(double centre, double lo, double hi, double step, int half_width)
{
  std::vector<double> out;
  const double a = std::max(lo, centre - half_width * step);
  const double b = std::min(hi, centre + half_width * step);
  if (a > centre - half_width * step)
    out.push_back(a);
  for (int k = -half_width; k <= half_width; ++k) {
    const double x = centre + k * step;
    if (x >= a - kSlack && x <= b + kSlack)
      out.push_back(std::clamp(x, lo, hi));
  }
  if (b < centre + half_width * step)
    out.push_back(b);
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

void scan(const std::vector<std::vector<double>>& axes, const GridObjective& objective,
          std::vector<GridMinimum>& pool)
{
  const std::size_t dims = axes.size();
  std::vector<std::size_t> idx(dims, 0);
  std::vector<double> point(dims);
  for (std::size_t d = 0; d < dims; ++d)
    if (axes[d].empty())
      return;
  while (true) {
    for (std::size_t d = 0; d < dims; ++d)
      point[d] = axes[d][idx[d]];
    if (auto value = objective(point))
      pool.push_back({*value, point});
    std::size_t d = 0;
    for (; d < dims; ++d) {
      if (++idx[d] < axes[d].size())
        break;
      idx[d] = 0;
    }
    if (d == dims)
      return;
  }
}

void keep_best(std::vector<GridMinimum>& pool, int keep)
{
  std::sort(pool.begin(), pool.end(), [](const GridMinimum& a, const GridMinimum& b) {
    if (a.value != b.value)
      return a.value < b.value;
    return a.point < b.point;
  });
  pool.erase(std::unique(pool.begin(), pool.end(),
                         [](const GridMinimum& a, const GridMinimum& b) { return a.point == b.point; }),
             pool.end());
  if (pool.size() > static_cast<std::size_t>(keep))
    pool.resize(static_cast<std::size_t>(keep));
}

} // namespace

std::optional<GridMinimum> nested_grid_minimize(const GridBox& box, const GridObjective& objective,
                                                double resolution, int passes, int refinement, int keep)
{
  const std::size_t dims = box.lower.size();
  if (box.upper.size() != dims)
    throw std::invalid_argument("nested_grid_minimize: box bounds differ in length");
  if (!(resolution > 0.0) || passes < 1 || refinement < 2 || keep < 1)
    throw std::invalid_argument("nested_grid_minimize: bad search parameters");
  for (std::size_t d = 0; d < dims; ++d)
    if (!(box.lower[d] <= box.upper[d]))
      throw std::invalid_argument("nested_grid_minimize: empty box");

  double step = resolution * std::pow(static_cast<double>(refinement), passes - 1);
  std::vector<std::vector<double>> axes(dims);
  for (std::size_t d = 0; d < dims; ++d)
    axes[d] = axis(box.lower[d], box.upper[d], step);
  std::vector<GridMinimum> best;
  scan(axes, objective, best);
  keep_best(best, keep);

  for (int p = 1; p < passes && !best.empty(); ++p) {
    const double fine = step / refinement;
    std::vector<GridMinimum> pool = best;
    for (const auto& c : best) {
      for (std::size_t d = 0; d < dims; ++d)
        axes[d] = local_axis(c.point[d], box.lower[d], box.upper[d], fine, refinement);
      scan(axes, objective, pool);
    }
    keep_best(pool, keep);
    best.swap(pool);
    step = fine;
  }
  if (best.empty())
    return std::nullopt;
  return best.front();
}

std::optional<double> bisect_threshold(double lo, double hi, const std::function<bool(double)>& feasible,
                                       double tol)
{
  if (!feasible(hi))
    return std::nullopt;
  if (feasible(lo))
    return lo;
  while (hi - lo > tol) {
    const double mid = 0.5 * (lo + hi);
    (feasible(mid) ? hi : lo) = mid;
  }
  return hi;
}

bool in_naf_region(double v1, double v2, double u, double r)
{
  return pos(std::max(2.0 * (1.0 - v1), 1.0 - (v2 + u))) <= 2.0 * r + kSlack;
}

bool in_ddf_region(double v1, double v2, double f, double r)
{
  return f * pos(1.0 - v1) + (1.0 - f) * pos(1.0 - std::min(v1, v2)) <= r + kSlack;
}

bool in_ddf_multi_region(std::span<const double> f, std::span<const double> vt, double r)
{
  if (vt.size() != f.size() + 1)
    throw std::invalid_argument("in_ddf_multi_region: need one more order than decode fractions");
  double prev = 0.0;
  double rate = 0.0;
  for (std::size_t j = 0; j < vt.size(); ++j) {
    const double next = j < f.size() ? f[j] : 1.0;
    rate += (next - prev) * pos(1.0 - vt[j]);
    prev = next;
  }
  return rate <= r + kSlack;
}

bool in_cma_region(unsigned mask, std::span<const double> v, std::span<const double> t, double r)
{
  const auto n = v.size();
  if (t.size() != n || n == 0 || mask == 0 || mask >= (1u << n))
    throw std::invalid_argument("in_cma_region: bad subset or dimensions");
  double sum_in = 0.0;
  double sum_out = 0.0;
  int m = 0;
  for (std::size_t j = 0; j < n; ++j) {
    if (mask & (1u << j)) {
      sum_in += v[j];
      ++m;
    } else {
      sum_out += t[j];
    }
  }
  const double target = 1.0 - r;
  return sum_in >= m * target - kSlack
         && (m - 1) * sum_in + m * sum_out >= m * static_cast<double>(n - 1) * target - kSlack;
}

namespace {

void check_r(double r, double resolution)
{
  if (!(r >= 0.0 && r <= 1.0))
    throw std::domain_error("region infimum: r must lie in [0, 1]");
  if (!(resolution > 0.0))
    throw std::invalid_argument("region infimum: resolution must be positive");
}

void check_n(int n)
{
  if (n < 2 || n > 4)
    throw std::invalid_argument("region infimum: n must lie in [2, 4]");
}

RegionSolution require(std::optional<GridMinimum> m, const char* what)
{
  if (!m)
    throw std::logic_error(std::string(what) + ": no feasible point found");
  return {m->value, {}};
}

} // namespace

// Orders above one never shrink the outage event further, so the boxes stop at 1 (or 2 for
// sums of two orders).
RegionSolution solve_region_naf(double r, double resolution)
{
  check_r(r, resolution);
  // u enters only through s = v2 + u.
  auto last = [r](double v1) {
    return bisect_threshold(0.0, 2.0, [&](double s) { return in_naf_region(v1, s, 0.0, r); });
  };
  const GridObjective objective = [&](std::span<const double> x) -> std::optional<double> {
    auto s = last(x[0]);
    if (!s)
      return std::nullopt;
    return x[0] + *s;
  };
  auto m = nested_grid_minimize({{0.0}, {1.0}}, objective, resolution);
  auto sol = require(m, "region_infimum_naf");
  const double s = *last(m->point[0]);
  sol.at.v = {m->point[0], std::min(1.0, s)};
  sol.at.u = {pos(s - 1.0)};
  return sol;
}

RegionSolution solve_region_ddf(double r, double resolution)
{
  check_r(r, resolution);
  if (r == 0.0)
    return {2.0, {{1.0, 1.0}, {0.0}, {0.0}}};
  // Variables (f, v1); v2 by bisection. u is tied to f through the listening rule.
  auto last = [r](double f, double v1) {
    return bisect_threshold(0.0, 1.0, [&](double v2) { return in_ddf_region(v1, v2, f, r); });
  };
  const GridObjective objective = [&](std::span<const double> x) -> std::optional<double> {
    auto v2 = last(x[0], x[1]);
    if (!v2)
      return std::nullopt;
    return x[1] + *v2 + pos(1.0 - r / x[0]);
  };
  auto m = nested_grid_minimize({{r, 0.0}, {1.0, 1.0}}, objective, resolution);
  auto sol = require(m, "region_infimum_ddf");
  const double f = m->point[0];
  sol.at.v = {m->point[1], *last(f, m->point[1])};
  sol.at.u = {pos(1.0 - r / f)};
  sol.at.f = {f};
  return sol;
}

RegionSolution solve_region_ddf_multi(int n, double r, double resolution)
{
  check_n(n);
  check_r(r, resolution);
  if (r == 0.0)
    return {static_cast<double>(n), {std::vector<double>(n, 1.0), std::vector<double>(n - 1, 0.0),
                                     std::vector<double>(n - 1, 0.0)}};
  const auto k = static_cast<std::size_t>(n - 1);
  // Point layout: f_1..f_{n-1} (nondecreasing, >= r), then vt_1..vt_{n-1} (nonincreasing).
  // vt_n follows in closed form since the rate constraint is linear in it.
  auto last = [r, k](std::span<const double> x) -> std::optional<double> {
    const auto f = x.first(k);
    const auto vt = x.subspan(k, k);
    for (std::size_t j = 1; j < k; ++j)
      if (f[j] < f[j - 1] || vt[j] > vt[j - 1])
        return std::nullopt;
    double prev = 0.0;
    double covered = 0.0;
    for (std::size_t j = 0; j < k; ++j) {
      covered += (f[j] - prev) * std::min(1.0, vt[j]);
      prev = f[j];
    }
    const double need = (1.0 - r) - covered;
    const double width = 1.0 - f[k - 1];
    if (need <= kSlack)
      return 0.0;
    if (width <= 0.0)
      return std::nullopt;
    const double v = need / width;
    if (v > vt[k - 1] + kSlack)
      return std::nullopt;
    return std::min(v, vt[k - 1]);
  };
  const GridObjective objective = [&](std::span<const double> x) -> std::optional<double> {
    auto vn = last(x);
    if (!vn)
      return std::nullopt;
    double total = *vn;
    for (std::size_t j = 0; j < k; ++j)
      total += x[k + j] + pos(1.0 - r / x[j]);
    return total;
  };
  GridBox box;
  box.lower.assign(2 * k, 0.0);
  box.upper.assign(2 * k, 1.0);
  std::fill(box.lower.begin(), box.lower.begin() + static_cast<long>(k), r);
  auto m = nested_grid_minimize(box, objective, resolution);
  auto sol = require(m, "region_infimum_ddf_multi");
  const auto& x = m->point;
  sol.at.f.assign(x.begin(), x.begin() + static_cast<long>(k));
  sol.at.v.assign(x.begin() + static_cast<long>(k), x.end());
  sol.at.v.push_back(*last(x));
  for (std::size_t j = 0; j < k; ++j)
    sol.at.u.push_back(pos(1.0 - r / x[j]));
  return sol;
}

RegionSolution solve_region_cma(int n, double r, double resolution)
{
  check_n(n);
  check_r(r, resolution);
  RegionSolution best{std::numeric_limits<double>::infinity(), {}};
  for (unsigned mask = 1; mask < (1u << n); ++mask) {
    // Variables: v_j for j in the subset, t_i = v_i + max_j u_ji for i outside; the last one
    // is found by bisection.
    std::vector<int> in_subset(static_cast<std::size_t>(n));
    GridBox box;
    for (int j = 0; j < n; ++j) {
      in_subset[j] = (mask >> j) & 1u;
      box.lower.push_back(0.0);
      box.upper.push_back(in_subset[j] ? 1.0 : 2.0);
    }
    const double last_hi = box.upper.back();
    box.lower.pop_back();
    box.upper.pop_back();
    auto expand = [&](std::span<const double> x, double tail, std::vector<double>& v, std::vector<double>& t) {
      v.assign(static_cast<std::size_t>(n), 0.0);
      t.assign(static_cast<std::size_t>(n), 0.0);
      for (int j = 0; j < n; ++j) {
        const double value = j + 1 < n ? x[static_cast<std::size_t>(j)] : tail;
        (in_subset[j] ? v : t)[static_cast<std::size_t>(j)] = value;
      }
    };
    auto last = [&](std::span<const double> x) {
      std::vector<double> v;
      std::vector<double> t;
      return bisect_threshold(0.0, last_hi, [&](double tail) {
        expand(x, tail, v, t);
        return in_cma_region(mask, v, t, r);
      });
    };
    const GridObjective objective = [&](std::span<const double> x) -> std::optional<double> {
      auto tail = last(x);
      if (!tail)
        return std::nullopt;
      double total = *tail;
      for (double xi : x)
        total += xi;
      return total;
    };
    auto m = nested_grid_minimize(box, objective, resolution);
    if (m && m->value < best.d) {
      best.d = m->value;
      std::vector<double> v;
      std::vector<double> t;
      expand(m->point, *last(m->point), v, t);
      best.at.v = v;
      best.at.u.clear();
      for (int j = 0; j < n; ++j)
        best.at.u.push_back(in_subset[j] ? 0.0 : t[static_cast<std::size_t>(j)]);
    }
  }
  if (!std::isfinite(best.d))
    throw std::logic_error("region_infimum_cma: no feasible point found");
  return best;
}

double region_infimum_naf(double r, double resolution)
{
  return solve_region_naf(r, resolution).d;
}

double region_infimum_ddf(double r, double resolution)
{
  return solve_region_ddf(r, resolution).d;
}

double region_infimum_ddf_multi(int n, double r, double resolution)
{
  return solve_region_ddf_multi(n, r, resolution).d;
}

double region_infimum_cma(int n, double r, double resolution)
{
  return solve_region_cma(n, r, resolution).d;
}

} // namespace coop
