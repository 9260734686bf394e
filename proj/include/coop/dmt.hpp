#pragma once

#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "coop/protocols.hpp"

namespace coop {

struct TradeoffPoint {
  double r = 0.0;
  double d = 0.0;

  void validate() const;
  bool operator==(const TradeoffPoint&) const = default;
};

// Exponential orders of 1/|g|^2 (v), of 1/|h|^2 (u), and cumulative phase fractions (f).
struct ExponentTuple {
  std::vector<double> v;
  std::vector<double> u;
  std::vector<double> f;

  void validate() const;
};

/*! \brief Closed-form diversity gain d(r).
 *
 * Throws std::domain_error for r outside [0, 1], std::invalid_argument for an unsupported n,
 * and for LtwAf, which has no closed form.
 */
double dmt_closed_form(Protocol protocol, int n, double r);
std::vector<TradeoffPoint> emit_curve(Protocol protocol, int n, std::span<const double> r_grid);

struct GridBox {
  std::vector<double> lower;
  std::vector<double> upper;
};

struct GridMinimum {
  double value = 0.0;
  std::vector<double> point;
};

// Returns nullopt for infeasible points.
using GridObjective = std::function<std::optional<double>(std::span<const double>)>;

/*! \brief Deterministic nested grid refinement.
 *
 * The first pass uses step resolution * refinement^(passes - 1) over the whole box (box edges
 * always included). Each later pass refines a +-1 coarse step neighbourhood of the best `keep`
 * points found so far with a step `refinement` times smaller.
 */
std::optional<GridMinimum> nested_grid_minimize(const GridBox& box, const GridObjective& objective,
                                                double resolution, int passes = 3, int refinement = 10,
                                                int keep = 4);

// Smallest x in [lo, hi] with feasible(x), assuming monotone feasibility; nullopt if hi fails.
std::optional<double> bisect_threshold(double lo, double hi, const std::function<bool(double)>& feasible,
                                       double tol = 1e-12);

struct RegionSolution {
  double d = 0.0;
  ExponentTuple at;
};

RegionSolution solve_region_naf(double r, double resolution);
RegionSolution solve_region_ddf(double r, double resolution);
RegionSolution solve_region_ddf_multi(int n, double r, double resolution);
RegionSolution solve_region_cma(int n, double r, double resolution);

double region_infimum_naf(double r, double resolution);
double region_infimum_ddf(double r, double resolution);
double region_infimum_ddf_multi(int n, double r, double resolution);
double region_infimum_cma(int n, double r, double resolution);

// Outage-region membership tests used by the solvers (exposed for tests).
bool in_naf_region(double v1, double v2, double u, double r);
bool in_ddf_region(double v1, double v2, double f, double r);
// f has n - 1 cumulative decode fractions, vt the n sorted combined orders.
bool in_ddf_multi_region(std::span<const double> f, std::span<const double> vt, double r);
// Pair of linear conditions on subset `mask` with per-node v and t = v + max u.
bool in_cma_region(unsigned mask, std::span<const double> v, std::span<const double> t, double r);

} // namespace coop
