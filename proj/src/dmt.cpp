#include "coop/dmt.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace coop {

void TradeoffPoint::validate() const
{
  if (!(r >= 0.0 && r <= 1.0))
    throw std::domain_error("TradeoffPoint: r must lie in [0, 1]");
  if (!(d >= 0.0))
    throw std::domain_error("TradeoffPoint: d must be nonnegative");
}

void ExponentTuple::validate() const
{
  for (double x : v)
    if (!(x >= 0.0))
      throw std::domain_error("ExponentTuple: negative v component");
  for (double x : u)
    if (!(x >= 0.0))
      throw std::domain_error("ExponentTuple: negative u component");
  double prev = 0.0;
  for (double x : f) {
    if (!(x >= 0.0 && x <= 1.0) || x < prev)
      throw std::domain_error("ExponentTuple: f must be nondecreasing in [0, 1]");
    prev = x;
  }
}

namespace {

double pos(double x)
{
  return std::max(0.0, x);
}

void require_n(Protocol protocol, int n, bool ok)
{
  if (!ok)
    throw std::invalid_argument("dmt_closed_form: n = " + std::to_string(n) + " not valid for "
                                + std::string(to_string(protocol)));
}

// Three-branch DDF curve for N nodes transmitting the message.
double ddf_curve(int n, double r)
{
  if (r <= 1.0 / n)
    return n * (1.0 - r);
  if (r <= 0.5)
    return 1.0 + (n - 1) * (1.0 - 2.0 * r) / (1.0 - r);
  return (1.0 - r) / r;
}

} // namespace

double dmt_closed_form(Protocol protocol, int n, double r)
{
  if (!(r >= 0.0 && r <= 1.0))
    throw std::domain_error("dmt_closed_form: r must lie in [0, 1]");
  switch (protocol) {
  case Protocol::Direct:
    require_n(protocol, n, n >= 1);
    return 1.0 - r;
  case Protocol::GenieMiso:
    require_n(protocol, n, n >= 1);
    return n * (1.0 - r);
  case Protocol::LtwDf:
    require_n(protocol, n, n == 2);
    return 2.0 * pos(1.0 - 2.0 * r);
  case Protocol::Naf:
    require_n(protocol, n, n == 2);
    return (1.0 - r) + pos(1.0 - 2.0 * r);
  case Protocol::NafMulti:
    require_n(protocol, n, n >= 2);
    return (1.0 - r) + (n - 1) * pos(1.0 - 2.0 * r);
  case Protocol::Ddf:
    require_n(protocol, n, n == 2);
    return r <= 0.5 ? 2.0 * (1.0 - r) : (1.0 - r) / r;
  case Protocol::DdfMulti:
    require_n(protocol, n, n >= 2);
    return ddf_curve(n, r);
  case Protocol::CbDdf:
    require_n(protocol, n, n >= 1);
    return ddf_curve(n, r);
  case Protocol::CmaNaf:
    require_n(protocol, n, n >= 2);
    return n * (1.0 - r);
  case Protocol::LtwAf:
    break;
  }
  throw std::invalid_argument("dmt_closed_form: no closed-form curve for "
                              + std::string(to_string(protocol)));
}

std::vector<TradeoffPoint> emit_curve(Protocol protocol, int n, std::span<const double> r_grid)
{
  std::vector<TradeoffPoint> out;
  out.reserve(r_grid.size());
  for (double r : r_grid)
    out.push_back({r, dmt_closed_form(protocol, n, r)});
  return out;
}

} // namespace coop
