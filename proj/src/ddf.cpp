#include "coop/protocols.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace coop {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double inter_gain_factor(const ChannelRealization& r, int to, int from)
{
  return r.noiseless(to, from) ? kInf : 1.0;
}

} // namespace

double ddf_listen_fraction(std::complex<double> h, double c, double rho, double rate,
                           std::optional<int> codeword_length)
{
  if (!(rho > 0.0))
    throw std::domain_error("ddf_listen_fraction: rho must be positive");
  const double capacity = std::isinf(c) ? kInf : std::log2(1.0 + std::norm(h) * c * rho);
  const double ratio = capacity > 0.0 ? rate / capacity : kInf;
  if (codeword_length) {
    const double l = *codeword_length;
    const double listen = std::max(1.0, std::min(l, std::ceil(l * ratio)));
    return listen / l;
  }
  return std::max(std::numeric_limits<double>::min(), std::min(1.0, ratio));
}

bool outage_ddf(const ChannelRealization& r, const ProtocolConfig& config, double rho)
{
  if (r.g.size() != 2)
    throw std::invalid_argument("outage_ddf: single-relay realization expected");
  const double f = ddf_listen_fraction(r.h(1, 0), inter_gain_factor(r, 1, 0), rho, config.rate_bpcu,
                                       config.ddf_codeword_length);
  const double rho2 = config.fair_power_split ? rho / 2.0 : rho;
  const double g1 = std::norm(r.g[0]);
  const double mi = f * std::log2(1.0 + g1 * rho) + (1.0 - f) * std::log2(1.0 + (g1 + std::norm(r.g[1])) * rho2);
  return mi < config.rate_bpcu;
}

DecodeSchedule ddf_decode_schedule(const ChannelRealization& r, const ProtocolConfig& config, double rho)
{
  const auto n = static_cast<int>(r.g.size());
  if (n < 2 || r.h.rows() != n)
    throw std::invalid_argument("ddf_decode_schedule: relay realization with N >= 2 expected");

  DecodeSchedule out;
  out.phase_fractions.assign(static_cast<std::size_t>(n), 0.0);

  if (n == 2) {
    const double f = ddf_listen_fraction(r.h(1, 0), inter_gain_factor(r, 1, 0), rho, config.rate_bpcu,
                                         config.ddf_codeword_length);
    out.phase_fractions = {f, 1.0 - f};
    out.decode_order = {1};
    out.relays_decoded = f < 1.0 ? 1 : 0;
    return out;
  }

  const double rate = config.rate_bpcu;
  std::vector<double> acc(static_cast<std::size_t>(n), 0.0);
  std::vector<double> speed(static_cast<std::size_t>(n), 0.0);
  std::vector<bool> decoded(static_cast<std::size_t>(n), false);
  std::vector<int> active{0};
  std::vector<double> times;
  double t = 0.0;

  while (static_cast<int>(active.size()) < n) {
    const double per_tx = config.fair_power_split ? rho / static_cast<double>(active.size()) : rho;
    double best = kInf;
    int next = -1;
    for (int m = 1; m < n; ++m) {
      if (decoded[m])
        continue;
      double gain = std::norm(r.h(m, 0));
      bool unbounded = r.noiseless(m, 0);
      if (!config.ddf_relay_mi_source_only)
        for (std::size_t k = 1; k < active.size(); ++k) {
          gain += std::norm(r.h(m, active[k]));
          unbounded = unbounded || r.noiseless(m, active[k]);
        }
      speed[m] = unbounded ? kInf : std::log2(1.0 + per_tx * gain);
      const double need = rate - acc[m];
      const double wait = need <= 0.0 ? 0.0 : (speed[m] > 0.0 ? need / speed[m] : kInf);
      if (wait < best) {
        best = wait;
        next = m;
      }
    }
    if (next < 0 || t + best >= 1.0)
      break;
    double t_next = t + best;
    if (config.ddf_codeword_length) {
      const double l = *config.ddf_codeword_length;
      t_next = std::max(1.0 / l, std::ceil(t_next * l) / l);
      if (t_next >= 1.0)
        break;
    }
    const double elapsed = t_next - t;
    for (int m = 1; m < n; ++m)
      if (!decoded[m])
        acc[m] = std::isinf(speed[m]) ? kInf : acc[m] + speed[m] * elapsed;
    decoded[next] = true;
    active.push_back(next);
    times.push_back(t_next);
    t = t_next;
  }

  double prev = 0.0;
  for (std::size_t j = 0; j < times.size(); ++j) {
    out.phase_fractions[j] = times[j] - prev;
    prev = times[j];
  }
  out.phase_fractions[times.size()] = 1.0 - prev;
  out.decode_order.assign(active.begin() + 1, active.end());
  for (int m = 1; m < n; ++m)
    if (!decoded[m])
      out.decode_order.push_back(m);
  out.relays_decoded = static_cast<int>(times.size());
  return out;
}

bool outage_ddf_multi(const ChannelRealization& r, const DecodeSchedule& schedule,
                      const ProtocolConfig& config, double rho)
{
  const auto n = schedule.phase_fractions.size();
  if (schedule.decode_order.size() + 1 != n || static_cast<std::size_t>(r.g.size()) != n)
    throw std::invalid_argument("outage_ddf_multi: schedule does not match realization");
  double combined = 0.0;
  double mi = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    const int node = j == 0 ? 0 : schedule.decode_order[j - 1];
    combined += std::norm(r.g[node]);
    const double per_tx = config.fair_power_split ? rho / static_cast<double>(j + 1) : rho;
    mi += schedule.phase_fractions[j] * std::log2(1.0 + per_tx * combined);
  }
  return mi < config.rate_bpcu;
}

bool outage_ddf_multi(const ChannelRealization& r, const ProtocolConfig& config, double rho)
{
  return outage_ddf_multi(r, ddf_decode_schedule(r, config, rho), config, rho);
}

ChannelRealization cb_relabel(const ChannelRealization& broadcast, int dest)
{
  const auto n = static_cast<int>(broadcast.g.size());
  if (dest < 0 || dest >= n || broadcast.h.rows() != n)
    throw std::invalid_argument("cb_relabel: bad destination index");
  std::vector<int> helpers;
  for (int m = 0; m < n; ++m)
    if (m != dest)
      helpers.push_back(m);

  ChannelRealization out;
  out.g.resize(n);
  out.h = Eigen::MatrixXcd::Zero(n, n);
  out.h_noiseless = MatrixXb::Constant(n, n, false);
  out.g[0] = broadcast.g[dest];
  for (int k = 1; k < n; ++k) {
    const int mk = helpers[static_cast<std::size_t>(k - 1)];
    out.g[k] = broadcast.h(dest, mk);
    out.h(k, 0) = broadcast.g[mk];
    for (int k2 = 1; k2 < n; ++k2) {
      if (k2 == k)
        continue;
      const int mk2 = helpers[static_cast<std::size_t>(k2 - 1)];
      out.h(k, k2) = broadcast.h(mk, mk2);
      out.h_noiseless(k, k2) = broadcast.h_noiseless(mk, mk2);
    }
  }
  return out;
}

bool outage_cb_ddf(const ChannelRealization& r, const ProtocolConfig& config, double rho)
{
  const auto n = static_cast<int>(r.g.size());
  if (n == 1)
    return mi_direct(r.g[0], rho) < config.rate_bpcu;
  for (int dest = 0; dest < n; ++dest)
    if (outage_ddf_multi(cb_relabel(r, dest), config, rho))
      return true;
  return false;
}

} // namespace coop
