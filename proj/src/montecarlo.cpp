#include "coop/montecarlo.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <stdexcept>
#include <string>
#include <thread>

namespace coop {

namespace {

constexpr double kZ95 = 1.959963984540054;

} // namespace

void OutageEstimate::validate() const
{
  if (trials < 1 || outages < 0 || outages > trials)
    throw std::invalid_argument("OutageEstimate: inconsistent counts");
  if (!(ci_low <= p_hat && p_hat <= ci_high))
    throw std::invalid_argument("OutageEstimate: interval does not contain the estimate");
}

void SweepResult::validate() const
{
  for (std::size_t k = 1; k < points.size(); ++k)
    if (!(points[k].snr_db > points[k - 1].snr_db))
      throw std::invalid_argument("SweepResult: SNR grid must be strictly increasing");
}

std::pair<double, double> outage_confidence_interval(std::int64_t outages, std::int64_t trials)
{
  if (trials < 1 || outages < 0 || outages > trials)
    throw std::invalid_argument("outage_confidence_interval: inconsistent counts");
  const double n = static_cast<double>(trials);
  const double p = static_cast<double>(outages) / n;
  if (outages < kWilsonBelowOutages) {
    const double z2 = kZ95 * kZ95;
    const double centre = (p + z2 / (2.0 * n)) / (1.0 + z2 / n);
    const double half = kZ95 * std::sqrt(p * (1.0 - p) / n + z2 / (4.0 * n * n)) / (1.0 + z2 / n);
    return {std::clamp(centre - half, 0.0, p), std::clamp(centre + half, p, 1.0)};
  }
  const double half = kZ95 * std::sqrt(p * (1.0 - p) / n);
  return {std::max(0.0, p - half), std::min(1.0, p + half)};
}

int default_worker_count()
{
  if (const char* env = std::getenv("COOPSIM_WORKERS")) {
    try {
      const int n = std::stoi(env);
      if (n > 0)
        return n;
    } catch (const std::exception&) {
    }
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

OutageEstimate estimate_outage(const ProtocolConfig& config, const LinkSnrProfile& profile,
                               std::int64_t trials, std::uint64_t seed, int workers)
{
  if (trials < 1)
    throw std::invalid_argument("estimate_outage: trials must be >= 1");
  const OutageEvaluator evaluate(config, profile);
  const RealizationSampler sample(evaluate.topology(), profile);
  if (workers <= 0)
    workers = default_worker_count();
  workers = static_cast<int>(std::min<std::int64_t>(workers, trials));

  auto count = [&](std::int64_t begin, std::int64_t end) {
    std::int64_t hits = 0;
    for (std::int64_t k = begin; k < end; ++k) {
      CounterRng stream(seed, static_cast<std::uint64_t>(k));
      hits += evaluate(sample(stream)) ? 1 : 0;
    }
    return hits;
  };

  std::int64_t outages = 0;
  if (workers == 1) {
    outages = count(0, trials);
  } else {
    std::vector<std::int64_t> partial(static_cast<std::size_t>(workers), 0);
    std::vector<std::thread> pool;
    const std::int64_t chunk = (trials + workers - 1) / workers;
    for (int w = 0; w < workers; ++w) {
      const std::int64_t begin = std::min(trials, w * chunk);
      const std::int64_t end = std::min(trials, begin + chunk);
      pool.emplace_back([&, w, begin, end] { partial[static_cast<std::size_t>(w)] = count(begin, end); });
    }
    for (auto& t : pool)
      t.join();
    for (auto p : partial)
      outages += p;
  }

  OutageEstimate out;
  out.trials = trials;
  out.outages = outages;
  out.p_hat = static_cast<double>(outages) / static_cast<double>(trials);
  std::tie(out.ci_low, out.ci_high) = outage_confidence_interval(outages, trials);
  out.seed = seed;
  out.snr_db = profile.base_snr_db();
  out.rate_bpcu = config.rate_bpcu;
  out.low_confidence = outages < kLowConfidenceOutages;
  return out;
}

SweepResult sweep(const ProtocolConfig& config, const LinkSnrProfile& profile_base,
                  std::span<const double> snr_grid_db, std::int64_t trials, std::uint64_t seed,
                  int workers)
{
  if (snr_grid_db.empty())
    throw std::invalid_argument("sweep: empty SNR grid");
  for (std::size_t k = 1; k < snr_grid_db.size(); ++k)
    if (!(snr_grid_db[k] > snr_grid_db[k - 1]))
      throw std::invalid_argument("sweep: SNR grid must be strictly increasing");
  SweepResult out;
  out.protocol = config.protocol;
  for (std::size_t k = 0; k < snr_grid_db.size(); ++k)
    out.points.push_back(estimate_outage(config, profile_base.with_base_snr_db(snr_grid_db[k]), trials,
                                         seed + k, workers));
  return out;
}

ExponentFit estimate_exponent(const SweepResult& result, std::int64_t min_outages)
{
  ExponentFit fit;
  std::vector<double> y;
  for (const auto& p : result.points) {
    if (p.outages < min_outages || p.outages == 0)
      continue;
    fit.log10_rho.push_back(p.snr_db / 10.0);
    y.push_back(-std::log10(p.p_hat));
  }
  const auto n = fit.log10_rho.size();
  if (n < 2)
    throw std::invalid_argument("estimate_exponent: need at least two points with enough outages");
  double mx = 0.0;
  double my = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    mx += fit.log10_rho[k];
    my += y[k];
  }
  mx /= static_cast<double>(n);
  my /= static_cast<double>(n);
  double sxy = 0.0;
  double sxx = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    sxy += (fit.log10_rho[k] - mx) * (y[k] - my);
    sxx += (fit.log10_rho[k] - mx) * (fit.log10_rho[k] - mx);
  }
  if (sxx <= 0.0)
    throw std::invalid_argument("estimate_exponent: SNR points must differ");
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  for (std::size_t k = 0; k < n; ++k)
    fit.residuals.push_back(y[k] - (fit.intercept + fit.slope * fit.log10_rho[k]));
  return fit;
}

} // namespace coop
