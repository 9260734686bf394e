#pragma once

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "coop/protocols.hpp"

namespace coop {

struct OutageEstimate {
  std::int64_t trials = 0;
  std::int64_t outages = 0;
  double p_hat = 0.0;
  double ci_low = 0.0;
  double ci_high = 0.0;
  std::uint64_t seed = 0;
  double snr_db = 0.0;
  double rate_bpcu = 0.0;
  // Fewer than 20 outages observed.
  bool low_confidence = true;

  void validate() const;
};

struct SweepResult {
  Protocol protocol = Protocol::Direct;
  std::vector<OutageEstimate> points;

  void validate() const;
};

struct ExponentFit {
  double slope = 0.0;
  double intercept = 0.0;
  std::vector<double> log10_rho;
  std::vector<double> residuals;
};

inline constexpr std::int64_t kLowConfidenceOutages = 20;
inline constexpr std::int64_t kWilsonBelowOutages = 30;

// 95% interval: Wilson below 30 outages, normal approximation otherwise.
std::pair<double, double> outage_confidence_interval(std::int64_t outages, std::int64_t trials);

// COOPSIM_WORKERS if set to a positive integer, else the hardware concurrency.
int default_worker_count();

/*! \brief Monte Carlo outage probability.
 *
 * Trial k draws its realization from CounterRng(seed, k), so the estimate does not depend on
 * the worker count. workers <= 0 selects default_worker_count().
 */
OutageEstimate estimate_outage(const ProtocolConfig& config, const LinkSnrProfile& profile,
                               std::int64_t trials, std::uint64_t seed, int workers = 0);

// Grid point k uses seed + k.
SweepResult sweep(const ProtocolConfig& config, const LinkSnrProfile& profile_base,
                  std::span<const double> snr_grid_db, std::int64_t trials, std::uint64_t seed,
                  int workers = 0);

// Least-squares slope of -log10 p_hat against log10 rho over points with >= min_outages.
ExponentFit estimate_exponent(const SweepResult& result, std::int64_t min_outages = 50);

} // namespace coop
