#include "coop/protocols.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace coop {

namespace {

struct ReceiveStats {
  double gain = 0.0;  // mean |h|^2 into the node
  double noise = 0.0; // mean relay noise variance into the node
};

std::vector<ReceiveStats> receive_stats(int n, const LinkSnrProfile& profile)
{
  std::vector<ReceiveStats> out(static_cast<std::size_t>(n));
  for (int j = 0; j < n; ++j) {
    for (int m = 0; m < n; ++m) {
      if (m == j)
        continue;
      const auto link = LinkId::inter_node(j, m);
      out[j].gain += profile.gain_scale(link);
      out[j].noise += profile.is_noiseless(link) ? 0.0 : 1.0;
    }
    out[j].gain /= n - 1;
    out[j].noise /= n - 1;
  }
  return out;
}

double mean_of_others(const std::vector<double>& v, std::size_t skip)
{
  double s = 0.0;
  for (std::size_t k = 0; k < v.size(); ++k)
    if (k != skip)
      s += v[k];
  return s / static_cast<double>(v.size() - 1);
}

} // namespace

std::vector<int> cma_schedule(int n, int superframe)
{
  if (n < 2)
    throw std::invalid_argument("cma_schedule: need N >= 2");
  if (superframe < 1)
    throw std::invalid_argument("cma_schedule: super-frame index starts at 1");
  const int shift = (superframe - 1) % (n - 1) + 1;
  std::vector<int> helpers(static_cast<std::size_t>(n));
  for (int j = 1; j <= n; ++j)
    helpers[j - 1] = ((j - 1 - shift) % n + n) % n + 1;
  return helpers;
}

std::vector<double> cma_power_fixed_point(const CmaGains& gains, const ProtocolConfig& config,
                                          const LinkSnrProfile& profile)
{
  const int n = config.n_nodes;
  if (static_cast<int>(gains.broadcast.size()) != n || static_cast<int>(gains.repetition.size()) != n)
    throw std::invalid_argument("cma_power_fixed_point: gain vectors must have N entries");
  const double energy = profile.rho();
  const auto stats = receive_stats(n, profile);
  std::vector<double> power(static_cast<std::size_t>(n), energy);
  for (int iter = 0; iter < 100000; ++iter) {
    std::vector<double> next(power.size());
    double change = 0.0;
    for (int j = 0; j < n; ++j) {
      const double a = gains.broadcast[j];
      const double b = gains.repetition[j];
      next[j] = a * a * energy
                + b * b * (stats[j].gain * mean_of_others(power, static_cast<std::size_t>(j)) + stats[j].noise);
      change = std::max(change, std::abs(next[j] - power[j]) / energy);
    }
    power.swap(next);
    if (!std::isfinite(change))
      break;
    if (change < 1e-15)
      return power;
  }
  throw std::domain_error("cma_power_fixed_point: transmit-power recursion does not converge");
}

CmaGains cma_calibrate_gains(const ProtocolConfig& config, const LinkSnrProfile& profile)
{
  config.validate();
  const int n = config.n_nodes;
  if (n < 2)
    throw std::invalid_argument("cma_calibrate_gains: need N >= 2");
  const double energy = profile.rho();
  const double share = config.cma_broadcast_share;
  const auto stats = receive_stats(n, profile);

  CmaGains gains;
  for (int j = 0; j < n; ++j) {
    gains.broadcast.push_back(std::sqrt(share));
    gains.repetition.push_back(std::sqrt((1.0 - share) * energy / (stats[j].gain * energy + stats[j].noise)));
  }
  for (int iter = 0; iter < 10000; ++iter) {
    const auto power = cma_power_fixed_point(gains, config, profile);
    double residual = 0.0;
    for (int j = 0; j < n; ++j)
      residual = std::max(residual, std::abs(power[j] - energy) / energy);
    if (residual < 1e-12)
      return gains;
    for (int j = 0; j < n; ++j) {
      const double scale = std::sqrt(energy / power[j]);
      gains.broadcast[j] *= scale;
      gains.repetition[j] *= scale;
    }
  }
  throw std::runtime_error("cma_calibrate_gains: no convergence after 10^4 iterations");
}

LinearChannelModel<double> cma_build_model(const ChannelRealization& r, const ProtocolConfig& config,
                                           const CmaGains& gains)
{
  const int n = config.n_nodes;
  const int frames = (n - 1) * config.cma_frames_per_superframe;
  if (r.g.size() != n || r.h.rows() != n)
    throw std::invalid_argument("cma_build_model: realization does not match N");
  if (static_cast<int>(gains.broadcast.size()) != n || static_cast<int>(gains.repetition.size()) != n)
    throw std::invalid_argument("cma_build_model: gain vectors must have N entries");

  const int n_obs = n * frames;
  const int n_sym = n * frames;
  // Each slot adds at most one relay noise term.
  Eigen::MatrixXcd tx_sig = Eigen::MatrixXcd::Zero(n, n_sym);
  Eigen::MatrixXcd tx_noise = Eigen::MatrixXcd::Zero(n, n_obs);
  Eigen::MatrixXcd y_sig = Eigen::MatrixXcd::Zero(n_obs, n_sym);
  Eigen::MatrixXcd y_noise = Eigen::MatrixXcd::Zero(n_obs, n_obs);
  std::vector<int> last_frame(static_cast<std::size_t>(n), -1);
  int n_noise = 0;

  for (int s = 0; s < n - 1; ++s) {
    const auto helpers = cma_schedule(n, s + 1);
    std::vector<int> helped(static_cast<std::size_t>(n));
    for (int j = 0; j < n; ++j)
      helped[helpers[j] - 1] = j;
    const int first_frame = s * config.cma_frames_per_superframe;

    for (int k = 0; k < config.cma_frames_per_superframe; ++k) {
      const int frame = first_frame + k;
      for (int j = 0; j < n; ++j) {
        Eigen::RowVectorXcd sig = Eigen::RowVectorXcd::Zero(n_sym);
        Eigen::RowVectorXcd noise = Eigen::RowVectorXcd::Zero(n_obs);
        sig[j * frames + frame] = gains.broadcast[j];
        const int m = helped[j];
        const double b = gains.repetition[j];
        if (b != 0.0 && last_frame[m] >= first_frame) {
          const auto hb = b * r.h(j, m);
          sig += hb * tx_sig.row(m);
          noise += hb * tx_noise.row(m);
          if (!r.noiseless(j, m))
            noise[n_noise++] = b;
        }
        tx_sig.row(j) = sig;
        tx_noise.row(j) = noise;
        last_frame[j] = frame;
        const int obs = frame * n + j;
        y_sig.row(obs) = r.g[j] * sig;
        y_noise.row(obs) = r.g[j] * noise;
      }
    }
  }

  LinearChannelModel<double> model(n_obs);
  for (int c = 0; c < n_sym; ++c)
    model.add_signal(c / frames, c % frames, y_sig.col(c));
  for (int c = 0; c < n_noise; ++c)
    model.add_noise(y_noise.col(c), 1.0);
  model.add_destination_noise(1.0);
  return model;
}

bool outage_cma(const LinearChannelModel<double>& model, const ProtocolConfig& config, double rho)
{
  const int n = config.n_nodes;
  const double per_user = (n - 1) * config.cma_frames_per_superframe * config.rate_bpcu;
  if (per_user <= 0.0)
    return false;
  const auto noise = model.noise_covariance();
  std::vector<int> subset;
  for (unsigned mask = 1; mask < (1u << n); ++mask) {
    subset.clear();
    for (int j = 0; j < n; ++j)
      if (mask & (1u << j))
        subset.push_back(j);
    if (subset_mi<double>(model, subset, rho, noise) < static_cast<double>(subset.size()) * per_user)
      return true;
  }
  return false;
}

} // namespace coop
