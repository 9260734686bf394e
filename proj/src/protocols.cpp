#include "coop/protocols.hpp"

#include <array>
#include <cmath>
#include <stdexcept>
#include <string>

namespace coop {

namespace {

constexpr std::array kProtocolNames{
    std::pair{Protocol::Direct, std::string_view{"direct"}},
    std::pair{Protocol::GenieMiso, std::string_view{"genie_miso"}},
    std::pair{Protocol::LtwAf, std::string_view{"ltw_af"}},
    std::pair{Protocol::LtwDf, std::string_view{"ltw_df"}},
    std::pair{Protocol::Naf, std::string_view{"naf"}},
    std::pair{Protocol::NafMulti, std::string_view{"naf_multi"}},
    std::pair{Protocol::Ddf, std::string_view{"ddf"}},
    std::pair{Protocol::DdfMulti, std::string_view{"ddf_multi"}},
    std::pair{Protocol::CbDdf, std::string_view{"cb_ddf"}},
    std::pair{Protocol::CmaNaf, std::string_view{"cma_naf"}},
};

double relay_noise(const ChannelRealization& realization, int to, int from)
{
  return realization.noiseless(to, from) ? 0.0 : 1.0;
}

} // namespace

std::string_view to_string(Protocol protocol)
{
  for (const auto& [p, name] : kProtocolNames)
    if (p == protocol)
      return name;
  return "unknown";
}

Protocol parse_protocol(std::string_view name)
{
  for (const auto& [p, n] : kProtocolNames)
    if (n == name)
      return p;
  throw std::invalid_argument("unknown protocol '" + std::string(name) + "'");
}

void ProtocolConfig::validate() const
{
  const int n = n_nodes;
  switch (protocol) {
  case Protocol::Direct:
    if (n < 1)
      throw std::invalid_argument("direct: n_nodes must be >= 1");
    break;
  case Protocol::GenieMiso:
  case Protocol::CbDdf:
    if (n < 1)
      throw std::invalid_argument(std::string(to_string(protocol)) + ": n_nodes must be >= 1");
    break;
  case Protocol::LtwAf:
  case Protocol::LtwDf:
  case Protocol::Naf:
  case Protocol::Ddf:
    if (n != 2)
      throw std::invalid_argument(std::string(to_string(protocol)) + ": single-relay protocol needs n_nodes = 2");
    break;
  case Protocol::NafMulti:
  case Protocol::DdfMulti:
  case Protocol::CmaNaf:
    if (n < 2)
      throw std::invalid_argument(std::string(to_string(protocol)) + ": needs n_nodes >= 2");
    break;
  }
  if (relay_gain_policy == RelayGainPolicy::FixedScale
      && !(relay_gain_scale > 0.0 && relay_gain_scale <= 1.0))
    throw std::invalid_argument("relay gain scale must lie in (0, 1]");
  if (ddf_codeword_length && *ddf_codeword_length < 1)
    throw std::invalid_argument("DDF codeword length must be positive");
  if (cma_frames_per_superframe < 1)
    throw std::invalid_argument("CMA-NAF needs at least one frame per super-frame");
  if (!(cma_broadcast_share >= 0.0 && cma_broadcast_share <= 1.0))
    throw std::invalid_argument("CMA-NAF broadcast share must lie in [0, 1]");
  if (!(rate_bpcu >= 0.0) || !std::isfinite(rate_bpcu))
    throw std::invalid_argument("rate must be finite and >= 0");
}

Topology ProtocolConfig::topology() const
{
  validate();
  switch (protocol) {
  case Protocol::Direct: return Topology::point_to_point();
  case Protocol::GenieMiso:
    return n_nodes == 1 ? Topology::point_to_point() : Topology(TopologyRole::MultipleAccess, n_nodes);
  case Protocol::CbDdf: return {TopologyRole::Broadcast, n_nodes};
  case Protocol::CmaNaf: return {TopologyRole::MultipleAccess, n_nodes};
  default: return {TopologyRole::Relay, n_nodes};
  }
}

std::vector<double> DecodeSchedule::cumulative() const
{
  std::vector<double> out(phase_fractions.size());
  double acc = 0.0;
  for (std::size_t j = 0; j < phase_fractions.size(); ++j)
    out[j] = (acc += phase_fractions[j]);
  return out;
}

void DecodeSchedule::validate() const
{
  double sum = 0.0;
  for (double f : phase_fractions) {
    if (!(f >= 0.0))
      throw std::invalid_argument("DecodeSchedule: negative phase fraction");
    sum += f;
  }
  if (std::abs(sum - 1.0) > 1e-12)
    throw std::invalid_argument("DecodeSchedule: phase fractions must sum to 1");
  if (decode_order.size() + 1 != phase_fractions.size())
    throw std::invalid_argument("DecodeSchedule: one phase per transmitter count expected");
}

double mi_direct(std::complex<double> g1, double rho)
{
  return std::log2(1.0 + std::norm(g1) * rho);
}

double mi_genie_miso(const Eigen::Ref<const Eigen::VectorXcd>& g, double rho)
{
  if (g.size() == 0)
    throw std::invalid_argument("mi_genie_miso: empty gain vector");
  return std::log2(1.0 + rho * g.squaredNorm());
}

double naf_relay_gain(std::complex<double> h, double energy, double sigma_w2)
{
  return naf_relay_gain(h, energy, sigma_w2, energy);
}

double naf_relay_gain(std::complex<double> h, double energy, double sigma_w2, double transmit_energy)
{
  const double denom = std::norm(h) * energy + sigma_w2;
  if (denom <= 0.0)
    return 0.0;
  return std::sqrt(transmit_energy / denom);
}

double relay_gain(const ProtocolConfig& config, const ChannelRealization& realization, int relay,
                  double rho)
{
  // The relay shares its slot with the source only in the nonorthogonal protocols.
  const bool shared = config.protocol != Protocol::LtwAf && config.fair_power_split;
  const double tx = shared ? rho / 2.0 : rho;
  double b = naf_relay_gain(realization.h(relay, 0), rho, relay_noise(realization, relay, 0), tx);
  if (config.relay_gain_policy == RelayGainPolicy::FixedScale)
    b *= config.relay_gain_scale;
  return b;
}

namespace {

// Two-slot frame with the relay at index `relay`; e2 is the source energy in slot 2.
double af_frame(std::complex<double> g1, std::complex<double> g2, std::complex<double> h,
                double sigma_w2, double b, double e1, double e2)
{
  Eigen::Matrix2cd mix;
  mix << g1 * std::sqrt(e1), 0.0, g2 * b * h * std::sqrt(e1), g1 * std::sqrt(e2);
  const Eigen::Matrix2cd signal = mix * mix.adjoint();
  Eigen::Matrix2cd noise = Eigen::Matrix2cd::Identity();
  noise(1, 1) += std::norm(g2 * b) * sigma_w2;
  return 0.5 * logdet_ipm(signal, noise);
}

double naf_frame_for(const ChannelRealization& r, int relay, double b, const ProtocolConfig& config,
                     double rho)
{
  const double e2 = config.fair_power_split ? rho / 2.0 : rho;
  return af_frame(r.g[0], r.g[relay], r.h(relay, 0), relay_noise(r, relay, 0), b, rho, e2);
}

void require_relay(const ChannelRealization& r, int nodes)
{
  if (r.g.size() < nodes || r.h.rows() < nodes || r.h.cols() < nodes)
    throw std::invalid_argument("relay realization has too few nodes");
}

} // namespace

double mi_naf_frame(const ChannelRealization& realization, double b, const ProtocolConfig& config,
                    double rho)
{
  require_relay(realization, 2);
  return naf_frame_for(realization, 1, b, config, rho);
}

double mi_ltw_af_frame(const ChannelRealization& realization, double b, const ProtocolConfig&,
                       double rho)
{
  require_relay(realization, 2);
  const auto& r = realization;
  return af_frame(r.g[0], r.g[1], r.h(1, 0), relay_noise(r, 1, 0), b, rho, 0.0);
}

double af_general_mi(const Eigen::Ref<const Eigen::VectorXcd>& a1,
                     const Eigen::Ref<const Eigen::VectorXcd>& a2,
                     const Eigen::Ref<const Eigen::MatrixXcd>& b,
                     const ChannelRealization& realization, double rho, int l)
{
  require_relay(realization, 2);
  const Eigen::Index l1 = a1.size();
  const Eigen::Index l2 = a2.size();
  if (l < 1 || l1 + l2 != l || b.rows() != l2 || b.cols() != l1)
    throw std::invalid_argument("af_general_mi: inconsistent block dimensions");

  const auto g1 = realization.g[0];
  const auto g2 = realization.g[1];
  const auto h = realization.h(1, 0);
  const double sigma_w2 = relay_noise(realization, 1, 0);
  const double energy = rho;

  for (Eigen::Index j = 0; j < l2; ++j) {
    double load = 0.0;
    for (Eigen::Index i = 0; i < l1; ++i)
      load += std::norm(h) * energy * std::norm(b(j, i)) * std::norm(a1[i])
              + sigma_w2 * std::norm(b(j, i));
    if (load > energy * (1.0 + 1e-9))
      throw std::invalid_argument("af_general_mi: relay matrix violates the energy constraint");
  }

  // Observations: first l1 from the listening phase, then l2 from the cooperation phase.
  Eigen::MatrixXcd mix = Eigen::MatrixXcd::Zero(l, l);
  mix.topLeftCorner(l1, l1) = g1 * a1.asDiagonal().toDenseMatrix();
  mix.bottomLeftCorner(l2, l1) = g2 * h * b * a1.asDiagonal().toDenseMatrix();
  mix.bottomRightCorner(l2, l2) = g1 * a2.asDiagonal().toDenseMatrix();

  LinearChannelModel<double> model(l);
  for (Eigen::Index k = 0; k < l; ++k)
    model.add_signal(0, static_cast<int>(k), mix.col(k));
  if (sigma_w2 > 0.0) {
    for (Eigen::Index i = 0; i < l1; ++i) {
      Eigen::VectorXcd w = Eigen::VectorXcd::Zero(l);
      w.tail(l2) = g2 * b.col(i);
      model.add_noise(w, sigma_w2);
    }
  }
  model.add_destination_noise(1.0);
  const std::array<int, 1> source{0};
  return subset_mi<double>(model, source, energy) / static_cast<double>(l);
}

double mi_naf_multi(const ChannelRealization& realization, const ProtocolConfig& config, double rho)
{
  const auto n = static_cast<int>(realization.g.size());
  if (n < 2)
    throw std::invalid_argument("mi_naf_multi: need at least one relay");
  require_relay(realization, n);
  double total = 0.0;
  for (int relay = 1; relay < n; ++relay)
    total += naf_frame_for(realization, relay, relay_gain(config, realization, relay, rho), config, rho);
  return total / static_cast<double>(n - 1);
}

OutageEvaluator::OutageEvaluator(const ProtocolConfig& config, const LinkSnrProfile& profile)
    : config_(config), topology_(config.topology()), rho_(profile.rho())
{
  if (config.protocol == Protocol::LtwDf)
    throw std::invalid_argument("ltw_df has a closed-form tradeoff curve only; no outage evaluator");
  if (config.protocol == Protocol::CmaNaf)
    cma_gains_ = cma_calibrate_gains(config, profile);
}

bool OutageEvaluator::operator()(const ChannelRealization& r) const
{
  const double rate = config_.rate_bpcu;
  switch (config_.protocol) {
  case Protocol::Direct: return mi_direct(r.g[0], rho_) < rate;
  case Protocol::GenieMiso: return mi_genie_miso(r.g, rho_) < rate;
  case Protocol::LtwAf: return mi_ltw_af_frame(r, relay_gain(config_, r, 1, rho_), config_, rho_) < rate;
  case Protocol::Naf: return mi_naf_frame(r, relay_gain(config_, r, 1, rho_), config_, rho_) < rate;
  case Protocol::NafMulti: return mi_naf_multi(r, config_, rho_) < rate;
  case Protocol::Ddf: return outage_ddf(r, config_, rho_);
  case Protocol::DdfMulti: return outage_ddf_multi(r, config_, rho_);
  case Protocol::CbDdf: return outage_cb_ddf(r, config_, rho_);
  case Protocol::CmaNaf: return outage_cma(cma_build_model(r, config_, cma_gains_), config_, rho_);
  case Protocol::LtwDf: break;
  }
  throw std::logic_error("OutageEvaluator: unsupported protocol");
}

} // namespace coop
