#pragma once

#include <Eigen/Core>

#include <complex>
#include <optional>
#include <string_view>
#include <vector>

#include "coop/fading.hpp"
#include "coop/linalg.hpp"

namespace coop {

enum class Protocol { Direct, GenieMiso, LtwAf, LtwDf, Naf, NafMulti, Ddf, DdfMulti, CbDdf, CmaNaf };

std::string_view to_string(Protocol protocol);
// Accepts the snake_case names produced by to_string; throws std::invalid_argument otherwise.
Protocol parse_protocol(std::string_view name);

// PowerLimit meets the relay energy bound with equality; FixedScale multiplies that gain by a
// constant in (0, 1].
enum class RelayGainPolicy { PowerLimit, FixedScale };

struct ProtocolConfig {
  Protocol protocol = Protocol::Direct;
  // Relay protocols: source plus relays. Broadcast: destinations. MultipleAccess: sources.
  int n_nodes = 1;
  // Nodes sharing a slot split the per-slot energy evenly.
  bool fair_power_split = false;
  RelayGainPolicy relay_gain_policy = RelayGainPolicy::PowerLimit;
  double relay_gain_scale = 1.0;
  // DDF relays accumulate information from the source only.
  bool ddf_relay_mi_source_only = false;
  // Finite codeword length for the DDF listening rule; continuous fraction when empty.
  std::optional<int> ddf_codeword_length;
  int cma_frames_per_superframe = 2;
  // Fraction of the CMA-NAF transmit energy given to the own symbol before calibration.
  double cma_broadcast_share = 0.5;
  double rate_bpcu = 1.0;

  void validate() const;
  Topology topology() const;
};

/*! \brief DDF decoding timeline over one codeword.
 *
 * phase_fractions[j] is the fraction of the codeword during which exactly j + 1 nodes
 * transmit. decode_order lists relay node indices in the order they start transmitting; relays
 * that never decode follow in ascending order.
 */
struct DecodeSchedule {
  std::vector<double> phase_fractions;
  std::vector<int> decode_order;
  int relays_decoded = 0;

  std::vector<double> cumulative() const;
  void validate() const;
};

double mi_direct(std::complex<double> g1, double rho);
double mi_genie_miso(const Eigen::Ref<const Eigen::VectorXcd>& g, double rho);

// sqrt(E_tx / (|h|^2 E + sigma_w2)); E_tx defaults to E. Zero when both h and sigma_w2 vanish.
double naf_relay_gain(std::complex<double> h, double energy, double sigma_w2);
double naf_relay_gain(std::complex<double> h, double energy, double sigma_w2, double transmit_energy);

// Gain used by relay `relay` of a relay realization under the configured policy.
double relay_gain(const ProtocolConfig& config, const ChannelRealization& realization, int relay,
                  double rho);

// One NAF cooperation frame (two slots), bits per channel use.
double mi_naf_frame(const ChannelRealization& realization, double b, const ProtocolConfig& config,
                    double rho);
// One LTW-AF frame: the source is silent while the relay repeats.
double mi_ltw_af_frame(const ChannelRealization& realization, double b, const ProtocolConfig& config,
                       double rho);

/*! \brief Block AF model with l' listening and l - l' cooperating symbols.
 *
 * Slot 1 carries A1 x1 from the source; the relay forwards B times its noisy observation while
 * the source sends A2 x2. a1 and a2 are the diagonals of A1 and A2. Throws if the shapes are
 * inconsistent or B breaks the relay energy constraint.
 */
double af_general_mi(const Eigen::Ref<const Eigen::VectorXcd>& a1,
                     const Eigen::Ref<const Eigen::VectorXcd>& a2,
                     const Eigen::Ref<const Eigen::MatrixXcd>& b,
                     const ChannelRealization& realization, double rho, int l);

// Relays take turns, one frame each.
double mi_naf_multi(const ChannelRealization& realization, const ProtocolConfig& config, double rho);

// c is the inter-node SNR gain; pass infinity for a noiseless link.
double ddf_listen_fraction(std::complex<double> h, double c, double rho, double rate,
                           std::optional<int> codeword_length = std::nullopt);

bool outage_ddf(const ChannelRealization& realization, const ProtocolConfig& config, double rho);
DecodeSchedule ddf_decode_schedule(const ChannelRealization& realization, const ProtocolConfig& config,
                                   double rho);
bool outage_ddf_multi(const ChannelRealization& realization, const ProtocolConfig& config, double rho);
bool outage_ddf_multi(const ChannelRealization& realization, const DecodeSchedule& schedule,
                      const ProtocolConfig& config, double rho);

// The relay channel seen by destination `dest` of a broadcast realization.
ChannelRealization cb_relabel(const ChannelRealization& broadcast, int dest);
bool outage_cb_ddf(const ChannelRealization& realization, const ProtocolConfig& config, double rho);

// helpers[j - 1] is the 1-based node that helps source j in super-frame `superframe` (1-based).
std::vector<int> cma_schedule(int n, int superframe);

struct CmaGains {
  std::vector<double> broadcast;  // a_j
  std::vector<double> repetition; // b_j
};

// Steady-state transmit power of every node under the calibration recursion.
std::vector<double> cma_power_fixed_point(const CmaGains& gains, const ProtocolConfig& config,
                                          const LinkSnrProfile& profile);
CmaGains cma_calibrate_gains(const ProtocolConfig& config, const LinkSnrProfile& profile);
LinearChannelModel<double> cma_build_model(const ChannelRealization& realization,
                                           const ProtocolConfig& config, const CmaGains& gains);
bool outage_cma(const LinearChannelModel<double>& model, const ProtocolConfig& config, double rho);

/*! \brief Outage indicator for one protocol at one SNR profile.
 *
 * Holds everything that does not depend on the realization (rho, relay gains policy, CMA
 * calibration), so the per-trial call is a pure function of the realization.
 */
class OutageEvaluator {
public:
  OutageEvaluator(const ProtocolConfig& config, const LinkSnrProfile& profile);

  bool operator()(const ChannelRealization& realization) const;

  const ProtocolConfig& config() const noexcept { return config_; }
  const Topology& topology() const noexcept { return topology_; }
  double rho() const noexcept { return rho_; }

private:
  ProtocolConfig config_;
  Topology topology_;
  double rho_;
  CmaGains cma_gains_;
};

} // namespace coop
