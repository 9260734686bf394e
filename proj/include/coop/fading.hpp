#pragma once

#include <Eigen/Core>

#include <complex>
#include <map>
#include <set>
#include <string>
#include <string_view>

#include "coop/rng.hpp"

namespace coop {

using MatrixXb = Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic>;

double snr_linear(double db);
double snr_db(double linear);

// -log(x)/log(rho); throws std::domain_error for x <= 0 or rho <= 1.
double exponential_order(double x, double rho);

enum class TopologyRole { PointToPoint, Relay, Broadcast, MultipleAccess };

std::string_view to_string(TopologyRole role);

/*! \brief Node layout of a cooperative channel.
 *
 * Relay: node 0 is the source, nodes 1..N-1 are relays, all heard by one destination.
 * Broadcast: one source, N destinations that may help each other.
 * MultipleAccess: N sources that may help each other, one destination.
 */
class Topology {
public:
  Topology(TopologyRole role, int n_nodes);

  static Topology point_to_point() { return {TopologyRole::PointToPoint, 1}; }

  TopologyRole role() const noexcept { return role_; }
  int n_nodes() const noexcept { return n_; }
  // Size of the g vector.
  int n_direct() const noexcept { return n_; }
  // Dimension of the square h matrix (0 for point-to-point).
  int n_inter() const noexcept { return role_ == TopologyRole::PointToPoint ? 0 : n_; }

  bool operator==(const Topology&) const = default;

private:
  TopologyRole role_;
  int n_;
};

enum class LinkKind { Direct, InterNode };

/*! \brief Identifies one link of a realization (0-based).
 *
 * Direct links address g[from]. Inter-node links address h(to, from), i.e. node `from`
 * transmitting to node `to`. Text form is 1-based: "g2", "h21" or "h2,1".
 */
struct LinkId {
  LinkKind kind = LinkKind::Direct;
  int to = -1;
  int from = 0;

  static LinkId direct(int node) { return {LinkKind::Direct, -1, node}; }
  static LinkId inter_node(int to, int from) { return {LinkKind::InterNode, to, from}; }

  static LinkId parse(std::string_view text);
  std::string to_string() const;

  auto operator<=>(const LinkId&) const = default;
};

/*! \brief Reference SNR plus fixed per-link offsets.
 *
 * Noise at every receiver has unit variance and the per-symbol energy is E = rho, so a link
 * with offset c dB has an effective average gain 10^(c/10). Noiseless links carry a flag
 * instead of an infinite gain.
 */
class LinkSnrProfile {
public:
  explicit LinkSnrProfile(double base_snr_db = 0.0);

  double base_snr_db() const noexcept { return base_snr_db_; }
  double rho() const { return snr_linear(base_snr_db_); }
  LinkSnrProfile with_base_snr_db(double db) const;

  void set_offset_db(LinkId link, double offset_db);
  // Offset applied to every inter-node link without an explicit entry.
  void set_inter_node_offset_db(double offset_db);
  void set_noiseless(LinkId link);
  void set_noiseless_inter_node(bool enabled);

  double offset_db(LinkId link) const;
  double gain_scale(LinkId link) const { return snr_linear(offset_db(link)); }
  bool is_noiseless(LinkId link) const;

  const std::map<LinkId, double>& offsets_db() const noexcept { return offsets_; }
  const std::set<LinkId>& noiseless_links() const noexcept { return noiseless_; }
  double inter_node_offset_db() const noexcept { return inter_offset_db_; }
  bool noiseless_inter_node() const noexcept { return noiseless_inter_; }

private:
  void check_consistent(LinkId link) const;

  double base_snr_db_;
  std::map<LinkId, double> offsets_;
  std::set<LinkId> noiseless_;
  double inter_offset_db_ = 0.0;
  bool noiseless_inter_ = false;
};

/*! \brief One quasi-static draw of all link gains.
 *
 * Gains already include the link SNR offsets. h(j, i) is the gain from node i to node j;
 * the diagonal is unused and zero.
 */
struct ChannelRealization {
  Eigen::VectorXcd g;
  Eigen::MatrixXcd h;
  MatrixXb h_noiseless;

  bool noiseless(int to, int from) const { return h_noiseless(to, from); }
  void validate(const Topology& topology) const;
};

// Source->relay->destination realization with g = (g1, g2) and h(1,0) = h.
ChannelRealization make_relay_realization(std::complex<double> g1, std::complex<double> g2,
                                          std::complex<double> h, bool noiseless = false);

// Topology and profile resolved once, for repeated draws.
class RealizationSampler {
public:
  RealizationSampler(const Topology& topology, const LinkSnrProfile& profile);

  ChannelRealization operator()(CounterRng& stream) const;
  const Topology& topology() const noexcept { return topology_; }

private:
  Topology topology_;
  Eigen::VectorXd g_scale_;
  Eigen::MatrixXd h_scale_;
  MatrixXb noiseless_;
};

// Draw order: g[0..N), then h row-major over off-diagonal entries.
ChannelRealization sample_realization(const Topology& topology, const LinkSnrProfile& profile,
                                      CounterRng& stream);

} // namespace coop
