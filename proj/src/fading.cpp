#include "coop/fading.hpp"

#include <charconv>
#include <cmath>
#include <stdexcept>

namespace coop {

double snr_linear(double db)
{
  return std::pow(10.0, db / 10.0);
}

double snr_db(double linear)
{
  if (!(linear > 0.0))
    throw std::domain_error("snr_db: linear SNR must be positive");
  return 10.0 * std::log10(linear);
}

double exponential_order(double x, double rho)
{
  if (!(x > 0.0))
    throw std::domain_error("exponential_order: x must be positive");
  if (!(rho > 1.0))
    throw std::domain_error("exponential_order: rho must exceed 1");
  return -std::log(x) / std::log(rho);
}

std::string_view to_string(TopologyRole role)
{
  switch (role) {
  case TopologyRole::PointToPoint: return "point_to_point";
  case TopologyRole::Relay: return "relay";
  case TopologyRole::Broadcast: return "broadcast";
  case TopologyRole::MultipleAccess: return "multiple_access";
  }
  return "unknown";
}

Topology::Topology(TopologyRole role, int n_nodes) : role_(role), n_(n_nodes)
{
  if (n_nodes < 1)
    throw std::invalid_argument("Topology: need at least one node");
  if ((role == TopologyRole::Relay || role == TopologyRole::MultipleAccess) && n_nodes < 2)
    throw std::invalid_argument("Topology: relay and multiple-access roles need N >= 2");
  if (role == TopologyRole::PointToPoint && n_nodes != 1)
    throw std::invalid_argument("Topology: point-to-point has exactly one node");
}

namespace {

int parse_index(std::string_view text)
{
  int value = 0;
  auto [end, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc{} || end != text.data() + text.size() || value < 1)
    throw std::invalid_argument("LinkId: bad node index '" + std::string(text) + "'");
  return value - 1;
}

} // namespace

LinkId LinkId::parse(std::string_view text)
{
  if (text.size() < 2)
    throw std::invalid_argument("LinkId: cannot parse '" + std::string(text) + "'");
  const auto body = text.substr(1);
  if (text[0] == 'g')
    return direct(parse_index(body));
  if (text[0] != 'h')
    throw std::invalid_argument("LinkId: expected 'g' or 'h' prefix in '" + std::string(text) + "'");
  LinkId link;
  if (const auto comma = body.find(','); comma != std::string_view::npos) {
    link = inter_node(parse_index(body.substr(0, comma)), parse_index(body.substr(comma + 1)));
  } else if (body.size() == 2) {
    link = inter_node(parse_index(body.substr(0, 1)), parse_index(body.substr(1)));
  } else {
    throw std::invalid_argument("LinkId: use 'h<to>,<from>' for multi-digit indices");
  }
  if (link.to == link.from)
    throw std::invalid_argument("LinkId: inter-node link cannot be a self loop");
  return link;
}

std::string LinkId::to_string() const
{
  if (kind == LinkKind::Direct)
    return "g" + std::to_string(from + 1);
  return "h" + std::to_string(to + 1) + "," + std::to_string(from + 1);
}

LinkSnrProfile::LinkSnrProfile(double base_snr_db) : base_snr_db_(base_snr_db)
{
  if (!std::isfinite(base_snr_db))
    throw std::invalid_argument("LinkSnrProfile: base SNR must be finite");
}

LinkSnrProfile LinkSnrProfile::with_base_snr_db(double db) const
{
  if (!std::isfinite(db))
    throw std::invalid_argument("LinkSnrProfile: base SNR must be finite");
  LinkSnrProfile copy = *this;
  copy.base_snr_db_ = db;
  return copy;
}

void LinkSnrProfile::set_offset_db(LinkId link, double offset_db)
{
  if (!std::isfinite(offset_db))
    throw std::invalid_argument("LinkSnrProfile: offsets must be finite");
  offsets_[link] = offset_db;
  check_consistent(link);
}

void LinkSnrProfile::set_inter_node_offset_db(double offset_db)
{
  if (!std::isfinite(offset_db))
    throw std::invalid_argument("LinkSnrProfile: offsets must be finite");
  if (noiseless_inter_ && offset_db != 0.0)
    throw std::invalid_argument("LinkSnrProfile: inter-node links cannot be both offset and noiseless");
  inter_offset_db_ = offset_db;
  for (const auto& link : noiseless_)
    check_consistent(link);
}

void LinkSnrProfile::set_noiseless(LinkId link)
{
  if (link.kind != LinkKind::InterNode)
    throw std::invalid_argument("LinkSnrProfile: only inter-node links can be noiseless");
  noiseless_.insert(link);
  check_consistent(link);
}

void LinkSnrProfile::set_noiseless_inter_node(bool enabled)
{
  if (enabled && inter_offset_db_ != 0.0)
    throw std::invalid_argument("LinkSnrProfile: inter-node links cannot be both offset and noiseless");
  noiseless_inter_ = enabled;
  if (enabled) {
    for (const auto& [link, offset] : offsets_)
      if (link.kind == LinkKind::InterNode && offset != 0.0)
        throw std::invalid_argument("LinkSnrProfile: link " + link.to_string()
                                    + " cannot be both offset and noiseless");
  }
}

double LinkSnrProfile::offset_db(LinkId link) const
{
  if (auto it = offsets_.find(link); it != offsets_.end())
    return it->second;
  return link.kind == LinkKind::InterNode ? inter_offset_db_ : 0.0;
}

bool LinkSnrProfile::is_noiseless(LinkId link) const
{
  if (link.kind != LinkKind::InterNode)
    return false;
  return noiseless_inter_ || noiseless_.contains(link);
}

void LinkSnrProfile::check_consistent(LinkId link) const
{
  if (is_noiseless(link) && offset_db(link) != 0.0)
    throw std::invalid_argument("LinkSnrProfile: link " + link.to_string()
                                + " cannot be both offset and noiseless");
}

void ChannelRealization::validate(const Topology& topology) const
{
  const int n = topology.n_inter();
  if (g.size() != topology.n_direct() || h.rows() != n || h.cols() != n
      || h_noiseless.rows() != n || h_noiseless.cols() != n)
    throw std::invalid_argument("ChannelRealization: dimensions do not match topology");
  if (!g.allFinite() || !h.allFinite())
    throw std::invalid_argument("ChannelRealization: gains must be finite");
}

ChannelRealization make_relay_realization(std::complex<double> g1, std::complex<double> g2,
                                          std::complex<double> h, bool noiseless)
{
  ChannelRealization out;
  out.g.resize(2);
  out.g << g1, g2;
  out.h = Eigen::MatrixXcd::Zero(2, 2);
  out.h(1, 0) = h;
  out.h_noiseless = MatrixXb::Constant(2, 2, false);
  out.h_noiseless(1, 0) = noiseless;
  return out;
}

RealizationSampler::RealizationSampler(const Topology& topology, const LinkSnrProfile& profile)
    : topology_(topology)
{
  const int nd = topology.n_direct();
  const int ni = topology.n_inter();
  g_scale_.resize(nd);
  for (int j = 0; j < nd; ++j)
    g_scale_[j] = std::sqrt(profile.gain_scale(LinkId::direct(j)));
  h_scale_ = Eigen::MatrixXd::Zero(ni, ni);
  noiseless_ = MatrixXb::Constant(ni, ni, false);
  for (int j = 0; j < ni; ++j)
    for (int i = 0; i < ni; ++i)
      if (i != j) {
        const auto link = LinkId::inter_node(j, i);
        h_scale_(j, i) = std::sqrt(profile.gain_scale(link));
        noiseless_(j, i) = profile.is_noiseless(link);
      }
}

ChannelRealization RealizationSampler::operator()(CounterRng& stream) const
{
  ChannelRealization out;
  const auto nd = g_scale_.size();
  const auto ni = h_scale_.rows();
  out.g.resize(nd);
  for (Eigen::Index j = 0; j < nd; ++j)
    out.g[j] = g_scale_[j] * stream.complex_normal();
  out.h = Eigen::MatrixXcd::Zero(ni, ni);
  for (Eigen::Index j = 0; j < ni; ++j)
    for (Eigen::Index i = 0; i < ni; ++i)
      if (i != j)
        out.h(j, i) = h_scale_(j, i) * stream.complex_normal();
  out.h_noiseless = noiseless_;
  return out;
}

ChannelRealization sample_realization(const Topology& topology, const LinkSnrProfile& profile,
                                      CounterRng& stream)
{
  return RealizationSampler(topology, profile)(stream);
}

} // namespace coop
