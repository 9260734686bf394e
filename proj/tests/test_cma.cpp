#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <set>

#include <Eigen/LU>

#include "coop/protocols.hpp"

using namespace coop;
using Eigen::MatrixXcd;

namespace {

ProtocolConfig cma_config(int n, int frames, double rate = 1.0, double share = 0.5)
{
  ProtocolConfig c;
  c.protocol = Protocol::CmaNaf;
  c.n_nodes = n;
  c.cma_frames_per_superframe = frames;
  c.cma_broadcast_share = share;
  c.rate_bpcu = rate;
  return c;
}

ChannelRealization draw(int n, std::uint64_t seed, const LinkSnrProfile& profile = LinkSnrProfile())
{
  CounterRng rng(seed, 4);
  return sample_realization(Topology(TopologyRole::MultipleAccess, n), profile, rng);
}

// Independent subset MI: log2 det(N + E H H^H) - log2 det(N) with LU determinants.
double lu_subset_mi(const LinearChannelModel<double>& model, const std::vector<int>& subset, double energy)
{
  const MatrixXcd noise = model.noise_covariance();
  MatrixXcd h(model.n_obs(), 0);
  for (Eigen::Index k = 0; k < model.n_signals(); ++k)
    if (std::find(subset.begin(), subset.end(), model.tag(k).source) != subset.end()) {
      h.conservativeResize(Eigen::NoChange, h.cols() + 1);
      h.col(h.cols() - 1) = model.signal_column(k);
    }
  const auto num = (noise + energy * h * h.adjoint()).eval().partialPivLu().determinant();
  const auto den = noise.partialPivLu().determinant();
  return std::log2(std::abs(num / den));
}

} // namespace

TEST_CASE("helper schedule examples")
{
  CHECK(cma_schedule(2, 1) == std::vector<int>{2, 1});
  CHECK(cma_schedule(2, 2) == std::vector<int>{2, 1});
  CHECK(cma_schedule(3, 1) == std::vector<int>{3, 1, 2});
  CHECK(cma_schedule(3, 2) == std::vector<int>{2, 3, 1});
  CHECK(cma_schedule(3, 3) == cma_schedule(3, 1));
  CHECK_THROWS_AS(cma_schedule(1, 1), std::invalid_argument);
  CHECK_THROWS_AS(cma_schedule(3, 0), std::invalid_argument);
}

TEST_CASE("every cycle of super-frames pairs each source with every other node once")
{
  for (int n = 2; n <= 7; ++n) {
    std::vector<std::set<int>> seen(static_cast<std::size_t>(n));
    for (int s = 1; s <= n - 1; ++s) {
      const auto helpers = cma_schedule(n, s);
      std::set<int> distinct(helpers.begin(), helpers.end());
      CHECK(static_cast<int>(distinct.size()) == n);
      for (int j = 1; j <= n; ++j) {
        CHECK(helpers[j - 1] != j);
        CHECK(helpers[j - 1] >= 1);
        CHECK(helpers[j - 1] <= n);
        seen[j - 1].insert(helpers[j - 1]);
      }
    }
    for (int j = 0; j < n; ++j)
      CHECK(static_cast<int>(seen[j].size()) == n - 1);
  }
}

TEST_CASE("calibration without repetition")
{
  const auto g = cma_calibrate_gains(cma_config(3, 2, 1.0, 1.0), LinkSnrProfile(20.0));
  for (int j = 0; j < 3; ++j) {
    CHECK(g.broadcast[j] == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(g.repetition[j] == 0.0);
  }
}

TEST_CASE("calibrated gains hold every node at the energy budget")
{
  for (double db : {0.0, 10.0, 30.0})
    for (double share : {0.2, 0.5, 0.8})
      for (int n : {2, 3, 4}) {
        LinkSnrProfile profile(db);
        profile.set_offset_db(LinkId::inter_node(1, 0), 6.0);
        profile.set_offset_db(LinkId::inter_node(0, 1), -3.0);
        const auto c = cma_config(n, 2, 1.0, share);
        const auto g = cma_calibrate_gains(c, profile);
        const auto power = cma_power_fixed_point(g, c, profile);
        for (int j = 0; j < n; ++j) {
          CHECK(power[j] == doctest::Approx(profile.rho()).epsilon(1e-9));
          CHECK(g.broadcast[j] > 0.0);
          CHECK(g.repetition[j] > 0.0);
          CHECK(g.broadcast[j] * g.broadcast[j] < 1.0);
        }
      }
}

TEST_CASE("fixed point matches a steady-state simulation with fresh gains")
{
  // Every frame draws new channels, so the long-run mean power of each node follows the
  // recursion exactly; the simulation repeats the helped node's latest transmission.
  const int n = 3;
  LinkSnrProfile profile(10.0);
  profile.set_offset_db(LinkId::inter_node(2, 1), 4.0);
  const auto c = cma_config(n, 2);
  const auto gains = cma_calibrate_gains(c, profile);
  const double energy = profile.rho();

  CounterRng rng(2024, 0);
  std::vector<std::complex<double>> last(n, 0.0);
  std::vector<double> acc(n, 0.0);
  const int frames = 100000;
  for (int f = 0; f < frames; ++f) {
    const int superframe = f / c.cma_frames_per_superframe + 1;
    const auto helpers = cma_schedule(n, superframe);
    std::vector<int> helped(n);
    for (int j = 0; j < n; ++j)
      helped[helpers[j] - 1] = j;
    for (int j = 0; j < n; ++j) {
      const int m = helped[j];
      const double scale = std::sqrt(profile.gain_scale(LinkId::inter_node(j, m)));
      const auto x = gains.broadcast[j] * std::sqrt(energy) * rng.complex_normal()
                     + gains.repetition[j] * (scale * rng.complex_normal() * last[m] + rng.complex_normal());
      last[j] = x;
      if (f >= 1000)
        acc[j] += std::norm(x);
    }
  }
  // The fixed point uses the mean incoming gain; with equal steady powers that is exact on average.
  double mean = 0.0;
  for (int j = 0; j < n; ++j) {
    CHECK(acc[j] / (frames - 1000) == doctest::Approx(energy).epsilon(0.03));
    mean += acc[j] / (frames - 1000) / n;
  }
  CHECK(mean <= 1.02 * energy);
}

TEST_CASE("quasi-static transmit power stays within the budget on average")
{
  for (int n : {2, 3}) {
    const auto c = cma_config(n, 2);
    const LinkSnrProfile profile(20.0);
    const auto gains = cma_calibrate_gains(c, profile);
    const double energy = profile.rho();
    double total = 0.0;
    int count = 0;
    for (std::uint64_t seed = 0; seed < 5000; ++seed) {
      const auto r = draw(n, seed);
      std::vector<double> power(n, 0.0);
      std::vector<int> last_frame(n, -1);
      for (int s = 0; s < n - 1; ++s) {
        const auto helpers = cma_schedule(n, s + 1);
        std::vector<int> helped(n);
        for (int j = 0; j < n; ++j)
          helped[helpers[j] - 1] = j;
        for (int k = 0; k < c.cma_frames_per_superframe; ++k) {
          const int frame = s * c.cma_frames_per_superframe + k;
          for (int j = 0; j < n; ++j) {
            const int m = helped[j];
            double p = gains.broadcast[j] * gains.broadcast[j] * energy;
            if (last_frame[m] >= s * c.cma_frames_per_superframe)
              p += gains.repetition[j] * gains.repetition[j] * (std::norm(r.h(j, m)) * power[m] + 1.0);
            power[j] = p;
            last_frame[j] = frame;
            total += p;
            ++count;
          }
        }
      }
    }
    CHECK(total / count <= 1.02 * energy);
  }
}

TEST_CASE("two-node single-frame model matches hand propagation")
{
  const auto c = cma_config(2, 1);
  CmaGains gains{{0.8, 0.7}, {0.3, 0.4}};
  const auto r = draw(2, 1);
  const auto model = cma_build_model(r, c, gains);
  REQUIRE(model.n_obs() == 2);
  REQUIRE(model.n_signals() == 2);
  CHECK(model.tag(0).source == 0);
  CHECK(model.tag(1).source == 1);
  CHECK(std::abs(model.signal_column(0)[0] - r.g[0] * 0.8) < 1e-15);
  CHECK(std::abs(model.signal_column(0)[1] - r.g[1] * 0.4 * r.h(1, 0) * 0.8) < 1e-15);
  CHECK(std::abs(model.signal_column(1)[0]) == 0.0);
  CHECK(std::abs(model.signal_column(1)[1] - r.g[1] * 0.7) < 1e-15);
  // One relay noise from node 1 plus two destination noises.
  REQUIRE(model.n_noises() == 3);
  CHECK(model.noise_kind(0) == NoiseKind::Relay);
  CHECK(std::abs(model.noise_column(0)[0]) == 0.0);
  CHECK(std::abs(model.noise_column(0)[1] - r.g[1] * 0.4) < 1e-15);
  CHECK_NOTHROW(model.validate());

  auto quiet = r;
  quiet.h_noiseless(1, 0) = true;
  CHECK(cma_build_model(quiet, c, gains).n_noises() == 2);
}

TEST_CASE("model without repetition is block diagonal")
{
  const auto c = cma_config(3, 2);
  CmaGains gains{{1.0, 1.0, 1.0}, {0.0, 0.0, 0.0}};
  const auto r = draw(3, 2);
  const auto model = cma_build_model(r, c, gains);
  CHECK(model.n_noises() == model.n_obs());
  const int frames = 4;
  for (Eigen::Index k = 0; k < model.n_signals(); ++k) {
    const auto& col = model.signal_column(k);
    const int src = model.tag(k).source;
    const int frame = model.tag(k).symbol;
    for (Eigen::Index i = 0; i < col.size(); ++i) {
      if (i == frame * 3 + src)
        CHECK(std::abs(col[i] - r.g[src]) < 1e-15);
      else
        CHECK(col[i] == std::complex<double>(0.0));
    }
  }
  CHECK(model.n_obs() == 3 * frames);
}

TEST_CASE("model is causal and confined to its super-frame")
{
  for (int n : {2, 3, 4}) {
    const auto c = cma_config(n, 3);
    const auto gains = cma_calibrate_gains(c, LinkSnrProfile(15.0));
    const auto r = draw(n, 17);
    const auto model = cma_build_model(r, c, gains);
    CHECK_NOTHROW(model.validate());
    for (Eigen::Index k = 0; k < model.n_signals(); ++k) {
      const int src = model.tag(k).source;
      const int frame = model.tag(k).symbol;
      const int superframe = frame / c.cma_frames_per_superframe;
      const auto& col = model.signal_column(k);
      for (Eigen::Index i = 0; i < col.size(); ++i) {
        const int obs_frame = static_cast<int>(i) / n;
        const int obs_node = static_cast<int>(i) % n;
        const bool earlier = obs_frame < frame || (obs_frame == frame && obs_node < src);
        if (earlier || obs_frame / c.cma_frames_per_superframe != superframe)
          CHECK(col[i] == std::complex<double>(0.0));
      }
    }
    // Each relay noise enters at its own observation and never earlier.
    for (Eigen::Index k = 0; k < model.n_noises(); ++k)
      CHECK(model.noise_column(k).norm() > 0.0);
  }
}

TEST_CASE("without repetition outage is the per-user TDMA test")
{
  const auto c = cma_config(3, 2, 1.0, 1.0);
  CmaGains gains{{1.0, 1.0, 1.0}, {0.0, 0.0, 0.0}};
  const double rho = 4.0;
  int outages = 0;
  for (std::uint64_t seed = 0; seed < 300; ++seed) {
    const auto r = draw(3, seed);
    const auto model = cma_build_model(r, c, gains);
    const int frames = 4;
    bool expected = false;
    for (unsigned mask = 1; mask < 8; ++mask) {
      double mi = 0.0;
      int size = 0;
      for (int j = 0; j < 3; ++j)
        if (mask & (1u << j)) {
          mi += frames * std::log2(1.0 + rho * std::norm(r.g[j]));
          ++size;
        }
      expected = expected || mi < size * frames * c.rate_bpcu;
    }
    CHECK(outage_cma(model, c, rho) == expected);
    outages += expected;
  }
  CHECK(outages > 0);
  CHECK(outages < 300);
}

TEST_CASE("subset MI agrees with an LU determinant oracle")
{
  for (int n : {2, 3}) {
    const auto c = cma_config(n, 2);
    const LinkSnrProfile profile(12.0);
    const auto gains = cma_calibrate_gains(c, profile);
    for (std::uint64_t seed = 0; seed < 40; ++seed) {
      const auto model = cma_build_model(draw(n, seed), c, gains);
      for (unsigned mask = 1; mask < (1u << n); ++mask) {
        std::vector<int> subset;
        for (int j = 0; j < n; ++j)
          if (mask & (1u << j))
            subset.push_back(j);
        const double ours = subset_mi<double>(model, subset, profile.rho());
        CHECK(ours == doctest::Approx(lu_subset_mi(model, subset, profile.rho())).epsilon(1e-9));
      }
    }
  }
}

TEST_CASE("outage at zero rate never happens")
{
  const auto c = cma_config(3, 2, 0.0);
  const auto gains = cma_calibrate_gains(c, LinkSnrProfile(0.0));
  for (std::uint64_t seed = 0; seed < 20; ++seed)
    CHECK_FALSE(outage_cma(cma_build_model(draw(3, seed), c, gains), c, 1.0));
}
