#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "coop/montecarlo.hpp"

namespace coop {

inline constexpr const char* kToolVersion = "0.1.0";

enum ExitCode : int { kExitOk = 0, kExitVerifyFailed = 1, kExitConfigError = 2, kExitIoError = 3 };

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

enum class Command { Dmt, Outage, Exponent, VerifyRegion };
enum class OutputFormat { Csv, Json };

std::string to_string(Command command);
Command parse_command(const std::string& name);

/*! \brief Everything one CLI run needs, validated before any work starts.
 *
 * Config files are JSON objects whose keys match the field names below; unknown keys are
 * rejected. Grids are either explicit arrays or {"start", "stop", "step"} objects.
 */
struct ExperimentConfig {
  Command command = Command::Dmt;
  std::vector<Protocol> protocols;
  int n = 2;
  double rate_bpcu = 1.0;
  bool fair_power_split = false;
  RelayGainPolicy relay_gain_policy = RelayGainPolicy::PowerLimit;
  double relay_gain_scale = 1.0;
  bool ddf_relay_mi_source_only = false;
  std::optional<int> ddf_codeword_length;
  int cma_frames_per_superframe = 2;
  double cma_broadcast_share = 0.5;
  double inter_node_offset_db = 0.0;
  bool noiseless_inter_node = false;
  std::map<std::string, double> link_offsets_db;
  std::vector<std::string> noiseless_links;
  std::string output_path;
  OutputFormat output_format = OutputFormat::Csv;
  std::uint64_t seed = 1;
  std::int64_t trials = 1000000;
  std::vector<double> snr_grid_db;
  std::vector<double> r_grid;
  double resolution = 1e-3;
  double tolerance = 5e-3;
  std::int64_t min_outages = 50;

  ProtocolConfig protocol_config(Protocol protocol) const;
  LinkSnrProfile profile(double base_snr_db = 0.0) const;
  // Throws ConfigError on the first invalid field.
  void validate() const;
  // Effective configuration, output path excluded.
  nlohmann::json to_json() const;
  std::string hash() const;
};

ExperimentConfig parse_experiment_config(const nlohmann::json& doc, Command command);

using Cell = std::variant<std::string, std::int64_t, double>;

struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<Cell>> rows;
};

Table run_dmt(const ExperimentConfig& cfg);
Table run_outage(const ExperimentConfig& cfg);
Table run_exponent(const ExperimentConfig& cfg);
// Sets `passed` to false when any abs_err exceeds the tolerance.
Table run_verify_region(const ExperimentConfig& cfg, bool& passed);

// Metadata comment line followed by the table in the configured format.
std::string render(const Table& table, const ExperimentConfig& cfg);

// Runs one experiment and writes its output; returns the process exit code.
int run_experiment(const ExperimentConfig& cfg, std::ostream& out, std::ostream& err);
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

} // namespace coop
