#include "coop/experiment.hpp"

#include <CLI11.hpp>

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <set>
#include <sstream>

#include "coop/dmt.hpp"

namespace coop {

using nlohmann::json;

namespace {

const std::set<std::string> kKnownKeys{
    "command", "protocols", "n", "rate_bpcu", "fair_power_split", "relay_gain_policy",
    "relay_gain_scale", "ddf_relay_mi_source_only", "ddf_codeword_length", "cma_frames_per_superframe",
    "cma_broadcast_share", "inter_node_offset_db", "noiseless_inter_node", "link_offsets_db",
    "noiseless_links", "output_path", "output_format", "seed", "trials", "snr_grid_db", "r_grid",
    "resolution", "tolerance", "min_outages"};

std::vector<double> default_grid(double start, double stop, double step)
{
  std::vector<double> out;
  for (long k = 0;; ++k) {
    const double x = std::round((start + static_cast<double>(k) * step) * 1e12) / 1e12;
    if (x > stop + 1e-12)
      break;
    out.push_back(x);
  }
  return out;
}

std::vector<double> parse_grid(const json& node, const char* key)
{
  if (node.is_array())
    return node.get<std::vector<double>>();
  if (node.is_object()) {
    for (const auto& [k, v] : node.items())
      if (k != "start" && k != "stop" && k != "step")
        throw ConfigError(std::string(key) + ": unknown grid key '" + k + "'");
    const double start = node.at("start").get<double>();
    const double stop = node.at("stop").get<double>();
    const double step = node.at("step").get<double>();
    if (!(step > 0.0) || !(stop >= start))
      throw ConfigError(std::string(key) + ": grid needs step > 0 and stop >= start");
    if ((stop - start) / step > 1e6)
      throw ConfigError(std::string(key) + ": grid has too many points");
    return default_grid(start, stop, step);
  }
  throw ConfigError(std::string(key) + ": expected an array or a {start, stop, step} object");
}

std::string policy_name(RelayGainPolicy p)
{
  return p == RelayGainPolicy::PowerLimit ? "power_limit" : "fixed_scale";
}

std::string format_name(OutputFormat f)
{
  return f == OutputFormat::Csv ? "csv" : "json";
}

OutputFormat parse_format(const std::string& s)
{
  if (s == "csv")
    return OutputFormat::Csv;
  if (s == "json")
    return OutputFormat::Json;
  throw ConfigError("output_format must be 'csv' or 'json'");
}

std::string format_double(double x)
{
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, x);
  if (ec != std::errc{})
    return std::to_string(x);
  return {buf, end};
}

std::string csv_cell(const Cell& c)
{
  if (const auto* s = std::get_if<std::string>(&c))
    return *s;
  if (const auto* i = std::get_if<std::int64_t>(&c))
    return std::to_string(*i);
  return format_double(std::get<double>(c));
}

json json_cell(const Cell& c)
{
  return std::visit([](const auto& v) { return json(v); }, c);
}

// 64-bit FNV-1a.
std::string fnv1a_hex(const std::string& text)
{
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : text) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

bool supports_region(Protocol p)
{
  return p == Protocol::Naf || p == Protocol::Ddf || p == Protocol::DdfMulti || p == Protocol::CmaNaf;
}

} // namespace

std::string to_string(Command command)
{
  switch (command) {
  case Command::Dmt: return "dmt";
  case Command::Outage: return "outage";
  case Command::Exponent: return "exponent";
  case Command::VerifyRegion: return "verify-region";
  }
  return "unknown";
}

Command parse_command(const std::string& name)
{
  for (auto c : {Command::Dmt, Command::Outage, Command::Exponent, Command::VerifyRegion})
    if (to_string(c) == name)
      return c;
  throw ConfigError("unknown command '" + name + "'");
}

ProtocolConfig ExperimentConfig::protocol_config(Protocol protocol) const
{
  ProtocolConfig pc;
  pc.protocol = protocol;
  pc.n_nodes = protocol == Protocol::Direct ? 1 : n;
  pc.fair_power_split = fair_power_split;
  pc.relay_gain_policy = relay_gain_policy;
  pc.relay_gain_scale = relay_gain_scale;
  pc.ddf_relay_mi_source_only = ddf_relay_mi_source_only;
  pc.ddf_codeword_length = ddf_codeword_length;
  pc.cma_frames_per_superframe = cma_frames_per_superframe;
  pc.cma_broadcast_share = cma_broadcast_share;
  pc.rate_bpcu = rate_bpcu;
  return pc;
}

LinkSnrProfile ExperimentConfig::profile(double base_snr_db) const
{
  LinkSnrProfile p(base_snr_db);
  p.set_inter_node_offset_db(inter_node_offset_db);
  p.set_noiseless_inter_node(noiseless_inter_node);
  for (const auto& [name, offset] : link_offsets_db)
    p.set_offset_db(LinkId::parse(name), offset);
  for (const auto& name : noiseless_links)
    p.set_noiseless(LinkId::parse(name));
  return p;
}

void ExperimentConfig::validate() const
{
  if (protocols.empty())
    throw ConfigError("protocols: at least one protocol is required");
  if (n < 1)
    throw ConfigError("n: must be >= 1");
  try {
    (void)profile();
    auto check_link = [&](const std::string& name) {
      const auto link = LinkId::parse(name);
      if (link.from >= n || link.to >= n)
        throw ConfigError("link " + name + " refers to a node beyond n = " + std::to_string(n));
    };
    for (const auto& [name, offset] : link_offsets_db)
      check_link(name);
    for (const auto& name : noiseless_links)
      check_link(name);
    for (auto p : protocols)
      (void)protocol_config(p).topology();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }

  auto check_r_grid = [&] {
    if (r_grid.empty())
      throw ConfigError("r_grid: must not be empty");
    for (double r : r_grid)
      if (!(r >= 0.0 && r <= 1.0))
        throw ConfigError("r_grid: values must lie in [0, 1]");
  };
  switch (command) {
  case Command::Dmt:
    check_r_grid();
    for (auto p : protocols) {
      try {
        (void)dmt_closed_form(p, protocol_config(p).n_nodes, 0.0);
      } catch (const std::exception& e) {
        throw ConfigError(e.what());
      }
    }
    break;
  case Command::Outage:
  case Command::Exponent:
    if (trials < 1)
      throw ConfigError("trials: must be >= 1");
    if (snr_grid_db.empty())
      throw ConfigError("snr_grid_db: must not be empty");
    for (std::size_t k = 0; k < snr_grid_db.size(); ++k)
      if (!std::isfinite(snr_grid_db[k]) || (k > 0 && !(snr_grid_db[k] > snr_grid_db[k - 1])))
        throw ConfigError("snr_grid_db: must be finite and strictly increasing");
    for (auto p : protocols)
      if (p == Protocol::LtwDf)
        throw ConfigError("ltw_df has no outage evaluator");
    if (command == Command::Exponent && min_outages < 1)
      throw ConfigError("min_outages: must be >= 1");
    break;
  case Command::VerifyRegion:
    check_r_grid();
    if (!(resolution > 0.0 && resolution <= 0.1))
      throw ConfigError("resolution: must lie in (0, 0.1]");
    if (!(tolerance >= 0.0))
      throw ConfigError("tolerance: must be >= 0");
    for (auto p : protocols) {
      if (!supports_region(p))
        throw ConfigError("verify-region supports naf, ddf, ddf_multi and cma_naf only");
      if (n < 2 || n > 4)
        throw ConfigError("verify-region: n must lie in [2, 4]");
    }
    break;
  }
}

json ExperimentConfig::to_json() const
{
  json j;
  j["command"] = to_string(command);
  j["protocols"] = json::array();
  for (auto p : protocols)
    j["protocols"].push_back(std::string(coop::to_string(p)));
  j["n"] = n;
  j["rate_bpcu"] = rate_bpcu;
  j["fair_power_split"] = fair_power_split;
  j["relay_gain_policy"] = policy_name(relay_gain_policy);
  j["relay_gain_scale"] = relay_gain_scale;
  j["ddf_relay_mi_source_only"] = ddf_relay_mi_source_only;
  j["ddf_codeword_length"] = ddf_codeword_length ? json(*ddf_codeword_length) : json(nullptr);
  j["cma_frames_per_superframe"] = cma_frames_per_superframe;
  j["cma_broadcast_share"] = cma_broadcast_share;
  j["inter_node_offset_db"] = inter_node_offset_db;
  j["noiseless_inter_node"] = noiseless_inter_node;
  j["link_offsets_db"] = link_offsets_db;
  j["noiseless_links"] = noiseless_links;
  j["output_format"] = format_name(output_format);
  j["seed"] = seed;
  j["trials"] = trials;
  j["snr_grid_db"] = snr_grid_db;
  j["r_grid"] = r_grid;
  j["resolution"] = resolution;
  j["tolerance"] = tolerance;
  j["min_outages"] = min_outages;
  return j;
}

std::string ExperimentConfig::hash() const
{
  return fnv1a_hex(to_json().dump());
}

ExperimentConfig parse_experiment_config(const json& doc, Command command)
{
  if (!doc.is_object())
    throw ConfigError("config: top level must be a JSON object");
  for (const auto& [key, value] : doc.items())
    if (!kKnownKeys.contains(key))
      throw ConfigError("config: unknown key '" + key + "'");

  ExperimentConfig cfg;
  cfg.command = command;
  cfg.snr_grid_db = default_grid(0.0, 40.0, 5.0);
  cfg.r_grid = default_grid(0.0, 1.0, 0.05);
  try {
    if (doc.contains("command") && parse_command(doc["command"].get<std::string>()) != command)
      throw ConfigError("config: 'command' does not match the subcommand");
    if (doc.contains("protocols")) {
      for (const auto& p : doc["protocols"])
        cfg.protocols.push_back(parse_protocol(p.get<std::string>()));
    }
    auto get = [&](const char* key, auto& field) {
      if (doc.contains(key))
        field = doc[key].get<std::remove_reference_t<decltype(field)>>();
    };
    get("n", cfg.n);
    get("rate_bpcu", cfg.rate_bpcu);
    get("fair_power_split", cfg.fair_power_split);
    if (doc.contains("relay_gain_policy")) {
      const auto name = doc["relay_gain_policy"].get<std::string>();
      if (name == "power_limit")
        cfg.relay_gain_policy = RelayGainPolicy::PowerLimit;
      else if (name == "fixed_scale")
        cfg.relay_gain_policy = RelayGainPolicy::FixedScale;
      else
        throw ConfigError("relay_gain_policy must be 'power_limit' or 'fixed_scale'");
    }
    get("relay_gain_scale", cfg.relay_gain_scale);
    get("ddf_relay_mi_source_only", cfg.ddf_relay_mi_source_only);
    if (doc.contains("ddf_codeword_length") && !doc["ddf_codeword_length"].is_null())
      cfg.ddf_codeword_length = doc["ddf_codeword_length"].get<int>();
    get("cma_frames_per_superframe", cfg.cma_frames_per_superframe);
    get("cma_broadcast_share", cfg.cma_broadcast_share);
    get("inter_node_offset_db", cfg.inter_node_offset_db);
    get("noiseless_inter_node", cfg.noiseless_inter_node);
    if (doc.contains("link_offsets_db"))
      cfg.link_offsets_db = doc["link_offsets_db"].get<std::map<std::string, double>>();
    get("noiseless_links", cfg.noiseless_links);
    get("output_path", cfg.output_path);
    if (doc.contains("output_format"))
      cfg.output_format = parse_format(doc["output_format"].get<std::string>());
    get("seed", cfg.seed);
    get("trials", cfg.trials);
    if (doc.contains("snr_grid_db"))
      cfg.snr_grid_db = parse_grid(doc["snr_grid_db"], "snr_grid_db");
    if (doc.contains("r_grid"))
      cfg.r_grid = parse_grid(doc["r_grid"], "r_grid");
    get("resolution", cfg.resolution);
    get("tolerance", cfg.tolerance);
    get("min_outages", cfg.min_outages);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config: ") + e.what());
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  cfg.validate();
  return cfg;
}

Table run_dmt(const ExperimentConfig& cfg)
{
  Table t{{"protocol", "n", "r", "d"}, {}};
  for (auto p : cfg.protocols) {
    const int n = cfg.protocol_config(p).n_nodes;
    for (const auto& pt : emit_curve(p, n, cfg.r_grid))
      t.rows.push_back({std::string(to_string(p)), std::int64_t{n}, pt.r, pt.d});
  }
  return t;
}

Table run_outage(const ExperimentConfig& cfg)
{
  Table t{{"protocol", "snr_db", "rate_bpcu", "trials", "outages", "p_out", "ci_low", "ci_high", "seed"}, {}};
  for (auto p : cfg.protocols) {
    const auto result = sweep(cfg.protocol_config(p), cfg.profile(), cfg.snr_grid_db, cfg.trials, cfg.seed);
    for (const auto& e : result.points)
      t.rows.push_back({std::string(to_string(p)), e.snr_db, e.rate_bpcu, e.trials, e.outages, e.p_hat,
                        e.ci_low, e.ci_high, static_cast<std::int64_t>(e.seed)});
  }
  return t;
}

Table run_exponent(const ExperimentConfig& cfg)
{
  Table t{{"protocol", "n", "rate_bpcu", "slope", "intercept", "points_used"}, {}};
  for (auto p : cfg.protocols) {
    const auto pc = cfg.protocol_config(p);
    const auto result = sweep(pc, cfg.profile(), cfg.snr_grid_db, cfg.trials, cfg.seed);
    const auto fit = estimate_exponent(result, cfg.min_outages);
    t.rows.push_back({std::string(to_string(p)), std::int64_t{pc.n_nodes}, cfg.rate_bpcu, fit.slope,
                      fit.intercept, static_cast<std::int64_t>(fit.log10_rho.size())});
  }
  return t;
}

Table run_verify_region(const ExperimentConfig& cfg, bool& passed)
{
  Table t{{"protocol", "n", "r", "d_closed", "d_region", "abs_err"}, {}};
  passed = true;
  for (auto p : cfg.protocols) {
    const int n = (p == Protocol::Naf || p == Protocol::Ddf) ? 2 : cfg.n;
    for (double r : cfg.r_grid) {
      double region = 0.0;
      switch (p) {
      case Protocol::Naf: region = region_infimum_naf(r, cfg.resolution); break;
      case Protocol::Ddf: region = region_infimum_ddf(r, cfg.resolution); break;
      case Protocol::DdfMulti: region = region_infimum_ddf_multi(n, r, cfg.resolution); break;
      default: region = region_infimum_cma(n, r, cfg.resolution); break;
      }
      const double closed = dmt_closed_form(p, n, r);
      const double err = std::abs(closed - region);
      passed = passed && err <= cfg.tolerance;
      t.rows.push_back({std::string(to_string(p)), std::int64_t{n}, r, closed, region, err});
    }
  }
  return t;
}

std::string render(const Table& table, const ExperimentConfig& cfg)
{
  std::ostringstream os;
  if (cfg.output_format == OutputFormat::Csv) {
    os << "# coopsim " << kToolVersion << " command=" << to_string(cfg.command) << " seed=" << cfg.seed
       << " config_hash=" << cfg.hash() << '\n';
    for (std::size_t c = 0; c < table.columns.size(); ++c)
      os << (c ? "," : "") << table.columns[c];
    os << '\n';
    for (const auto& row : table.rows) {
      for (std::size_t c = 0; c < row.size(); ++c)
        os << (c ? "," : "") << csv_cell(row[c]);
      os << '\n';
    }
    return os.str();
  }
  json doc;
  doc["metadata"] = {{"tool", "coopsim"}, {"version", kToolVersion}, {"command", to_string(cfg.command)},
                     {"seed", cfg.seed}, {"config_hash", cfg.hash()}, {"config", cfg.to_json()}};
  doc["rows"] = json::array();
  for (const auto& row : table.rows) {
    json obj = json::object();
    for (std::size_t c = 0; c < row.size(); ++c)
      obj[table.columns[c]] = json_cell(row[c]);
    doc["rows"].push_back(obj);
  }
  os << doc.dump(2) << '\n';
  return os.str();
}

int run_experiment(const ExperimentConfig& cfg, std::ostream& out, std::ostream& err)
{
  int code = kExitOk;
  Table table;
  try {
    switch (cfg.command) {
    case Command::Dmt: table = run_dmt(cfg); break;
    case Command::Outage: table = run_outage(cfg); break;
    case Command::Exponent: table = run_exponent(cfg); break;
    case Command::VerifyRegion: {
      bool passed = true;
      table = run_verify_region(cfg, passed);
      if (!passed) {
        err << "verify-region: abs_err above tolerance " << cfg.tolerance << '\n';
        code = kExitVerifyFailed;
      }
      break;
    }
    }
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << '\n';
    return cfg.command == Command::Exponent ? kExitVerifyFailed : kExitConfigError;
  }

  const std::string text = render(table, cfg);
  if (cfg.output_path.empty()) {
    out << text;
    return code;
  }
  std::ofstream file(cfg.output_path, std::ios::binary | std::ios::trunc);
  if (!file) {
    err << "error: cannot open '" << cfg.output_path << "' for writing\n";
    return kExitIoError;
  }
  file << text;
  file.close();
  if (!file) {
    err << "error: failed writing '" << cfg.output_path << "'\n";
    return kExitIoError;
  }
  return code;
}

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err)
{
  CLI::App app{"Cooperative diversity simulator: DMT curves, outage Monte Carlo, region checks"};
  app.require_subcommand(1);

  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<std::int64_t> trials;
  std::optional<std::string> out_path;
  std::optional<std::string> format;
  const std::pair<const char*, const char*> commands[] = {
      {"dmt", "closed-form diversity-multiplexing curves"},
      {"outage", "Monte Carlo outage probability over an SNR grid"},
      {"exponent", "high-SNR slope of the outage curve"},
      {"verify-region", "numerical region infima against the closed-form curves"},
  };
  for (const auto& [name, description] : commands) {
    auto* sub = app.add_subcommand(name, description);
    sub->add_option("--config", config_path, "JSON experiment config");
    sub->add_option("--seed", seed, "master seed (overrides config)");
    sub->add_option("--trials", trials, "Monte Carlo trials per point (overrides config)");
    sub->add_option("--out", out_path, "output file; stdout when omitted (overrides config)");
    sub->add_option("--format", format, "csv or json (overrides config)")->check(CLI::IsMember({"csv", "json"}));
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kExitConfigError;
  }

  try {
    const auto command = parse_command(app.get_subcommands().front()->get_name());
    json doc = json::object();
    if (!config_path.empty()) {
      std::ifstream in(config_path);
      if (!in)
        throw ConfigError("cannot read config file '" + config_path + "'");
      try {
        doc = json::parse(in);
      } catch (const json::parse_error& e) {
        throw ConfigError(std::string("config is not valid JSON: ") + e.what());
      }
      if (!doc.is_object())
        throw ConfigError("config: top level must be a JSON object");
    }
    if (seed)
      doc["seed"] = *seed;
    if (trials)
      doc["trials"] = *trials;
    if (out_path)
      doc["output_path"] = *out_path;
    if (format)
      doc["output_format"] = *format;
    const auto cfg = parse_experiment_config(doc, command);
    return run_experiment(cfg, out, err);
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return kExitConfigError;
  }
}

} // namespace coop
