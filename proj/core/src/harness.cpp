#include "hetnet/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <condition_variable>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <limits>
#include <map>
#include <mutex>
#include <sstream>
#include <thread>

#include <nlohmann/json.hpp>

#include "hetnet/errors.hpp"
#include "hetnet/metrics.hpp"
#include "hetnet/rng.hpp"

namespace hetnet {

namespace {

using nlohmann::json;

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::string fmt_double(double v) {
  if (std::isnan(v)) return "nan";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

double parse_double(const std::string& s) {
  if (s == "nan") return kNaN;
  std::size_t used = 0;
  const double v = std::stod(s, &used);
  if (used != s.size()) throw IoError("malformed number '" + s + "'");
  return v;
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream in(line);
  while (std::getline(in, field, ',')) out.push_back(field);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

template <typename T>
void read_field(const json& j, const char* key, T& out) {
  if (!j.contains(key)) return;
  try {
    out = j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config field '") + key + "': " + e.what());
  }
}

void check_keys(const json& j, const char* where, std::initializer_list<const char*> allowed) {
  if (!j.is_object()) throw ConfigError(std::string(where) + " must be an object");
  for (const auto& item : j.items()) {
    if (std::find_if(allowed.begin(), allowed.end(),
                     [&](const char* a) { return item.key() == a; }) == allowed.end()) {
      throw ConfigError(std::string("unknown field '") + item.key() + "' in " + where);
    }
  }
}

AntennaProfile parse_profile(const json& j, int l1, int l2) {
  if (j.is_string()) {
    const auto name = j.get<std::string>();
    if (name == "sufficient") return sufficient_profile(l1, l2);
    if (name == "insufficient") return insufficient_profile(l1, l2);
    throw ConfigError("unknown antenna_profile '" + name + "'");
  }
  if (!j.is_array()) throw ConfigError("antenna_profile must be a name or a list");
  AntennaProfile profile;
  for (const auto& cell : j) {
    check_keys(cell, "antenna_profile entry", {"tx", "rx", "streams"});
    CellAntennas a;
    read_field(cell, "tx", a.tx);
    read_field(cell, "rx", a.rx);
    read_field(cell, "streams", a.streams);
    profile.push_back(a);
  }
  return profile;
}

ScenarioConfig parse_scenario(const json& j) {
  check_keys(j, "scenario",
             {"macro_radius_m", "pico_radius_m", "hotspot_radius_m", "hotspot_distance_m",
              "ring_radius_m", "l1", "l2", "antenna_profile", "pico_power_dbm",
              "macro_power_dbm", "bandwidth_hz", "carrier_hz", "noise_psd_dbm_hz",
              "shadow_std_db", "shadowing_enabled", "ref_distance_m", "min_distance_m",
              "rng_seed"});
  ScenarioConfig s;
  read_field(j, "macro_radius_m", s.macro_radius_m);
  read_field(j, "pico_radius_m", s.pico_radius_m);
  read_field(j, "hotspot_radius_m", s.hotspot_radius_m);
  read_field(j, "hotspot_distance_m", s.hotspot_distance_m);
  read_field(j, "ring_radius_m", s.ring_radius_m);
  read_field(j, "l1", s.l1);
  read_field(j, "l2", s.l2);
  s.antenna_profile = sufficient_profile(s.l1, s.l2);
  if (j.contains("antenna_profile")) s.antenna_profile = parse_profile(j["antenna_profile"], s.l1, s.l2);
  read_field(j, "pico_power_dbm", s.pico_power_dbm);
  read_field(j, "macro_power_dbm", s.macro_power_dbm);
  read_field(j, "bandwidth_hz", s.bandwidth_hz);
  read_field(j, "carrier_hz", s.carrier_hz);
  read_field(j, "noise_psd_dbm_hz", s.noise_psd_dbm_hz);
  read_field(j, "shadow_std_db", s.shadow_std_db);
  read_field(j, "shadowing_enabled", s.shadowing_enabled);
  read_field(j, "ref_distance_m", s.ref_distance_m);
  read_field(j, "min_distance_m", s.min_distance_m);
  read_field(j, "rng_seed", s.rng_seed);
  return s;
}

ChannelModelSpec parse_channel(const json& j) {
  check_keys(j, "channel", {"kind", "corr_coefficient", "csi_error_variance"});
  ChannelModelSpec c;
  if (j.contains("kind")) {
    const auto kind = j["kind"].get<std::string>();
    if (kind == "uncorrelated") {
      c.kind = ChannelKind::kUncorrelated;
    } else if (kind == "explicit_corr") {
      c.kind = ChannelKind::kExplicitCorrelation;
    } else {
      throw ConfigError("unknown channel kind '" + kind + "'");
    }
  }
  read_field(j, "corr_coefficient", c.corr_coefficient);
  read_field(j, "csi_error_variance", c.csi_error_variance);
  return c;
}

AlgorithmSpec parse_algorithm(const json& j) {
  check_keys(j, "algorithm", {"type", "cooperation", "scheme"});
  const std::string type = j.value("type", "");
  if (type == "TSIA") {
    if (j.value("scheme", "partial") != "partial" || j.value("cooperation", "without") != "without") {
      throw ConfigError("TSIA only supports the without-cooperation partial scheme");
    }
    return AlgorithmSpec::tsia();
  }
  if (type != "GIA") throw ConfigError("algorithm type must be \"GIA\" or \"TSIA\"");
  AlgorithmSpec a;
  const std::string coop = j.value("cooperation", "without");
  const std::string scheme = j.value("scheme", "partial");
  if (coop == "with") {
    a.cooperation = Cooperation::kWith;
  } else if (coop == "without") {
    a.cooperation = Cooperation::kWithout;
  } else {
    throw ConfigError("cooperation must be \"with\" or \"without\"");
  }
  if (scheme == "partial") {
    a.scheme = StreamScheme::kPartial;
  } else if (scheme == "full") {
    a.scheme = StreamScheme::kFull;
  } else {
    throw ConfigError("scheme must be \"partial\" or \"full\"");
  }
  return a;
}

json algorithm_json(const AlgorithmSpec& a) {
  if (a.kind == AlgorithmSpec::Kind::kTsia) return {{"type", "TSIA"}};
  return {{"type", "GIA"}, {"cooperation", to_string(a.cooperation)}, {"scheme", to_string(a.scheme)}};
}

/// Canonical JSON of every field that affects the raw records.
json canonical_json(const ExperimentConfig& c) {
  const auto& s = c.scenario;
  json profile = json::array();
  for (const auto& a : s.antenna_profile) {
    profile.push_back({{"tx", a.tx}, {"rx", a.rx}, {"streams", a.streams}});
  }
  json algorithms = json::array();
  for (const auto& a : c.algorithms) algorithms.push_back(algorithm_json(a));
  return {
      {"scenario",
       {{"macro_radius_m", s.macro_radius_m}, {"pico_radius_m", s.pico_radius_m},
        {"hotspot_radius_m", s.hotspot_radius_m}, {"hotspot_distance_m", s.hotspot_distance_m},
        {"ring_radius_m", s.ring_radius_m}, {"l1", s.l1}, {"l2", s.l2},
        {"antenna_profile", profile}, {"macro_power_dbm", s.macro_power_dbm},
        {"bandwidth_hz", s.bandwidth_hz}, {"carrier_hz", s.carrier_hz},
        {"noise_psd_dbm_hz", s.noise_psd_dbm_hz}, {"shadow_std_db", s.shadow_std_db},
        {"shadowing_enabled", s.shadowing_enabled}, {"ref_distance_m", s.ref_distance_m},
        {"min_distance_m", s.min_distance_m}}},
      {"channel",
       {{"kind", to_string(c.channel.kind)}, {"corr_coefficient", c.channel.corr_coefficient},
        {"csi_error_variance", c.channel.csi_error_variance}}},
      {"algorithms", algorithms},
      {"csi", to_string(c.csi)},
      {"sweep", c.sweep},
      {"drops", c.drops},
      {"master_seed", c.master_seed},
      {"gia",
       {{"max_iters", c.gia.max_iters}, {"convergence_tol", c.gia.convergence_tol},
        {"rescale_to_power", c.gia.rescale_to_power}}},
      {"tsia", {{"max_ia_iters", c.tsia.max_ia_iters}, {"leakage_tol", c.tsia.leakage_tol}}},
      {"ber_symbols", c.ber_symbols},
      {"gia_uses_error_statistics", c.gia_uses_error_statistics},
  };
}

std::uint64_t fnv1a(const std::string& text) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : text) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  return h;
}

bool has_tsia(const ExperimentConfig& c) {
  return std::any_of(c.algorithms.begin(), c.algorithms.end(),
                     [](const AlgorithmSpec& a) { return a.kind == AlgorithmSpec::Kind::kTsia; });
}

struct Moments {
  int n = 0;
  double sum = 0.0;
  double sum_sq = 0.0;

  void add(double v) {
    ++n;
    sum += v;
    sum_sq += v * v;
  }
  double mean() const { return n > 0 ? sum / n : kNaN; }
  double ci95() const {
    if (n < 2) return n == 1 ? 0.0 : kNaN;
    const double m = sum / n;
    const double var = std::max(0.0, (sum_sq - n * m * m) / (n - 1));
    return 1.96 * std::sqrt(var / n);
  }
};

RawRecord base_record(const ExperimentConfig& config, const AlgorithmSpec& alg, int drop,
                      double power_dbm) {
  RawRecord r;
  r.drop = drop;
  r.algorithm = alg.tag(config.csi);
  r.cooperation = to_string(alg.cooperation);
  r.scheme = to_string(alg.scheme);
  r.csi = to_string(config.csi);
  r.channel_model = to_string(config.channel.kind);
  r.pico_power_dbm = power_dbm;
  r.snr_eff_db = effective_snr_db(config.scenario, power_dbm);
  r.sum_rate = kNaN;
  r.ber = kNaN;
  r.eta = kNaN;
  return r;
}

}  // namespace

const char* to_string(CsiCondition csi) {
  return csi == CsiCondition::kPerfect ? "perfect" : "imperfect";
}

std::string AlgorithmSpec::tag(CsiCondition csi) const {
  const std::string prefix = csi == CsiCondition::kImperfect ? "N" : "";
  if (kind == Kind::kTsia) return prefix + "TSIA";
  return prefix + "GIA-" + to_string(cooperation) + "-" + to_string(scheme);
}

void ExperimentConfig::validate() const {
  scenario.validate();
  if (algorithms.empty()) throw ConfigError("at least one algorithm is required");
  for (std::size_t a = 0; a < algorithms.size(); ++a) {
    for (std::size_t b = a + 1; b < algorithms.size(); ++b) {
      if (algorithms[a].tag(csi) == algorithms[b].tag(csi)) {
        throw ConfigError("algorithm " + algorithms[a].tag(csi) + " is listed twice");
      }
    }
  }
  if (sweep.empty()) throw ConfigError("sweep must list at least one power");
  for (double p : sweep) {
    if (!std::isfinite(p) || p < 0.0 || p > 40.0) {
      throw ConfigError("sweep powers must lie in [0, 40] dBm");
    }
  }
  for (std::size_t a = 0; a < sweep.size(); ++a) {
    for (std::size_t b = a + 1; b < sweep.size(); ++b) {
      if (sweep[a] == sweep[b]) throw ConfigError("sweep powers must be distinct");
    }
  }
  if (drops < 1) throw ConfigError("drops must be positive");
  if (ber_symbols < 0) throw ConfigError("ber_symbols must be nonnegative");
  if (threads < 0) throw ConfigError("threads must be nonnegative");
  if (gia.max_iters < 1 || !(gia.convergence_tol > 0.0)) {
    throw ConfigError("gia options need max_iters >= 1 and convergence_tol > 0");
  }
  if (tsia.max_ia_iters < 1 || !(tsia.leakage_tol > 0.0)) {
    throw ConfigError("tsia options need max_ia_iters >= 1 and leakage_tol > 0");
  }
  if (channel.kind == ChannelKind::kExplicitCorrelation &&
      !(channel.corr_coefficient >= 0.0 && channel.corr_coefficient < 1.0)) {
    throw ConfigError("corr_coefficient must lie in [0, 1)");
  }
  if (!(channel.csi_error_variance >= 0.0)) {
    throw ConfigError("csi_error_variance must be nonnegative");
  }
  if (has_tsia(*this)) {
    const auto feas = check_feasibility(scenario.antenna_profile, scenario.l1, scenario.l2);
    if (!feas.feasible) throw TsiaInfeasible("TSIA requested but infeasible: " + feas.reason);
  }
}

std::string hash_text(const std::string& text) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a(text)));
  return buf;
}

std::string ExperimentConfig::hash() const { return hash_text(canonical_json(*this).dump()); }

ExperimentConfig parse_config(const std::string& json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  check_keys(j, "config",
             {"scenario", "channel", "algorithms", "csi", "sweep", "drops", "master_seed",
              "output_dir", "gia", "tsia", "ber_symbols", "gia_uses_error_statistics",
              "threads"});
  ExperimentConfig c;
  if (j.contains("scenario")) c.scenario = parse_scenario(j["scenario"]);
  if (j.contains("channel")) c.channel = parse_channel(j["channel"]);
  if (j.contains("algorithms")) {
    if (!j["algorithms"].is_array()) throw ConfigError("algorithms must be a list");
    for (const auto& a : j["algorithms"]) c.algorithms.push_back(parse_algorithm(a));
  }
  if (j.contains("csi")) {
    const auto csi = j["csi"].get<std::string>();
    if (csi == "perfect") {
      c.csi = CsiCondition::kPerfect;
    } else if (csi == "imperfect") {
      c.csi = CsiCondition::kImperfect;
    } else {
      throw ConfigError("csi must be \"perfect\" or \"imperfect\"");
    }
  }
  c.sweep = c.scenario.pico_power_dbm;
  read_field(j, "sweep", c.sweep);
  read_field(j, "drops", c.drops);
  c.master_seed = c.scenario.rng_seed;
  read_field(j, "master_seed", c.master_seed);
  std::string out = c.output_dir.string();
  read_field(j, "output_dir", out);
  c.output_dir = out;
  if (j.contains("gia")) {
    check_keys(j["gia"], "gia", {"max_iters", "convergence_tol", "rescale_to_power"});
    read_field(j["gia"], "max_iters", c.gia.max_iters);
    read_field(j["gia"], "convergence_tol", c.gia.convergence_tol);
    read_field(j["gia"], "rescale_to_power", c.gia.rescale_to_power);
  }
  if (j.contains("tsia")) {
    check_keys(j["tsia"], "tsia", {"max_ia_iters", "leakage_tol"});
    read_field(j["tsia"], "max_ia_iters", c.tsia.max_ia_iters);
    read_field(j["tsia"], "leakage_tol", c.tsia.leakage_tol);
  }
  read_field(j, "ber_symbols", c.ber_symbols);
  read_field(j, "gia_uses_error_statistics", c.gia_uses_error_statistics);
  read_field(j, "threads", c.threads);
  return c;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str());
}

std::string format_raw_record(const RawRecord& r) {
  std::string line = std::to_string(r.drop);
  for (const std::string* s : {&r.algorithm, &r.cooperation, &r.scheme, &r.csi, &r.channel_model}) {
    line += ',' + *s;
  }
  for (double v : {r.pico_power_dbm, r.snr_eff_db, r.sum_rate, r.ber, r.eta}) {
    line += ',' + fmt_double(v);
  }
  line += ',' + std::to_string(r.iterations) + ',' + r.status;
  return line;
}

namespace {

RawRecord parse_raw_line(const std::string& line) {
  const auto f = split_csv_line(line);
  if (f.size() != 13) throw IoError("raw CSV row has " + std::to_string(f.size()) + " fields");
  RawRecord r;
  r.drop = std::stoi(f[0]);
  r.algorithm = f[1];
  r.cooperation = f[2];
  r.scheme = f[3];
  r.csi = f[4];
  r.channel_model = f[5];
  r.pico_power_dbm = parse_double(f[6]);
  r.snr_eff_db = parse_double(f[7]);
  r.sum_rate = parse_double(f[8]);
  r.ber = parse_double(f[9]);
  r.eta = parse_double(f[10]);
  r.iterations = std::stoi(f[11]);
  r.status = f[12];
  return r;
}

}  // namespace

std::vector<RawRecord> read_raw_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read " + path.string());
  std::string line;
  if (!std::getline(in, line) || line != kRawCsvHeader) {
    throw IoError(path.string() + " does not start with the raw CSV header");
  }
  std::vector<RawRecord> out;
  while (std::getline(in, line)) {
    if (!line.empty()) out.push_back(parse_raw_line(line));
  }
  return out;
}

const ResultRow* ResultTable::find(const std::string& algorithm, double pico_power_dbm) const {
  for (const auto& r : rows) {
    if (r.algorithm == algorithm && r.pico_power_dbm == pico_power_dbm) return &r;
  }
  return nullptr;
}

ResultTable aggregate(const std::vector<RawRecord>& records) {
  struct Acc {
    ResultRow row;
    Moments rate;
    Moments ber;
    Moments eta;
    Moments iters;
  };
  std::vector<Acc> groups;
  std::map<std::pair<std::string, double>, std::size_t> index;
  for (const auto& r : records) {
    const auto key = std::make_pair(r.algorithm, r.pico_power_dbm);
    auto it = index.find(key);
    if (it == index.end()) {
      Acc acc;
      acc.row.algorithm = r.algorithm;
      acc.row.cooperation = r.cooperation;
      acc.row.scheme = r.scheme;
      acc.row.csi = r.csi;
      acc.row.channel_model = r.channel_model;
      acc.row.pico_power_dbm = r.pico_power_dbm;
      acc.row.snr_eff_db = r.snr_eff_db;
      groups.push_back(acc);
      it = index.emplace(key, groups.size() - 1).first;
    }
    Acc& acc = groups[it->second];
    if (r.status == "failed") {
      ++acc.row.failures;
      continue;
    }
    ++acc.row.drops;
    acc.rate.add(r.sum_rate);
    if (!std::isnan(r.ber)) acc.ber.add(r.ber);
    if (!std::isnan(r.eta)) acc.eta.add(r.eta);
    acc.iters.add(r.iterations);
  }
  // Groups first appear sweep-point-major; reorder to algorithm-major.
  std::vector<std::string> algorithms;
  for (const auto& g : groups) {
    if (std::find(algorithms.begin(), algorithms.end(), g.row.algorithm) == algorithms.end()) {
      algorithms.push_back(g.row.algorithm);
    }
  }
  ResultTable table;
  for (const auto& alg : algorithms) {
    for (auto& g : groups) {
      if (g.row.algorithm != alg) continue;
      g.row.sum_rate_mean = g.rate.mean();
      g.row.sum_rate_ci95 = g.rate.ci95();
      g.row.ber_mean = g.ber.mean();
      g.row.ber_ci95 = g.ber.ci95();
      g.row.eta_mean = g.eta.mean();
      g.row.iterations_mean = g.iters.mean();
      g.row.iterations_ci95 = g.iters.ci95();
      table.rows.push_back(g.row);
    }
  }
  return table;
}

namespace {

constexpr const char* kTableHeader =
    "algorithm,coop,scheme,csi,channel_model,pico_power_dbm,snr_eff_db,drops,failures,"
    "sum_rate_mean,sum_rate_ci95,ber_mean,ber_ci95,eta_mean,iterations_mean,iterations_ci95";

}  // namespace

std::string table_to_csv(const ResultTable& table) {
  std::string out = std::string(kTableHeader) + "\n";
  for (const auto& r : table.rows) {
    out += r.algorithm + ',' + r.cooperation + ',' + r.scheme + ',' + r.csi + ',' +
           r.channel_model + ',' + fmt_double(r.pico_power_dbm) + ',' +
           fmt_double(r.snr_eff_db) + ',' + std::to_string(r.drops) + ',' +
           std::to_string(r.failures);
    for (double v : {r.sum_rate_mean, r.sum_rate_ci95, r.ber_mean, r.ber_ci95, r.eta_mean,
                     r.iterations_mean, r.iterations_ci95}) {
      out += ',' + fmt_double(v);
    }
    out += '\n';
  }
  return out;
}

ResultTable read_table_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read " + path.string());
  std::string line;
  if (!std::getline(in, line) || line != kTableHeader) {
    throw IoError(path.string() + " does not start with the result table header");
  }
  ResultTable table;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto f = split_csv_line(line);
    if (f.size() != 16) throw IoError("result table row has " + std::to_string(f.size()) + " fields");
    ResultRow r;
    r.algorithm = f[0];
    r.cooperation = f[1];
    r.scheme = f[2];
    r.csi = f[3];
    r.channel_model = f[4];
    r.pico_power_dbm = parse_double(f[5]);
    r.snr_eff_db = parse_double(f[6]);
    r.drops = std::stoi(f[7]);
    r.failures = std::stoi(f[8]);
    r.sum_rate_mean = parse_double(f[9]);
    r.sum_rate_ci95 = parse_double(f[10]);
    r.ber_mean = parse_double(f[11]);
    r.ber_ci95 = parse_double(f[12]);
    r.eta_mean = parse_double(f[13]);
    r.iterations_mean = parse_double(f[14]);
    r.iterations_ci95 = parse_double(f[15]);
    table.rows.push_back(r);
  }
  return table;
}

std::vector<RawRecord> run_drop(const ExperimentConfig& config, int drop) {
  const auto& scenario = config.scenario;
  const std::uint64_t drop_seed = split_seed(config.master_seed, static_cast<std::uint64_t>(drop));
  const bool imperfect = config.csi == CsiCondition::kImperfect;

  ChannelModelSpec spec = config.channel;
  if (!imperfect) spec.csi_error_variance = 0.0;
  const Layout layout = generate_layout(scenario, drop_seed);
  const ChannelSet channels = make_channels(layout, spec, scenario.antenna_profile, drop_seed);
  ChannelSet naive = channels;
  if (!config.gia_uses_error_statistics) naive.error_variance = 0.0;
  const std::vector<double> noise(static_cast<std::size_t>(scenario.cells()),
                                  noise_variance_mw(scenario));
  const std::uint64_t ber_seed = split_seed(drop_seed, SeedStream::kBer);

  std::vector<RawRecord> out;
  for (std::size_t p = 0; p < config.sweep.size(); ++p) {
    const double power_dbm = config.sweep[p];
    const auto powers = cell_powers_mw(scenario, power_dbm);
    for (std::size_t a = 0; a < config.algorithms.size(); ++a) {
      const AlgorithmSpec& alg = config.algorithms[a];
      RawRecord r = base_record(config, alg, drop, power_dbm);
      try {
        TransceiverSet design;
        if (alg.kind == AlgorithmSpec::Kind::kGia) {
          GiaOptions opts = config.gia;
          opts.cooperation = alg.cooperation;
          opts.scheme = alg.scheme;
          const GiaResult res = run_gia(naive, scenario.antenna_profile, powers, noise, opts);
          design = res.transceivers;
          r.eta = res.history.eta.back();
          r.iterations = res.history.iterations;
          r.status = to_string(res.history.termination);
        } else {
          const TsiaResult res = run_tsia(LinkView(channels, imperfect), scenario.antenna_profile,
                                          powers, noise, scenario.l1, scenario.l2, config.tsia);
          design = to_transceivers(channels, res);
          r.iterations = res.ia_iterations;
          r.status = res.ia_converged ? "converged" : "max_iterations";
        }
        r.sum_rate = sum_rate(channels, design, noise);
        if (alg.scheme == StreamScheme::kPartial && config.ber_symbols > 0) {
          const std::uint64_t seed =
              split_seed(ber_seed, p * config.algorithms.size() + a);
          r.ber = ber_simulation(channels, design, noise, config.ber_symbols, seed).ber;
        }
      } catch (const Error& e) {
        std::cerr << "drop " << drop << ", " << r.algorithm << " at " << power_dbm
                  << " dBm failed: " << e.what() << '\n';
        r = base_record(config, alg, drop, power_dbm);
        r.status = "failed";
      }
      out.push_back(std::move(r));
    }
  }
  return out;
}

namespace {

/// Number of leading complete drops in an existing raw CSV and the byte
/// length they occupy (header included). Anything after is discarded.
std::pair<int, std::streamoff> complete_prefix(const std::filesystem::path& path,
                                               std::size_t rows_per_drop, int max_drops) {
  std::ifstream in(path, std::ios::binary);
  std::string line;
  if (!in || !std::getline(in, line) || line != kRawCsvHeader || in.eof()) return {0, 0};
  std::streamoff good_end = in.tellg();
  int complete = 0;
  std::size_t rows = 0;
  while (complete < max_drops && std::getline(in, line)) {
    if (in.eof()) break;  // unterminated final line
    int drop = -1;
    try {
      drop = parse_raw_line(line).drop;
    } catch (const std::exception&) {
      break;
    }
    if (drop != complete) break;
    if (++rows == rows_per_drop) {
      rows = 0;
      ++complete;
      good_end = in.tellg();
    }
  }
  return {complete, good_end};
}

}  // namespace

ExperimentOutput run_experiment(const ExperimentConfig& config, const ProgressFn& progress) {
  config.validate();
  std::error_code ec;
  std::filesystem::create_directories(config.output_dir, ec);
  if (ec) throw IoError("cannot create " + config.output_dir.string() + ": " + ec.message());

  const std::string hash = config.hash();
  ExperimentOutput result;
  result.raw_csv = config.output_dir / ("raw_" + hash + ".csv");
  result.table_csv = config.output_dir / ("table_" + hash + ".csv");
  const std::size_t rows_per_drop = config.sweep.size() * config.algorithms.size();

  int start = 0;
  if (std::filesystem::exists(result.raw_csv)) {
    const auto [complete, bytes] = complete_prefix(result.raw_csv, rows_per_drop, config.drops);
    if (bytes > 0) {
      std::filesystem::resize_file(result.raw_csv, static_cast<std::uintmax_t>(bytes));
      start = complete;
    }
  }
  result.resumed_drops = start;

  std::ofstream out(result.raw_csv, start > 0 ? std::ios::app | std::ios::binary
                                              : std::ios::trunc | std::ios::binary);
  if (!out) throw IoError("cannot write " + result.raw_csv.string());
  if (start == 0) out << kRawCsvHeader << '\n' << std::flush;

  const int remaining = config.drops - start;
  unsigned workers = config.threads > 0 ? static_cast<unsigned>(config.threads)
                                        : std::max(1u, std::thread::hardware_concurrency());
  workers = std::min<unsigned>(workers, static_cast<unsigned>(std::max(remaining, 1)));

  std::mutex mutex;
  std::condition_variable ready;
  std::map<int, std::vector<RawRecord>> finished;
  std::map<int, std::exception_ptr> errors;
  std::atomic<int> next{start};
  const auto worker = [&] {
    for (int d = next++; d < config.drops; d = next++) {
      std::vector<RawRecord> records;
      std::exception_ptr error;
      try {
        records = run_drop(config, d);
      } catch (...) {
        error = std::current_exception();
      }
      {
        std::lock_guard lock(mutex);
        if (error) errors.emplace(d, error);
        finished.emplace(d, std::move(records));
      }
      ready.notify_all();
    }
  };
  std::vector<std::jthread> pool;
  for (unsigned w = 0; w < workers && remaining > 0; ++w) pool.emplace_back(worker);

  for (int d = start; d < config.drops; ++d) {
    std::vector<RawRecord> records;
    {
      std::unique_lock lock(mutex);
      ready.wait(lock, [&] { return finished.count(d) > 0; });
      records = std::move(finished[d]);
      finished.erase(d);
      if (errors.count(d) > 0) {
        next = config.drops;
        lock.unlock();
        pool.clear();
        std::rethrow_exception(errors[d]);
      }
    }
    std::string block;
    for (const auto& r : records) block += format_raw_record(r) + '\n';
    out << block << std::flush;
    if (!out) throw IoError("write to " + result.raw_csv.string() + " failed");
    if (progress) progress(d + 1, config.drops);
  }
  pool.clear();
  out.close();

  result.table = aggregate(read_raw_csv(result.raw_csv));
  std::ofstream table_out(result.table_csv, std::ios::trunc | std::ios::binary);
  table_out << table_to_csv(result.table);
  if (!table_out) throw IoError("cannot write " + result.table_csv.string());
  return result;
}

}  // namespace hetnet
