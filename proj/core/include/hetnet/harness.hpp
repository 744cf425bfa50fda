#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include "hetnet/channel.hpp"
#include "hetnet/mmse_gia.hpp"
#include "hetnet/scenario.hpp"
#include "hetnet/tsia.hpp"

namespace hetnet {

enum class CsiCondition { kPerfect, kImperfect };

const char* to_string(CsiCondition csi);

struct AlgorithmSpec {
  enum class Kind { kGia, kTsia };
  Kind kind = Kind::kGia;
  Cooperation cooperation = Cooperation::kWithout;
  StreamScheme scheme = StreamScheme::kPartial;

  static AlgorithmSpec gia(Cooperation c, StreamScheme s) { return {Kind::kGia, c, s}; }
  static AlgorithmSpec tsia() { return {Kind::kTsia, Cooperation::kWithout, StreamScheme::kPartial}; }

  /// "GIA-with-partial", "GIA-without-full", "TSIA", ...; an "N" prefix marks
  /// a design on estimated channels.
  std::string tag(CsiCondition csi) const;
};

struct ExperimentConfig {
  ScenarioConfig scenario;
  ChannelModelSpec channel;
  std::vector<AlgorithmSpec> algorithms;
  CsiCondition csi = CsiCondition::kPerfect;
  /// Pico transmit powers (dBm); the macro power stays fixed.
  std::vector<double> sweep = {0, 5, 10, 15, 20, 25, 30, 35, 40};
  int drops = 50;
  std::uint64_t master_seed = 1;
  std::filesystem::path output_dir = "results";

  GiaOptions gia;
  TsiaOptions tsia;
  /// QPSK symbols per stream for every BER point.
  std::int64_t ber_symbols = 10000;
  /// When set, imperfect-CSI GIA designs account for the error statistics;
  /// otherwise they treat the estimates as exact.
  bool gia_uses_error_statistics = false;
  /// Worker threads across drops; 0 picks the hardware concurrency.
  int threads = 0;

  /// Throws ConfigError, or TsiaInfeasible when TSIA is requested on an
  /// infeasible antenna profile.
  void validate() const;
  /// 16 hex digits identifying everything that affects the raw results.
  std::string hash() const;
};

/// Parses the JSON document. Field names follow the struct members; the
/// antenna profile is either "sufficient", "insufficient" or a list of
/// {"tx", "rx", "streams"} objects. Throws ConfigError on malformed input.
ExperimentConfig parse_config(const std::string& json_text);
ExperimentConfig load_config(const std::filesystem::path& path);

/// 16 hex digits of the FNV-1a hash of `text`.
std::string hash_text(const std::string& text);

/// Exact raw CSV column order.
inline constexpr const char* kRawCsvHeader =
    "drop,algorithm,coop,scheme,csi,channel_model,pico_power_dbm,snr_eff_db,sum_rate,ber,eta,"
    "iterations,status";

struct RawRecord {
  int drop = 0;
  std::string algorithm;
  std::string cooperation;
  std::string scheme;
  std::string csi;
  std::string channel_model;
  double pico_power_dbm = 0.0;
  double snr_eff_db = 0.0;
  double sum_rate = 0.0;
  double ber = 0.0;  // NaN when not simulated
  double eta = 0.0;  // NaN for TSIA
  int iterations = 0;
  /// "converged", "max_iterations" or "failed".
  std::string status;
};

std::string format_raw_record(const RawRecord& r);
std::vector<RawRecord> read_raw_csv(const std::filesystem::path& path);

struct ResultRow {
  std::string algorithm;
  std::string cooperation;
  std::string scheme;
  std::string csi;
  std::string channel_model;
  double pico_power_dbm = 0.0;
  double snr_eff_db = 0.0;
  int drops = 0;
  int failures = 0;
  double sum_rate_mean = 0.0;
  double sum_rate_ci95 = 0.0;
  double ber_mean = 0.0;
  double ber_ci95 = 0.0;
  double eta_mean = 0.0;
  double iterations_mean = 0.0;
  double iterations_ci95 = 0.0;
};

/// One row per (algorithm, sweep point), algorithms in request order.
struct ResultTable {
  std::vector<ResultRow> rows;

  const ResultRow* find(const std::string& algorithm, double pico_power_dbm) const;
};

/// Means over the non-failed drops and 95% half-widths 1.96 s / sqrt(n).
/// Grouping preserves first-appearance order.
ResultTable aggregate(const std::vector<RawRecord>& records);

std::string table_to_csv(const ResultTable& table);
ResultTable read_table_csv(const std::filesystem::path& path);

/// All records of one drop, in (sweep point, algorithm) order.
std::vector<RawRecord> run_drop(const ExperimentConfig& config, int drop);

struct ExperimentOutput {
  ResultTable table;
  std::filesystem::path raw_csv;
  std::filesystem::path table_csv;
  int resumed_drops = 0;
};

using ProgressFn = std::function<void(int completed, int total)>;

/// Runs every drop (resuming raw_<hash>.csv in the output directory when it
/// already holds complete drops), then writes table_<hash>.csv. Drops run on a
/// worker pool and are appended strictly in drop order.
ExperimentOutput run_experiment(const ExperimentConfig& config, const ProgressFn& progress = {});

}  // namespace hetnet
