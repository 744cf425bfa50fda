#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace hetnet {

/// Antenna and stream counts of one cell. `streams` is the partial-scheme
/// stream count; the full scheme always uses min(tx, rx).
struct CellAntennas {
  int tx = 0;
  int rx = 0;
  int streams = 0;

  friend bool operator==(const CellAntennas&, const CellAntennas&) = default;
};

using AntennaProfile = std::vector<CellAntennas>;

/// Macro t=6, pico t=3, every UE r=3; one stream in cells 1..5, two in 6..10.
AntennaProfile sufficient_profile(int l1 = 5, int l2 = 5);
/// Macro t=4, pico t=2, every UE r=2; stream counts as in the sufficient case.
AntennaProfile insufficient_profile(int l1 = 5, int l2 = 5);

enum class CellRole { kMacro, kHotspotPico, kRingPico };
enum class LinkType { kMacro, kPico };

const char* to_string(CellRole role);

struct ScenarioConfig {
  double macro_radius_m = 500.0;
  double pico_radius_m = 40.0;
  double hotspot_radius_m = 100.0;
  double hotspot_distance_m = 350.0;
  double ring_radius_m = 350.0;
  int l1 = 5;
  int l2 = 5;
  AntennaProfile antenna_profile = sufficient_profile();
  std::vector<double> pico_power_dbm = {0, 5, 10, 15, 20, 25, 30, 35, 40};
  double macro_power_dbm = 46.0;
  double bandwidth_hz = 1e8;
  double carrier_hz = 2e9;
  double noise_psd_dbm_hz = -174.0;
  double shadow_std_db = 10.0;
  bool shadowing_enabled = true;
  /// Pico link distance used to place the effective-SNR axis.
  double ref_distance_m = 20.0;
  /// Link distances are clamped to this floor before evaluating path loss.
  double min_distance_m = 10.0;
  std::uint64_t rng_seed = 1;

  int cells() const { return l1 + l2; }
  CellRole role(int cell) const;
  /// Throws ConfigError on a violated invariant.
  void validate() const;
};

struct Point {
  double x = 0.0;
  double y = 0.0;
};

double distance(Point a, Point b);

struct Layout {
  std::vector<Point> bs_positions;
  std::vector<Point> ue_positions;
  Point hotspot_center;
  /// Entry (i, j): path loss from BS j to UE i, using BS j's model.
  Eigen::MatrixXd link_pathloss_db;
  /// Entry (i, j): shadowing realization of the same link (0 when disabled).
  Eigen::MatrixXd link_shadow_db;
};

/// Deterministic in (config, drop_seed).
///
/// The macro BS sits at the origin and the hotspot center at
/// (hotspot_distance_m, 0). The L1-1 hotspot pBSs sit on a regular polygon
/// around the hotspot center whose circumradius makes neighbouring picocells
/// touch (pico_radius / sin(pi / k); 56.6 m for four 40 m cells). The L2 ring
/// pBSs are equally spaced on the ring starting at angle pi / L2, so the
/// hotspot lies midway between two of them. The mUE is uniform in the hotspot
/// disk and each pUE is uniform in its own picocell.
Layout generate_layout(const ScenarioConfig& config, std::uint64_t drop_seed);

/// Macro: 128.1 + 37.6 log10(R); pico: 140.7 + 36.7 log10(R); R in km.
double path_loss_db(LinkType type, double distance_km);

double noise_power_dbm(const ScenarioConfig& config);
double noise_variance_mw(const ScenarioConfig& config);
double reference_pathloss_db(const ScenarioConfig& config);

/// tx_power_dbm - ref_pathloss_db - noise_power_dbm.
double effective_snr_db(double tx_power_dbm, double ref_pathloss_db,
                        double noise_power_dbm);
double effective_snr_db(const ScenarioConfig& config, double pico_power_dbm);

/// Per-cell transmit power in mW: macro_power_dbm for cell 0, the given pico
/// power for every other cell.
std::vector<double> cell_powers_mw(const ScenarioConfig& config,
                                   double pico_power_dbm);

double dbm_to_mw(double dbm);

/// CSV with columns cell_id, role, bs_x, bs_y, ue_x, ue_y (1-based ids).
std::string layout_to_csv(const ScenarioConfig& config, const Layout& layout);

}  // namespace hetnet
