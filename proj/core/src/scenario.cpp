#include "hetnet/scenario.hpp"

#include <cmath>
#include <cstdio>
#include <numbers>
#include <random>
#include <string>

#include "hetnet/errors.hpp"
#include "hetnet/rng.hpp"

namespace hetnet {

namespace {

AntennaProfile make_profile(int l1, int l2, int macro_tx, int pico_tx, int rx) {
  AntennaProfile profile;
  profile.reserve(static_cast<std::size_t>(l1 + l2));
  for (int i = 0; i < l1 + l2; ++i) {
    CellAntennas cell;
    cell.tx = i == 0 ? macro_tx : pico_tx;
    cell.rx = rx;
    cell.streams = i < l1 ? 1 : 2;
    profile.push_back(cell);
  }
  return profile;
}

Point uniform_in_disk(Point center, double radius, Rng& rng) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const double r = radius * std::sqrt(unit(rng));
  const double theta = 2.0 * std::numbers::pi * unit(rng);
  return {center.x + r * std::cos(theta), center.y + r * std::sin(theta)};
}

}  // namespace

AntennaProfile sufficient_profile(int l1, int l2) {
  return make_profile(l1, l2, 6, 3, 3);
}

AntennaProfile insufficient_profile(int l1, int l2) {
  return make_profile(l1, l2, 4, 2, 2);
}

const char* to_string(CellRole role) {
  switch (role) {
    case CellRole::kMacro:
      return "macro";
    case CellRole::kHotspotPico:
      return "hotspot_pico";
    case CellRole::kRingPico:
      return "ring_pico";
  }
  return "unknown";
}

CellRole ScenarioConfig::role(int cell) const {
  if (cell == 0) return CellRole::kMacro;
  return cell < l1 ? CellRole::kHotspotPico : CellRole::kRingPico;
}

void ScenarioConfig::validate() const {
  if (l1 < 1 || l2 < 0) throw ConfigError("scenario: need L1 >= 1 and L2 >= 0");
  if (static_cast<int>(antenna_profile.size()) != cells()) {
    throw ConfigError("scenario: antenna_profile has " +
                      std::to_string(antenna_profile.size()) + " entries, expected " +
                      std::to_string(cells()));
  }
  for (int i = 0; i < cells(); ++i) {
    const auto& c = antenna_profile[static_cast<std::size_t>(i)];
    if (c.tx < 1 || c.rx < 1 || c.streams < 1) {
      throw ConfigError("scenario: cell " + std::to_string(i + 1) +
                        " needs positive antenna and stream counts");
    }
    if (c.streams > std::min(c.tx, c.rx)) {
      throw ConfigError("scenario: cell " + std::to_string(i + 1) +
                        " has more streams than min(t, r)");
    }
  }
  if (!(pico_radius_m > 0.0) || !(hotspot_radius_m > 0.0) ||
      !(macro_radius_m > 0.0) || !(ring_radius_m > 0.0)) {
    throw ConfigError("scenario: radii must be positive");
  }
  if (!(bandwidth_hz > 0.0)) throw ConfigError("scenario: bandwidth must be positive");
  if (!(min_distance_m > 0.0) || !(ref_distance_m > 0.0)) {
    throw ConfigError("scenario: reference and minimum distances must be positive");
  }
  if (shadow_std_db < 0.0) throw ConfigError("scenario: negative shadowing std");
}

double distance(Point a, Point b) { return std::hypot(a.x - b.x, a.y - b.y); }

double path_loss_db(LinkType type, double distance_km) {
  if (!(distance_km > 0.0)) {
    throw NonpositiveDistance("path_loss_db: distance must be positive");
  }
  const double lg = std::log10(distance_km);
  return type == LinkType::kMacro ? 128.1 + 37.6 * lg : 140.7 + 36.7 * lg;
}

Layout generate_layout(const ScenarioConfig& config, std::uint64_t drop_seed) {
  config.validate();
  const int n = config.cells();
  const int hotspot_picos = config.l1 - 1;
  constexpr double pi = std::numbers::pi;

  Layout layout;
  layout.hotspot_center = {config.hotspot_distance_m, 0.0};
  layout.bs_positions.resize(static_cast<std::size_t>(n));
  layout.ue_positions.resize(static_cast<std::size_t>(n));
  layout.bs_positions[0] = {0.0, 0.0};

  double circumradius = 0.0;
  if (hotspot_picos >= 2) {
    circumradius = config.pico_radius_m / std::sin(pi / hotspot_picos);
  }
  if (hotspot_picos >= 1 &&
      circumradius + config.pico_radius_m > config.hotspot_radius_m + 1e-9) {
    throw GeometryInfeasible(
        "generate_layout: " + std::to_string(hotspot_picos) +
        " non-overlapping picocells of radius " + std::to_string(config.pico_radius_m) +
        " m do not fit in a hotspot of radius " + std::to_string(config.hotspot_radius_m) +
        " m");
  }
  for (int k = 0; k < hotspot_picos; ++k) {
    const double angle = pi / std::max(hotspot_picos, 1) + 2.0 * pi * k / hotspot_picos;
    layout.bs_positions[static_cast<std::size_t>(1 + k)] = {
        layout.hotspot_center.x + circumradius * std::cos(angle),
        layout.hotspot_center.y + circumradius * std::sin(angle)};
  }
  for (int k = 0; k < config.l2; ++k) {
    const double angle = pi / config.l2 + 2.0 * pi * k / config.l2;
    layout.bs_positions[static_cast<std::size_t>(config.l1 + k)] = {
        config.ring_radius_m * std::cos(angle), config.ring_radius_m * std::sin(angle)};
  }

  Rng rng(split_seed(drop_seed, SeedStream::kLayout));
  layout.ue_positions[0] =
      uniform_in_disk(layout.hotspot_center, config.hotspot_radius_m, rng);
  for (int i = 1; i < n; ++i) {
    layout.ue_positions[static_cast<std::size_t>(i)] = uniform_in_disk(
        layout.bs_positions[static_cast<std::size_t>(i)], config.pico_radius_m, rng);
  }

  layout.link_pathloss_db.resize(n, n);
  layout.link_shadow_db = Eigen::MatrixXd::Zero(n, n);
  std::normal_distribution<double> shadow(0.0, config.shadow_std_db);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      const double d_m = std::max(
          config.min_distance_m,
          distance(layout.ue_positions[static_cast<std::size_t>(i)],
                   layout.bs_positions[static_cast<std::size_t>(j)]));
      const LinkType type = j == 0 ? LinkType::kMacro : LinkType::kPico;
      layout.link_pathloss_db(i, j) = path_loss_db(type, d_m / 1000.0);
    }
  }
  if (config.shadowing_enabled && config.shadow_std_db > 0.0) {
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) layout.link_shadow_db(i, j) = shadow(rng);
    }
  }
  return layout;
}

double noise_power_dbm(const ScenarioConfig& config) {
  return config.noise_psd_dbm_hz + 10.0 * std::log10(config.bandwidth_hz);
}

double dbm_to_mw(double dbm) { return std::pow(10.0, dbm / 10.0); }

double noise_variance_mw(const ScenarioConfig& config) {
  return dbm_to_mw(noise_power_dbm(config));
}

double reference_pathloss_db(const ScenarioConfig& config) {
  return path_loss_db(LinkType::kPico, config.ref_distance_m / 1000.0);
}

double effective_snr_db(double tx_power_dbm, double ref_pathloss_db,
                        double noise_power_dbm) {
  return tx_power_dbm - ref_pathloss_db - noise_power_dbm;
}

double effective_snr_db(const ScenarioConfig& config, double pico_power_dbm) {
  return effective_snr_db(pico_power_dbm, reference_pathloss_db(config),
                          noise_power_dbm(config));
}

std::vector<double> cell_powers_mw(const ScenarioConfig& config,
                                   double pico_power_dbm) {
  std::vector<double> powers(static_cast<std::size_t>(config.cells()),
                             dbm_to_mw(pico_power_dbm));
  powers[0] = dbm_to_mw(config.macro_power_dbm);
  return powers;
}

std::string layout_to_csv(const ScenarioConfig& config, const Layout& layout) {
  std::string out = "cell_id,role,bs_x,bs_y,ue_x,ue_y\n";
  char line[256];
  for (int i = 0; i < config.cells(); ++i) {
    const auto& bs = layout.bs_positions[static_cast<std::size_t>(i)];
    const auto& ue = layout.ue_positions[static_cast<std::size_t>(i)];
    std::snprintf(line, sizeof line, "%d,%s,%.9f,%.9f,%.9f,%.9f\n", i + 1,
                  to_string(config.role(i)), bs.x, bs.y, ue.x, ue.y);
    out += line;
  }
  return out;
}

}  // namespace hetnet
