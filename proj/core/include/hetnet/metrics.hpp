#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "hetnet/channel.hpp"
#include "hetnet/mmse_gia.hpp"

namespace hetnet {

/// Achievable rate of every cell on the true channels:
///   C_i = log2 det(I + G_i H_i F_i Phi_i F_i^* H_i^* G_i^* B_i^-1),
///   B_i = sum_{j != i} G_i H_i F_j Phi_j F_j^* H_i^* G_i^* + sigma_i^2 G_i G_i^*,
/// where H_i is UE i's stacked true channel. A zero decoder yields rate 0.
std::vector<double> rate_per_cell(const ChannelSet& channels, const TransceiverSet& design,
                                  const std::vector<double>& noise_vars);

double sum_rate(const ChannelSet& channels, const TransceiverSet& design,
                const std::vector<double>& noise_vars);

/// Unit-energy Gray QPSK: bit 0 sets the sign of the real part, bit 1 the
/// imaginary part (0 maps to +).
Complex qpsk_symbol(int bit0, int bit1);

/// Analytic Gray QPSK bit error rate Q(sqrt(Es/N0)).
double qpsk_ber(double es_over_n0);

struct BerResult {
  double ber = 0.0;
  std::int64_t bit_errors = 0;
  std::int64_t bits = 0;
};

/// Symbols simulated per seed partition. Partition b draws from
/// split_seed(seed, b), so results do not depend on how partitions are
/// scheduled.
inline constexpr int kBerBlockSymbols = 4096;

/// Uncoded QPSK bit error rate over every transmitted stream of every cell.
/// Each stream sends unit-energy symbols scaled by Phi_i^(1/2) through the
/// true channels; UE i applies G_i, derotates each stream by the matching
/// diagonal entry of G_i H_i F_i Phi_i^(1/2) (unless it is zero) and makes
/// hard decisions. Streams with zero source power carry no bits.
BerResult ber_simulation(const ChannelSet& channels, const TransceiverSet& design,
                         const std::vector<double>& noise_vars, std::int64_t n_symbols,
                         std::uint64_t seed);

/// Mean condition number (dB) over the true direct links h_ii.
double mean_condition_number_db(const ChannelSet& channels);

struct MetricsRecord {
  std::vector<double> per_cell_rate;
  double sum_rate = 0.0;
  double sum_mse = 0.0;
  double ber = 0.0;
  std::int64_t bits_simulated = 0;
  int solver_iterations = 0;
  std::string algorithm;
  std::string cooperation;
  std::string scheme;
  std::string csi;
  double snr_eff_db = 0.0;
  std::uint64_t drop_seed = 0;
};

}  // namespace hetnet
