#pragma once

#include <string>
#include <vector>

#include "hetnet/channel.hpp"
#include "hetnet/numerics.hpp"
#include "hetnet/scenario.hpp"

namespace hetnet {

enum class Cooperation { kWith, kWithout };
enum class StreamScheme { kPartial, kFull };

const char* to_string(Cooperation c);
const char* to_string(StreamScheme s);

/// Partial: the profile's stream counts. Full: min(t_i, r_i).
std::vector<int> stream_counts(const AntennaProfile& profile, StreamScheme scheme);

/// Precoders use the stacked convention: F_i is T x m_i with T = sum_j t_j and
/// the rows of block j holding BS j's share of stream i. Without cooperation
/// only block i of F_i is nonzero.
struct TransceiverSet {
  std::vector<CMatrix> precoders;
  std::vector<CMatrix> decoders;
  std::vector<double> multipliers;
  /// Phi_si per cell; empty means identity.
  std::vector<CMatrix> source_cov;
};

/// The estimated-channel view of one drop that every GIA step works on: the
/// stacked estimates H^_i, noise variances, source covariances and the
/// second-order CSI error statistics.
class MseModel {
 public:
  MseModel(const ChannelSet& channels, std::vector<int> streams,
           std::vector<double> noise_var, std::vector<CMatrix> source_cov = {});

  int cells() const { return static_cast<int>(streams_.size()); }
  int total_tx() const { return total_tx_; }
  int tx(int j) const { return tx_[static_cast<std::size_t>(j)]; }
  int rx(int i) const { return rx_[static_cast<std::size_t>(i)]; }
  int tx_offset(int j) const { return offsets_[static_cast<std::size_t>(j)]; }
  int streams(int i) const { return streams_[static_cast<std::size_t>(i)]; }
  double noise_var(int i) const { return noise_[static_cast<std::size_t>(i)]; }
  const CMatrix& stacked(int i) const { return stacked_[static_cast<std::size_t>(i)]; }
  const CMatrix& source_cov(int i) const { return phi_[static_cast<std::size_t>(i)]; }
  bool has_csi_error() const { return error_variance_ > 0.0; }

  /// K = sum_j F_j Phi_sj F_j^* (T x T).
  CMatrix transmit_covariance(const std::vector<CMatrix>& precoders) const;
  /// <E_i K E_i^*> (r_i x r_i).
  CMatrix error_rx_moment(int i, const CMatrix& k) const;
  /// <E_i^* Y E_i> (T x T, block diagonal).
  CMatrix error_tx_moment(int i, const CMatrix& y) const;
  /// H^_i K H^_i^* + sigma_i^2 I + <E_i K E_i^*>, the inverse of M_i.
  CMatrix receive_covariance(int i, const CMatrix& k) const;
  /// Per-BS transmit power tr(Q_j K Q_j).
  std::vector<double> power_usage(const std::vector<CMatrix>& precoders) const;

 private:
  std::vector<int> tx_;
  std::vector<int> rx_;
  std::vector<int> offsets_;
  std::vector<int> streams_;
  std::vector<double> noise_;
  std::vector<CMatrix> stacked_;
  std::vector<CMatrix> phi_;
  int total_tx_ = 0;
  double error_variance_ = 0.0;
  RMatrix amplitude_sq_;
  std::vector<CMatrix> rx_error_shape_;  // A_i A_i^*
  std::vector<CMatrix> tx_corr_;         // R_T,j
};

struct MseBreakdown {
  double total = 0.0;
  std::vector<double> per_cell;
};

/// Closed-form sum MSE: for each cell
///   eta_i = tr(Phi_i) - 2 Re tr(G_i H^_i F_i Phi_i) + tr(G_i C_i G_i^*)
/// with C_i = receive_covariance(i, K). Both cooperation scenarios reduce to
/// this form once F carries the scenario's block structure.
MseBreakdown sum_mse(const MseModel& model, const std::vector<CMatrix>& precoders,
                     const std::vector<CMatrix>& decoders);

/// Wiener decoders G_i = Phi_i F_i^* H^_i^* M_i.
std::vector<CMatrix> update_decoders(const MseModel& model,
                                     const std::vector<CMatrix>& precoders);

inline constexpr double kMinMultiplier = 1e-12;

struct LagrangeUpdate {
  std::vector<double> multipliers;
  /// max_j |Im tr(Q_j D Q_j)| / |tr(Q_j D Q_j)|; zero at a stationary point.
  double max_imag_residue = 0.0;
  /// Real parts before clamping to kMinMultiplier.
  std::vector<double> raw;
};

/// lambda_j = P_j^-1 tr(Q_j D Q_j) with
///   D = sum_j F_j Phi_j^2 F_j^* H^_j^* M_j H^_j - K sum_l Y_l Y_l^*,
///   Y_l = H^_l^* M_l H^_l F_l Phi_l.
/// Values at or below zero are clamped to kMinMultiplier.
LagrangeUpdate update_lagrange(const MseModel& model,
                               const std::vector<CMatrix>& precoders,
                               const std::vector<double>& powers);

/// Minimizer of xi = eta + tr(Lambda (K - P)) over the precoders for fixed
/// decoders and multipliers:
///   with cooperation:    F_i = N H^_i^* G_i^*,
///   without cooperation: f_ii = [N^-1]_ii^-1 (H^_i^* G_i^*)_i,
/// where N^-1 = sum_k (H^_k^* G_k^* G_k H^_k + <E_k^* G_k^* G_k E_k>) + Lambda.
/// The error moment vanishes under perfect CSI.
std::vector<CMatrix> update_precoders(const MseModel& model,
                                      const std::vector<CMatrix>& decoders,
                                      const std::vector<double>& multipliers,
                                      Cooperation cooperation);

/// Multipliers for which update_precoders meets every per-BS budget exactly;
/// a BS that stays under budget even at kMinMultiplier keeps kMinMultiplier.
/// Without cooperation each lambda_j solves a scalar secular equation; with
/// cooperation a projected Newton iteration on log(lambda) starts from
/// `start` (or a Gram-diagonal scale when `start` is empty).
std::vector<double> power_matched_multipliers(const MseModel& model,
                                              const std::vector<CMatrix>& decoders,
                                              const std::vector<double>& powers,
                                              Cooperation cooperation,
                                              const std::vector<double>& start = {});

/// Scales BS j's rows of every precoder so tr(Q_j K Q_j) = P_j.
void rescale_to_power(const MseModel& model, std::vector<CMatrix>& precoders,
                      const std::vector<double>& powers);

/// xi = eta + tr(Lambda (K - P)).
double augmented_cost(const MseModel& model, const std::vector<CMatrix>& precoders,
                      const std::vector<CMatrix>& decoders,
                      const std::vector<double>& multipliers,
                      const std::vector<double>& powers);

/// Dominant right singular vectors of the direct link h^_ii placed in block i
/// and scaled so each BS spends exactly its power.
std::vector<CMatrix> initial_precoders(const MseModel& model,
                                       const std::vector<double>& powers);

/// kPowerMatched picks the multipliers that make the precoder update meet the
/// budgets (power_matched_multipliers); kClosedForm evaluates update_lagrange
/// at the current precoders. Both agree at a fixed point.
enum class MultiplierRule { kPowerMatched, kClosedForm };

struct GiaOptions {
  Cooperation cooperation = Cooperation::kWithout;
  StreamScheme scheme = StreamScheme::kPartial;
  int max_iters = 2000;
  double convergence_tol = 1e-6;
  std::vector<CMatrix> source_covariances;
  bool rescale_to_power = true;
  MultiplierRule multiplier_rule = MultiplierRule::kPowerMatched;
};

enum class Termination { kConverged, kMaxIterations };

const char* to_string(Termination t);

struct SolveHistory {
  /// Sum MSE right after every decoder update (entry 0 is the initial one).
  std::vector<double> eta;
  /// Sum MSE of the new precoders with the previous decoders, i.e. just
  /// before each decoder update (aligned with eta[1..]).
  std::vector<double> eta_before_decoder;
  /// Per-BS power after every precoder update.
  std::vector<std::vector<double>> power_usage;
  /// max_j |p_j - P_j| / P_j after every precoder update.
  std::vector<double> max_power_violation;
  int iterations = 0;
  Termination termination = Termination::kMaxIterations;
};

/// CSV with columns iteration, eta, max_power_violation.
std::string history_to_csv(const SolveHistory& history);

struct GiaResult {
  TransceiverSet transceivers;
  SolveHistory history;
};

/// Alternates decoders, multipliers and precoders until the relative change
/// of eta drops below opts.convergence_tol or opts.max_iters is reached. The
/// returned decoders are always recomputed from the final precoders.
GiaResult run_gia(const MseModel& model, const std::vector<double>& powers,
                  const GiaOptions& opts);

/// Builds the model from the profile and options, then solves.
GiaResult run_gia(const ChannelSet& channels, const AntennaProfile& profile,
                  const std::vector<double>& powers,
                  const std::vector<double>& noise_vars, const GiaOptions& opts);

}  // namespace hetnet
