#pragma once

#include <cstdint>
#include <iosfwd>
#include <vector>

#include "hetnet/numerics.hpp"
#include "hetnet/scenario.hpp"

namespace hetnet {

enum class ChannelKind { kUncorrelated, kExplicitCorrelation };

const char* to_string(ChannelKind kind);

struct ChannelModelSpec {
  ChannelKind kind = ChannelKind::kUncorrelated;
  double corr_coefficient = 0.6;
  /// Per-entry variance of the whitened estimation error; 0 means perfect CSI.
  double csi_error_variance = 1e-3;

  /// Correlation coefficient actually applied (0 for the uncorrelated model).
  double rho() const {
    return kind == ChannelKind::kUncorrelated ? 0.0 : corr_coefficient;
  }
};

/// True, estimated and error matrices for every BS-to-UE link, plus the
/// second-order statistics of the estimation error.
///
/// Link (i, j) runs from BS j to UE i and is r_i x t_j. The error model is
///   e_ij = a_ij * A_i * W * B_j,  W i.i.d. CN(0, sigma_e^2),
/// with a_ij the large-scale amplitude gain, A_i the receive-side error factor
/// and B_j the transmit correlation square root, so that
///   <e_ij X e_ij^*> = sigma_e^2 a_ij^2 tr(B_j X B_j) A_i A_i^*
///   <e_ij^* Y e_ij> = sigma_e^2 a_ij^2 tr(A_i^* Y A_i) B_j B_j.
class ChannelSet {
 public:
  ChannelSet() = default;
  ChannelSet(std::vector<int> tx_antennas, std::vector<int> rx_antennas);

  int cells() const { return static_cast<int>(tx_.size()); }
  int tx(int j) const { return tx_[static_cast<std::size_t>(j)]; }
  int rx(int i) const { return rx_[static_cast<std::size_t>(i)]; }
  int total_tx() const { return total_tx_; }
  /// Row offset of BS j's block in the stacked transmit dimension.
  int tx_offset(int j) const { return offsets_[static_cast<std::size_t>(j)]; }

  CMatrix& true_link(int i, int j) { return true_[index(i, j)]; }
  const CMatrix& true_link(int i, int j) const { return true_[index(i, j)]; }
  CMatrix& est_link(int i, int j) { return est_[index(i, j)]; }
  const CMatrix& est_link(int i, int j) const { return est_[index(i, j)]; }
  CMatrix& error_link(int i, int j) { return err_[index(i, j)]; }
  const CMatrix& error_link(int i, int j) const { return err_[index(i, j)]; }

  /// [h_i1 ... h_iL], r_i x T.
  CMatrix stacked_true(int i) const;
  /// [h^_i1 ... h^_iL], r_i x T.
  CMatrix stacked_est(int i) const;

  /// Linear amplitude gain a_ij = 10^(-(PL_ij + shadow_ij) / 20).
  RMatrix amplitude;
  double error_variance = 0.0;
  /// A_i per UE (r_i x r_i).
  std::vector<CMatrix> rx_error_factor;
  /// B_j = R_T,j^(1/2) per BS (t_j x t_j).
  std::vector<CMatrix> tx_corr_sqrt;
  /// R_R,i per UE and R_T,j per BS.
  std::vector<CMatrix> rx_corr;
  std::vector<CMatrix> tx_corr;

 private:
  std::size_t index(int i, int j) const {
    return static_cast<std::size_t>(i) * tx_.size() + static_cast<std::size_t>(j);
  }

  std::vector<int> tx_;
  std::vector<int> rx_;
  std::vector<int> offsets_;
  int total_tx_ = 0;
  std::vector<CMatrix> true_;
  std::vector<CMatrix> est_;
  std::vector<CMatrix> err_;
};

/// n x n exponential correlation matrix with entries rho^|i-j|.
CMatrix toeplitz_corr(int n, double rho);

/// Draws h_ij = a_ij R_R,i^(1/2) h_w R_T,j^(1/2) with h_w i.i.d. CN(0, 1).
/// The estimate is initialised to the true channel and the error to zero.
ChannelSet gen_true_channels(const Layout& layout, const ChannelModelSpec& spec,
                             const AntennaProfile& profile, std::uint64_t seed);

/// Same as above with an explicit amplitude table (used by tests).
ChannelSet gen_true_channels(const RMatrix& amplitude, const ChannelModelSpec& spec,
                             const AntennaProfile& profile, std::uint64_t seed);

/// Fills the error and estimated links. Correlated model:
///   A_i = [I + sigma_e^2 R_R,i^-1]^-1,  e_ij = a_ij A_i W R_T,j^(1/2);
/// uncorrelated model: e_ij = a_ij W. Then h^_ij = h_ij - e_ij.
ChannelSet gen_csi_error(ChannelSet channels, const ChannelModelSpec& spec,
                         std::uint64_t seed);

/// Layout -> true channels -> CSI errors using the per-drop seed streams.
ChannelSet make_channels(const Layout& layout, const ChannelModelSpec& spec,
                         const AntennaProfile& profile, std::uint64_t drop_seed);

/// Little-endian fixture dump:
///   "HNCS", u32 version (1), u32 L, u32 kind, f64 rho, f64 sigma_e^2,
///   L x u32 rx dims, L x u32 tx dims, L*L x f64 amplitudes (row-major),
///   then for the true and then the estimated links (i outer, j inner) the
///   r_i x t_j entries row-major as f32 (re, im) pairs.
void write_channel_set(std::ostream& out, const ChannelSet& channels,
                       const ChannelModelSpec& spec);
ChannelSet read_channel_set(std::istream& in);

}  // namespace hetnet
