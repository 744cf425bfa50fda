#pragma once

#include <string>
#include <vector>

#include "hetnet/channel.hpp"
#include "hetnet/mmse_gia.hpp"
#include "hetnet/numerics.hpp"
#include "hetnet/scenario.hpp"

namespace hetnet {

/// Read-only access to either the true or the estimated links of a
/// ChannelSet; TSIA designs on whichever one it is handed.
class LinkView {
 public:
  LinkView(const ChannelSet& set, bool estimated) : set_(&set), estimated_(estimated) {}

  const CMatrix& operator()(int i, int j) const {
    return estimated_ ? set_->est_link(i, j) : set_->true_link(i, j);
  }
  int cells() const { return set_->cells(); }
  int tx(int j) const { return set_->tx(j); }
  int rx(int i) const { return set_->rx(i); }

 private:
  const ChannelSet* set_;
  bool estimated_;
};

struct TsiaOptions {
  int max_ia_iters = 5000;
  double leakage_tol = 1e-8;
};

struct Feasibility {
  bool feasible = false;
  /// Number of sub-system-2 pUEs whose mBS interference is nulled.
  int nullified = 0;
  std::string reason;
};

/// Dimension counting for both TSIA stages. n follows
///   n = min(min_j floor((t_1 - t_j) / r_j), L2),  j in sub-system 2.
/// Checked in order: n >= 1 (when L2 > 0), the mBS equivalent dimension
/// t_1 - sum r left after nulling, stream counts in sub-system 1, properness of
/// the sub-system-1 alignment problem, and the stage-2 subspace dimensions
/// t_j - m_1 >= m_j and r_j - m_1 >= m_j.
Feasibility check_feasibility(const AntennaProfile& profile, int l1, int l2);

struct Stage1Result {
  /// t_1 x (t_1 - rank) orthonormal basis nulling the mBS at the chosen pUEs.
  CMatrix v1;
  /// Sub-system-2 cells (0-based) whose mBS interference is nulled.
  std::vector<int> nullified;
  /// h~_j1 = h_j1 V_1 for every UE j.
  std::vector<CMatrix> equivalent;
};

/// Picks the n sub-system-2 pUEs receiving the strongest mBS interference
/// (Frobenius norm of h_j1, ties to the lower index) and nulls them.
Stage1Result stage1_nullspace(const LinkView& links, int l1, int n);

struct IaResult {
  /// Sub-system-1 precoders; entry 0 is the mBS precoder in the reduced
  /// coordinates of V_1 (the actual one is V_1 times it).
  std::vector<CMatrix> precoders;
  std::vector<CMatrix> decoders;
  int iterations = 0;
  bool converged = false;
  /// Total leakage (on the normalized links) after every decoder update.
  std::vector<double> leakage;
  /// Final leakage over the total interference power at the receivers.
  double relative_leakage = 0.0;
};

/// Min-leakage alternation over sub-system 1. Every cross link h~_kj enters
/// scaled to unit Frobenius norm. Forward: G_k = v_d(Z_k) with
///   Z_k = sum_{j != k} (P_j / m_j) h~_kj f_j f_j^* h~_kj^*.
/// Reverse: f_j = v_d(Z~_j)^* with Z~_j = sum_{k != j} h~_kj^* G_k^* G_k h~_kj.
/// Both steps minimize the same weighted leakage, so the recorded sequence is
/// non-increasing.
IaResult ia_leakage_iteration(const LinkView& links, const Stage1Result& stage1,
                              const std::vector<double>& powers,
                              const std::vector<int>& streams, int l1,
                              const TsiaOptions& opts);

struct Stage2Cell {
  int cell = 0;
  CMatrix precoder;  // t_j x m_j, semi-unitary
  CMatrix decoder;   // m_j x r_j
  RVector singular_values;
};

/// Sub-system-2 transceivers: U_j = null(G_1 h_1j); for nulled pUEs an SVD of
/// h_jj U_j, otherwise T_j = null((h_j1 f_11)^*) and an SVD of
/// T_j^* h_jj U_j. Throws TsiaInfeasible if a required subspace is too small.
std::vector<Stage2Cell> stage2_subsystem2(const LinkView& links, const CMatrix& macro_decoder,
                                          const CMatrix& macro_precoder,
                                          const std::vector<int>& nullified,
                                          const std::vector<int>& streams, int l1);

struct ResidualEntry {
  std::string constraint;  // "sub1_leakage", "mbs_to_pue" or "pbs_to_mue"
  int rx_cell = 0;
  int tx_cell = 0;
  double absolute = 0.0;
  /// ||G_k h_kj f_j||_F / (||G_k||_F ||h_kj||_F ||f_j||_F)
  double relative = 0.0;
};

struct TsiaResult {
  std::vector<CMatrix> precoders;   // f_jj, t_j x m_j, power excluded
  std::vector<CMatrix> decoders;    // m_j x r_j
  std::vector<CMatrix> source_cov;  // diagonal Phi_sj carrying the power
  std::vector<int> nullified;
  int ia_iterations = 0;
  bool ia_converged = false;
  std::vector<double> leakage;
  double relative_leakage = 0.0;
  std::vector<RVector> singular_values;  // empty for sub-system-1 cells
  std::vector<ResidualEntry> residuals;
};

/// Full two-stage design on `links`. Sub-system-1 cells load (P_j / m_j) I;
/// sub-system-2 cells water-fill over their stage-2 singular values.
/// Throws TsiaInfeasible when check_feasibility fails or a subspace
/// degenerates.
TsiaResult run_tsia(const LinkView& links, const AntennaProfile& profile,
                    const std::vector<double>& powers,
                    const std::vector<double>& noise_vars, int l1, int l2,
                    const TsiaOptions& opts);

/// Alignment residuals of a design evaluated on `links`.
std::vector<ResidualEntry> alignment_residuals(const LinkView& links,
                                               const std::vector<CMatrix>& precoders,
                                               const std::vector<CMatrix>& decoders,
                                               int l1);

/// CSV with columns constraint, rx_cell, tx_cell, absolute, relative.
std::string residuals_to_csv(const std::vector<ResidualEntry>& residuals);

/// Stacks a per-cell design into the T x m_i precoder convention.
TransceiverSet to_transceivers(const ChannelSet& dims, const std::vector<CMatrix>& precoders,
                               const std::vector<CMatrix>& decoders,
                               const std::vector<CMatrix>& source_cov);
TransceiverSet to_transceivers(const ChannelSet& dims, const TsiaResult& result);

}  // namespace hetnet
