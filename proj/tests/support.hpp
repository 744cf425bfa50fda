#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Dense>

#include "hetnet/channel.hpp"
#include "hetnet/mmse_gia.hpp"
#include "hetnet/numerics.hpp"
#include "hetnet/rng.hpp"
#include "hetnet/scenario.hpp"

// Hand-rolled generators shared by the property tests. Every generator takes
// the Rng by reference so a test's whole instance stream follows one seed.
namespace hetnet::testing {

inline CMatrix random_matrix(Eigen::Index rows, Eigen::Index cols, Rng& rng) {
  return complex_gaussian(rows, cols, 1.0, rng);
}

inline int uniform_int(int lo, int hi, Rng& rng) {
  return std::uniform_int_distribution<int>(lo, hi)(rng);
}

inline double uniform_real(double lo, double hi, Rng& rng) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

/// Hermitian PSD with rank `rank` (full rank when rank >= n).
inline CMatrix random_psd(Eigen::Index n, Eigen::Index rank, Rng& rng) {
  const CMatrix a = random_matrix(n, std::min(rank, n), rng);
  return a * a.adjoint();
}

/// Haar-ish unitary from the QR of a Gaussian matrix.
inline CMatrix random_unitary(Eigen::Index n, Rng& rng) {
  const CMatrix q = Eigen::HouseholderQR<CMatrix>(random_matrix(n, n, rng)).householderQ();
  return q;
}

/// Small interference network with unit amplitudes except for `cross`
/// on every off-diagonal link.
inline ChannelSet toy_channels(const AntennaProfile& profile, double cross, double error_var,
                               std::uint64_t seed, double rho = 0.0) {
  const auto n = static_cast<Eigen::Index>(profile.size());
  RMatrix amp = RMatrix::Constant(n, n, cross);
  amp.diagonal().setOnes();
  ChannelModelSpec spec;
  spec.kind = rho > 0.0 ? ChannelKind::kExplicitCorrelation : ChannelKind::kUncorrelated;
  spec.corr_coefficient = rho;
  spec.csi_error_variance = error_var;
  ChannelSet set = gen_true_channels(amp, spec, profile, seed);
  return gen_csi_error(std::move(set), spec, split_seed(seed, SeedStream::kCsiError));
}

inline AntennaProfile uniform_profile(int cells, int tx, int rx, int streams) {
  return AntennaProfile(static_cast<std::size_t>(cells), CellAntennas{tx, rx, streams});
}

/// Random transceivers honouring the cooperation block structure.
inline std::vector<CMatrix> random_precoders(const MseModel& model, Cooperation c, Rng& rng) {
  std::vector<CMatrix> f;
  for (int i = 0; i < model.cells(); ++i) {
    CMatrix fi = CMatrix::Zero(model.total_tx(), model.streams(i));
    if (c == Cooperation::kWith) {
      fi = random_matrix(model.total_tx(), model.streams(i), rng);
    } else {
      fi.middleRows(model.tx_offset(i), model.tx(i)) =
          random_matrix(model.tx(i), model.streams(i), rng);
    }
    f.push_back(std::move(fi));
  }
  return f;
}

inline std::vector<CMatrix> random_decoders(const MseModel& model, Rng& rng) {
  std::vector<CMatrix> g;
  for (int i = 0; i < model.cells(); ++i) {
    g.push_back(random_matrix(model.streams(i), model.rx(i), rng));
  }
  return g;
}

/// Equal noise on every UE and partial-scheme streams.
inline MseModel toy_model(const ChannelSet& set, const AntennaProfile& profile, double noise) {
  return MseModel(set, stream_counts(profile, StreamScheme::kPartial),
                  std::vector<double>(profile.size(), noise));
}

/// Sample average of ||G_i y_i - s_i||^2 with fresh symbols, noise and channel
/// errors e_ij = a_ij A_i W B_j drawn around the fixed estimates.
inline double monte_carlo_mse(const ChannelSet& set, const MseModel& model,
                              const std::vector<CMatrix>& f, const std::vector<CMatrix>& g,
                              int samples, Rng& rng) {
  const int n = set.cells();
  double acc = 0.0;
  for (int s = 0; s < samples; ++s) {
    std::vector<CVector> sym;
    CVector x = CVector::Zero(set.total_tx());
    for (int j = 0; j < n; ++j) {
      sym.push_back(complex_gaussian(model.streams(j), 1, 1.0, rng).col(0));
      x += f[j] * sym.back();
    }
    for (int i = 0; i < n; ++i) {
      CMatrix h = set.stacked_est(i);
      if (set.error_variance > 0.0) {
        for (int j = 0; j < n; ++j) {
          const CMatrix w = complex_gaussian(set.rx(i), set.tx(j), set.error_variance, rng);
          h.middleCols(set.tx_offset(j), set.tx(j)) +=
              set.amplitude(i, j) * (set.rx_error_factor[i] * w * set.tx_corr_sqrt[j]);
        }
      }
      const CVector y = h * x + complex_gaussian(set.rx(i), 1, model.noise_var(i), rng).col(0);
      acc += (g[i] * y - sym[i]).squaredNorm();
    }
  }
  return acc / samples;
}

/// Central difference of xi along `direction`. xi is a convex quadratic in F
/// for fixed G and Lambda, so the difference is exact up to rounding.
inline double directional_derivative(const MseModel& model, const std::vector<CMatrix>& f,
                                     const std::vector<CMatrix>& g,
                                     const std::vector<double>& lambda,
                                     const std::vector<double>& powers,
                                     const std::vector<CMatrix>& direction) {
  constexpr double kStep = 1e-5;
  auto plus = f;
  auto minus = f;
  for (std::size_t i = 0; i < f.size(); ++i) {
    plus[i] += kStep * direction[i];
    minus[i] -= kStep * direction[i];
  }
  return (augmented_cost(model, plus, g, lambda, powers) -
          augmented_cost(model, minus, g, lambda, powers)) /
         (2.0 * kStep);
}

/// Random feasible direction with unit total Frobenius norm.
inline std::vector<CMatrix> unit_direction(const MseModel& model, Cooperation c, Rng& rng) {
  auto d = random_precoders(model, c, rng);
  double norm_sq = 0.0;
  for (const auto& m : d) norm_sq += m.squaredNorm();
  for (auto& m : d) m /= std::sqrt(norm_sq);
  return d;
}

}  // namespace hetnet::testing
