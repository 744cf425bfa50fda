#include "hetnet/metrics.hpp"

#include <algorithm>
#include <cmath>

#include "hetnet/errors.hpp"
#include "hetnet/rng.hpp"

namespace hetnet {

namespace {

CMatrix source_sqrt(const TransceiverSet& design, int i) {
  const auto idx = static_cast<std::size_t>(i);
  const CMatrix& f = design.precoders[idx];
  if (design.source_cov.empty() || design.source_cov[idx].size() == 0) {
    return CMatrix::Identity(f.cols(), f.cols());
  }
  return numerics::hermitian_sqrt(design.source_cov[idx]);
}

void check_design(const ChannelSet& channels, const TransceiverSet& design,
                  const std::vector<double>& noise_vars) {
  const auto l = static_cast<std::size_t>(channels.cells());
  if (design.precoders.size() != l || design.decoders.size() != l || noise_vars.size() != l) {
    throw DimensionMismatch("metrics: design does not match the channel set");
  }
}

}  // namespace

std::vector<double> rate_per_cell(const ChannelSet& channels, const TransceiverSet& design,
                                  const std::vector<double>& noise_vars) {
  check_design(channels, design, noise_vars);
  const int l = channels.cells();
  std::vector<CMatrix> shaped;  // F_j Phi_j^(1/2)
  for (int j = 0; j < l; ++j) {
    shaped.push_back(design.precoders[static_cast<std::size_t>(j)] * source_sqrt(design, j));
  }
  std::vector<double> rates;
  for (int i = 0; i < l; ++i) {
    const CMatrix& decoder = design.decoders[static_cast<std::size_t>(i)];
    if (decoder.norm() == 0.0) {
      rates.push_back(0.0);
      continue;
    }
    // C_i is unchanged when G_i is replaced by an orthonormal basis of its row
    // space, which keeps B_i well conditioned when some rows are negligible.
    Eigen::JacobiSVD<CMatrix> svd(decoder, Eigen::ComputeThinV);
    const RVector& sv = svd.singularValues();
    Eigen::Index rank = 0;
    while (rank < sv.size() && sv(rank) > 1e-12 * sv(0)) ++rank;
    const CMatrix g = svd.matrixV().leftCols(rank).adjoint();
    const CMatrix gh = g * channels.stacked_true(i);
    CMatrix b = noise_vars[static_cast<std::size_t>(i)] * g * g.adjoint();
    CMatrix desired;
    for (int j = 0; j < l; ++j) {
      const CMatrix link = gh * shaped[static_cast<std::size_t>(j)];
      if (j == i) {
        desired = link;
      } else {
        b.noalias() += link * link.adjoint();
      }
    }
    b = 0.5 * (b + b.adjoint()).eval();
    const CMatrix whitened = numerics::hermitian_solve(b, desired);
    CMatrix s = CMatrix::Identity(desired.cols(), desired.cols()) + desired.adjoint() * whitened;
    s = 0.5 * (s + s.adjoint()).eval();
    Eigen::LLT<CMatrix> llt(s);
    if (llt.info() != Eigen::Success) {
      throw SingularSystem("rate_per_cell: I + SINR matrix is not positive definite");
    }
    // log det via Cholesky; det(I + A^* B^-1 A) = det(I + A A^* B^-1).
    double logdet = 0.0;
    const CMatrix& lower = llt.matrixLLT();
    for (Eigen::Index k = 0; k < lower.rows(); ++k) logdet += 2.0 * std::log2(lower(k, k).real());
    rates.push_back(std::max(logdet, 0.0));
  }
  return rates;
}

double sum_rate(const ChannelSet& channels, const TransceiverSet& design,
                const std::vector<double>& noise_vars) {
  const auto rates = rate_per_cell(channels, design, noise_vars);
  double total = 0.0;
  for (double r : rates) total += r;
  return total;
}

Complex qpsk_symbol(int bit0, int bit1) {
  const double a = 1.0 / std::sqrt(2.0);
  return {bit0 == 0 ? a : -a, bit1 == 0 ? a : -a};
}

double qpsk_ber(double es_over_n0) {
  return 0.5 * std::erfc(std::sqrt(es_over_n0) / std::sqrt(2.0));
}

BerResult ber_simulation(const ChannelSet& channels, const TransceiverSet& design,
                         const std::vector<double>& noise_vars, std::int64_t n_symbols,
                         std::uint64_t seed) {
  check_design(channels, design, noise_vars);
  const int l = channels.cells();
  const auto sz = static_cast<std::size_t>(l);

  std::vector<CMatrix> shaped(sz);
  std::vector<std::vector<bool>> active(sz);
  for (int j = 0; j < l; ++j) {
    const auto idx = static_cast<std::size_t>(j);
    const CMatrix root = source_sqrt(design, j);
    shaped[idx] = design.precoders[idx] * root;
    for (Eigen::Index s = 0; s < root.cols(); ++s) {
      active[idx].push_back(root.col(s).norm() > 0.0);
    }
  }
  // effective[i][k] = G_i H_i F_k Phi_k^(1/2); derotation from the diagonal of
  // effective[i][i].
  std::vector<std::vector<CMatrix>> effective(sz);
  std::vector<CVector> derotation(sz);
  for (int i = 0; i < l; ++i) {
    const auto idx = static_cast<std::size_t>(i);
    const CMatrix gh = design.decoders[idx] * channels.stacked_true(i);
    for (int k = 0; k < l; ++k) effective[idx].push_back(gh * shaped[static_cast<std::size_t>(k)]);
    const CMatrix& self = effective[idx][idx];
    derotation[idx] = CVector::Ones(self.rows());
    for (Eigen::Index s = 0; s < self.rows() && s < self.cols(); ++s) {
      if (std::abs(self(s, s)) > 0.0) derotation[idx](s) = 1.0 / self(s, s);
    }
  }

  BerResult out;
  std::uniform_int_distribution<int> bit(0, 1);
  const std::int64_t blocks = (n_symbols + kBerBlockSymbols - 1) / kBerBlockSymbols;
  for (std::int64_t b = 0; b < blocks; ++b) {
    const auto count = static_cast<Eigen::Index>(
        std::min<std::int64_t>(kBerBlockSymbols, n_symbols - b * kBerBlockSymbols));
    Rng rng(split_seed(seed, static_cast<std::uint64_t>(b)));
    std::vector<Eigen::MatrixXi> bits0(sz);
    std::vector<Eigen::MatrixXi> bits1(sz);
    std::vector<CMatrix> symbols(sz);
    for (int k = 0; k < l; ++k) {
      const auto idx = static_cast<std::size_t>(k);
      const auto m = shaped[idx].cols();
      bits0[idx].resize(m, count);
      bits1[idx].resize(m, count);
      symbols[idx].resize(m, count);
      for (Eigen::Index c = 0; c < count; ++c) {
        for (Eigen::Index s = 0; s < m; ++s) {
          bits0[idx](s, c) = bit(rng);
          bits1[idx](s, c) = bit(rng);
          symbols[idx](s, c) = qpsk_symbol(bits0[idx](s, c), bits1[idx](s, c));
        }
      }
    }
    for (int i = 0; i < l; ++i) {
      const auto idx = static_cast<std::size_t>(i);
      const CMatrix& g = design.decoders[idx];
      CMatrix y = g * complex_gaussian(channels.rx(i), count, noise_vars[idx], rng);
      for (int k = 0; k < l; ++k) y.noalias() += effective[idx][static_cast<std::size_t>(k)] * symbols[static_cast<std::size_t>(k)];
      for (Eigen::Index s = 0; s < y.rows(); ++s) {
        if (!active[idx][static_cast<std::size_t>(s)]) continue;
        for (Eigen::Index c = 0; c < count; ++c) {
          const Complex z = y(s, c) * derotation[idx](s);
          out.bit_errors += (z.real() < 0.0 ? 1 : 0) != bits0[idx](s, c);
          out.bit_errors += (z.imag() < 0.0 ? 1 : 0) != bits1[idx](s, c);
          out.bits += 2;
        }
      }
    }
  }
  out.ber = out.bits > 0 ? static_cast<double>(out.bit_errors) / static_cast<double>(out.bits)
                         : 0.0;
  return out;
}

double mean_condition_number_db(const ChannelSet& channels) {
  double total = 0.0;
  for (int i = 0; i < channels.cells(); ++i) {
    total += numerics::condition_number_db(channels.true_link(i, i));
  }
  return channels.cells() > 0 ? total / channels.cells() : 0.0;
}

}  // namespace hetnet
