#include "hetnet/channel.hpp"

#include <bit>
#include <cmath>
#include <istream>
#include <numeric>
#include <ostream>

#include "hetnet/errors.hpp"
#include "hetnet/rng.hpp"

namespace hetnet {

const char* to_string(ChannelKind kind) {
  return kind == ChannelKind::kUncorrelated ? "uncorrelated" : "explicit_corr";
}

ChannelSet::ChannelSet(std::vector<int> tx_antennas, std::vector<int> rx_antennas)
    : tx_(std::move(tx_antennas)), rx_(std::move(rx_antennas)) {
  if (tx_.size() != rx_.size()) {
    throw DimensionMismatch("ChannelSet: tx and rx antenna lists differ in length");
  }
  const std::size_t n = tx_.size();
  offsets_.resize(n);
  std::exclusive_scan(tx_.begin(), tx_.end(), offsets_.begin(), 0);
  total_tx_ = std::accumulate(tx_.begin(), tx_.end(), 0);
  true_.resize(n * n);
  est_.resize(n * n);
  err_.resize(n * n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      true_[i * n + j] = CMatrix::Zero(rx_[i], tx_[j]);
      est_[i * n + j] = CMatrix::Zero(rx_[i], tx_[j]);
      err_[i * n + j] = CMatrix::Zero(rx_[i], tx_[j]);
    }
  }
  amplitude = RMatrix::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  for (std::size_t i = 0; i < n; ++i) {
    rx_error_factor.push_back(CMatrix::Identity(rx_[i], rx_[i]));
    rx_corr.push_back(CMatrix::Identity(rx_[i], rx_[i]));
    tx_corr_sqrt.push_back(CMatrix::Identity(tx_[i], tx_[i]));
    tx_corr.push_back(CMatrix::Identity(tx_[i], tx_[i]));
  }
}

CMatrix ChannelSet::stacked_true(int i) const {
  CMatrix out(rx(i), total_tx_);
  for (int j = 0; j < cells(); ++j) {
    out.middleCols(tx_offset(j), tx(j)) = true_link(i, j);
  }
  return out;
}

CMatrix ChannelSet::stacked_est(int i) const {
  CMatrix out(rx(i), total_tx_);
  for (int j = 0; j < cells(); ++j) {
    out.middleCols(tx_offset(j), tx(j)) = est_link(i, j);
  }
  return out;
}

CMatrix toeplitz_corr(int n, double rho) {
  if (rho < 0.0 || rho >= 1.0) {
    throw PreconditionViolation("toeplitz_corr: rho must lie in [0, 1)");
  }
  CMatrix r(n, n);
  for (int a = 0; a < n; ++a) {
    for (int b = 0; b < n; ++b) r(a, b) = std::pow(rho, std::abs(a - b));
  }
  return r;
}

ChannelSet gen_true_channels(const RMatrix& amplitude, const ChannelModelSpec& spec,
                             const AntennaProfile& profile, std::uint64_t seed) {
  const int n = static_cast<int>(profile.size());
  if (amplitude.rows() != n || amplitude.cols() != n) {
    throw DimensionMismatch("gen_true_channels: amplitude table does not match profile");
  }
  std::vector<int> tx;
  std::vector<int> rx;
  for (const auto& c : profile) {
    tx.push_back(c.tx);
    rx.push_back(c.rx);
  }
  ChannelSet set(tx, rx);
  set.amplitude = amplitude;

  const double rho = spec.rho();
  std::vector<CMatrix> rx_sqrt;
  for (int i = 0; i < n; ++i) {
    set.rx_corr[static_cast<std::size_t>(i)] = toeplitz_corr(rx[static_cast<std::size_t>(i)], rho);
    set.tx_corr[static_cast<std::size_t>(i)] = toeplitz_corr(tx[static_cast<std::size_t>(i)], rho);
    rx_sqrt.push_back(numerics::hermitian_sqrt(set.rx_corr[static_cast<std::size_t>(i)]));
    set.tx_corr_sqrt[static_cast<std::size_t>(i)] =
        numerics::hermitian_sqrt(set.tx_corr[static_cast<std::size_t>(i)]);
  }

  Rng rng(seed);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      const CMatrix hw = complex_gaussian(set.rx(i), set.tx(j), 1.0, rng);
      CMatrix h = amplitude(i, j) * (rx_sqrt[static_cast<std::size_t>(i)] * hw *
                                     set.tx_corr_sqrt[static_cast<std::size_t>(j)]);
      set.est_link(i, j) = h;
      set.true_link(i, j) = std::move(h);
    }
  }
  return set;
}

ChannelSet gen_true_channels(const Layout& layout, const ChannelModelSpec& spec,
                             const AntennaProfile& profile, std::uint64_t seed) {
  const RMatrix loss_db = layout.link_pathloss_db + layout.link_shadow_db;
  const RMatrix amplitude =
      loss_db.unaryExpr([](double db) { return std::pow(10.0, -db / 20.0); });
  return gen_true_channels(amplitude, spec, profile, seed);
}

ChannelSet gen_csi_error(ChannelSet channels, const ChannelModelSpec& spec,
                         std::uint64_t seed) {
  const double var = spec.csi_error_variance;
  if (var < 0.0) throw PreconditionViolation("gen_csi_error: negative error variance");
  const int n = channels.cells();
  channels.error_variance = var;

  for (int i = 0; i < n; ++i) {
    const int r = channels.rx(i);
    if (spec.kind == ChannelKind::kExplicitCorrelation) {
      const CMatrix& rr = channels.rx_corr[static_cast<std::size_t>(i)];
      Eigen::LLT<CMatrix> llt(rr);
      const double min_diag = llt.matrixL().toDenseMatrix().diagonal().cwiseAbs().minCoeff();
      if (llt.info() != Eigen::Success || min_diag < 1e-7) {
        throw SingularCorrelation("gen_csi_error: receive correlation of UE " +
                                  std::to_string(i + 1) + " is numerically singular");
      }
      const CMatrix rr_inv = llt.solve(CMatrix::Identity(r, r));
      channels.rx_error_factor[static_cast<std::size_t>(i)] =
          (CMatrix::Identity(r, r) + var * rr_inv).inverse();
    } else {
      channels.rx_error_factor[static_cast<std::size_t>(i)] = CMatrix::Identity(r, r);
    }
  }

  Rng rng(seed);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      CMatrix e;
      if (var == 0.0) {
        e = CMatrix::Zero(channels.rx(i), channels.tx(j));
      } else {
        const CMatrix w = complex_gaussian(channels.rx(i), channels.tx(j), var, rng);
        if (spec.kind == ChannelKind::kExplicitCorrelation) {
          e = channels.amplitude(i, j) *
              (channels.rx_error_factor[static_cast<std::size_t>(i)] * w *
               channels.tx_corr_sqrt[static_cast<std::size_t>(j)]);
        } else {
          e = channels.amplitude(i, j) * w;
        }
      }
      channels.est_link(i, j) = channels.true_link(i, j) - e;
      channels.error_link(i, j) = std::move(e);
    }
  }
  return channels;
}

ChannelSet make_channels(const Layout& layout, const ChannelModelSpec& spec,
                         const AntennaProfile& profile, std::uint64_t drop_seed) {
  ChannelSet set = gen_true_channels(layout, spec, profile,
                                     split_seed(drop_seed, SeedStream::kChannel));
  return gen_csi_error(std::move(set), spec, split_seed(drop_seed, SeedStream::kCsiError));
}

namespace {

constexpr char kMagic[4] = {'H', 'N', 'C', 'S'};

void put_u32(std::ostream& out, std::uint32_t v) {
  char b[4];
  for (int k = 0; k < 4; ++k) b[k] = static_cast<char>((v >> (8 * k)) & 0xFFu);
  out.write(b, 4);
}

void put_u64(std::ostream& out, std::uint64_t v) {
  char b[8];
  for (int k = 0; k < 8; ++k) b[k] = static_cast<char>((v >> (8 * k)) & 0xFFu);
  out.write(b, 8);
}

void put_f32(std::ostream& out, float v) { put_u32(out, std::bit_cast<std::uint32_t>(v)); }
void put_f64(std::ostream& out, double v) { put_u64(out, std::bit_cast<std::uint64_t>(v)); }

std::uint64_t get_bytes(std::istream& in, int count) {
  unsigned char b[8] = {};
  if (!in.read(reinterpret_cast<char*>(b), count)) {
    throw IoError("read_channel_set: truncated input");
  }
  std::uint64_t v = 0;
  for (int k = 0; k < count; ++k) v |= static_cast<std::uint64_t>(b[k]) << (8 * k);
  return v;
}

std::uint32_t get_u32(std::istream& in) { return static_cast<std::uint32_t>(get_bytes(in, 4)); }
float get_f32(std::istream& in) { return std::bit_cast<float>(get_u32(in)); }
double get_f64(std::istream& in) { return std::bit_cast<double>(get_bytes(in, 8)); }

void put_link(std::ostream& out, const CMatrix& m) {
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      put_f32(out, static_cast<float>(m(r, c).real()));
      put_f32(out, static_cast<float>(m(r, c).imag()));
    }
  }
}

void get_link(std::istream& in, CMatrix& m) {
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      const float re = get_f32(in);
      const float im = get_f32(in);
      m(r, c) = {re, im};
    }
  }
}

}  // namespace

void write_channel_set(std::ostream& out, const ChannelSet& channels,
                       const ChannelModelSpec& spec) {
  const int n = channels.cells();
  out.write(kMagic, 4);
  put_u32(out, 1);
  put_u32(out, static_cast<std::uint32_t>(n));
  put_u32(out, spec.kind == ChannelKind::kUncorrelated ? 0u : 1u);
  put_f64(out, spec.rho());
  put_f64(out, channels.error_variance);
  for (int i = 0; i < n; ++i) put_u32(out, static_cast<std::uint32_t>(channels.rx(i)));
  for (int j = 0; j < n; ++j) put_u32(out, static_cast<std::uint32_t>(channels.tx(j)));
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) put_f64(out, channels.amplitude(i, j));
  }
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) put_link(out, channels.true_link(i, j));
  }
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) put_link(out, channels.est_link(i, j));
  }
  if (!out) throw IoError("write_channel_set: stream write failed");
}

ChannelSet read_channel_set(std::istream& in) {
  char magic[4];
  if (!in.read(magic, 4) || std::string_view(magic, 4) != std::string_view(kMagic, 4)) {
    throw IoError("read_channel_set: bad magic");
  }
  if (get_u32(in) != 1) throw IoError("read_channel_set: unsupported version");
  const int n = static_cast<int>(get_u32(in));
  ChannelModelSpec spec;
  spec.kind = get_u32(in) == 0 ? ChannelKind::kUncorrelated : ChannelKind::kExplicitCorrelation;
  spec.corr_coefficient = get_f64(in);
  spec.csi_error_variance = get_f64(in);
  AntennaProfile profile(static_cast<std::size_t>(n));
  for (auto& c : profile) c.rx = static_cast<int>(get_u32(in));
  for (auto& c : profile) c.tx = static_cast<int>(get_u32(in));
  for (auto& c : profile) c.streams = std::min(c.tx, c.rx);
  RMatrix amplitude(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) amplitude(i, j) = get_f64(in);
  }
  // Rebuild the correlation and error statistics, then overwrite the links.
  ChannelModelSpec no_error = spec;
  no_error.csi_error_variance = 0.0;
  ChannelSet set = gen_csi_error(gen_true_channels(amplitude, spec, profile, 0), no_error, 0);
  ChannelSet stats = gen_csi_error(set, spec, 0);
  set.rx_error_factor = stats.rx_error_factor;
  set.error_variance = spec.csi_error_variance;
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) get_link(in, set.true_link(i, j));
  }
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      get_link(in, set.est_link(i, j));
      set.error_link(i, j) = set.true_link(i, j) - set.est_link(i, j);
    }
  }
  return set;
}

}  // namespace hetnet
