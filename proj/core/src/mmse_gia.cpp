#include "hetnet/mmse_gia.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numeric>

#include "hetnet/errors.hpp"

namespace hetnet {

const char* to_string(Cooperation c) {
  return c == Cooperation::kWith ? "with" : "without";
}

const char* to_string(StreamScheme s) {
  return s == StreamScheme::kPartial ? "partial" : "full";
}

const char* to_string(Termination t) {
  return t == Termination::kConverged ? "converged" : "max_iterations";
}

std::vector<int> stream_counts(const AntennaProfile& profile, StreamScheme scheme) {
  std::vector<int> m;
  m.reserve(profile.size());
  for (const auto& c : profile) {
    m.push_back(scheme == StreamScheme::kPartial ? c.streams : std::min(c.tx, c.rx));
  }
  return m;
}

MseModel::MseModel(const ChannelSet& channels, std::vector<int> streams,
                   std::vector<double> noise_var, std::vector<CMatrix> source_cov)
    : streams_(std::move(streams)),
      noise_(std::move(noise_var)),
      phi_(std::move(source_cov)),
      total_tx_(channels.total_tx()),
      error_variance_(channels.error_variance) {
  const int n = channels.cells();
  if (static_cast<int>(streams_.size()) != n || static_cast<int>(noise_.size()) != n) {
    throw DimensionMismatch("MseModel: stream or noise list does not match cell count");
  }
  if (phi_.empty()) {
    for (int i = 0; i < n; ++i) phi_.push_back(CMatrix::Identity(streams_[i], streams_[i]));
  }
  if (static_cast<int>(phi_.size()) != n) {
    throw DimensionMismatch("MseModel: source covariance list does not match cell count");
  }
  for (int i = 0; i < n; ++i) {
    tx_.push_back(channels.tx(i));
    rx_.push_back(channels.rx(i));
    offsets_.push_back(channels.tx_offset(i));
    stacked_.push_back(channels.stacked_est(i));
    const auto& phi = phi_[static_cast<std::size_t>(i)];
    if (phi.rows() != streams_[i] || phi.cols() != streams_[i]) {
      throw DimensionMismatch("MseModel: source covariance of cell " +
                              std::to_string(i + 1) + " is not m_i x m_i");
    }
    const auto& a = channels.rx_error_factor[static_cast<std::size_t>(i)];
    rx_error_shape_.push_back(a * a.adjoint());
    tx_corr_.push_back(channels.tx_corr[static_cast<std::size_t>(i)]);
  }
  amplitude_sq_ = channels.amplitude.cwiseAbs2();
}

CMatrix MseModel::transmit_covariance(const std::vector<CMatrix>& precoders) const {
  CMatrix k = CMatrix::Zero(total_tx_, total_tx_);
  for (int i = 0; i < cells(); ++i) {
    const CMatrix& f = precoders[static_cast<std::size_t>(i)];
    k.noalias() += f * source_cov(i) * f.adjoint();
  }
  return k;
}

CMatrix MseModel::error_rx_moment(int i, const CMatrix& k) const {
  double weight = 0.0;
  for (int j = 0; j < cells(); ++j) {
    const auto block = k.block(tx_offset(j), tx_offset(j), tx(j), tx(j));
    weight += amplitude_sq_(i, j) *
              (tx_corr_[static_cast<std::size_t>(j)].cwiseProduct(block.transpose())).sum().real();
  }
  return (error_variance_ * weight) * rx_error_shape_[static_cast<std::size_t>(i)];
}

CMatrix MseModel::error_tx_moment(int i, const CMatrix& y) const {
  CMatrix out = CMatrix::Zero(total_tx_, total_tx_);
  // tr(A^* Y A) = tr(Y A A^*).
  const double shape =
      (y.cwiseProduct(rx_error_shape_[static_cast<std::size_t>(i)].transpose())).sum().real();
  for (int j = 0; j < cells(); ++j) {
    out.block(tx_offset(j), tx_offset(j), tx(j), tx(j)) =
        (error_variance_ * amplitude_sq_(i, j) * shape) * tx_corr_[static_cast<std::size_t>(j)];
  }
  return out;
}

CMatrix MseModel::receive_covariance(int i, const CMatrix& k) const {
  const CMatrix& h = stacked(i);
  CMatrix c = h * k * h.adjoint();
  c.diagonal().array() += noise_var(i);
  if (has_csi_error()) c += error_rx_moment(i, k);
  return c;
}

std::vector<double> MseModel::power_usage(const std::vector<CMatrix>& precoders) const {
  std::vector<double> used(static_cast<std::size_t>(cells()), 0.0);
  for (int i = 0; i < cells(); ++i) {
    const CMatrix& f = precoders[static_cast<std::size_t>(i)];
    const CMatrix& phi = source_cov(i);
    for (int j = 0; j < cells(); ++j) {
      const auto rows = f.middleRows(tx_offset(j), tx(j));
      used[static_cast<std::size_t>(j)] += (rows * phi * rows.adjoint()).trace().real();
    }
  }
  return used;
}

namespace {

void check_precoders(const MseModel& model, const std::vector<CMatrix>& f) {
  if (static_cast<int>(f.size()) != model.cells()) {
    throw DimensionMismatch("precoder list does not match cell count");
  }
  for (int i = 0; i < model.cells(); ++i) {
    const auto& fi = f[static_cast<std::size_t>(i)];
    if (fi.rows() != model.total_tx() || fi.cols() != model.streams(i)) {
      throw DimensionMismatch("precoder of cell " + std::to_string(i + 1) +
                              " is not T x m_i");
    }
  }
}

void check_decoders(const MseModel& model, const std::vector<CMatrix>& g) {
  if (static_cast<int>(g.size()) != model.cells()) {
    throw DimensionMismatch("decoder list does not match cell count");
  }
  for (int i = 0; i < model.cells(); ++i) {
    const auto& gi = g[static_cast<std::size_t>(i)];
    if (gi.rows() != model.streams(i) || gi.cols() != model.rx(i)) {
      throw DimensionMismatch("decoder of cell " + std::to_string(i + 1) +
                              " is not m_i x r_i");
    }
  }
}

}  // namespace

MseBreakdown sum_mse(const MseModel& model, const std::vector<CMatrix>& precoders,
                     const std::vector<CMatrix>& decoders) {
  check_precoders(model, precoders);
  check_decoders(model, decoders);
  const CMatrix k = model.transmit_covariance(precoders);
  MseBreakdown out;
  out.per_cell.resize(static_cast<std::size_t>(model.cells()));
  for (int i = 0; i < model.cells(); ++i) {
    const CMatrix& g = decoders[static_cast<std::size_t>(i)];
    const CMatrix& phi = model.source_cov(i);
    const CMatrix c = model.receive_covariance(i, k);
    const CMatrix gain = g * model.stacked(i) * precoders[static_cast<std::size_t>(i)];
    const double value = phi.trace().real() - 2.0 * (gain * phi).trace().real() +
                         (g * c * g.adjoint()).trace().real();
    out.per_cell[static_cast<std::size_t>(i)] = std::max(0.0, value);
    out.total += out.per_cell[static_cast<std::size_t>(i)];
  }
  return out;
}

std::vector<CMatrix> update_decoders(const MseModel& model,
                                     const std::vector<CMatrix>& precoders) {
  check_precoders(model, precoders);
  const CMatrix k = model.transmit_covariance(precoders);
  std::vector<CMatrix> g(static_cast<std::size_t>(model.cells()));
  for (int i = 0; i < model.cells(); ++i) {
    const CMatrix c = model.receive_covariance(i, k);
    const CMatrix hf = model.stacked(i) * precoders[static_cast<std::size_t>(i)];
    // G_i = Phi_i (C_i^-1 H^_i F_i)^*.
    CMatrix solved;
    try {
      solved = numerics::hermitian_solve(c, hf);
    } catch (const SingularSystem&) {
      throw SingularSystem("update_decoders: receive covariance of cell " +
                           std::to_string(i + 1) + " is singular");
    }
    g[static_cast<std::size_t>(i)] = model.source_cov(i) * solved.adjoint();
  }
  return g;
}

LagrangeUpdate update_lagrange(const MseModel& model,
                               const std::vector<CMatrix>& precoders,
                               const std::vector<double>& powers) {
  check_precoders(model, precoders);
  const int n = model.cells();
  const int t = model.total_tx();
  const CMatrix k = model.transmit_covariance(precoders);

  CMatrix first = CMatrix::Zero(t, t);
  CMatrix w = CMatrix::Zero(t, t);
  for (int j = 0; j < n; ++j) {
    const CMatrix& h = model.stacked(j);
    const CMatrix& f = precoders[static_cast<std::size_t>(j)];
    const CMatrix& phi = model.source_cov(j);
    const CMatrix c = model.receive_covariance(j, k);
    // M_j H^_j, r_j x T.
    const CMatrix mh = numerics::hermitian_solve(c, h);
    const CMatrix hmh = h.adjoint() * mh;  // H^_j^* M_j H^_j
    // F_j Phi_j^2 (F_j^* H^_j^* M_j H^_j)
    first.noalias() += (f * phi * phi) * (f.adjoint() * hmh);
    const CMatrix y = hmh * f * phi;
    w.noalias() += y * y.adjoint();
  }
  const CMatrix d = first - k * w;

  LagrangeUpdate out;
  out.multipliers.resize(static_cast<std::size_t>(n));
  out.raw.resize(static_cast<std::size_t>(n));
  for (int j = 0; j < n; ++j) {
    const Complex tr = d.block(model.tx_offset(j), model.tx_offset(j), model.tx(j),
                               model.tx(j)).trace();
    const double mag = std::abs(tr);
    if (mag > 0.0) {
      out.max_imag_residue = std::max(out.max_imag_residue, std::abs(tr.imag()) / mag);
    }
    const double lambda = tr.real() / powers[static_cast<std::size_t>(j)];
    out.raw[static_cast<std::size_t>(j)] = lambda;
    out.multipliers[static_cast<std::size_t>(j)] =
        std::isfinite(lambda) && lambda > kMinMultiplier ? lambda : kMinMultiplier;
  }
  return out;
}

namespace {

struct PrecoderSystem {
  CMatrix gram;  // sum_k (Z_k^* Z_k + <E_k^* G_k^* G_k E_k>), Lambda excluded
  CMatrix rhs;   // [H^_1^* G_1^*, ..., H^_L^* G_L^*]
};

PrecoderSystem precoder_system(const MseModel& model, const std::vector<CMatrix>& decoders) {
  check_decoders(model, decoders);
  const int n = model.cells();
  const int t = model.total_tx();
  PrecoderSystem sys;
  sys.gram = CMatrix::Zero(t, t);
  sys.rhs.resize(t, std::accumulate(decoders.begin(), decoders.end(), Eigen::Index{0},
                                    [](Eigen::Index s, const CMatrix& g) { return s + g.rows(); }));
  Eigen::Index col = 0;
  for (int k = 0; k < n; ++k) {
    const CMatrix& g = decoders[static_cast<std::size_t>(k)];
    const CMatrix z = g * model.stacked(k);  // m_k x T
    sys.gram.noalias() += z.adjoint() * z;
    if (model.has_csi_error()) sys.gram += model.error_tx_moment(k, g.adjoint() * g);
    sys.rhs.middleCols(col, g.rows()) = z.adjoint();
    col += g.rows();
  }
  return sys;
}

CMatrix with_multipliers(const MseModel& model, CMatrix a, const std::vector<double>& multipliers) {
  for (int j = 0; j < model.cells(); ++j) {
    a.diagonal().segment(model.tx_offset(j), model.tx(j)).array() +=
        multipliers[static_cast<std::size_t>(j)];
  }
  return a;
}

std::vector<CMatrix> solve_precoders(const MseModel& model, const PrecoderSystem& sys,
                                     const std::vector<double>& multipliers,
                                     Cooperation cooperation) {
  const int n = model.cells();
  const int t = model.total_tx();
  const CMatrix a = with_multipliers(model, sys.gram, multipliers);
  std::vector<CMatrix> f(static_cast<std::size_t>(n));
  Eigen::Index col = 0;
  if (cooperation == Cooperation::kWith) {
    const CMatrix solved = numerics::psd_solve(a, sys.rhs);
    for (int i = 0; i < n; ++i) {
      f[static_cast<std::size_t>(i)] = solved.middleCols(col, model.streams(i));
      col += model.streams(i);
    }
    return f;
  }
  for (int i = 0; i < n; ++i) {
    const int off = model.tx_offset(i);
    const int ti = model.tx(i);
    CMatrix fi = CMatrix::Zero(t, model.streams(i));
    fi.middleRows(off, ti) = numerics::psd_solve(a.block(off, off, ti, ti),
                                                 sys.rhs.block(off, col, ti, model.streams(i)));
    f[static_cast<std::size_t>(i)] = std::move(fi);
    col += model.streams(i);
  }
  return f;
}

/// Without cooperation BS i's power depends on lambda_i alone:
///   p_i(lambda) = sum_k q_k / (d_k + lambda)^2
/// with B_ii = U diag(d) U^* and q = diag(U^* r_i Phi_i r_i^* U). p_i is
/// decreasing, so bisection in log(lambda) finds p_i = P_i.
std::vector<double> secular_multipliers(const MseModel& model, const PrecoderSystem& sys,
                                        const std::vector<double>& powers) {
  std::vector<double> out(static_cast<std::size_t>(model.cells()), kMinMultiplier);
  Eigen::Index col = 0;
  for (int i = 0; i < model.cells(); ++i) {
    const int off = model.tx_offset(i);
    const int ti = model.tx(i);
    const int mi = model.streams(i);
    Eigen::SelfAdjointEigenSolver<CMatrix> eig(sys.gram.block(off, off, ti, ti));
    const CMatrix c = eig.eigenvectors().adjoint() * sys.rhs.block(off, col, ti, mi);
    col += mi;
    const RVector q = (c * model.source_cov(i) * c.adjoint()).diagonal().real();
    const RVector d = eig.eigenvalues().cwiseMax(0.0);
    const auto power = [&](double lambda) {
      return (q.array() / (d.array() + lambda).square()).sum();
    };
    const double target = powers[static_cast<std::size_t>(i)];
    if (!(power(kMinMultiplier) > target)) continue;
    double lo = std::log(kMinMultiplier);
    double hi = std::log(std::max(std::sqrt(q.sum() / target), kMinMultiplier) * 2.0);
    for (int it = 0; it < 200 && hi - lo > 1e-15 * std::max(1.0, std::abs(hi)); ++it) {
      const double mid = 0.5 * (lo + hi);
      (power(std::exp(mid)) > target ? lo : hi) = mid;
    }
    out[static_cast<std::size_t>(i)] = std::exp(0.5 * (lo + hi));
  }
  return out;
}

/// With cooperation every lambda couples through A^-1. The multipliers
/// maximize the concave dual
///   g(lambda) = min_F xi = c - Re tr(Phi R^* A^-1 R) - sum_j lambda_j P_j,
/// whose gradient is p(lambda) - P, so at the maximizer over lambda >= floor
/// every BS with lambda_j above the floor spends exactly P_j. Steps are Newton
/// on log(lambda) for the free BSs using
///   dp_j / dlambda_l = -2 Re sum_{a in j, b in l} N_ab S_ba,
/// N = A^-1, S = sum_i F_i Phi_i F_i^*. g itself is too rounding-prone near
/// the floor (A is then nearly singular), so a trial is accepted while the
/// slope of g along the displacement is still nonnegative (by concavity g has
/// then risen) or when it halves the power residual. The second test keeps
/// full steps that land just past the maximizer, where the slope sign is
/// rounding noise; without it convergence degrades to linear.
std::vector<double> newton_multipliers(const MseModel& model, const PrecoderSystem& sys,
                                       const std::vector<double>& powers,
                                       std::vector<double> lambda) {
  const int n = model.cells();
  const int t = model.total_tx();
  Eigen::Index stream_total = sys.rhs.cols();
  CMatrix phi = CMatrix::Zero(stream_total, stream_total);
  Eigen::Index col = 0;
  for (int i = 0; i < n; ++i) {
    phi.block(col, col, model.streams(i), model.streams(i)) = model.source_cov(i);
    col += model.streams(i);
  }
  for (double& l : lambda) l = std::max(l, kMinMultiplier);

  struct Point {
    std::vector<double> lambda;
    std::vector<double> p;
    CMatrix inverse;
    CMatrix cov;
  };
  const auto evaluate = [&](std::vector<double> lam) {
    Point pt;
    const CMatrix a = with_multipliers(model, sys.gram, lam);
    pt.inverse = numerics::psd_solve(a, CMatrix::Identity(t, t));
    const CMatrix f = pt.inverse * sys.rhs;
    pt.cov = f * phi * f.adjoint();
    pt.p.resize(static_cast<std::size_t>(n));
    for (int j = 0; j < n; ++j) {
      pt.p[static_cast<std::size_t>(j)] =
          pt.cov.diagonal().segment(model.tx_offset(j), model.tx(j)).real().sum();
    }
    pt.lambda = std::move(lam);
    return pt;
  };
  const auto at_floor = [](double l) { return l <= kMinMultiplier; };
  // Worst |log(p_j / P_j)| over the BSs that must meet their budget.
  const auto residual = [&](const Point& pt) {
    double worst = 0.0;
    for (int j = 0; j < n; ++j) {
      const auto idx = static_cast<std::size_t>(j);
      const double r = std::log(pt.p[idx] / powers[idx]);
      if (at_floor(pt.lambda[idx]) && r < 0.0) continue;
      worst = std::max(worst, std::abs(r));
    }
    return worst;
  };

  Point cur = evaluate(std::move(lambda));
  for (int it = 0; it < 40 && residual(cur) > 1e-8; ++it) {
    std::vector<int> free;
    for (int j = 0; j < n; ++j) {
      const auto idx = static_cast<std::size_t>(j);
      if (!at_floor(cur.lambda[idx]) || cur.p[idx] > powers[idx]) free.push_back(j);
    }
    if (free.empty()) break;
    const auto nf = static_cast<Eigen::Index>(free.size());
    RMatrix jac(nf, nf);
    RVector rhs(nf);
    for (Eigen::Index a = 0; a < nf; ++a) {
      const int j = free[static_cast<std::size_t>(a)];
      const auto jdx = static_cast<std::size_t>(j);
      rhs(a) = -std::log(cur.p[jdx] / powers[jdx]);
      for (Eigen::Index b = 0; b < nf; ++b) {
        const int l = free[static_cast<std::size_t>(b)];
        const auto nb =
            cur.inverse.block(model.tx_offset(j), model.tx_offset(l), model.tx(j), model.tx(l));
        const auto sb =
            cur.cov.block(model.tx_offset(l), model.tx_offset(j), model.tx(l), model.tx(j));
        const double dp = -2.0 * (nb.cwiseProduct(sb.transpose())).sum().real();
        jac(a, b) = dp * cur.lambda[static_cast<std::size_t>(l)] / cur.p[jdx];
      }
    }
    RVector step = jac.fullPivLu().solve(rhs);
    if (!step.allFinite()) break;
    const double longest = step.cwiseAbs().maxCoeff();
    if (longest > 4.0) step *= 4.0 / longest;

    bool improved = false;
    for (double scale = 1.0; scale > 1e-4; scale *= 0.5) {
      std::vector<double> trial = cur.lambda;
      for (Eigen::Index a = 0; a < nf; ++a) {
        const auto idx = static_cast<std::size_t>(free[static_cast<std::size_t>(a)]);
        trial[idx] = std::max(kMinMultiplier, cur.lambda[idx] * std::exp(scale * step(a)));
      }
      Point next = evaluate(std::move(trial));
      double slope = 0.0;
      for (int j = 0; j < n; ++j) {
        const auto idx = static_cast<std::size_t>(j);
        slope += (next.lambda[idx] - cur.lambda[idx]) * (next.p[idx] - powers[idx]);
      }
      if (slope >= 0.0 || residual(next) <= 0.5 * residual(cur)) {
        cur = std::move(next);
        improved = true;
        break;
      }
    }
    // No ascent left at rounding level; the caller's rescale closes any gap.
    if (!improved) break;
  }
  return std::move(cur.lambda);
}

}  // namespace

std::vector<CMatrix> update_precoders(const MseModel& model,
                                      const std::vector<CMatrix>& decoders,
                                      const std::vector<double>& multipliers,
                                      Cooperation cooperation) {
  return solve_precoders(model, precoder_system(model, decoders), multipliers, cooperation);
}

namespace {

std::vector<double> matched_multipliers(const MseModel& model, const PrecoderSystem& sys,
                                        const std::vector<double>& powers,
                                        Cooperation cooperation,
                                        const std::vector<double>& start) {
  if (cooperation == Cooperation::kWithout) return secular_multipliers(model, sys, powers);
  std::vector<double> lambda = start;
  if (static_cast<int>(lambda.size()) != model.cells()) {
    // Scale of the Gram diagonal per BS as a neutral starting point.
    lambda.assign(static_cast<std::size_t>(model.cells()), kMinMultiplier);
    for (int j = 0; j < model.cells(); ++j) {
      lambda[static_cast<std::size_t>(j)] = std::max(
          kMinMultiplier,
          sys.gram.diagonal().segment(model.tx_offset(j), model.tx(j)).real().mean());
    }
  }
  return newton_multipliers(model, sys, powers, std::move(lambda));
}

}  // namespace

std::vector<double> power_matched_multipliers(const MseModel& model,
                                              const std::vector<CMatrix>& decoders,
                                              const std::vector<double>& powers,
                                              Cooperation cooperation,
                                              const std::vector<double>& start) {
  return matched_multipliers(model, precoder_system(model, decoders), powers, cooperation,
                             start);
}

void rescale_to_power(const MseModel& model, std::vector<CMatrix>& precoders,
                      const std::vector<double>& powers) {
  const std::vector<double> used = model.power_usage(precoders);
  for (int j = 0; j < model.cells(); ++j) {
    const double u = used[static_cast<std::size_t>(j)];
    if (!(u > 0.0)) continue;
    const double scale = std::sqrt(powers[static_cast<std::size_t>(j)] / u);
    for (auto& f : precoders) f.middleRows(model.tx_offset(j), model.tx(j)) *= scale;
  }
}

double augmented_cost(const MseModel& model, const std::vector<CMatrix>& precoders,
                      const std::vector<CMatrix>& decoders,
                      const std::vector<double>& multipliers,
                      const std::vector<double>& powers) {
  const double eta = sum_mse(model, precoders, decoders).total;
  const std::vector<double> used = model.power_usage(precoders);
  double penalty = 0.0;
  for (int j = 0; j < model.cells(); ++j) {
    const auto idx = static_cast<std::size_t>(j);
    penalty += multipliers[idx] * (used[idx] - powers[idx]);
  }
  return eta + penalty;
}

std::vector<CMatrix> initial_precoders(const MseModel& model,
                                       const std::vector<double>& powers) {
  std::vector<CMatrix> f(static_cast<std::size_t>(model.cells()));
  for (int i = 0; i < model.cells(); ++i) {
    const CMatrix direct = model.stacked(i).middleCols(model.tx_offset(i), model.tx(i));
    CMatrix fi = CMatrix::Zero(model.total_tx(), model.streams(i));
    fi.middleRows(model.tx_offset(i), model.tx(i)) =
        numerics::dominant_right_singular_vectors(direct, model.streams(i));
    f[static_cast<std::size_t>(i)] = std::move(fi);
  }
  rescale_to_power(model, f, powers);
  return f;
}

std::string history_to_csv(const SolveHistory& history) {
  std::string out = "iteration,eta,max_power_violation\n";
  char line[128];
  for (std::size_t k = 0; k < history.eta.size(); ++k) {
    const double violation =
        k == 0 || k > history.max_power_violation.size() ? 0.0
                                                          : history.max_power_violation[k - 1];
    std::snprintf(line, sizeof line, "%zu,%.17g,%.17g\n", k, history.eta[k], violation);
    out += line;
  }
  return out;
}

namespace {

double max_violation(const std::vector<double>& used, const std::vector<double>& powers) {
  double worst = 0.0;
  for (std::size_t j = 0; j < used.size(); ++j) {
    worst = std::max(worst, std::abs(used[j] - powers[j]) / powers[j]);
  }
  return worst;
}

}  // namespace

namespace {

struct DecoderStep {
  std::vector<CMatrix> decoders;
  double eta_before = 0.0;  // new precoders, previous decoders
  double eta = 0.0;         // new precoders, new decoders
};

/// Wiener decoders for `f` plus the sum MSE with the previous and the new
/// decoders; both share K and every C_i.
DecoderStep decoder_step(const MseModel& model, const std::vector<CMatrix>& f,
                         const std::vector<CMatrix>* previous) {
  const CMatrix k = model.transmit_covariance(f);
  DecoderStep out;
  out.decoders.resize(static_cast<std::size_t>(model.cells()));
  const auto cell_mse = [](const CMatrix& g, const CMatrix& c, const CMatrix& hf,
                           const CMatrix& phi) {
    const double value = phi.trace().real() - 2.0 * (g * hf * phi).trace().real() +
                         (g * c * g.adjoint()).trace().real();
    return std::max(0.0, value);
  };
  for (int i = 0; i < model.cells(); ++i) {
    const auto idx = static_cast<std::size_t>(i);
    const CMatrix c = model.receive_covariance(i, k);
    const CMatrix hf = model.stacked(i) * f[idx];
    const CMatrix& phi = model.source_cov(i);
    if (previous != nullptr) out.eta_before += cell_mse((*previous)[idx], c, hf, phi);
    CMatrix solved;
    try {
      solved = numerics::hermitian_solve(c, hf);
    } catch (const SingularSystem&) {
      throw SingularSystem("update_decoders: receive covariance of cell " +
                           std::to_string(i + 1) + " is singular");
    }
    out.decoders[idx] = phi * solved.adjoint();
    out.eta += cell_mse(out.decoders[idx], c, hf, phi);
  }
  return out;
}

}  // namespace

GiaResult run_gia(const MseModel& model, const std::vector<double>& powers,
                  const GiaOptions& opts) {
  if (static_cast<int>(powers.size()) != model.cells()) {
    throw DimensionMismatch("run_gia: power list does not match cell count");
  }
  GiaResult result;
  SolveHistory& hist = result.history;

  std::vector<CMatrix> f = initial_precoders(model, powers);
  DecoderStep step = decoder_step(model, f, nullptr);
  std::vector<CMatrix> g = std::move(step.decoders);
  double eta = step.eta;
  hist.eta.push_back(eta);

  std::vector<double> lambda(static_cast<std::size_t>(model.cells()), kMinMultiplier);
  std::vector<double> warm;

  for (int it = 1; it <= opts.max_iters; ++it) {
    if (opts.multiplier_rule == MultiplierRule::kClosedForm) {
      lambda = update_lagrange(model, f, powers).multipliers;
      f = update_precoders(model, g, lambda, opts.cooperation);
    } else {
      const PrecoderSystem sys = precoder_system(model, g);
      lambda = matched_multipliers(model, sys, powers, opts.cooperation, warm);
      warm = lambda;
      f = solve_precoders(model, sys, lambda, opts.cooperation);
    }
    if (opts.rescale_to_power) rescale_to_power(model, f, powers);
    const std::vector<double> used = model.power_usage(f);
    hist.max_power_violation.push_back(max_violation(used, powers));
    hist.power_usage.push_back(used);

    step = decoder_step(model, f, &g);
    g = std::move(step.decoders);
    hist.eta_before_decoder.push_back(step.eta_before);
    const double next = step.eta;
    hist.eta.push_back(next);
    hist.iterations = it;
    const double change = std::abs(next - eta) / std::max(eta, std::numeric_limits<double>::min());
    eta = next;
    if (change < opts.convergence_tol) {
      hist.termination = Termination::kConverged;
      break;
    }
  }

  result.transceivers.precoders = std::move(f);
  result.transceivers.decoders = update_decoders(model, result.transceivers.precoders);
  result.transceivers.multipliers = std::move(lambda);
  for (int i = 0; i < model.cells(); ++i) {
    result.transceivers.source_cov.push_back(model.source_cov(i));
  }
  return result;
}

GiaResult run_gia(const ChannelSet& channels, const AntennaProfile& profile,
                  const std::vector<double>& powers,
                  const std::vector<double>& noise_vars, const GiaOptions& opts) {
  MseModel model(channels, stream_counts(profile, opts.scheme), noise_vars,
                 opts.source_covariances);
  return run_gia(model, powers, opts);
}

}  // namespace hetnet
