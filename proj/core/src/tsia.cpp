#include "hetnet/tsia.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>

#include "hetnet/errors.hpp"

namespace hetnet {

namespace {

constexpr double kLeakageFloor = 1e-14;

std::string cell_name(int i) { return "cell " + std::to_string(i + 1); }

}  // namespace

Feasibility check_feasibility(const AntennaProfile& profile, int l1, int l2) {
  Feasibility out;
  if (static_cast<int>(profile.size()) != l1 + l2 || l1 < 1) {
    out.reason = "antenna profile does not match L1 + L2 cells";
    return out;
  }
  const auto at = [&](int i) -> const CellAntennas& {
    return profile[static_cast<std::size_t>(i)];
  };
  const int t1 = at(0).tx;
  const int m1 = at(0).streams;

  int n = l2;
  for (int j = l1; j < l1 + l2; ++j) {
    n = std::min(n, (t1 - at(j).tx) / at(j).rx);
  }
  n = std::max(n, 0);
  out.nullified = n;
  if (l2 > 0 && n < 1) {
    out.reason = "stage 1: the mBS has no spare antennas to null any sub-system-2 pUE (n = 0)";
    return out;
  }

  // Worst case over which n pUEs end up nulled.
  std::vector<int> rx2;
  for (int j = l1; j < l1 + l2; ++j) rx2.push_back(at(j).rx);
  std::sort(rx2.rbegin(), rx2.rend());
  const int nulled_rows = std::accumulate(rx2.begin(), rx2.begin() + n, 0);
  const int t1_eq = t1 - nulled_rows;
  if (t1_eq <= 0) {
    out.reason = "stage 1: nullspace of the stacked mBS channels is empty (t1 - n r = " +
                 std::to_string(t1_eq) + ")";
    return out;
  }
  if (m1 > std::min(t1_eq, at(0).rx)) {
    out.reason = "stage 1: macro streams exceed the equivalent mBS dimension " +
                 std::to_string(t1_eq);
    return out;
  }
  const auto eff_tx = [&](int i) { return i == 0 ? t1_eq : at(i).tx; };
  for (int i = 1; i < l1; ++i) {
    if (at(i).streams > std::min(at(i).tx, at(i).rx)) {
      out.reason = "sub-system 1: " + cell_name(i) + " has more streams than antennas";
      return out;
    }
  }

  // Properness of the sub-system-1 alignment problem: free variables must
  // cover the number of zero-interference equations, for the whole set and
  // for every pair.
  long variables = 0;
  long equations = 0;
  for (int k = 0; k < l1; ++k) {
    const long m = at(k).streams;
    variables += m * (eff_tx(k) - m) + m * (at(k).rx - m);
    for (int j = 0; j < l1; ++j) {
      if (j != k) equations += m * at(j).streams;
    }
  }
  if (variables < equations) {
    out.reason = "sub-system 1: alignment is improper (" + std::to_string(variables) +
                 " variables < " + std::to_string(equations) + " equations)";
    return out;
  }
  for (int k = 0; k < l1; ++k) {
    for (int j = 0; j < l1; ++j) {
      if (j == k) continue;
      const long mk = at(k).streams;
      const long mj = at(j).streams;
      if (mk * (at(k).rx - mk) + mj * (eff_tx(j) - mj) < mk * mj) {
        out.reason = "sub-system 1: alignment between " + cell_name(j) + " and " +
                     cell_name(k) + " is improper";
        return out;
      }
    }
  }

  for (int j = l1; j < l1 + l2; ++j) {
    if (at(j).tx - m1 < at(j).streams) {
      out.reason = "stage 2: " + cell_name(j) + " transmit subspace null(G1 h_1j) has " +
                   std::to_string(at(j).tx - m1) + " dimensions < " +
                   std::to_string(at(j).streams) + " streams";
      return out;
    }
    if (n < l2 && at(j).rx - m1 < at(j).streams) {
      out.reason = "stage 2: " + cell_name(j) + " receive subspace null((h_j1 f_11)^*) has " +
                   std::to_string(at(j).rx - m1) + " dimensions < " +
                   std::to_string(at(j).streams) + " streams";
      return out;
    }
  }
  out.feasible = true;
  return out;
}

Stage1Result stage1_nullspace(const LinkView& links, int l1, int n) {
  const int l = links.cells();
  const int l2 = l - l1;
  if (n < 1 || n > l2) {
    throw PreconditionViolation("stage1_nullspace: need 1 <= n <= L2, got n = " +
                                std::to_string(n));
  }
  std::vector<int> candidates(static_cast<std::size_t>(l2));
  std::iota(candidates.begin(), candidates.end(), l1);
  std::stable_sort(candidates.begin(), candidates.end(), [&](int a, int b) {
    return links(a, 0).squaredNorm() > links(b, 0).squaredNorm();
  });
  Stage1Result out;
  out.nullified.assign(candidates.begin(), candidates.begin() + n);
  std::sort(out.nullified.begin(), out.nullified.end());

  int rows = 0;
  for (int k : out.nullified) rows += links.rx(k);
  CMatrix stacked(rows, links.tx(0));
  int r = 0;
  for (int k : out.nullified) {
    stacked.middleRows(r, links.rx(k)) = links(k, 0);
    r += links.rx(k);
  }
  try {
    out.v1 = numerics::nullspace(stacked);
  } catch (const EmptyNullspace& e) {
    throw TsiaInfeasible(std::string("stage 1: ") + e.what());
  }
  for (int j = 0; j < l; ++j) out.equivalent.push_back(links(j, 0) * out.v1);
  return out;
}

IaResult ia_leakage_iteration(const LinkView& links, const Stage1Result& stage1,
                              const std::vector<double>& powers,
                              const std::vector<int>& streams, int l1,
                              const TsiaOptions& opts) {
  // Equivalent sub-system-1 channel from transmitter j to receiver k.
  const auto raw = [&](int k, int j) -> const CMatrix& {
    return j == 0 ? stage1.equivalent[static_cast<std::size_t>(k)] : links(k, j);
  };
  // Cross links scaled to unit Frobenius norm: alignment is scale-invariant,
  // and raw large-scale gains leave the alternation badly conditioned.
  std::vector<CMatrix> unit(static_cast<std::size_t>(l1 * l1));
  for (int k = 0; k < l1; ++k) {
    for (int j = 0; j < l1; ++j) {
      if (k == j) continue;
      const double norm = raw(k, j).norm();
      unit[static_cast<std::size_t>(k * l1 + j)] = norm > 0.0 ? CMatrix(raw(k, j) / norm) : raw(k, j);
    }
  }
  const auto channel = [&](int k, int j) -> const CMatrix& {
    return k == j ? raw(k, j) : unit[static_cast<std::size_t>(k * l1 + j)];
  };
  const auto m = [&](int i) { return streams[static_cast<std::size_t>(i)]; };
  const auto weight = [&](int j) { return powers[static_cast<std::size_t>(j)] / m(j); };

  IaResult out;
  out.precoders.resize(static_cast<std::size_t>(l1));
  out.decoders.resize(static_cast<std::size_t>(l1));
  for (int j = 0; j < l1; ++j) {
    out.precoders[static_cast<std::size_t>(j)] =
        numerics::dominant_right_singular_vectors(channel(j, j), m(j));
  }

  double interference = 0.0;
  const auto forward = [&]() {
    double leakage = 0.0;
    interference = 0.0;
    for (int k = 0; k < l1; ++k) {
      CMatrix z = CMatrix::Zero(links.rx(k), links.rx(k));
      for (int j = 0; j < l1; ++j) {
        if (j == k) continue;
        const CMatrix hf = channel(k, j) * out.precoders[static_cast<std::size_t>(j)];
        z.noalias() += weight(j) * hf * hf.adjoint();
      }
      z = 0.5 * (z + z.adjoint()).eval();
      CMatrix g = numerics::smallest_eigvecs(z, m(k));
      leakage += std::max(0.0, (g * z * g.adjoint()).trace().real());
      interference += z.trace().real();
      out.decoders[static_cast<std::size_t>(k)] = std::move(g);
    }
    return leakage;
  };
  const auto reverse = [&]() {
    for (int j = 0; j < l1; ++j) {
      const int dim = static_cast<int>(channel(j, j).cols());
      CMatrix z = CMatrix::Zero(dim, dim);
      for (int k = 0; k < l1; ++k) {
        if (k == j) continue;
        const CMatrix gh = out.decoders[static_cast<std::size_t>(k)] * channel(k, j);
        z.noalias() += gh.adjoint() * gh;
      }
      z = 0.5 * (z + z.adjoint()).eval();
      out.precoders[static_cast<std::size_t>(j)] =
          numerics::smallest_eigvecs(z, m(j)).adjoint();
    }
  };

  double previous = forward();
  out.leakage.push_back(previous);
  out.iterations = 1;
  if (previous <= kLeakageFloor * interference) {
    out.converged = true;
  }
  while (!out.converged && out.iterations < opts.max_ia_iters) {
    reverse();
    const double current = forward();
    out.leakage.push_back(current);
    ++out.iterations;
    // Past perfect alignment the leakage is rounding noise and its relative
    // change never settles, so stop at that floor as well.
    if (current <= kLeakageFloor * interference ||
        std::abs(previous - current) <= opts.leakage_tol * previous) {
      out.converged = true;
    }
    previous = current;
  }
  out.relative_leakage = interference > 0.0 ? out.leakage.back() / interference : 0.0;
  return out;
}

std::vector<Stage2Cell> stage2_subsystem2(const LinkView& links, const CMatrix& macro_decoder,
                                          const CMatrix& macro_precoder,
                                          const std::vector<int>& nullified,
                                          const std::vector<int>& streams, int l1) {
  std::vector<Stage2Cell> out;
  for (int j = l1; j < links.cells(); ++j) {
    const int mj = streams[static_cast<std::size_t>(j)];
    Stage2Cell cell;
    cell.cell = j;
    CMatrix u;
    try {
      u = numerics::nullspace(macro_decoder * links(0, j));
    } catch (const EmptyNullspace&) {
      throw TsiaInfeasible("stage 2: null(G1 h_1j) is empty for " + cell_name(j));
    }
    const bool nulled = std::find(nullified.begin(), nullified.end(), j) != nullified.end();
    CMatrix receive_basis;
    CMatrix equivalent;
    if (nulled) {
      equivalent = links(j, j) * u;
    } else {
      try {
        receive_basis = numerics::nullspace((links(j, 0) * macro_precoder).adjoint());
      } catch (const EmptyNullspace&) {
        throw TsiaInfeasible("stage 2: null((h_j1 f_11)^*) is empty for " + cell_name(j));
      }
      equivalent = receive_basis.adjoint() * links(j, j) * u;
    }
    if (mj > std::min(equivalent.rows(), equivalent.cols())) {
      throw TsiaInfeasible("stage 2: equivalent channel of " + cell_name(j) +
                           " supports fewer than m_j streams");
    }
    const auto svd = numerics::top_singular_triplets(equivalent, mj);
    cell.precoder = u * svd.right;
    cell.decoder = nulled ? CMatrix(svd.left.adjoint()) : CMatrix((receive_basis * svd.left).adjoint());
    cell.singular_values = svd.values;
    out.push_back(std::move(cell));
  }
  return out;
}

std::vector<ResidualEntry> alignment_residuals(const LinkView& links,
                                               const std::vector<CMatrix>& precoders,
                                               const std::vector<CMatrix>& decoders,
                                               int l1) {
  std::vector<ResidualEntry> out;
  const auto add = [&](const char* name, int k, int j) {
    const CMatrix& g = decoders[static_cast<std::size_t>(k)];
    const CMatrix& f = precoders[static_cast<std::size_t>(j)];
    const CMatrix& h = links(k, j);
    ResidualEntry e;
    e.constraint = name;
    e.rx_cell = k;
    e.tx_cell = j;
    e.absolute = (g * h * f).norm();
    const double scale = g.norm() * h.norm() * f.norm();
    e.relative = scale > 0.0 ? e.absolute / scale : 0.0;
    out.push_back(e);
  };
  for (int k = 0; k < l1; ++k) {
    for (int j = 0; j < l1; ++j) {
      if (k != j) add("sub1_leakage", k, j);
    }
  }
  for (int k = l1; k < links.cells(); ++k) add("mbs_to_pue", k, 0);
  for (int j = l1; j < links.cells(); ++j) add("pbs_to_mue", 0, j);
  return out;
}

std::string residuals_to_csv(const std::vector<ResidualEntry>& residuals) {
  std::string out = "constraint,rx_cell,tx_cell,absolute,relative\n";
  char line[160];
  for (const auto& r : residuals) {
    std::snprintf(line, sizeof line, "%s,%d,%d,%.17g,%.17g\n", r.constraint.c_str(),
                  r.rx_cell + 1, r.tx_cell + 1, r.absolute, r.relative);
    out += line;
  }
  return out;
}

TsiaResult run_tsia(const LinkView& links, const AntennaProfile& profile,
                    const std::vector<double>& powers,
                    const std::vector<double>& noise_vars, int l1, int l2,
                    const TsiaOptions& opts) {
  const Feasibility feas = check_feasibility(profile, l1, l2);
  if (!feas.feasible) throw TsiaInfeasible("TSIA infeasible: " + feas.reason);
  const int l = l1 + l2;
  const std::vector<int> streams = stream_counts(profile, StreamScheme::kPartial);

  TsiaResult out;
  out.precoders.resize(static_cast<std::size_t>(l));
  out.decoders.resize(static_cast<std::size_t>(l));
  out.source_cov.resize(static_cast<std::size_t>(l));
  out.singular_values.resize(static_cast<std::size_t>(l));

  Stage1Result stage1;
  if (l2 > 0) {
    stage1 = stage1_nullspace(links, l1, feas.nullified);
  } else {
    stage1.v1 = CMatrix::Identity(links.tx(0), links.tx(0));
    for (int j = 0; j < l; ++j) stage1.equivalent.push_back(links(j, 0));
  }
  out.nullified = stage1.nullified;

  IaResult ia = ia_leakage_iteration(links, stage1, powers, streams, l1, opts);
  out.ia_iterations = ia.iterations;
  out.ia_converged = ia.converged;
  out.leakage = ia.leakage;
  out.relative_leakage = ia.relative_leakage;
  for (int j = 0; j < l1; ++j) {
    const auto idx = static_cast<std::size_t>(j);
    out.precoders[idx] = j == 0 ? CMatrix(stage1.v1 * ia.precoders[0]) : ia.precoders[idx];
    out.decoders[idx] = ia.decoders[idx];
    out.source_cov[idx] =
        CMatrix::Identity(streams[idx], streams[idx]) * (powers[idx] / streams[idx]);
  }

  const auto stage2 =
      stage2_subsystem2(links, out.decoders[0], out.precoders[0], stage1.nullified, streams, l1);
  for (const auto& cell : stage2) {
    const auto idx = static_cast<std::size_t>(cell.cell);
    out.precoders[idx] = cell.precoder;
    out.decoders[idx] = cell.decoder;
    out.singular_values[idx] = cell.singular_values;
    std::vector<double> gains(cell.singular_values.data(),
                              cell.singular_values.data() + cell.singular_values.size());
    if (std::any_of(gains.begin(), gains.end(), [](double g) { return !(g > 0.0); })) {
      throw TsiaInfeasible("stage 2: rank-deficient equivalent channel for " +
                           cell_name(cell.cell));
    }
    const auto wf = numerics::water_fill(gains, noise_vars[idx], powers[idx]);
    CMatrix phi = CMatrix::Zero(streams[idx], streams[idx]);
    for (int k = 0; k < streams[idx]; ++k) phi(k, k) = wf.allocations[static_cast<std::size_t>(k)];
    out.source_cov[idx] = std::move(phi);
  }

  out.residuals = alignment_residuals(links, out.precoders, out.decoders, l1);
  return out;
}

TransceiverSet to_transceivers(const ChannelSet& dims, const std::vector<CMatrix>& precoders,
                               const std::vector<CMatrix>& decoders,
                               const std::vector<CMatrix>& source_cov) {
  TransceiverSet tx;
  for (int j = 0; j < dims.cells(); ++j) {
    const auto& f = precoders[static_cast<std::size_t>(j)];
    CMatrix stacked = CMatrix::Zero(dims.total_tx(), f.cols());
    stacked.middleRows(dims.tx_offset(j), dims.tx(j)) = f;
    tx.precoders.push_back(std::move(stacked));
  }
  tx.decoders = decoders;
  tx.source_cov = source_cov;
  return tx;
}

TransceiverSet to_transceivers(const ChannelSet& dims, const TsiaResult& result) {
  return to_transceivers(dims, result.precoders, result.decoders, result.source_cov);
}

}  // namespace hetnet
