#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>

#include "hetnet/errors.hpp"
#include "hetnet/metrics.hpp"
#include "hetnet/tsia.hpp"
#include "support.hpp"

namespace hetnet {
namespace {

struct Drop {
  ScenarioConfig config;
  ChannelSet channels;
  std::vector<double> powers;
  std::vector<double> noise;
};

Drop sufficient_drop(std::uint64_t seed, double error_var = 0.0, double pico_dbm = 40.0) {
  Drop d;
  ChannelModelSpec spec;
  spec.csi_error_variance = error_var;
  d.channels = make_channels(generate_layout(d.config, seed), spec, d.config.antenna_profile, seed);
  d.powers = cell_powers_mw(d.config, pico_dbm);
  d.noise.assign(static_cast<std::size_t>(d.config.cells()), noise_variance_mw(d.config));
  return d;
}

TsiaResult design(const Drop& d, bool estimated = false) {
  return run_tsia(LinkView(d.channels, estimated), d.config.antenna_profile, d.powers, d.noise,
                  d.config.l1, d.config.l2, TsiaOptions{});
}

TEST(Feasibility, SufficientConfiguration) {
  const Feasibility f = check_feasibility(sufficient_profile(), 5, 5);
  EXPECT_TRUE(f.feasible) << f.reason;
  EXPECT_EQ(f.nullified, 1);
}

TEST(Feasibility, InsufficientConfiguration) {
  const Feasibility f = check_feasibility(insufficient_profile(), 5, 5);
  EXPECT_FALSE(f.feasible);
  EXPECT_FALSE(f.reason.empty());
}

TEST(Feasibility, LargeMacroArrayCapsAtRingSize) {
  AntennaProfile p = sufficient_profile();
  p[0].tx = 100;
  const Feasibility f = check_feasibility(p, 5, 5);
  EXPECT_TRUE(f.feasible) << f.reason;
  EXPECT_EQ(f.nullified, 5);
}

TEST(Stage1, NullsStrongestRingPico) {
  const Drop d = sufficient_drop(3);
  const LinkView links(d.channels, false);
  const Stage1Result s = stage1_nullspace(links, 5, 1);
  ASSERT_EQ(s.v1.rows(), 6);
  ASSERT_EQ(s.v1.cols(), 3);
  EXPECT_LE((s.v1.adjoint() * s.v1 - CMatrix::Identity(3, 3)).norm(), 1e-12);
  ASSERT_EQ(s.nullified.size(), 1u);
  const int k = s.nullified[0];
  for (int j = 5; j < 10; ++j) EXPECT_GE(links(k, 0).norm(), links(j, 0).norm());
  EXPECT_LE((links(k, 0) * s.v1).norm(), 1e-10 * links(k, 0).norm());
  for (int j = 0; j < 10; ++j) {
    EXPECT_LE((s.equivalent[static_cast<std::size_t>(j)] - links(j, 0) * s.v1).norm(), 1e-15);
  }
}

TEST(Stage1, RepeatedRowWidensNullspace) {
  Drop d = sufficient_drop(4);
  const int k = stage1_nullspace(LinkView(d.channels, false), 5, 1).nullified[0];
  CMatrix& h = d.channels.true_link(k, 0);
  h.row(2) = h.row(1);
  const Stage1Result s = stage1_nullspace(LinkView(d.channels, false), 5, 1);
  ASSERT_EQ(s.nullified[0], k);
  EXPECT_EQ(s.v1.cols(), 4);
  EXPECT_LE((h * s.v1).norm(), 1e-10 * h.norm());
}

TEST(Stage1, ZeroNullifiedRejected) {
  const Drop d = sufficient_drop(5);
  EXPECT_THROW(stage1_nullspace(LinkView(d.channels, false), 5, 0), PreconditionViolation);
}

Stage1Result identity_stage1(const ChannelSet& set) {
  Stage1Result s;
  s.v1 = CMatrix::Identity(set.tx(0), set.tx(0));
  for (int j = 0; j < set.cells(); ++j) s.equivalent.push_back(set.true_link(j, 0));
  return s;
}

TEST(IaLeakage, IsolatedCellsHaveNoLeakage) {
  const AntennaProfile profile = testing::uniform_profile(2, 3, 3, 2);
  const ChannelSet set = testing::toy_channels(profile, 0.0, 0.0, 6);
  const IaResult r = ia_leakage_iteration(LinkView(set, false), identity_stage1(set), {1.0, 1.0},
                                          {2, 2}, 2, TsiaOptions{});
  EXPECT_EQ(r.iterations, 1);
  EXPECT_TRUE(r.converged);
  EXPECT_EQ(r.leakage.front(), 0.0);
  for (int k = 0; k < 2; ++k) {
    const CMatrix& g = r.decoders[static_cast<std::size_t>(k)];
    EXPECT_LE((g * g.adjoint() - CMatrix::Identity(2, 2)).norm(), 1e-12);
    EXPECT_EQ((g * set.true_link(k, 1 - k) * r.precoders[static_cast<std::size_t>(1 - k)]).norm(),
              0.0);
  }
}

// First recorded leakage against an oracle built from an independent SVD
// start and the Ky Fan identity on every Z_k.
TEST(IaLeakage, FirstLeakageIsKyFanSum) {
  const AntennaProfile profile{{4, 3, 2}, {3, 3, 1}, {3, 2, 1}};
  const ChannelSet set = testing::toy_channels(profile, 0.3, 0.0, 9);
  const std::vector<double> powers{4.0, 1.0, 2.0};
  const std::vector<int> streams{2, 1, 1};
  const IaResult r = ia_leakage_iteration(LinkView(set, false), identity_stage1(set), powers,
                                          streams, 3, TsiaOptions{});
  std::vector<CMatrix> f;
  for (int j = 0; j < 3; ++j) {
    Eigen::JacobiSVD<CMatrix> svd(set.true_link(j, j), Eigen::ComputeFullV);
    f.push_back(svd.matrixV().leftCols(streams[static_cast<std::size_t>(j)]));
  }
  double expected = 0.0;
  for (int k = 0; k < 3; ++k) {
    CMatrix z = CMatrix::Zero(set.rx(k), set.rx(k));
    for (int j = 0; j < 3; ++j) {
      if (j == k) continue;
      const CMatrix h = set.true_link(k, j) / set.true_link(k, j).norm();
      const CMatrix hf = h * f[static_cast<std::size_t>(j)];
      z += powers[static_cast<std::size_t>(j)] / streams[static_cast<std::size_t>(j)] * hf *
           hf.adjoint();
    }
    const Eigen::VectorXd eig = Eigen::SelfAdjointEigenSolver<CMatrix>(z).eigenvalues();
    expected += eig.head(streams[static_cast<std::size_t>(k)]).sum();
  }
  EXPECT_NEAR(r.leakage.front(), expected, 1e-10 * (1.0 + expected));
}

TEST(IaLeakageProperty, MonotoneOnRandomNetworks) {
  Rng rng(71);
  for (int trial = 0; trial < 20; ++trial) {
    const int cells = testing::uniform_int(2, 4, rng);
    const AntennaProfile profile = testing::uniform_profile(cells, 3, 3, 1);
    const ChannelSet set = testing::toy_channels(profile, testing::uniform_real(0.1, 1.0, rng),
                                                 0.0, 500 + static_cast<std::uint64_t>(trial));
    std::vector<double> powers;
    for (int j = 0; j < cells; ++j) powers.push_back(testing::uniform_real(0.5, 5.0, rng));
    TsiaOptions opts;
    opts.max_ia_iters = 300;
    const IaResult r = ia_leakage_iteration(LinkView(set, false), identity_stage1(set), powers,
                                            std::vector<int>(static_cast<std::size_t>(cells), 1),
                                            cells, opts);
    // Rounding allowance relative to the starting leakage.
    const double slack = 1e-13 * r.leakage.front();
    for (std::size_t k = 1; k < r.leakage.size(); ++k) {
      EXPECT_LE(r.leakage[k], r.leakage[k - 1] + slack) << "trial " << trial;
    }
  }
}

TEST(Stage2, ResidualsAndRank) {
  const Drop d = sufficient_drop(6);
  const TsiaResult r = design(d);
  const LinkView links(d.channels, false);
  const CMatrix& g1 = r.decoders[0];
  const CMatrix& f11 = r.precoders[0];
  for (int j = 5; j < 10; ++j) {
    const auto idx = static_cast<std::size_t>(j);
    const CMatrix& f = r.precoders[idx];
    const CMatrix& g = r.decoders[idx];
    ASSERT_EQ(f.rows(), 3);
    ASSERT_EQ(g.cols(), 3);
    EXPECT_LE((g1 * links(0, j) * f).norm(), 1e-10 * g1.norm() * links(0, j).norm());
    const bool nulled = std::find(r.nullified.begin(), r.nullified.end(), j) != r.nullified.end();
    if (!nulled) {
      EXPECT_LE((g * links(j, 0) * f11).norm(), 1e-10 * g.norm() * links(j, 0).norm());
    }
    ASSERT_EQ(r.singular_values[idx].size(), f.cols());
    EXPECT_GT(r.singular_values[idx].minCoeff(), 0.0);
  }
}

TEST(RunTsia, SufficientConfigurationPerfectCsi) {
  for (std::uint64_t seed = 10; seed < 15; ++seed) {
    const Drop d = sufficient_drop(seed);
    const TsiaResult r = design(d);
    EXPECT_TRUE(r.ia_converged) << "seed " << seed;
    EXPECT_LE(r.relative_leakage, 1e-6) << "seed " << seed;
    for (const ResidualEntry& e : r.residuals) {
      EXPECT_LE(e.relative, 1e-6) << e.constraint << " " << e.rx_cell << "<-" << e.tx_cell;
    }
    for (int j = 0; j < 10; ++j) {
      const auto idx = static_cast<std::size_t>(j);
      const CMatrix& f = r.precoders[idx];
      const double used = (f * r.source_cov[idx] * f.adjoint()).trace().real();
      EXPECT_NEAR(used, d.powers[idx], 1e-9 * d.powers[idx]) << "cell " << j + 1;
      if (j >= 5) {
        EXPECT_LE((f.adjoint() * f - CMatrix::Identity(f.cols(), f.cols())).norm(), 1e-10);
      }
    }
  }
}

TEST(RunTsia, WaterFillingBeatsUniformPerCell) {
  for (std::uint64_t seed = 20; seed < 25; ++seed) {
    const Drop d = sufficient_drop(seed, 0.0, 10.0);
    const TsiaResult r = design(d);
    for (int j = 5; j < 10; ++j) {
      const auto idx = static_cast<std::size_t>(j);
      const RVector& s = r.singular_values[idx];
      const std::vector<double> gains(s.data(), s.data() + s.size());
      std::vector<double> loaded;
      for (Eigen::Index k = 0; k < s.size(); ++k) loaded.push_back(r.source_cov[idx](k, k).real());
      const std::vector<double> uniform(gains.size(), d.powers[idx] / static_cast<double>(gains.size()));
      EXPECT_GE(numerics::water_fill_rate(gains, d.noise[idx], loaded),
                numerics::water_fill_rate(gains, d.noise[idx], uniform) - 1e-12);
    }
  }
}

// The mBS-to-pUE and pBS-to-mUE nulls hold exactly on the estimates, so on
// the true links the residual tracks the error amplitude: half a decade per
// decade of variance.
TEST(RunTsia, ImperfectCsiResidualScalesWithErrorAmplitude) {
  const std::vector<double> variances{1e-4, 1e-3, 1e-2};
  std::vector<double> mean_log;
  for (double var : variances) {
    const Drop d = sufficient_drop(31, var);
    const TsiaResult r = design(d, true);
    const auto res = alignment_residuals(LinkView(d.channels, false), r.precoders, r.decoders, 5);
    double acc = 0.0;
    int count = 0;
    for (const ResidualEntry& e : res) {
      if (e.constraint == "sub1_leakage") continue;
      EXPECT_GT(e.relative, 0.0);
      acc += std::log10(e.relative);
      ++count;
    }
    mean_log.push_back(acc / count);
  }
  for (std::size_t k = 1; k < mean_log.size(); ++k) {
    const double slope = mean_log[k] - mean_log[k - 1];
    EXPECT_NEAR(slope, 0.5, 0.15);
  }
}

TEST(RunTsia, InsufficientConfigurationThrows) {
  ScenarioConfig config;
  config.antenna_profile = insufficient_profile();
  const ChannelSet set = make_channels(generate_layout(config, 1), ChannelModelSpec{},
                                       config.antenna_profile, 1);
  const std::vector<double> noise(10, noise_variance_mw(config));
  EXPECT_THROW(run_tsia(LinkView(set, false), config.antenna_profile, cell_powers_mw(config, 40.0),
                        noise, 5, 5, TsiaOptions{}),
               TsiaInfeasible);
}

TEST(Residuals, CsvLayout) {
  std::vector<ResidualEntry> rows(1);
  rows[0].constraint = "mbs_to_pue";
  rows[0].rx_cell = 6;
  rows[0].tx_cell = 0;
  const std::string csv = residuals_to_csv(rows);
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "constraint,rx_cell,tx_cell,absolute,relative");
  EXPECT_NE(csv.find("mbs_to_pue,7,1,"), std::string::npos);
}

}  // namespace
}  // namespace hetnet
