// Acceptance gate: one PASS/FAIL line per criterion. Exit status is nonzero
// when any criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "hetnet/errors.hpp"
#include "hetnet/harness.hpp"
#include "hetnet/metrics.hpp"
#include "support.hpp"

namespace hetnet {
namespace {

namespace fs = std::filesystem;
using testing::toy_channels;
using testing::toy_model;

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* pattern, double a) {
  char buf[128];
  std::snprintf(buf, sizeof buf, pattern, a);
  return buf;
}

std::string fmt(const char* pattern, double a, double b) {
  char buf[160];
  std::snprintf(buf, sizeof buf, pattern, a, b);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

AntennaProfile random_profile(Rng& rng, int max_cells) {
  AntennaProfile profile;
  const int cells = testing::uniform_int(1, max_cells, rng);
  for (int c = 0; c < cells; ++c) {
    const int t = testing::uniform_int(1, 3, rng);
    const int r = testing::uniform_int(1, 3, rng);
    profile.push_back({t, r, testing::uniform_int(1, std::min(t, r), rng)});
  }
  return profile;
}

// 1. Perturbing any Wiener decoder never lowers eta.
Outcome wiener_optimality() {
  const auto t0 = std::chrono::steady_clock::now();
  Rng rng(101);
  double smallest_rise = 1e300;
  for (int trial = 0; trial < 100; ++trial) {
    const AntennaProfile profile = random_profile(rng, 3);
    const ChannelSet set = toy_channels(profile, 0.5, trial % 2 ? 0.05 : 0.0, 10000 + trial,
                                        trial % 4 == 3 ? 0.6 : 0.0);
    const MseModel model = toy_model(set, profile, testing::uniform_real(0.01, 1.0, rng));
    const auto f = testing::random_precoders(
        model, trial % 3 == 0 ? Cooperation::kWith : Cooperation::kWithout, rng);
    const auto g = update_decoders(model, f);
    const double base = sum_mse(model, f, g).total;
    for (int p = 0; p < 20; ++p) {
      auto h = g;
      const int i = testing::uniform_int(0, model.cells() - 1, rng);
      CMatrix delta = testing::random_matrix(h[i].rows(), h[i].cols(), rng);
      h[i] += 1e-3 * delta / delta.norm();
      smallest_rise = std::min(smallest_rise, sum_mse(model, f, h).total - base);
    }
  }
  const double elapsed = seconds_since(t0);
  return {smallest_rise >= -1e-12 && elapsed < 10.0,
          fmt("smallest eta change under 2000 perturbations %+.3e (tol -1e-12), %.2f s",
              smallest_rise, elapsed)};
}

// 2. Directional derivatives of xi vanish at the precoder update.
Outcome precoder_stationarity() {
  const auto t0 = std::chrono::steady_clock::now();
  Rng rng(102);
  double worst = 0.0;
  for (int trial = 0; trial < 50; ++trial) {
    const AntennaProfile profile = testing::uniform_profile(testing::uniform_int(2, 3, rng), 2, 2, 1);
    const ChannelSet set = toy_channels(profile, 0.6, trial % 2 ? 0.05 : 0.0, 20000 + trial);
    const MseModel model = toy_model(set, profile, 0.1);
    const auto g = testing::random_decoders(model, rng);
    std::vector<double> lambda;
    std::vector<double> powers;
    for (int j = 0; j < model.cells(); ++j) {
      lambda.push_back(testing::uniform_real(0.05, 2.0, rng));
      powers.push_back(testing::uniform_real(0.5, 2.0, rng));
    }
    const Cooperation c = trial % 2 ? Cooperation::kWith : Cooperation::kWithout;
    const auto f = update_precoders(model, g, lambda, c);
    const double xi = augmented_cost(model, f, g, lambda, powers);
    for (int k = 0; k < 20; ++k) {
      const double d = testing::directional_derivative(model, f, g, lambda, powers,
                                                       testing::unit_direction(model, c, rng));
      worst = std::max(worst, std::abs(d) / std::abs(xi));
    }
  }
  const double elapsed = seconds_since(t0);
  return {worst <= 1e-6 && elapsed < 30.0,
          fmt("max |d xi| / |xi| %.3e (tol 1e-6), %.2f s", worst, elapsed)};
}

// 3. Closed-form sum MSE against 10^5 Monte Carlo samples.
Outcome closed_form_mse() {
  const auto t0 = std::chrono::steady_clock::now();
  double worst = 0.0;
  std::uint64_t seed = 300;
  for (double error_var : {0.0, 0.1}) {
    for (const Cooperation c : {Cooperation::kWith, Cooperation::kWithout}) {
      const AntennaProfile profile = testing::uniform_profile(2, 2, 2, 2);
      const ChannelSet set = toy_channels(profile, 0.6, error_var, ++seed);
      const MseModel model = toy_model(set, profile, 0.2);
      Rng rng(seed);
      const auto f = testing::random_precoders(model, c, rng);
      const auto g = testing::random_decoders(model, rng);
      const double closed = sum_mse(model, f, g).total;
      const double sampled = testing::monte_carlo_mse(set, model, f, g, 100000, rng);
      worst = std::max(worst, std::abs(sampled - closed) / closed);
    }
  }
  const double elapsed = seconds_since(t0);
  return {worst <= 0.01 && elapsed < 60.0,
          fmt("max relative gap %.4f (tol 0.01), %.2f s", worst, elapsed)};
}

struct SufficientDrop {
  ScenarioConfig config;
  ChannelSet channels;
  std::vector<double> powers;
  std::vector<double> noise;
};

SufficientDrop make_drop(const ScenarioConfig& config, std::uint64_t seed, double pico_dbm) {
  SufficientDrop d;
  d.config = config;
  ChannelModelSpec spec;
  spec.csi_error_variance = 0.0;
  d.channels = make_channels(generate_layout(config, seed), spec, config.antenna_profile, seed);
  d.powers = cell_powers_mw(config, pico_dbm);
  d.noise.assign(static_cast<std::size_t>(config.cells()), noise_variance_mw(config));
  return d;
}

const std::vector<AlgorithmSpec>& gia_variants() {
  static const std::vector<AlgorithmSpec> v = {
      AlgorithmSpec::gia(Cooperation::kWithout, StreamScheme::kPartial),
      AlgorithmSpec::gia(Cooperation::kWithout, StreamScheme::kFull),
      AlgorithmSpec::gia(Cooperation::kWith, StreamScheme::kPartial),
      AlgorithmSpec::gia(Cooperation::kWith, StreamScheme::kFull)};
  return v;
}

GiaResult solve_gia(const SufficientDrop& d, const AlgorithmSpec& alg) {
  GiaOptions opts;
  opts.cooperation = alg.cooperation;
  opts.scheme = alg.scheme;
  return run_gia(d.channels, d.config.antenna_profile, d.powers, d.noise, opts);
}

std::vector<TsiaResult> tsia_drops(int count) {
  std::vector<TsiaResult> out;
  const ScenarioConfig config;
  for (int k = 0; k < count; ++k) {
    const SufficientDrop d = make_drop(config, split_seed(7, static_cast<std::uint64_t>(k)), 40.0);
    out.push_back(run_tsia(LinkView(d.channels, false), config.antenna_profile, d.powers, d.noise,
                           config.l1, config.l2, TsiaOptions{}));
  }
  return out;
}

// 4. Power budgets met with equality at every GIA iterate and by TSIA.
Outcome power_equality(const std::vector<TsiaResult>& tsia) {
  const ScenarioConfig config;
  double worst_gia = 0.0;
  int iterates = 0;
  for (std::uint64_t seed : {11u, 12u}) {
    for (double dbm : {0.0, 40.0}) {
      const SufficientDrop d = make_drop(config, seed, dbm);
      for (const auto& alg : gia_variants()) {
        const GiaResult r = solve_gia(d, alg);
        for (double v : r.history.max_power_violation) worst_gia = std::max(worst_gia, v);
        iterates += static_cast<int>(r.history.max_power_violation.size());
        const auto used = MseModel(d.channels, stream_counts(config.antenna_profile, alg.scheme),
                                   d.noise)
                              .power_usage(r.transceivers.precoders);
        for (std::size_t j = 0; j < used.size(); ++j) {
          worst_gia = std::max(worst_gia, std::abs(used[j] - d.powers[j]) / d.powers[j]);
        }
      }
    }
  }
  double worst_tsia = 0.0;
  const auto powers = cell_powers_mw(config, 40.0);
  for (const auto& r : tsia) {
    for (std::size_t j = 0; j < r.precoders.size(); ++j) {
      const CMatrix& f = r.precoders[j];
      const double used = (f * r.source_cov[j] * f.adjoint()).trace().real();
      worst_tsia = std::max(worst_tsia, std::abs(used - powers[j]) / powers[j]);
    }
  }
  return {worst_gia <= 1e-9 && worst_tsia <= 1e-9,
          fmt("GIA max violation %.2e over ", worst_gia) + std::to_string(iterates) +
              fmt(" iterates, TSIA %.2e (tol 1e-9)", worst_tsia)};
}

// 5. TSIA alignment on the sufficient configuration.
Outcome tsia_alignment(const std::vector<TsiaResult>& tsia) {
  double worst_exact = 0.0;
  double worst_leakage = 0.0;
  double worst_rise = 0.0;
  for (const auto& r : tsia) {
    for (const auto& e : r.residuals) {
      if (e.constraint != "sub1_leakage") worst_exact = std::max(worst_exact, e.relative);
    }
    worst_leakage = std::max(worst_leakage, r.relative_leakage);
    for (std::size_t k = 1; k < r.leakage.size(); ++k) {
      worst_rise = std::max(worst_rise, (r.leakage[k] - r.leakage[k - 1]) / r.leakage.front());
    }
  }
  // Rises below 1e-13 of the starting leakage are rounding at the alignment floor.
  const bool pass = worst_exact <= 1e-10 && worst_rise <= 1e-13 && worst_leakage <= 1e-6;
  return {pass, fmt("zero-forcing max relative %.2e (tol 1e-10), ", worst_exact) +
                    fmt("max leakage rise %.2e, final relative leakage %.2e (tol 1e-6), 20 drops",
                        worst_rise, worst_leakage)};
}

// 6. The insufficient configuration rejects TSIA while every GIA variant runs.
Outcome insufficient_configuration() {
  ScenarioConfig config;
  config.antenna_profile = insufficient_profile();
  const Feasibility f = check_feasibility(config.antenna_profile, config.l1, config.l2);
  bool all_complete = true;
  std::string detail = "check_feasibility: " + (f.feasible ? std::string("feasible") : f.reason);
  const SufficientDrop d = make_drop(config, 5, 40.0);
  for (const auto& alg : gia_variants()) {
    try {
      const GiaResult r = solve_gia(d, alg);
      const double rate = sum_rate(d.channels, r.transceivers, d.noise);
      const bool ok = std::isfinite(rate) && std::isfinite(r.history.eta.back());
      all_complete = all_complete && ok;
      detail += "; " + alg.tag(CsiCondition::kPerfect) + fmt(" %.1f b/s/Hz", rate);
    } catch (const Error& e) {
      all_complete = false;
      detail += "; " + alg.tag(CsiCondition::kPerfect) + " threw " + e.what();
    }
  }
  return {!f.feasible && all_complete, detail};
}

const std::vector<AlgorithmSpec>& all_algorithms() {
  static const std::vector<AlgorithmSpec> v = [] {
    auto a = gia_variants();
    a.push_back(AlgorithmSpec::tsia());
    return a;
  }();
  return v;
}

ExperimentConfig experiment(const fs::path& dir, int drops) {
  ExperimentConfig c;
  c.algorithms = all_algorithms();
  c.drops = drops;
  c.master_seed = 1;
  c.output_dir = dir;
  return c;
}

struct Experiments {
  ResultTable uncorrelated;
  ResultTable correlated;
  ResultTable imperfect;
  std::vector<RawRecord> uncorrelated_raw;
  double top = 40.0;
  int drops = 0;
};

double mean_rate(const ResultTable& t, const std::string& alg, double dbm) {
  const ResultRow* row = t.find(alg, dbm);
  if (row == nullptr) throw PreconditionViolation("missing row " + alg);
  return row->sum_rate_mean;
}

const char* kWith[] = {"GIA-with-partial", "GIA-with-full"};
const char* kSaturating[] = {"GIA-without-partial", "GIA-without-full", "TSIA"};

// 7. With cooperation keeps growing; without cooperation and TSIA saturate.
Outcome saturation_vs_growth(const Experiments& e) {
  const auto& sweep = ExperimentConfig{}.sweep;
  const double p1 = sweep[sweep.size() - 3];
  const double p2 = sweep[sweep.size() - 2];
  const double p3 = sweep.back();
  bool pass = true;
  std::string detail;
  for (const char* alg : kWith) {
    const double a = mean_rate(e.uncorrelated, alg, p1);
    const double b = mean_rate(e.uncorrelated, alg, p2);
    const double c = mean_rate(e.uncorrelated, alg, p3);
    pass = pass && a < b && b < c;
    detail += std::string(alg) + fmt(" %.1f/", a) + fmt("%.1f/%.1f; ", b, c);
  }
  for (const char* alg : kSaturating) {
    const double b = mean_rate(e.uncorrelated, alg, p2);
    const double c = mean_rate(e.uncorrelated, alg, p3);
    const double change = std::abs(c - b) / b;
    pass = pass && change < 0.05;
    detail += std::string(alg) + fmt(" %+.1f%%; ", 100.0 * (c - b) / b);
  }
  return {pass, detail};
}

// 8. Without cooperation, the full scheme beats the partial scheme at the top.
Outcome full_vs_partial(const Experiments& e) {
  const double full = mean_rate(e.uncorrelated, "GIA-without-full", e.top);
  const double partial = mean_rate(e.uncorrelated, "GIA-without-partial", e.top);
  return {full >= partial, fmt("without-full %.2f vs without-partial %.2f", full, partial)};
}

// 9. Correlation shrinks the with-cooperation full-vs-partial gap.
Outcome correlation_gap(const Experiments& e) {
  const auto gap = [&](const ResultTable& t) {
    return mean_rate(t, "GIA-with-full", e.top) - mean_rate(t, "GIA-with-partial", e.top);
  };
  const double uncorrelated = gap(e.uncorrelated);
  const double correlated = gap(e.correlated);
  return {correlated < uncorrelated,
          fmt("gap correlated %.2f vs uncorrelated %.2f", correlated, uncorrelated)};
}

double mean_condition_number(const ChannelKind kind, int drops) {
  const ExperimentConfig config;
  ChannelModelSpec spec;
  spec.kind = kind;
  spec.corr_coefficient = 0.6;
  spec.csi_error_variance = 0.0;
  double acc = 0.0;
  for (int d = 0; d < drops; ++d) {
    const std::uint64_t seed = split_seed(1, static_cast<std::uint64_t>(d));
    acc += mean_condition_number_db(make_channels(generate_layout(config.scenario, seed), spec,
                                                  config.scenario.antenna_profile, seed));
  }
  return acc / drops;
}

// 10. Correlation lowers every mean rate and raises the condition number.
Outcome correlation_lowers_rates(const Experiments& e) {
  int violations = 0;
  int compared = 0;
  std::string worst;
  double worst_excess = -1e300;
  for (const auto& row : e.uncorrelated.rows) {
    const ResultRow* corr = e.correlated.find(row.algorithm, row.pico_power_dbm);
    if (corr == nullptr) continue;
    ++compared;
    const double excess = corr->sum_rate_mean - row.sum_rate_mean;
    if (excess > 0.0) ++violations;
    if (excess > worst_excess) {
      worst_excess = excess;
      worst = row.algorithm + fmt(" at %.0f dBm", row.pico_power_dbm);
    }
  }
  const double cond_u = mean_condition_number(ChannelKind::kUncorrelated, e.drops);
  const double cond_c = mean_condition_number(ChannelKind::kExplicitCorrelation, e.drops);
  const bool pass = violations == 0 && compared > 0 && cond_c > cond_u;
  return {pass, std::to_string(violations) + "/" + std::to_string(compared) +
                    " points where correlation raised the rate (largest " +
                    fmt("%+.2f", worst_excess) + " at " + worst + "); condition number " +
                    fmt("%.2f dB correlated vs %.2f dB uncorrelated", cond_c, cond_u)};
}

// 11. Imperfect CSI costs rate, more so with cooperation.
Outcome imperfect_csi_penalty(const Experiments& e) {
  bool pass = true;
  std::string detail;
  std::map<std::string, double> penalty;
  for (const auto& alg : all_algorithms()) {
    const double perfect = mean_rate(e.uncorrelated, alg.tag(CsiCondition::kPerfect), e.top);
    const double naive = mean_rate(e.imperfect, alg.tag(CsiCondition::kImperfect), e.top);
    penalty[alg.tag(CsiCondition::kPerfect)] = perfect - naive;
    pass = pass && perfect >= naive;
    detail += alg.tag(CsiCondition::kPerfect) + fmt(" %.1f->%.1f; ", perfect, naive);
  }
  for (const char* scheme : {"partial", "full"}) {
    const double with = penalty[std::string("GIA-with-") + scheme];
    const double without = penalty[std::string("GIA-without-") + scheme];
    pass = pass && with > without;
    detail += std::string(scheme) + fmt(" penalty with %.1f vs without %.1f; ", with, without);
  }
  return {pass, detail};
}

// 12. QPSK calibration, and with-cooperation BER below ten times the floors.
Outcome ber_sanity(const Experiments& e) {
  const AntennaProfile single{{1, 1, 1}};
  ChannelSet link = gen_true_channels(RMatrix::Ones(1, 1), ChannelModelSpec{}, single, 1);
  link.true_link(0, 0) = CMatrix::Ones(1, 1);
  link.est_link(0, 0) = link.true_link(0, 0);
  TransceiverSet design;
  design.precoders = {CMatrix::Ones(1, 1)};
  design.decoders = {CMatrix::Ones(1, 1)};
  const double noise = 0.1;
  const BerResult cal = ber_simulation(link, design, {noise}, 500000, 2024);
  const double p = qpsk_ber(1.0 / noise);
  const double se = std::sqrt(p * (1.0 - p) / static_cast<double>(cal.bits));
  const bool calibrated = std::abs(cal.ber - p) <= 3.0 * se;

  const auto ber = [&](const char* alg) { return e.uncorrelated.find(alg, e.top)->ber_mean; };
  const double with = ber("GIA-with-partial");
  bool separated = true;
  std::string detail = fmt("calibration %.3e vs analytic %.3e", cal.ber, p) +
                       fmt(" (3 SE = %.1e); with-partial BER %.2e", 3.0 * se, with);
  for (const char* floor_alg : {"GIA-without-partial", "TSIA"}) {
    const double floor = ber(floor_alg);
    // A zero with-cooperation BER sits below any floor, including a zero one.
    separated = separated && (with == 0.0 || with < 10.0 * floor);
    detail += std::string(", ") + floor_alg + fmt(" floor %.2e", floor);
  }
  return {calibrated && separated, detail};
}

// 13. Iteration ordering over the first 20 uncorrelated drops.
Outcome iteration_ordering(const Experiments& e) {
  double without = 0.0;
  double with = 0.0;
  double tsia = 0.0;
  int nw = 0;
  int nc = 0;
  int nt = 0;
  for (const auto& r : e.uncorrelated_raw) {
    if (r.drop >= 20 || r.status == "failed") continue;
    if (r.algorithm == "TSIA") {
      tsia += r.iterations;
      ++nt;
    } else if (r.cooperation == "with") {
      with += r.iterations;
      ++nc;
    } else {
      without += r.iterations;
      ++nw;
    }
  }
  without /= std::max(nw, 1);
  with /= std::max(nc, 1);
  tsia /= std::max(nt, 1);
  return {without < with && with < tsia,
          fmt("mean iterations: GIA without %.1f, ", without) +
              fmt("GIA with %.1f, TSIA %.1f", with, tsia)};
}

// 14. Two identical harness runs write byte-identical raw CSV.
Outcome determinism(const fs::path& work) {
  std::vector<std::string> contents;
  for (const char* name : {"determinism_a", "determinism_b"}) {
    // Every algorithm over the whole default sweep, kept short in drops.
    ExperimentConfig c = experiment(work / name, 3);
    fs::remove_all(c.output_dir);
    const ExperimentOutput out = run_experiment(c);
    std::ifstream in(out.raw_csv, std::ios::binary);
    std::stringstream s;
    s << in.rdbuf();
    contents.push_back(s.str());
  }
  return {contents[0] == contents[1] && !contents[0].empty(),
          std::to_string(contents[0].size()) + " bytes, " +
              (contents[0] == contents[1] ? "identical" : "different")};
}

Experiments run_experiments(const fs::path& work, int drops) {
  Experiments e;
  e.drops = drops;
  const auto progress = [](const char* name) {
    return [name, t0 = std::chrono::steady_clock::now()](int done, int total) {
      std::cerr << "\r" << name << ": drop " << done << "/" << total << std::flush;
      if (done == total) std::cerr << fmt(" in %.0f s", seconds_since(t0)) << '\n';
    };
  };

  ExperimentConfig uncorrelated = experiment(work / "uncorrelated", drops);
  const ExperimentOutput u = run_experiment(uncorrelated, progress("uncorrelated"));
  e.uncorrelated = u.table;
  e.uncorrelated_raw = read_raw_csv(u.raw_csv);

  ExperimentConfig correlated = experiment(work / "correlated", drops);
  correlated.channel.kind = ChannelKind::kExplicitCorrelation;
  correlated.channel.corr_coefficient = 0.6;
  e.correlated = run_experiment(correlated, progress("correlated")).table;

  ExperimentConfig imperfect = experiment(work / "imperfect", drops);
  imperfect.csi = CsiCondition::kImperfect;
  imperfect.channel.csi_error_variance = 1e-3;
  imperfect.sweep = {e.top};
  e.imperfect = run_experiment(imperfect, progress("imperfect")).table;
  return e;
}

}  // namespace
}  // namespace hetnet

int main(int argc, char** argv) {
  namespace fs = std::filesystem;
  CLI::App app{"Acceptance gate: one PASS/FAIL line per criterion"};
  fs::path work = fs::temp_directory_path() / "hetnet_acceptance";
  int drops = 50;
  bool resume = false;
  app.add_option("--work", work, "Scratch directory for experiment output");
  app.add_option("--drops", drops, "Monte Carlo drops per experiment (criteria 7-11, 13)")
      ->check(CLI::Range(2, 100000));
  app.add_flag("--resume", resume, "Reuse complete drops already in --work");
  CLI11_PARSE(app, argc, argv);

  if (!resume) fs::remove_all(work);
  fs::create_directories(work);

  using hetnet::Outcome;
  std::vector<std::pair<std::string, std::function<Outcome()>>> criteria;
  std::vector<hetnet::TsiaResult> tsia;
  hetnet::Experiments experiments;
  bool experiments_ready = false;
  const auto need_experiments = [&]() -> const hetnet::Experiments& {
    if (!experiments_ready) {
      experiments = hetnet::run_experiments(work, drops);
      experiments_ready = true;
    }
    return experiments;
  };
  const auto need_tsia = [&]() -> const std::vector<hetnet::TsiaResult>& {
    if (tsia.empty()) tsia = hetnet::tsia_drops(20);
    return tsia;
  };

  criteria.emplace_back("Wiener optimality", hetnet::wiener_optimality);
  criteria.emplace_back("Precoder stationarity", hetnet::precoder_stationarity);
  criteria.emplace_back("Closed-form MSE vs Monte Carlo", hetnet::closed_form_mse);
  criteria.emplace_back("Power constraint equality", [&] { return hetnet::power_equality(need_tsia()); });
  criteria.emplace_back("TSIA alignment", [&] { return hetnet::tsia_alignment(need_tsia()); });
  criteria.emplace_back("TSIA infeasibility", hetnet::insufficient_configuration);
  criteria.emplace_back("Saturation vs growth", [&] { return hetnet::saturation_vs_growth(need_experiments()); });
  criteria.emplace_back("Full vs partial", [&] { return hetnet::full_vs_partial(need_experiments()); });
  criteria.emplace_back("Correlation gap shrinkage", [&] { return hetnet::correlation_gap(need_experiments()); });
  criteria.emplace_back("Correlation lowers rates", [&] { return hetnet::correlation_lowers_rates(need_experiments()); });
  criteria.emplace_back("Imperfect CSI penalty", [&] { return hetnet::imperfect_csi_penalty(need_experiments()); });
  criteria.emplace_back("BER sanity", [&] { return hetnet::ber_sanity(need_experiments()); });
  criteria.emplace_back("Iteration-count ordering", [&] { return hetnet::iteration_ordering(need_experiments()); });
  criteria.emplace_back("Determinism", [&] { return hetnet::determinism(work); });

  int failures = 0;
  for (std::size_t k = 0; k < criteria.size(); ++k) {
    Outcome o;
    try {
      o = criteria[k].second();
    } catch (const std::exception& e) {
      o = {false, std::string("threw: ") + e.what()};
    }
    if (!o.pass) ++failures;
    std::cout << "CRITERION " << k + 1 << ": " << (o.pass ? "PASS" : "FAIL") << "  "
              << criteria[k].first << " | " << o.detail << std::endl;
  }
  std::cout << (criteria.size() - static_cast<std::size_t>(failures)) << "/" << criteria.size()
            << " criteria passed" << std::endl;
  return failures == 0 ? 0 : 1;
}
