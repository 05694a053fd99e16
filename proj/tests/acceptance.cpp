// Copyright 2026 The LABNet Authors
// SPDX-License-Identifier: Apache-2.0

// Acceptance suite: one PASS/FAIL line per criterion. Tolerances are pinned
// here; the process exits non-zero if any criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numeric>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "labnet/baselines/beamformers.hpp"
#include "labnet/common.hpp"
#include "labnet/dsp/stft.hpp"
#include "labnet/metrics/metrics.hpp"
#include "labnet/model/hyper.hpp"
#include "labnet/model/params.hpp"
#include "labnet/model/pipeline.hpp"
#include "labnet/sim/dataset.hpp"
#include "labnet/train/grad_check.hpp"
#include "labnet/train/trainer.hpp"
#include "labnet/util/random.hpp"

using namespace labnet;

namespace {

// Pinned tolerances and budgets.
constexpr double kPermTol = 1e-5;
constexpr double kPermSeconds = 10.0;
constexpr double kStreamTol = 1e-5;
constexpr double kLatencyMs = 64.0;
constexpr double kRoundTripTol = 1e-6;
constexpr double kGlaSlack = 1e-6;  // float storage of the iterate
constexpr double kGradTol = 1e-4;
constexpr double kGradSeconds = 300.0;
constexpr std::size_t kParamsLo = 40000, kParamsHi = 70000;
constexpr double kMacsLo = 1e8, kMacsHi = 1e9;
constexpr double kAffineTol = 1e-9;
constexpr double kConstraintTol = 1e-6;
constexpr double kLossRatio = 0.7;
constexpr double kTrainSeconds = 900.0;

struct Outcome {
  bool pass = false;
  std::string detail;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

model::Multichannel random_input(Rng& rng, std::size_t c, std::size_t n) {
  model::Multichannel x(c, std::vector<float>(n));
  for (auto& ch : x) {
    for (auto& v : ch) v = static_cast<float>(0.1 * normal(rng));
  }
  return x;
}

double max_diff(const std::vector<float>& a, const std::vector<float>& b, std::size_t n) {
  double m = 0.0;
  for (std::size_t i = 0; i < n; ++i) m = std::max(m, std::abs(static_cast<double>(a[i]) - b[i]));
  return m;
}

Outcome mic_invariance() {
  const model::ModelParams params(model::ModelHyper{}, 7);
  const std::size_t count = model::count_params(params);
  Rng rng(1);
  std::size_t ok = 0;
  for (std::size_t c = 1; c <= 12; ++c) {
    const auto out = model::enhance(random_input(rng, c, 8000), params);
    const bool finite = std::all_of(out.begin(), out.end(), [](float v) { return std::isfinite(v); });
    if (out.size() == 8000 && finite && model::count_params(params) == count) ++ok;
  }
  return {ok == 12, std::to_string(ok) + "/12 channel counts ran; " + std::to_string(count) + " parameters for all"};
}

Outcome permutation() {
  const auto t0 = Clock::now();
  const model::ModelParams params(model::ModelHyper{}, 8);
  Rng rng(2);
  const auto x = random_input(rng, 6, 16000);
  const auto base = model::enhance(x, params);
  double worst = 0.0;
  for (int trial = 0; trial < 3; ++trial) {
    std::vector<std::size_t> order{1, 2, 3, 4, 5};
    for (std::size_t i = order.size(); i > 1; --i) {
      std::swap(order[i - 1], order[static_cast<std::size_t>(uniform_int(rng, 0, static_cast<std::int64_t>(i) - 1))]);
    }
    model::Multichannel y{x[0]};
    for (std::size_t c : order) y.push_back(x[c]);
    worst = std::max(worst, max_diff(base, model::enhance(y, params), base.size()));
  }
  const double secs = seconds_since(t0);
  return {worst < kPermTol && secs < kPermSeconds,
          "max deviation " + fmt("%.2e", worst) + " over 3 permutations, " + fmt("%.1f", secs) + " s"};
}

Outcome causality() {
  const model::ModelParams params(model::ModelHyper{}, 9);
  const dsp::DspConfig cfg;
  Rng rng(3);
  const std::size_t n = 32000, cut = 20000;
  const auto a = random_input(rng, 3, n);
  auto b = a;
  for (auto& ch : b) {
    for (std::size_t i = cut; i < n; ++i) ch[i] = static_cast<float>(normal(rng));
  }
  const auto ya = model::enhance_streaming(a, params);
  const auto yb = model::enhance_streaming(b, params);
  const std::size_t guard = static_cast<std::size_t>(kLatencyMs * 1e-3 * cfg.sample_rate);
  const double prefix = max_diff(ya, yb, cut - guard);
  const double stream = max_diff(ya, model::enhance(a, params), n);
  const model::StreamingEnhancer s(params, cfg, 3);
  return {prefix == 0.0 && stream < kStreamTol && s.latency_ms() == kLatencyMs,
          "prefix deviation " + fmt("%.1e", prefix) + ", streaming vs offline " + fmt("%.2e", stream) +
              ", latency " + fmt("%.0f", s.latency_ms()) + " ms"};
}

Outcome dsp_correctness() {
  const dsp::DspConfig cfg;
  double worst_rt = 0.0;
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    Rng rng(40 + seed);
    std::vector<float> x(16000);
    for (auto& v : x) v = static_cast<float>(normal(rng));
    const auto y = dsp::istft(dsp::stft(x, cfg), cfg, x.size());
    double num = 0.0, den = 0.0;
    for (std::size_t i = cfg.win_len; i + cfg.win_len < x.size(); ++i) {
      num = std::max(num, std::abs(static_cast<double>(y[i]) - x[i]));
      den = std::max(den, std::abs(static_cast<double>(x[i])));
    }
    worst_rt = std::max(worst_rt, num / den);
  }
  std::size_t monotone = 0;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    Rng rng(60 + seed);
    const std::size_t t = 12, f = cfg.num_bins();
    dsp::RealGrid mag(t, f), ph(t, f);
    for (auto& v : mag.data) v = static_cast<float>(std::abs(normal(rng)));
    for (auto& v : ph.data) v = static_cast<float>(uniform(rng, -kPi, kPi));
    double prev = dsp::consistency_error(dsp::griffin_lim(mag, ph, 0, cfg), mag, cfg);
    bool ok = true;
    for (int it = 1; it <= 5; ++it) {
      const double e = dsp::consistency_error(dsp::griffin_lim(mag, ph, it, cfg), mag, cfg);
      ok = ok && e <= prev * (1.0 + kGlaSlack);
      prev = e;
    }
    if (ok) ++monotone;
  }
  return {worst_rt < kRoundTripTol && monotone == 20,
          "round trip " + fmt("%.2e", worst_rt) + " relative; GLA non-increasing in " + std::to_string(monotone) +
              "/20 cases"};
}

Outcome gradients() {
  const auto t0 = Clock::now();
  model::ModelHyper hyper = model::ModelHyper::toy();
  hyper.num_bins = train::grad_check_hyper().num_bins;
  const auto r = train::grad_check(hyper);
  const double secs = seconds_since(t0);
  return {r.max_rel < kGradTol && secs < kGradSeconds,
          "D=" + std::to_string(hyper.hidden) + ", worst relative error " + fmt("%.2e", r.max_rel) + " at " + r.worst +
              " over " + std::to_string(r.checked) + " coordinates, " + fmt("%.1f", secs) + " s"};
}

Outcome accounting() {
  const model::ModelHyper hyper;
  const std::size_t params = model::count_params(model::ModelParams(hyper, 0));
  const double m1 = model::count_macs(hyper, 1), m3 = model::count_macs(hyper, 3), m6 = model::count_macs(hyper, 6);
  // Affine: the C=3 point lies on the line through C=1 and C=6.
  const double predicted = m1 + (m6 - m1) * 2.0 / 5.0;
  const double resid = std::abs(m3 - predicted) / m3;
  return {params >= kParamsLo && params <= kParamsHi && resid < kAffineTol && m6 >= kMacsLo && m6 <= kMacsHi,
          std::to_string(params) + " parameters; MACs/s C=1 " + fmt("%.1fM", m1 / 1e6) + ", C=3 " +
              fmt("%.1fM", m3 / 1e6) + ", C=6 " + fmt("%.1fM", m6 / 1e6) + "; affine residual " + fmt("%.1e", resid)};
}

Outcome oracle_mvdr() {
  sim::DatasetConfig cfg;
  cfg.seed = 5;
  cfg.seconds = 4.0;
  cfg.scene.num_mics = 4;
  cfg.scene.t60_min = cfg.scene.t60_max = 0.2;
  cfg.scene.snr_min = cfg.scene.snr_max = 0.0;
  cfg.scene.noise_min = cfg.scene.noise_max = 1;
  const auto rec = sim::synth_utterance(cfg, 0);
  const auto r = baselines::mvdr(rec, {});
  const auto& ref = rec.reverberant[0];
  const double gain = metrics::si_snr(r.wave, ref) - metrics::si_snr(rec.noisy[0], ref);
  return {gain > 0.0 && r.max_constraint_error < kConstraintTol,
          "SI-SNR improvement " + fmt("%.2f", gain) + " dB, max |w^H d - 1| " + fmt("%.1e", r.max_constraint_error)};
}

std::vector<sim::MultichannelRecording> synthetic_set(std::uint64_t seed, std::size_t n) {
  sim::DatasetConfig cfg;
  cfg.seed = seed;
  cfg.seconds = 4.0;
  cfg.scene.num_mics = 4;
  std::vector<sim::MultichannelRecording> out;
  for (std::size_t i = 0; i < n; ++i) out.push_back(sim::synth_utterance(cfg, i));
  return out;
}

Outcome learning_signal() {
  const auto t0 = Clock::now();
  const auto train_set = synthetic_set(2024, 20);
  const auto held_out = synthetic_set(4048, 10);
  const model::ModelHyper hyper = model::ModelHyper::toy();

  train::TrainConfig cfg;
  cfg.epochs = 15;
  cfg.batch_size = 1;
  cfg.lr0 = 1e-2;
  cfg.segment_seconds = 4.0;
  cfg.seed = 17;

  cfg.channels = {4, 4};
  const auto multi = train::train_toy(train_set, {}, hyper, cfg);
  const double initial = multi.curve.front().train_loss;
  const double final_loss = train::epoch_draw_loss(multi.params, train_set, cfg, 0);

  train::TrainConfig mono_cfg = cfg;
  mono_cfg.channels = {1, 1};
  const auto mono = train::train_toy(train_set, {}, hyper, mono_cfg);

  auto mean_gain = [&held_out](const model::ModelParams& params, std::size_t mics) {
    const auto report = metrics::evaluate(held_out, [&params, mics](const sim::MultichannelRecording& r) {
      return model::enhance(model::Multichannel(r.noisy.begin(), r.noisy.begin() + static_cast<long>(mics)), params);
    });
    return report.summary.si_snr_improvement;
  };
  const double gain4 = mean_gain(multi.params, 4);
  const double gain1 = mean_gain(mono.params, 1);
  const double secs = seconds_since(t0);
  const double ratio = final_loss / initial;
  return {ratio < kLossRatio && gain4 > gain1 && secs < kTrainSeconds,
          "loss ratio " + fmt("%.3f", ratio) + " (" + fmt("%.4f", initial) + " -> " + fmt("%.4f", final_loss) +
              "); held-out SI-SNRi C=4 " + fmt("%.2f", gain4) + " dB vs C=1 " + fmt("%.2f", gain1) + " dB; " +
              fmt("%.0f", secs) + " s"};
}

Outcome ablations() {
  const std::vector<std::string> names{"full", "no-stage1", "no-stage2", "no-stage3", "tac"};
  std::vector<std::size_t> params;
  std::vector<double> macs;
  Rng rng(6);
  const auto x = random_input(rng, 6, 4000);
  bool ran = true;
  for (const auto& name : names) {
    model::ModelHyper h;
    h.apply_ablation(name);
    const model::ModelParams p(h, 3);
    params.push_back(model::count_params(p));
    macs.push_back(model::count_macs(h, 6));
    ran = ran && model::enhance(x, p).size() == 4000;
  }
  const std::set<std::size_t> distinct(params.begin(), params.end());
  // Order of costs: w/o stage 2 < w/o stage 1 < w/o stage 3 < full, TAC below full.
  const bool order = macs[2] < macs[1] && macs[1] < macs[3] && macs[3] < macs[0] && macs[4] < macs[0];
  std::ostringstream d;
  for (std::size_t i = 0; i < names.size(); ++i) {
    d << (i ? ", " : "") << names[i] << " " << params[i] << "/" << fmt("%.0fM", macs[i] / 1e6);
  }
  return {ran && distinct.size() == names.size() && order, d.str()};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"LABNet acceptance suite"};
  std::vector<int> only;
  app.add_option("--only", only, "Run just these criteria");
  CLI11_PARSE(app, argc, argv);

  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria{
      {"microphone invariance", mic_invariance},
      {"permutation invariance", permutation},
      {"causality and latency", causality},
      {"dsp correctness", dsp_correctness},
      {"gradient integrity", gradients},
      {"resource accounting", accounting},
      {"oracle mvdr sanity", oracle_mvdr},
      {"desk-scale learning signal", learning_signal},
      {"ablation structure", ablations},
  };
  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const int id = static_cast<int>(i + 1);
    if (!only.empty() && std::find(only.begin(), only.end(), id) == only.end()) continue;
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    if (!o.pass) ++failures;
    std::printf("criterion %d %-28s %s  %s\n", id, criteria[i].first, o.pass ? "PASS" : "FAIL", o.detail.c_str());
    std::fflush(stdout);
  }
  return failures == 0 ? 0 : 1;
}
