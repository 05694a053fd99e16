// Copyright 2026 The LABNet Authors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>
#include <unistd.h>
#include <vector>

#include "labnet/common.hpp"
#include "labnet/model/serialize.hpp"
#include "labnet/sim/dataset.hpp"
#include "labnet/train/augment.hpp"
#include "labnet/train/grad_check.hpp"
#include "labnet/train/loss.hpp"
#include "labnet/train/optimizer.hpp"
#include "labnet/train/trainer.hpp"
#include "support.hpp"

using namespace labnet;
using namespace labnet::train;
namespace fs = std::filesystem;

namespace {

dsp::Spectrogram random_spec(Rng& rng, std::size_t t, std::size_t f) {
  dsp::Spectrogram s(t, f);
  for (auto& v : s.data) v = {static_cast<float>(normal(rng)), static_cast<float>(normal(rng))};
  return s;
}

std::vector<sim::MultichannelRecording> tiny_set(std::size_t n, std::uint64_t seed) {
  sim::DatasetConfig cfg;
  cfg.seed = seed;
  cfg.seconds = 1.0;
  cfg.scene.num_mics = 3;
  std::vector<sim::MultichannelRecording> out;
  for (std::size_t i = 0; i < n; ++i) out.push_back(sim::synth_utterance(cfg, i));
  return out;
}

TrainConfig tiny_config() {
  TrainConfig cfg;
  cfg.epochs = 3;
  cfg.batch_size = 2;
  cfg.segment_seconds = 0.5;
  cfg.channels = {1, 3};
  cfg.lr0 = 1e-2;
  cfg.seed = 11;
  return cfg;
}

bool same_params(const model::ModelParams& a, const model::ModelParams& b) {
  if (a.names() != b.names()) return false;
  for (const auto& name : a.names()) {
    const auto& x = a.at(name);
    const auto& y = b.at(name);
    for (std::size_t i = 0; i < x.size(); ++i) {
      if (x[i] != y[i]) return false;
    }
  }
  return true;
}

bool same_curve(const std::vector<EpochRecord>& a, const std::vector<EpochRecord>& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (to_json(a[i]) != to_json(b[i])) return false;
  }
  return true;
}

struct TempDir {
  fs::path path;
  explicit TempDir(const std::string& tag)
      : path(fs::temp_directory_path() / ("labnet_train_" + tag + "_" + std::to_string(::getpid()))) {
    fs::remove_all(path);
  }
  ~TempDir() { fs::remove_all(path); }
  std::string str() const { return path.string(); }
};

}  // namespace

TEST_CASE("spectral loss worked examples") {
  dsp::Spectrogram est(1, 1), target(1, 1);
  est.data[0] = {2.0f, 0.0f};
  target.data[0] = {1.0f, 0.0f};
  CHECK(spectral_loss(est, target, 1.0f, {1.0, 0.0}) == doctest::Approx(1.0));
  // Complex term averages over the 2 real/imaginary values.
  CHECK(spectral_loss(est, target, 1.0f, {0.0, 1.0}) == doctest::Approx(0.5));
  CHECK(spectral_loss(est, target, 1.0f, {1.0, 1.0}) == doctest::Approx(1.5));
  // Compressed magnitudes: (2^0.3 - 1)^2.
  CHECK(spectral_loss(est, target, 0.3f, {1.0, 0.0}) == doctest::Approx(std::pow(std::pow(2.0, 0.3) - 1.0, 2)));
  // Phase only: |e^{i pi/2} - 1|^2 / 2 = 1 in the complex term, 0 in magnitude.
  est.data[0] = {0.0f, 1.0f};
  CHECK(spectral_loss(est, target, 0.3f, {1.0, 0.0}) == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(spectral_loss(est, target, 0.3f, {0.0, 1.0}) == doctest::Approx(1.0));
  CHECK(spectral_loss(target, target, 0.3f, {1.0, 1.0}) == 0.0);
  CHECK_THROWS_AS(spectral_loss(dsp::Spectrogram(2, 1), target, 0.3f, {}), ContractError);
}

TEST_CASE("mask loss equals the spectral loss of the masked compressed estimate") {
  Rng rng(1);
  for (int trial = 0; trial < 10; ++trial) {
    const std::size_t t = 5, f = 9;
    const float p = trial % 2 ? 0.3f : 1.0f;
    const auto noisy = random_spec(rng, t, f);
    const auto clean = random_spec(rng, t, f);
    const LossWeights w{uniform(rng, 0.0, 2.0), uniform(rng, 0.1, 2.0)};
    nn::Tensor<double> mask({t, f});
    dsp::Spectrogram est(t, f);
    for (std::size_t i = 0; i < t * f; ++i) {
      mask[i] = uniform(rng, 0.01, 1.0);
      // m scales the compressed spectrum, so the linear estimate carries m^(1/p).
      est.data[i] = noisy.data[i] * static_cast<float>(std::pow(mask[i], 1.0 / p));
    }
    const auto target = make_mask_target(noisy, clean, p);
    const double a = mask_loss<double>(nullptr, nn::constant(mask), target, w)->value[0];
    CHECK(a == doctest::Approx(spectral_loss(est, clean, p, w)).epsilon(1e-5));
  }
  nn::Tensor<double> wrong({2, 2});
  CHECK_THROWS_AS(mask_loss<double>(nullptr, nn::constant(wrong), make_mask_target(dsp::Spectrogram(1, 3), dsp::Spectrogram(1, 3), 0.3f), {}),
                  ContractError);
}

TEST_CASE("gradient clipping") {
  CHECK(clip_scale(10.0, 5.0) == 0.5);
  CHECK(clip_scale(4.0, 5.0) == 1.0);
  CHECK(clip_scale(10.0, 0.0) == 1.0);

  std::vector<float> w{1.0f, 1.0f};
  const std::vector<float> g{6.0f, 8.0f};
  AdamW opt({0.9, 0.999, 1e-8, 0.0, 5.0});
  const StepReport r = opt.step({{"w", w.data(), g.data(), 2}}, 0.1);
  CHECK(r.applied);
  CHECK(r.grad_norm == doctest::Approx(10.0));
  CHECK(r.clip_scale == doctest::Approx(0.5));
}

TEST_CASE("adamw first step and decoupled decay") {
  // After one step m_hat = g and v_hat = g^2, so the update is lr * sign(g).
  std::vector<float> w{2.0f, -1.0f, 0.5f};
  const std::vector<float> g{0.3f, -0.02f, 0.0f};
  const double lr = 0.01, wd = 0.1;
  AdamW opt({0.9, 0.999, 1e-8, wd, 0.0});
  const std::vector<float> w0 = w;
  REQUIRE(opt.step({{"w", w.data(), g.data(), 3}}, lr).applied);
  for (std::size_t i = 0; i < 3; ++i) {
    const double decayed = w0[i] * (1.0 - lr * wd);
    const double sign = g[i] > 0 ? 1.0 : g[i] < 0 ? -1.0 : 0.0;
    const double g2 = static_cast<double>(g[i]) * g[i];
    const double expect = decayed - lr * g[i] / (std::sqrt(g2) + 1e-8);
    CHECK(w[i] == doctest::Approx(expect).epsilon(1e-6));
    CHECK(std::abs(expect - (decayed - lr * sign)) < 1e-6);
  }
  CHECK(opt.steps() == 1);
}

TEST_CASE("zero gradients without decay leave parameters unchanged") {
  std::vector<float> w{0.25f, -3.0f};
  const std::vector<float> zero{0.0f, 0.0f};
  AdamW opt({0.9, 0.999, 1e-8, 0.0, 5.0});
  for (int i = 0; i < 5; ++i) opt.step({{"w", w.data(), zero.data(), 2}, {"b", w.data(), nullptr, 2}}, 0.1);
  CHECK(w == std::vector<float>{0.25f, -3.0f});
}

TEST_CASE("adamw converges on a quadratic") {
  std::vector<float> w{-4.0f};
  std::vector<float> g(1);
  AdamW opt({0.9, 0.999, 1e-8, 0.0, 0.0});
  for (int i = 0; i < 2000; ++i) {
    g[0] = 2.0f * (w[0] - 3.0f);
    opt.step({{"w", w.data(), g.data(), 1}}, 0.05 * std::pow(0.998, i));
  }
  CHECK(std::abs(w[0] - 3.0f) < 1e-2);
}

TEST_CASE("non-finite gradients reject the step") {
  std::vector<float> w{1.0f, 2.0f};
  const std::vector<float> bad{0.1f, std::numeric_limits<float>::quiet_NaN()};
  AdamW opt;
  const StepReport r = opt.step({{"w", w.data(), bad.data(), 2}}, 0.1);
  CHECK(!r.applied);
  CHECK(r.rejected.find("'w'") != std::string::npos);
  CHECK(w == std::vector<float>{1.0f, 2.0f});
  CHECK(opt.steps() == 0);
  CHECK_THROWS_AS(AdamW({1.0, 0.999, 1e-8, 0.0, 1.0}), ConfigError);
  CHECK_THROWS_AS(AdamW({0.9, 0.999, 0.0, 0.0, 1.0}), ConfigError);
}

TEST_CASE("optimizer state round trips through json") {
  Rng rng(2);
  std::vector<float> a(7), b;
  for (auto& v : a) v = static_cast<float>(normal(rng));
  b = a;
  std::vector<float> g(7);
  AdamW x, y;
  for (int i = 0; i < 3; ++i) {
    for (auto& v : g) v = static_cast<float>(normal(rng));
    x.step({{"p", a.data(), g.data(), 7}}, 0.01);
    y.step({{"p", b.data(), g.data(), 7}}, 0.01);
  }
  AdamW z;
  z.load_state_json(nlohmann::json::parse(x.state_json().dump()));
  CHECK(z.steps() == 3);
  std::vector<float> c = b;
  for (auto& v : g) v = static_cast<float>(normal(rng));
  x.step({{"p", a.data(), g.data(), 7}}, 0.01);
  z.step({{"p", c.data(), g.data(), 7}}, 0.01);
  CHECK(a == c);
  CHECK_THROWS_AS(z.load_state_json({{"step", 1}}), CorruptModelError);
}

TEST_CASE("channel draws are uniform and well formed") {
  Rng rng(3);
  const std::size_t n = 12000;
  std::vector<std::size_t> ref_hist(6), count_hist(7);
  for (std::size_t i = 0; i < n; ++i) {
    const auto d = draw_channels(rng, 6, {1, 6});
    REQUIRE(!d.channels.empty());
    REQUIRE(d.channels.size() <= 6);
    const std::set<std::size_t> uniq(d.channels.begin(), d.channels.end());
    CHECK(uniq.size() == d.channels.size());
    for (std::size_t c : d.channels) CHECK(c < 6);
    ++ref_hist[d.channels[0]];
    ++count_hist[d.channels.size()];
  }
  const double expect = static_cast<double>(n) / 6.0;
  const double sigma = std::sqrt(n * (1.0 / 6.0) * (5.0 / 6.0));
  for (std::size_t c = 0; c < 6; ++c) CHECK(std::abs(ref_hist[c] - expect) < 3.5 * sigma);
  for (std::size_t k = 1; k <= 6; ++k) CHECK(std::abs(count_hist[k] - expect) < 3.5 * sigma);
  CHECK(count_hist[0] == 0);

  // Range wider than the array is capped; a fixed range is honoured.
  for (int i = 0; i < 200; ++i) {
    CHECK(draw_channels(rng, 2, {1, 6}).channels.size() <= 2);
    CHECK(draw_channels(rng, 8, {3, 3}).channels.size() == 3);
    CHECK(draw_channels(rng, 2, {4, 6}).channels.size() == 2);
  }
  CHECK_THROWS_AS(draw_channels(rng, 0, {1, 2}), InputError);
  CHECK_THROWS_AS(draw_channels(rng, 4, {3, 2}), ConfigError);
  CHECK_THROWS_AS(draw_channels(rng, 4, {0, 2}), ConfigError);
}

TEST_CASE("channel draws are deterministic and applied consistently") {
  Rng a(9), b(9);
  for (int i = 0; i < 50; ++i) CHECK(draw_channels(a, 5, {1, 5}).channels == draw_channels(b, 5, {1, 5}).channels);

  const auto rec = tiny_set(1, 4)[0];
  const ChannelDraw d{{2, 0}};
  const auto sel = select_channels(rec, d);
  REQUIRE(sel.num_mics() == 2);
  CHECK(sel.noisy[0] == rec.noisy[2]);
  CHECK(sel.reverberant[0] == rec.reverberant[2]);
  CHECK(sel.noise[1] == rec.noise[0]);
  CHECK(sel.scene.mics[0] == rec.scene.mics[2]);
  CHECK_THROWS_AS(select_channels(rec, {{5}}), ContractError);
}

TEST_CASE("learning rate schedule and config json") {
  TrainConfig cfg;
  cfg.lr0 = 1e-3;
  cfg.lr_decay = 0.5;
  CHECK(cfg.lr_at(1) == 1e-3);
  CHECK(cfg.lr_at(3) == doctest::Approx(2.5e-4));

  const auto j = to_json(tiny_config());
  CHECK(to_json(train_config_from_json(j)) == j);
  CHECK(train_config_from_json({{"epochs", 2}}).epochs == 2);
  CHECK_THROWS_AS(train_config_from_json({{"epoch", 2}}), ConfigError);
  CHECK_THROWS_AS(train_config_from_json({{"lr0", -1.0}}), ConfigError);
  CHECK_THROWS_AS(train_config_from_json({{"batch_size", 0}}), ConfigError);
  CHECK_THROWS_AS(train_config_from_json({{"loss_magnitude", 0.0}, {"loss_complex", 0.0}}), ConfigError);
  CHECK_THROWS_AS(train_config_from_json({{"min_channels", 4}, {"max_channels", 2}}), ConfigError);
}

TEST_CASE("relative error floor") {
  CHECK(relative_error(1.0, 1.0) == 0.0);
  CHECK(relative_error(2.0, 1.0) == doctest::Approx(0.5));
  CHECK(relative_error(0.0, 0.0) == 0.0);
  CHECK(relative_error(1e-9, 0.0) == doctest::Approx(1e-9 / kRelFloor));
}

TEST_CASE("gradient checks") {
  const auto lin = grad_check_linear();
  CAPTURE(lin.worst);
  CHECK(lin.max_rel < 1e-8);
  CHECK(lin.checked > 0);

  const auto full = grad_check(grad_check_hyper());
  CAPTURE(full.worst);
  CHECK(full.max_rel < 1e-4);
  CHECK(full.tensors.size() == model::ModelParams(grad_check_hyper(), 0).names().size());
  for (const auto& t : full.tensors) CHECK(t.checked > 0);
  CHECK(to_json(full).contains("max_rel"));
}

TEST_CASE("finite-difference error is U-shaped in eps") {
  GradCheckConfig cfg;
  cfg.per_tensor = 3;
  const auto sweep = eps_sweep(grad_check_hyper(), {1e-1, 1e-5, 1e-12}, cfg);
  REQUIRE(sweep.size() == 3);
  CAPTURE(sweep[0].max_rel);
  CAPTURE(sweep[1].max_rel);
  CAPTURE(sweep[2].max_rel);
  // Truncation error dominates at large eps, cancellation at tiny eps.
  CHECK(sweep[1].max_rel < sweep[0].max_rel);
  CHECK(sweep[1].max_rel < sweep[2].max_rel);
  CHECK_THROWS_AS(eps_sweep(grad_check_hyper(), {0.0}, cfg), ContractError);
}

TEST_CASE("training is deterministic and reduces the loss") {
  const auto data = tiny_set(5, 30);
  const std::vector<sim::MultichannelRecording> train(data.begin(), data.begin() + 4);
  const std::vector<sim::MultichannelRecording> val(data.begin() + 4, data.end());
  const auto hyper = model::ModelHyper::toy();
  const TrainConfig cfg = tiny_config();
  std::vector<std::size_t> seen;
  TrainOptions opts;
  opts.on_epoch = [&seen](const EpochRecord& r) { seen.push_back(r.epoch); };
  const auto a = train_toy(train, val, hyper, cfg, opts);
  const auto b = train_toy(train, val, hyper, cfg);
  CHECK(seen == std::vector<std::size_t>{0, 1, 2, 3});
  REQUIRE(a.curve.size() == 4);
  CHECK(same_curve(a.curve, b.curve));
  CHECK(same_params(a.params, b.params));

  CHECK(a.curve[0].lr == 0.0);
  CHECK(a.curve[0].steps == 0);
  CHECK(a.curve[1].steps == 2);
  CHECK(a.curve[3].lr == doctest::Approx(cfg.lr_at(3)));
  for (const auto& r : a.curve) {
    CHECK(std::isfinite(r.train_loss));
    CHECK(std::isfinite(r.val_loss));
  }
  // Epoch 0 is the initial model on epoch 0's draws.
  const model::ModelParams init(hyper, derive_seed(cfg.seed, 0));
  CHECK(epoch_draw_loss(init, train, cfg, 0) == doctest::Approx(a.curve[0].train_loss).epsilon(1e-9));
  CHECK(epoch_draw_loss(a.params, train, cfg, 0) < a.curve[0].train_loss);

  CHECK(a.best_loss == doctest::Approx(a.curve[a.best_epoch].val_loss));
  for (const auto& r : a.curve) CHECK(a.best_loss <= r.val_loss);

  TrainConfig other = cfg;
  other.seed = 12;
  CHECK(!same_curve(train_toy(train, val, hyper, other).curve, a.curve));
}

TEST_CASE("resuming reproduces an uninterrupted run") {
  const auto data = tiny_set(4, 31);
  const std::vector<sim::MultichannelRecording> train(data.begin(), data.begin() + 3);
  const std::vector<sim::MultichannelRecording> val(data.begin() + 3, data.end());
  const auto hyper = model::ModelHyper::toy();
  const TrainConfig cfg = tiny_config();
  TempDir full("full"), part("part");

  TrainOptions o1;
  o1.out_dir = full.str();
  const auto straight = train_toy(train, val, hyper, cfg, o1);

  TrainOptions o2;
  o2.out_dir = part.str();
  o2.stop_after = 1;
  const auto first = train_toy(train, val, hyper, cfg, o2);
  CHECK(first.curve.size() == 2);
  for (const char* f : {"last.lnp", "best.lnp", "last.opt.json", "curve.jsonl"}) {
    CHECK(fs::exists(part.path / f));
  }

  TrainOptions o3;
  o3.out_dir = part.str();
  o3.resume_dir = part.str();
  const auto resumed = train_toy(train, val, hyper, cfg, o3);
  CHECK(same_curve(resumed.curve, straight.curve));
  CHECK(same_params(resumed.params, straight.params));
  CHECK(same_params(resumed.best, straight.best));
  CHECK(resumed.best_epoch == straight.best_epoch);

  std::ifstream a(full.path / "curve.jsonl"), b(part.path / "curve.jsonl");
  const std::string sa{std::istreambuf_iterator<char>(a), {}}, sb{std::istreambuf_iterator<char>(b), {}};
  CHECK(sa == sb);
  CHECK(std::count(sa.begin(), sa.end(), '\n') == 4);

  TrainConfig other = cfg;
  other.seed = 99;
  CHECK_THROWS_AS(train_toy(train, val, hyper, other, o3), ConfigError);
  model::ModelHyper bigger = hyper;
  bigger.hidden = 12;
  CHECK_THROWS_AS(train_toy(train, val, bigger, cfg, o3), ConfigError);
  TrainOptions missing;
  missing.resume_dir = (part.path / "nowhere").string();
  CHECK_THROWS_AS(train_toy(train, val, hyper, cfg, missing), InputError);
}

TEST_CASE("training input validation") {
  const auto hyper = model::ModelHyper::toy();
  CHECK_THROWS_AS(train_toy(std::vector<sim::MultichannelRecording>{}, {}, hyper, tiny_config()), InputError);
  CHECK_THROWS_AS(train_toy(std::vector<io::ManifestEntry>{}, ".", hyper, tiny_config()), InputError);
  auto data = tiny_set(1, 32);
  data[0].reverberant.clear();
  CHECK_THROWS_AS(train_toy(data, {}, hyper, tiny_config()), InputError);
  model::ModelHyper narrow = hyper;
  narrow.num_bins = 33;
  CHECK_THROWS_AS(train_toy(tiny_set(1, 32), {}, narrow, tiny_config()), ConfigError);
}
