// Copyright 2026 The LABNet Authors
// SPDX-License-Identifier: Apache-2.0

#include "labnet/train/trainer.hpp"

#include <cmath>
#include <deque>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>

#include "labnet/common.hpp"
#include "labnet/model/network.hpp"
#include "labnet/model/pipeline.hpp"
#include "labnet/model/serialize.hpp"
#include "labnet/sim/dataset.hpp"
#include "labnet/util/parallel.hpp"
#include "labnet/util/random.hpp"

namespace labnet::train {

namespace fs = std::filesystem;
using nlohmann::json;

void TrainConfig::validate() const {
  if (!(lr0 > 0.0) || !std::isfinite(lr0)) throw ConfigError("train: lr0 must be positive");
  if (!(lr_decay > 0.0 && lr_decay <= 1.0)) throw ConfigError("train: lr_decay must be in (0, 1]");
  if (!(clip_norm > 0.0) || !std::isfinite(clip_norm)) throw ConfigError("train: clip_norm must be positive");
  if (!(weight_decay >= 0.0)) throw ConfigError("train: weight_decay must be >= 0");
  if (batch_size == 0) throw ConfigError("train: batch_size must be >= 1");
  if (!(segment_seconds > 0.0)) throw ConfigError("train: segment_seconds must be positive");
  if (channels.min < 1 || channels.min > channels.max) {
    throw ConfigError("train: channel range must satisfy 1 <= min <= max");
  }
  if (!(loss.magnitude >= 0.0 && loss.complex >= 0.0) || loss.magnitude + loss.complex <= 0.0) {
    throw ConfigError("train: loss weights must be non-negative and not both zero");
  }
  if (!(validation_fraction >= 0.0 && validation_fraction < 1.0)) {
    throw ConfigError("train: validation_fraction must be in [0, 1)");
  }
}

double TrainConfig::lr_at(std::size_t epoch) const {
  return lr0 * std::pow(lr_decay, static_cast<double>(epoch > 0 ? epoch - 1 : 0));
}

json to_json(const TrainConfig& c) {
  return {{"lr0", c.lr0},
          {"lr_decay", c.lr_decay},
          {"clip_norm", c.clip_norm},
          {"weight_decay", c.weight_decay},
          {"epochs", c.epochs},
          {"batch_size", c.batch_size},
          {"segment_seconds", c.segment_seconds},
          {"loss_magnitude", c.loss.magnitude},
          {"loss_complex", c.loss.complex},
          {"min_channels", c.channels.min},
          {"max_channels", c.channels.max},
          {"seed", c.seed},
          {"validation_fraction", c.validation_fraction}};
}

TrainConfig train_config_from_json(const json& j) {
  if (!j.is_object()) throw ConfigError("train config must be an object");
  TrainConfig c;
  for (const auto& [key, v] : j.items()) {
    try {
      if (key == "lr0") c.lr0 = v.get<double>();
      else if (key == "lr_decay") c.lr_decay = v.get<double>();
      else if (key == "clip_norm") c.clip_norm = v.get<double>();
      else if (key == "weight_decay") c.weight_decay = v.get<double>();
      else if (key == "epochs") c.epochs = v.get<std::size_t>();
      else if (key == "batch_size") c.batch_size = v.get<std::size_t>();
      else if (key == "segment_seconds") c.segment_seconds = v.get<double>();
      else if (key == "loss_magnitude") c.loss.magnitude = v.get<double>();
      else if (key == "loss_complex") c.loss.complex = v.get<double>();
      else if (key == "min_channels") c.channels.min = v.get<std::size_t>();
      else if (key == "max_channels") c.channels.max = v.get<std::size_t>();
      else if (key == "seed") c.seed = v.get<std::uint64_t>();
      else if (key == "validation_fraction") c.validation_fraction = v.get<double>();
      else throw ConfigError("train config: unknown key '" + key + "'");
    } catch (const json::exception& e) {
      throw ConfigError("train config: bad value for '" + key + "': " + e.what());
    }
  }
  c.validate();
  return c;
}

namespace {

double nan_value() { return std::numeric_limits<double>::quiet_NaN(); }

json number_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

double number_from(const json& v) { return v.is_null() ? nan_value() : v.get<double>(); }

}  // namespace

json to_json(const EpochRecord& r) {
  return {{"epoch", r.epoch},
          {"lr", r.lr},
          {"train_loss", number_or_null(r.train_loss)},
          {"val_loss", number_or_null(r.val_loss)},
          {"grad_norm", r.grad_norm},
          {"steps", r.steps},
          {"rejected", r.rejected}};
}

EpochRecord epoch_record_from_json(const json& j) {
  EpochRecord r;
  r.epoch = j.at("epoch").get<std::size_t>();
  r.lr = j.at("lr").get<double>();
  r.train_loss = number_from(j.at("train_loss"));
  r.val_loss = number_from(j.at("val_loss"));
  r.grad_norm = j.at("grad_norm").get<double>();
  r.steps = j.at("steps").get<std::size_t>();
  r.rejected = j.at("rejected").get<std::size_t>();
  return r;
}

namespace {

struct Prepared {
  nn::Tensor<float> features;
  MaskTarget target;
};

Prepared prepare(const model::Multichannel& noisy, const std::vector<float>& clean_ref,
                 const dsp::DspConfig& dsp) {
  Prepared p;
  const auto spectra = model::analysis_spectra(noisy, dsp);
  const auto clean = model::analysis_spectra({clean_ref}, dsp);
  p.features = model::features_from_spectra(spectra, dsp.compress_exp);
  p.target = make_mask_target(spectra[0], clean[0], dsp.compress_exp);
  return p;
}

double forward_loss(const model::Network<float>& net, const Prepared& p, const LossWeights& w) {
  auto mask = net.forward(nullptr, nn::constant(p.features), nullptr);
  return static_cast<double>(mask_loss<float>(nullptr, mask, p.target, w)->value[0]);
}

// The augmented, cropped samples of one epoch in visiting order. All random
// draws happen here, sequentially, so the result depends only on
// (seed, epoch); feature extraction then runs in parallel.
std::vector<Prepared> draw_epoch(const std::vector<sim::MultichannelRecording>& set, const TrainConfig& cfg,
                                 const dsp::DspConfig& dsp, std::size_t epoch) {
  Rng rng(derive_seed(cfg.seed, epoch + 1));
  std::vector<std::size_t> order(set.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  for (std::size_t i = order.size(); i > 1; --i) {
    std::swap(order[i - 1], order[static_cast<std::size_t>(uniform_int(rng, 0, static_cast<std::int64_t>(i) - 1))]);
  }
  const std::size_t seg_len = static_cast<std::size_t>(std::lround(cfg.segment_seconds * dsp.sample_rate));
  std::vector<sim::MultichannelRecording> samples;
  samples.reserve(order.size());
  for (std::size_t k : order) {
    const auto& full = set[k];
    sim::MultichannelRecording sample = select_channels(full, draw_channels(rng, full.num_mics(), cfg.channels));
    if (sample.length() > seg_len) {
      const auto off = static_cast<std::size_t>(
          uniform_int(rng, 0, static_cast<std::int64_t>(sample.length() - seg_len)));
      for (auto* chans : {&sample.noisy, &sample.reverberant}) {
        for (auto& ch : *chans) {
          ch = std::vector<float>(ch.begin() + static_cast<long>(off), ch.begin() + static_cast<long>(off + seg_len));
        }
      }
    }
    samples.push_back(std::move(sample));
  }
  std::vector<Prepared> out(samples.size());
  parallel_for(samples.size(), [&](std::size_t i) {
    out[i] = prepare(samples[i].noisy, samples[i].reverberant[0], dsp);
  });
  return out;
}

double mean_loss(const model::Network<float>& net, const std::vector<sim::MultichannelRecording>& set,
                 const TrainConfig& cfg, const dsp::DspConfig& dsp) {
  if (set.empty()) return nan_value();
  double total = 0.0;
  for (const auto& rec : set) {
    // Validation uses the stored reference and at most max_channels mics.
    model::Multichannel noisy(rec.noisy.begin(),
                              rec.noisy.begin() + static_cast<long>(std::min(cfg.channels.max, rec.num_mics())));
    total += forward_loss(net, prepare(noisy, rec.reverberant.at(0), dsp), cfg.loss);
  }
  return total / static_cast<double>(set.size());
}

struct Checkpoint {
  std::size_t epoch = 0;
  std::uint64_t seed = 0;
  std::size_t best_epoch = 0;
  double best_loss = 0.0;
  std::vector<EpochRecord> curve;
  json optimizer;
};

void write_text(const fs::path& path, const std::string& text) {
  const fs::path tmp = path.string() + ".tmp";
  {
    std::ofstream f(tmp, std::ios::binary);
    if (!f) throw InputError("cannot write " + tmp.string());
    f << text;
    if (!f) throw InputError("write failed for " + tmp.string());
  }
  fs::rename(tmp, path);
}

void save_checkpoint(const fs::path& dir, const model::ModelParams& last, const model::ModelParams& best,
                     const Checkpoint& ck, const TrainConfig& cfg) {
  fs::create_directories(dir);
  model::save_params(last, (dir / "last.lnp").string());
  model::save_params(best, (dir / "best.lnp").string());
  json side;
  side["epoch"] = ck.epoch;
  side["best_epoch"] = ck.best_epoch;
  side["best_loss"] = number_or_null(ck.best_loss);
  side["config"] = to_json(cfg);
  side["optimizer"] = ck.optimizer;
  side["curve"] = json::array();
  std::string curve;
  for (const auto& r : ck.curve) {
    side["curve"].push_back(to_json(r));
    curve += to_json(r).dump() + "\n";
  }
  write_text(dir / "last.opt.json", side.dump());
  write_text(dir / "curve.jsonl", curve);
}

Checkpoint load_checkpoint(const fs::path& dir) {
  std::ifstream f(dir / "last.opt.json");
  if (!f) throw InputError("resume: cannot open " + (dir / "last.opt.json").string());
  Checkpoint ck;
  try {
    const json side = json::parse(f);
    ck.epoch = side.at("epoch").get<std::size_t>();
    ck.best_epoch = side.at("best_epoch").get<std::size_t>();
    ck.best_loss = number_from(side.at("best_loss"));
    ck.optimizer = side.at("optimizer");
    for (const auto& r : side.at("curve")) ck.curve.push_back(epoch_record_from_json(r));
    ck.seed = train_config_from_json(side.at("config")).seed;
  } catch (const json::exception& e) {
    throw CorruptModelError(std::string("resume: malformed optimizer sidecar: ") + e.what());
  }
  return ck;
}

}  // namespace

double recording_loss(const model::ModelParams& params, const sim::MultichannelRecording& rec,
                      const LossWeights& w, dsp::DspConfig dsp) {
  dsp.compress_exp = params.hyper().compress_exp;
  const model::Network<float> net(params, false);
  return forward_loss(net, prepare(rec.noisy, rec.reverberant.at(0), dsp), w);
}

double epoch_draw_loss(const model::ModelParams& params, const std::vector<sim::MultichannelRecording>& set,
                       const TrainConfig& cfg, std::size_t epoch) {
  dsp::DspConfig dsp;
  dsp.compress_exp = params.hyper().compress_exp;
  if (set.empty()) throw InputError("epoch_draw_loss: empty set");
  const model::Network<float> net(params, false);
  double total = 0.0;
  for (const Prepared& p : draw_epoch(set, cfg, dsp, epoch)) total += forward_loss(net, p, cfg.loss);
  return total / static_cast<double>(set.size());
}

TrainResult train_toy(const std::vector<sim::MultichannelRecording>& train_set,
                      const std::vector<sim::MultichannelRecording>& val_set,
                      const model::ModelHyper& hyper, const TrainConfig& cfg, const TrainOptions& opts) {
  cfg.validate();
  hyper.validate();
  if (train_set.empty()) throw InputError("train: training set is empty");
  for (const auto& rec : train_set) {
    if (rec.reverberant.size() != rec.num_mics()) throw InputError("train: recording lacks clean references");
  }
  dsp::DspConfig dsp;
  dsp.compress_exp = hyper.compress_exp;
  if (dsp.num_bins() != hyper.num_bins) {
    throw ConfigError("train: model expects " + std::to_string(hyper.num_bins) + " bins, DSP gives " +
                      std::to_string(dsp.num_bins()));
  }
  TrainResult res;
  res.params = model::ModelParams(hyper, derive_seed(cfg.seed, 0));
  AdamW opt(AdamWConfig{0.9, 0.999, 1e-8, cfg.weight_decay, cfg.clip_norm});
  std::size_t start_epoch = 0;

  if (!opts.resume_dir.empty()) {
    Checkpoint ck = load_checkpoint(opts.resume_dir);
    if (ck.seed != cfg.seed) {
      throw ConfigError("resume: checkpoint was trained with a different seed");
    }
    res.params = model::load_params((fs::path(opts.resume_dir) / "last.lnp").string());
    res.best = model::load_params((fs::path(opts.resume_dir) / "best.lnp").string());
    if (model::hyper_to_json(res.params.hyper()) != model::hyper_to_json(hyper)) {
      throw ConfigError("resume: checkpoint model configuration differs from the requested one");
    }
    opt.load_state_json(ck.optimizer);
    res.curve = std::move(ck.curve);
    res.best_epoch = ck.best_epoch;
    res.best_loss = ck.best_loss;
    start_epoch = ck.epoch + 1;
  }

  model::Network<float> net(res.params, true);
  std::vector<ParamSlot> slots;
  std::deque<double> recent;  // last finite losses for diagnostics

  const std::size_t last_epoch = opts.stop_after ? std::min(opts.stop_after, cfg.epochs) : cfg.epochs;
  for (std::size_t epoch = start_epoch; epoch <= last_epoch; ++epoch) {
    const std::vector<Prepared> batch_set = draw_epoch(train_set, cfg, dsp, epoch);

    EpochRecord rec;
    rec.epoch = epoch;
    rec.lr = epoch == 0 ? 0.0 : cfg.lr_at(epoch);
    double loss_sum = 0.0, norm_sum = 0.0;
    std::size_t in_batch = 0;

    auto apply_step = [&] {
      slots.clear();
      for (const std::string& name : net.names()) {
        const auto& v = net.param(name);
        slots.push_back({name, v->value.data(), v->grad.empty() ? nullptr : v->grad.data(), v->value.size()});
      }
      const StepReport sr = opt.step(slots, rec.lr);
      if (sr.applied) {
        ++rec.steps;
        norm_sum += sr.grad_norm;
      } else {
        ++rec.rejected;
      }
      net.zero_grad();
      in_batch = 0;
    };

    for (std::size_t k = 0; k < batch_set.size(); ++k) {
      const Prepared& prep = batch_set[k];
      double loss;
      if (epoch == 0) {
        loss = forward_loss(net, prep, cfg.loss);
      } else {
        nn::Tape<float> tape;
        auto mask = net.forward(&tape, nn::constant(prep.features), nullptr);
        auto l = mask_loss(&tape, mask, prep.target, cfg.loss);
        loss = static_cast<double>(l->value[0]);
        if (std::isfinite(loss)) {
          const std::size_t batch = std::min(cfg.batch_size, batch_set.size() - (k - in_batch));
          tape.backward(l, 1.0f / static_cast<float>(batch));
        }
      }
      if (!std::isfinite(loss)) {
        std::ostringstream msg;
        msg << "training diverged at epoch " << epoch << ", sample " << k << "; last finite losses:";
        for (double v : recent) msg << ' ' << v;
        throw NumericalError(msg.str());
      }
      recent.push_back(loss);
      if (recent.size() > 5) recent.pop_front();
      loss_sum += loss;
      if (epoch > 0 && (++in_batch == cfg.batch_size || k + 1 == batch_set.size())) apply_step();
    }

    rec.train_loss = loss_sum / static_cast<double>(batch_set.size());
    rec.grad_norm = rec.steps ? norm_sum / static_cast<double>(rec.steps) : 0.0;
    rec.val_loss = mean_loss(net, val_set, cfg, dsp);
    res.curve.push_back(rec);

    net.export_to(res.params);
    const double score = std::isfinite(rec.val_loss) ? rec.val_loss : rec.train_loss;
    if (epoch == 0 || res.best.names().empty() || score < res.best_loss) {
      res.best = res.params;
      res.best_loss = score;
      res.best_epoch = epoch;
    }
    if (!opts.out_dir.empty()) {
      Checkpoint ck{epoch, cfg.seed, res.best_epoch, res.best_loss, res.curve, opt.state_json()};
      save_checkpoint(opts.out_dir, res.params, res.best, ck, cfg);
    }
    if (opts.on_epoch) opts.on_epoch(rec);
  }
  return res;
}

TrainResult train_toy(const std::vector<io::ManifestEntry>& manifest, const std::string& base_dir,
                      const model::ModelHyper& hyper, const TrainConfig& cfg, const TrainOptions& opts) {
  cfg.validate();
  if (manifest.empty()) throw InputError("train: manifest has no utterances");
  std::size_t n_val = 0;
  if (manifest.size() >= 2) {
    n_val = static_cast<std::size_t>(std::ceil(cfg.validation_fraction * static_cast<double>(manifest.size())));
    n_val = std::min(n_val, manifest.size() - 1);
  }
  std::vector<sim::MultichannelRecording> train_set, val_set;
  for (std::size_t i = 0; i < manifest.size(); ++i) {
    auto rec = sim::load_recording(manifest[i], base_dir);
    (i + n_val < manifest.size() ? train_set : val_set).push_back(std::move(rec));
  }
  return train_toy(train_set, val_set, hyper, cfg, opts);
}

}  // namespace labnet::train
