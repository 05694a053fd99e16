// Copyright 2026 The LABNet Authors
// SPDX-License-Identifier: Apache-2.0

// labnet: dataset synthesis, enhancement, evaluation, training and resource
// benchmarking from the command line.
//
// Exit codes: 0 success, 1 runtime failure, 2 usage/config/input error.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "labnet/baselines/beamformers.hpp"
#include "labnet/common.hpp"
#include "labnet/config.hpp"
#include "labnet/io/manifest.hpp"
#include "labnet/io/wav.hpp"
#include "labnet/metrics/metrics.hpp"
#include "labnet/model/params.hpp"
#include "labnet/model/pipeline.hpp"
#include "labnet/model/serialize.hpp"
#include "labnet/sim/dataset.hpp"
#include "labnet/train/grad_check.hpp"
#include "labnet/train/trainer.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace labnet;

namespace {

struct Common {
  std::string config_path;
  std::optional<std::uint64_t> seed;
};

RunConfig resolve(const Common& c) {
  RunConfig cfg = c.config_path.empty() ? RunConfig{} : load_run_config(c.config_path);
  if (c.seed) {
    cfg.seed = *c.seed;
    cfg.train.seed = *c.seed;
  }
  return cfg;
}

void write_json_file(const fs::path& path, const json& j) {
  std::ofstream f(path);
  if (!f) throw InputError("cannot write " + path.string());
  f << j.dump(2) << "\n";
}

// Resolved configuration next to every command's outputs.
void echo_config(const fs::path& dir, const RunConfig& cfg) {
  fs::create_directories(dir);
  write_json_file(dir / "config.json", to_json(cfg));
}

// "6", "2..8" or "1,3,6".
std::vector<std::size_t> parse_counts(const std::string& text) {
  std::vector<std::size_t> out;
  auto number = [&](const std::string& s) -> std::size_t {
    try {
      std::size_t pos = 0;
      const long v = std::stol(s, &pos);
      if (pos != s.size() || v < 1) throw std::invalid_argument(s);
      return static_cast<std::size_t>(v);
    } catch (const std::exception&) {
      throw ConfigError("invalid microphone count '" + s + "'");
    }
  };
  const auto dots = text.find("..");
  if (dots != std::string::npos) {
    const std::size_t lo = number(text.substr(0, dots)), hi = number(text.substr(dots + 2));
    if (lo > hi) throw ConfigError("empty microphone range '" + text + "'");
    for (std::size_t c = lo; c <= hi; ++c) out.push_back(c);
    return out;
  }
  std::size_t start = 0;
  while (start <= text.size()) {
    const auto comma = text.find(',', start);
    out.push_back(number(text.substr(start, comma == std::string::npos ? std::string::npos : comma - start)));
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return out;
}

model::ModelParams load_or_init(const std::string& path, const std::string& ablate, RunConfig& cfg) {
  if (!path.empty()) {
    model::ModelParams p = model::load_params(path);
    if (!ablate.empty()) {
      model::ModelHyper want = p.hyper();
      want.apply_ablation(ablate);
      if (want.ablation_name() != p.hyper().ablation_name()) {
        throw ConfigError("model file is variant '" + p.hyper().ablation_name() + "', requested '" + ablate + "'");
      }
    }
    cfg.model = p.hyper();
    cfg.dsp.compress_exp = cfg.model.compress_exp;
    cfg.validate();
    return p;
  }
  if (!ablate.empty()) cfg.model.apply_ablation(ablate);
  cfg.validate();
  return model::ModelParams(cfg.model, cfg.seed);
}

sim::MultichannelRecording truncate(const sim::MultichannelRecording& rec, std::size_t mics) {
  if (rec.num_mics() < mics) {
    throw InputError("recording has " + std::to_string(rec.num_mics()) + " channels, " + std::to_string(mics) +
                     " requested");
  }
  sim::MultichannelRecording out = rec;
  auto cut = [mics](auto& v) {
    if (v.size() > mics) v.resize(mics);
  };
  cut(out.noisy);
  cut(out.reverberant);
  cut(out.noise);
  cut(out.rirs);
  cut(out.scene.mics);
  return out;
}

metrics::Enhancer make_enhancer(const std::string& kind, const model::ModelParams* params,
                                const dsp::DspConfig& dsp, bool stream) {
  if (kind == "identity") {
    return [](const sim::MultichannelRecording& r) { return r.noisy.at(0); };
  }
  if (kind == "mvdr") {
    return [dsp](const sim::MultichannelRecording& r) { return baselines::mvdr(r, dsp).wave; };
  }
  if (kind == "das") {
    return [dsp](const sim::MultichannelRecording& r) {
      return baselines::delay_and_sum(r.noisy, baselines::geometric_delays(r.scene, dsp.sample_rate));
    };
  }
  if (kind == "labnet") {
    if (stream) {
      return [params, dsp](const sim::MultichannelRecording& r) {
        return model::enhance_streaming(r.noisy, *params, dsp);
      };
    }
    auto net = std::make_shared<model::Network<float>>(*params, false);
    return [net, dsp](const sim::MultichannelRecording& r) { return model::enhance(r.noisy, *net, dsp); };
  }
  throw ConfigError("unknown enhancer '" + kind + "' (labnet, mvdr, das, identity)");
}

// One N-channel WAV or N mono WAVs taken in lexical order.
model::Multichannel read_inputs(std::vector<std::string> paths, int sample_rate) {
  if (paths.empty()) throw ConfigError("no input WAV given");
  model::Multichannel out;
  if (paths.size() == 1) {
    io::WavData w = io::read_wav(paths[0]);
    if (w.sample_rate != sample_rate) {
      throw InputError(paths[0] + ": sample rate " + std::to_string(w.sample_rate) + " Hz, expected " +
                       std::to_string(sample_rate));
    }
    return std::move(w.channels);
  }
  std::sort(paths.begin(), paths.end());
  for (const auto& p : paths) {
    io::WavData w = io::read_wav(p);
    if (w.num_channels() != 1) throw InputError(p + ": expected a mono file, found " + std::to_string(w.num_channels()) + " channels");
    if (w.sample_rate != sample_rate) {
      throw InputError(p + ": sample rate " + std::to_string(w.sample_rate) + " Hz, expected " +
                       std::to_string(sample_rate));
    }
    if (!out.empty() && w.channels[0].size() != out[0].size()) {
      throw InputError(p + ": length differs from " + paths[0]);
    }
    out.push_back(std::move(w.channels[0]));
  }
  return out;
}

// ---------------------------------------------------------------- simulate

struct SimulateArgs {
  Common common;
  std::string out;
  std::optional<std::size_t> count, mics;
  std::optional<double> seconds;
  bool synthetic = false;
  std::string clean_dir, noise_dir;
};

int cmd_simulate(const SimulateArgs& a) {
  RunConfig cfg = resolve(a.common);
  if (a.mics) cfg.sim.scene.num_mics = *a.mics;
  if (a.seconds) cfg.sim.seconds = *a.seconds;
  cfg.validate();
  if (!a.synthetic && a.clean_dir.empty()) throw ConfigError("simulate needs --synthetic or --clean-dir");

  sim::DatasetConfig dc;
  dc.count = a.count.value_or(10);
  dc.seed = cfg.seed;
  dc.scene = cfg.sim.scene;
  dc.synthetic = a.synthetic;
  dc.seconds = cfg.sim.seconds;
  dc.clean_dir = a.clean_dir;
  dc.noise_dir = a.noise_dir;
  dc.out_dir = a.out;
  dc.snr_channel = cfg.sim.snr_channel;
  echo_config(a.out, cfg);
  const sim::DatasetResult res = sim::build_dataset(dc);
  for (const auto& e : res.errors) std::cerr << "error: " << e << "\n";
  std::cout << "wrote " << res.entries.size() << " utterances to " << res.manifest_path << "\n";
  return res.errors.empty() ? 0 : 1;
}

// ----------------------------------------------------------------- enhance

struct EnhanceArgs {
  Common common;
  std::vector<std::string> inputs;
  std::string output, model, ablate, manifest;
  std::string baseline = "labnet";
  std::optional<std::size_t> mics;
  bool stream = false;
};

int cmd_enhance(const EnhanceArgs& a) {
  RunConfig cfg = resolve(a.common);
  std::optional<model::ModelParams> params;
  if (a.baseline == "labnet") params = load_or_init(a.model, a.ablate, cfg);
  cfg.validate();
  if (a.output.empty()) throw ConfigError("--output is required");
  const metrics::Enhancer enh = make_enhancer(a.baseline, params ? &*params : nullptr, cfg.dsp, a.stream);

  if (!a.manifest.empty()) {
    // Output is a directory with one WAV per manifest entry.
    const auto entries = io::read_manifest(a.manifest);
    const std::string base = io::parent_dir(a.manifest);
    echo_config(a.output, cfg);
    int status = 0;
    for (const auto& e : entries) {
      try {
        sim::MultichannelRecording rec = sim::load_recording(e, base);
        if (a.mics) rec = truncate(rec, *a.mics);
        io::write_wav((fs::path(a.output) / (e.id + ".wav")).string(), enh(rec), cfg.dsp.sample_rate);
      } catch (const std::exception& ex) {
        std::cerr << "error: " << e.id << ": " << ex.what() << "\n";
        status = 1;
      }
    }
    std::cout << "enhanced " << entries.size() << " utterances into " << a.output << "\n";
    return status;
  }

  if (a.baseline == "mvdr" || a.baseline == "das") {
    throw ConfigError("--baseline " + a.baseline + " needs --manifest (oracle statistics / geometry)");
  }
  sim::MultichannelRecording rec;
  rec.noisy = read_inputs(a.inputs, cfg.dsp.sample_rate);
  if (a.mics) rec = truncate(rec, *a.mics);
  model::check_recording(rec.noisy);
  const std::vector<float> out = enh(rec);
  const fs::path out_path(a.output);
  if (out_path.has_parent_path()) {
    fs::create_directories(out_path.parent_path());
    echo_config(out_path.parent_path(), cfg);
  }
  io::write_wav(a.output, out, cfg.dsp.sample_rate);
  std::cout << "wrote " << out.size() << " samples (" << rec.num_mics() << " input channels) to " << a.output
            << "\n";
  return 0;
}

// -------------------------------------------------------------------- eval

struct EvalArgs {
  Common common;
  std::string manifest, out, model, ablate;
  std::string enhancer = "labnet";
  std::string mics;
  bool stream = false;
};

int cmd_eval(const EvalArgs& a) {
  RunConfig cfg = resolve(a.common);
  std::optional<model::ModelParams> params;
  if (a.enhancer == "labnet") params = load_or_init(a.model, a.ablate, cfg);
  cfg.validate();
  const metrics::Enhancer base = make_enhancer(a.enhancer, params ? &*params : nullptr, cfg.dsp, a.stream);
  const auto entries = io::read_manifest(a.manifest);
  const std::string base_dir = io::parent_dir(a.manifest);
  echo_config(a.out, cfg);

  std::vector<std::optional<std::size_t>> sweep;
  if (a.mics.empty()) {
    sweep.push_back(std::nullopt);
  } else {
    for (std::size_t c : parse_counts(a.mics)) sweep.push_back(c);
  }
  std::ofstream rows(fs::path(a.out) / "rows.jsonl");
  std::ofstream summary(fs::path(a.out) / "summary.jsonl");
  if (!rows || !summary) throw InputError("cannot write reports under " + a.out);
  for (const auto& mics : sweep) {
    metrics::Enhancer enh = base;
    if (mics) {
      enh = [base, m = *mics](const sim::MultichannelRecording& r) { return base(truncate(r, m)); };
    }
    const metrics::EvalReport rep = metrics::evaluate(entries, base_dir, enh);
    for (const auto& r : rep.rows) {
      json j = metrics::to_json(r);
      if (mics) j["num_mics"] = *mics;
      rows << j.dump() << "\n";
      if (!r.error.empty()) std::cerr << "error: " << r.id << ": " << r.error << "\n";
    }
    json s = metrics::to_json(rep.summary);
    s["enhancer"] = a.enhancer;
    s["mics"] = mics ? json(*mics) : json("all");
    summary << s.dump() << "\n";
    std::cout << s.dump() << "\n";
  }
  return 0;
}

// ------------------------------------------------------------------- bench

struct BenchArgs {
  Common common;
  std::string model, ablate, out;
  std::string mics = "1,3,6";
  double seconds = 4.0;
  std::size_t rtf_mics = 6;
};

int cmd_bench(const BenchArgs& a) {
  RunConfig cfg = resolve(a.common);
  const model::ModelParams params = load_or_init(a.model, a.ablate, cfg);
  const std::vector<std::size_t> counts = parse_counts(a.mics);
  const double fps = static_cast<double>(cfg.dsp.sample_rate) / static_cast<double>(cfg.dsp.hop);

  json rep;
  rep["variant"] = cfg.model.ablation_name();
  rep["params"] = model::count_params(params);
  json macs = json::array();
  std::vector<double> values;
  for (std::size_t c : counts) {
    const double m = model::count_macs(cfg.model, c, 1.0, fps);
    values.push_back(m);
    macs.push_back({{"mics", c}, {"params", model::count_params(params)}, {"macs_per_second", m}});
  }
  rep["macs"] = macs;
  const model::MacBreakdown mb = model::mac_breakdown(cfg.model);
  rep["macs_per_frame_slope"] = mb.per_channel;
  rep["macs_per_frame_intercept"] = mb.shared;
  double residual = 0.0;
  if (counts.size() >= 2) {
    const double c0 = static_cast<double>(counts.front()), c1 = static_cast<double>(counts.back());
    const double slope = (values.back() - values.front()) / (c1 - c0);
    for (std::size_t i = 0; i < counts.size(); ++i) {
      const double fit = values.front() + slope * (static_cast<double>(counts[i]) - c0);
      residual = std::max(residual, std::abs(values[i] - fit) / std::max(1.0, std::abs(values[i])));
    }
  }
  rep["affine_residual"] = residual;

  // Real-time factor of the streaming path on noise input.
  Rng rng(derive_seed(cfg.seed, 0xbe));
  const auto len = static_cast<std::size_t>(a.seconds * cfg.dsp.sample_rate);
  model::Multichannel x(a.rtf_mics, std::vector<float>(len));
  for (auto& ch : x) {
    for (auto& v : ch) v = static_cast<float>(0.1 * normal(rng));
  }
  model::StreamingEnhancer streamer(params, cfg.dsp, a.rtf_mics);
  model::Multichannel block(a.rtf_mics, std::vector<float>(streamer.hop()));
  const auto t0 = std::chrono::steady_clock::now();
  for (std::size_t start = 0; start + streamer.hop() <= len; start += streamer.hop()) {
    for (std::size_t c = 0; c < a.rtf_mics; ++c) {
      std::copy_n(x[c].begin() + static_cast<long>(start), streamer.hop(), block[c].begin());
    }
    streamer.process(block);
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  rep["rtf_mics"] = a.rtf_mics;
  rep["rtf"] = secs / a.seconds;

  const double hop_ms = 1000.0 * static_cast<double>(cfg.dsp.hop) / cfg.dsp.sample_rate;
  const std::size_t delay_hops = streamer.delay_samples() / cfg.dsp.hop;
  rep["latency_ms"] = streamer.latency_ms();

  std::cout << "variant            " << rep["variant"].get<std::string>() << "\n";
  std::cout << "parameters         " << rep["params"].get<std::size_t>() << " (independent of mic count)\n";
  for (std::size_t i = 0; i < counts.size(); ++i) {
    std::cout << "MACs/s  C=" << std::setw(2) << counts[i] << "       " << std::fixed << std::setprecision(1)
              << values[i] / 1e6 << " M\n";
  }
  std::cout << std::defaultfloat << std::setprecision(6);
  std::cout << "MACs affine in C   max relative residual " << residual << "\n";
  std::cout << "streaming RTF      " << rep["rtf"].get<double>() << " (C=" << a.rtf_mics << ", " << a.seconds
            << " s)\n";
  std::cout << "latency            " << delay_hops << " hops emission delay (1 analysis + 2 x " << cfg.dsp.gla_iters
            << " Griffin-Lim) + 1 hop block buffering = " << delay_hops + 1 << " x " << hop_ms
            << " ms = " << streamer.latency_ms() << " ms\n";
  if (!a.out.empty()) {
    echo_config(fs::path(a.out), cfg);
    write_json_file(fs::path(a.out) / "bench.json", rep);
  }
  return 0;
}

// ------------------------------------------------------------------- train

struct TrainArgs {
  Common common;
  std::string manifest, out, resume;
  std::optional<std::size_t> epochs, batch, min_channels, max_channels;
  std::optional<double> lr, segment;
  bool toy = false;
  bool grad_check = false;
  bool eps_sweep = false;
  double eps = 1e-5;
};

int cmd_train(const TrainArgs& a) {
  RunConfig cfg = resolve(a.common);
  if (a.toy) cfg.model = model::ModelHyper::toy();
  if (a.grad_check) {
    model::ModelHyper h = cfg.model;
    h.num_bins = train::grad_check_hyper().num_bins;
    train::GradCheckConfig gc;
    gc.eps = a.eps;
    gc.seed = cfg.seed + 1;
    if (a.eps_sweep) {
      for (const auto& p : train::eps_sweep(h, {1e-4, 1e-5, 1e-6}, gc)) {
        std::cout << "eps " << p.eps << "  worst relative error " << p.max_rel << "\n";
      }
      return 0;
    }
    const auto lin = train::grad_check_linear(gc);
    const auto res = train::grad_check(h, gc);
    std::cout << "linear layer       worst relative error " << lin.max_rel << "\n";
    std::cout << "full network       worst relative error " << res.max_rel << " at " << res.worst << " ("
              << res.checked << " coordinates, eps " << a.eps << ")\n";
    return 0;
  }
  if (a.epochs) cfg.train.epochs = *a.epochs;
  if (a.batch) cfg.train.batch_size = *a.batch;
  if (a.lr) cfg.train.lr0 = *a.lr;
  if (a.segment) cfg.train.segment_seconds = *a.segment;
  if (a.min_channels) cfg.train.channels.min = *a.min_channels;
  if (a.max_channels) cfg.train.channels.max = *a.max_channels;
  cfg.validate();
  if (a.manifest.empty()) throw ConfigError("--manifest is required");
  if (a.out.empty()) throw ConfigError("--out is required");

  echo_config(a.out, cfg);
  train::TrainOptions opts;
  opts.out_dir = a.out;
  opts.resume_dir = a.resume;
  opts.on_epoch = [](const train::EpochRecord& r) { std::cout << train::to_json(r).dump() << std::endl; };
  const auto entries = io::read_manifest(a.manifest);
  const train::TrainResult res = train::train_toy(entries, io::parent_dir(a.manifest), cfg.model, cfg.train, opts);
  std::cout << "best epoch " << res.best_epoch << " loss " << res.best_loss << "; checkpoints in " << a.out << "\n";
  return 0;
}

// ---------------------------------------------------------------- describe

struct DescribeArgs {
  Common common;
  std::string model, ablate;
};

int cmd_describe(const DescribeArgs& a) {
  RunConfig cfg = resolve(a.common);
  const model::ModelParams params = load_or_init(a.model, a.ablate, cfg);
  json j = model::describe(params);
  j["macs_per_second_c6"] = model::count_macs(cfg.model, 6);
  std::cout << j.dump(2) << "\n";
  return 0;
}

void add_common(CLI::App* sub, Common& c) {
  sub->add_option("--config", c.config_path, "JSON run configuration")->check(CLI::ExistingFile);
  sub->add_option("--seed", c.seed, "Seed for every random draw of the command");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"LABNet multichannel speech enhancement"};
  app.require_subcommand(1);

  SimulateArgs sim_a;
  auto* sim_c = app.add_subcommand("simulate", "Synthesize a simulated multichannel dataset");
  add_common(sim_c, sim_a.common);
  sim_c->add_option("--out", sim_a.out, "Output directory")->required();
  sim_c->add_option("--count", sim_a.count, "Number of utterances");
  sim_c->add_option("--mics", sim_a.mics, "Microphones per utterance");
  sim_c->add_option("--seconds", sim_a.seconds, "Synthetic utterance length");
  sim_c->add_flag("--synthetic", sim_a.synthetic, "Use synthetic speech and noise sources");
  sim_c->add_option("--clean-dir", sim_a.clean_dir, "Directory of 16 kHz clean speech WAVs");
  sim_c->add_option("--noise-dir", sim_a.noise_dir, "Directory of 16 kHz noise WAVs");

  EnhanceArgs enh_a;
  auto* enh_c = app.add_subcommand("enhance", "Enhance a multichannel recording");
  add_common(enh_c, enh_a.common);
  enh_c->add_option("--input,-i", enh_a.inputs, "One multichannel WAV or several mono WAVs (lexical order)");
  enh_c->add_option("--output,-o", enh_a.output, "Output WAV (or directory with --manifest)");
  enh_c->add_option("--model", enh_a.model, "Parameter file; a seeded random model when omitted");
  enh_c->add_option("--ablate", enh_a.ablate, "full, no-stage1, no-stage2, no-stage3 or tac");
  enh_c->add_option("--baseline", enh_a.baseline, "labnet, mvdr, das or identity");
  enh_c->add_option("--manifest", enh_a.manifest, "Enhance every utterance of a dataset manifest");
  enh_c->add_option("--mics", enh_a.mics, "Use only the first N channels");
  enh_c->add_flag("--stream", enh_a.stream, "Run the frame-synchronous streaming path");

  EvalArgs eval_a;
  auto* eval_c = app.add_subcommand("eval", "Score an enhancer on a dataset manifest");
  add_common(eval_c, eval_a.common);
  eval_c->add_option("--manifest", eval_a.manifest, "Dataset manifest")->required();
  eval_c->add_option("--out", eval_a.out, "Report directory")->required();
  eval_c->add_option("--enhancer", eval_a.enhancer, "labnet, mvdr, das or identity");
  eval_c->add_option("--model", eval_a.model, "Parameter file for the labnet enhancer");
  eval_c->add_option("--ablate", eval_a.ablate, "Model variant");
  eval_c->add_option("--mics", eval_a.mics, "Channel counts: N, A..B or A,B,C (one summary each)");
  eval_c->add_flag("--stream", eval_a.stream, "Use the streaming path");

  BenchArgs bench_a;
  auto* bench_c = app.add_subcommand("bench", "Parameter, MAC, real-time factor and latency report");
  add_common(bench_c, bench_a.common);
  bench_c->add_option("--model", bench_a.model, "Parameter file");
  bench_c->add_option("--ablate", bench_a.ablate, "Model variant");
  bench_c->add_option("--mics", bench_a.mics, "Channel counts for the MAC table");
  bench_c->add_option("--seconds", bench_a.seconds, "Signal length for the real-time factor");
  bench_c->add_option("--rtf-mics", bench_a.rtf_mics, "Channel count for the real-time factor");
  bench_c->add_option("--out", bench_a.out, "Also write bench.json here");

  TrainArgs train_a;
  auto* train_c = app.add_subcommand("train", "Toy-scale training");
  add_common(train_c, train_a.common);
  train_c->add_option("--manifest", train_a.manifest, "Training manifest");
  train_c->add_option("--out", train_a.out, "Checkpoint directory");
  train_c->add_option("--resume", train_a.resume, "Continue from a checkpoint directory");
  train_c->add_option("--epochs", train_a.epochs);
  train_c->add_option("--batch", train_a.batch, "Utterances per optimizer step");
  train_c->add_option("--lr", train_a.lr, "Initial learning rate");
  train_c->add_option("--segment", train_a.segment, "Training segment length in seconds");
  train_c->add_option("--min-channels", train_a.min_channels);
  train_c->add_option("--max-channels", train_a.max_channels);
  train_c->add_flag("--toy", train_a.toy, "Use the small model configuration");
  train_c->add_flag("--grad-check", train_a.grad_check, "Finite-difference gradient check, then exit");
  train_c->add_flag("--eps-sweep", train_a.eps_sweep, "With --grad-check: sweep the step size");
  train_c->add_option("--eps", train_a.eps, "Finite-difference step");

  DescribeArgs desc_a;
  auto* desc_c = app.add_subcommand("describe", "Print a model's configuration and tensor table");
  add_common(desc_c, desc_a.common);
  desc_c->add_option("--model", desc_a.model, "Parameter file");
  desc_c->add_option("--ablate", desc_a.ablate, "Model variant");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (*sim_c) return cmd_simulate(sim_a);
    if (*enh_c) return cmd_enhance(enh_a);
    if (*eval_c) return cmd_eval(eval_a);
    if (*bench_c) return cmd_bench(bench_a);
    if (*train_c) return cmd_train(train_a);
    if (*desc_c) return cmd_describe(desc_a);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const InputError& e) {
    std::cerr << "input error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}
