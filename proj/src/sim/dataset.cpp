// Copyright 2026 The LABNet Authors
// SPDX-License-Identifier: Apache-2.0

#include "labnet/sim/dataset.hpp"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <optional>

#include "labnet/common.hpp"
#include "labnet/io/wav.hpp"
#include "labnet/sim/synth.hpp"
#include "labnet/util/parallel.hpp"

namespace labnet::sim {

namespace fs = std::filesystem;

namespace {

std::vector<std::string> list_wavs(const std::string& dir) {
  if (dir.empty()) throw ConfigError("dataset: source directory not set");
  if (!fs::is_directory(dir)) throw ConfigError("dataset: '" + dir + "' is not a directory");
  std::vector<std::string> out;
  for (const auto& e : fs::directory_iterator(dir)) {
    if (e.is_regular_file() && e.path().extension() == ".wav") out.push_back(e.path().string());
  }
  std::sort(out.begin(), out.end());
  if (out.empty()) throw ConfigError("dataset: no .wav files in '" + dir + "'");
  return out;
}

std::vector<float> load_mono(const std::string& path) {
  const io::WavData w = io::read_wav(path);
  if (w.sample_rate != 16000) {
    throw InputError("'" + path + "' has sample rate " + std::to_string(w.sample_rate) + ", expected 16000");
  }
  if (w.num_channels() != 1) throw InputError("'" + path + "' is not mono");
  if (w.num_frames() == 0) throw InputError("'" + path + "' is empty");
  return w.channels[0];
}

std::string utt_id(const DatasetConfig& cfg, std::size_t i) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%05zu", i);
  return cfg.id_prefix + buf;
}

struct Sources {
  std::vector<std::string> clean, noise;
};

MultichannelRecording make_utterance(const DatasetConfig& cfg, const Sources& src, std::size_t index) {
  const std::uint64_t seed = derive_seed(cfg.seed, index);
  Rng rng(seed);
  Scene scene = sample_scene(rng, cfg.scene);
  scene.seed = seed;
  std::vector<float> clean;
  std::vector<std::vector<float>> noises;
  if (cfg.synthetic) {
    clean = synth_speech(rng, cfg.seconds);
    for (std::size_t k = 0; k < scene.noises.size(); ++k) {
      const auto kind = static_cast<NoiseKind>(uniform_int(rng, 0, 3));
      noises.push_back(synth_noise(rng, kind, cfg.seconds));
    }
  } else {
    const auto& cpath = src.clean[static_cast<std::size_t>(
        uniform_int(rng, 0, static_cast<std::int64_t>(src.clean.size()) - 1))];
    clean = load_mono(cpath);
    for (std::size_t k = 0; k < scene.noises.size(); ++k) {
      const auto& npath = src.noise[static_cast<std::size_t>(
          uniform_int(rng, 0, static_cast<std::int64_t>(src.noise.size()) - 1))];
      std::vector<float> nz = load_mono(npath);
      // Random rotation so different utterances see different noise segments.
      const auto off = static_cast<std::size_t>(uniform_int(rng, 0, static_cast<std::int64_t>(nz.size()) - 1));
      std::rotate(nz.begin(), nz.begin() + static_cast<long>(off), nz.end());
      noises.push_back(std::move(nz));
    }
  }
  MixOptions opt;
  opt.snr_channel = cfg.snr_channel;
  return mix_scene(clean, noises, scene, opt);
}

io::Point to_point(const Vec3& v) { return {v[0], v[1], v[2]}; }

}  // namespace

MultichannelRecording synth_utterance(const DatasetConfig& cfg, std::size_t index) {
  if (!cfg.synthetic) throw ContractError("synth_utterance requires a synthetic config");
  return make_utterance(cfg, {}, index);
}

DatasetResult build_dataset(const DatasetConfig& cfg) {
  if (cfg.count < 1) throw ConfigError("dataset: count must be >= 1");
  if (cfg.out_dir.empty()) throw ConfigError("dataset: output directory not set");
  cfg.scene.validate();
  if (cfg.snr_channel >= cfg.scene.num_mics) throw ConfigError("dataset: snr channel out of range");
  Sources src;
  if (!cfg.synthetic) {
    src.clean = list_wavs(cfg.clean_dir);
    src.noise = list_wavs(cfg.noise_dir);
  }
  fs::create_directories(cfg.out_dir);

  std::vector<std::optional<io::ManifestEntry>> slots(cfg.count);
  std::vector<std::string> errors(cfg.count);
  parallel_for(cfg.count, [&](std::size_t i) {
    const std::string id = utt_id(cfg, i);
    try {
      const MultichannelRecording rec = make_utterance(cfg, src, i);
      fs::create_directories(fs::path(cfg.out_dir) / id);
      io::ManifestEntry e;
      e.id = id;
      e.num_mics = rec.num_mics();
      e.seed = rec.scene.seed;
      for (std::size_t c = 0; c < rec.num_mics(); ++c) {
        const std::string suffix = "_ch" + std::to_string(c) + ".wav";
        e.noisy.push_back(id + "/noisy" + suffix);
        e.clean.push_back(id + "/clean" + suffix);
        e.noise.push_back(id + "/noise" + suffix);
        io::write_wav(io::join_path(cfg.out_dir, e.noisy.back()), rec.noisy[c], 16000);
        io::write_wav(io::join_path(cfg.out_dir, e.clean.back()), rec.reverberant[c], 16000);
        io::write_wav(io::join_path(cfg.out_dir, e.noise.back()), rec.noise[c], 16000);
      }
      const Scene& s = rec.scene;
      e.room = {s.room.length, s.room.width, s.room.height};
      e.t60 = s.room.t60;
      e.snr_db = s.snr_db;
      e.source = to_point(s.source);
      for (const auto& m : s.mics) e.mics.push_back(to_point(m));
      for (const auto& n : s.noises) e.noises.push_back(to_point(n));
      slots[i] = std::move(e);
    } catch (const std::exception& ex) {
      errors[i] = id + ": " + ex.what();
    }
  });

  DatasetResult result;
  for (std::size_t i = 0; i < cfg.count; ++i) {
    if (slots[i]) result.entries.push_back(std::move(*slots[i]));
    if (!errors[i].empty()) result.errors.push_back(errors[i]);
  }
  result.manifest_path = (fs::path(cfg.out_dir) / "manifest.jsonl").string();
  io::write_manifest(result.manifest_path, result.entries);
  return result;
}

MultichannelRecording load_recording(const io::ManifestEntry& entry, const std::string& base_dir) {
  MultichannelRecording rec;
  auto load = [&](const std::vector<std::string>& paths, std::vector<std::vector<float>>& out) {
    for (const auto& p : paths) out.push_back(load_mono(io::join_path(base_dir, p)));
  };
  load(entry.noisy, rec.noisy);
  load(entry.clean, rec.reverberant);
  load(entry.noise, rec.noise);
  const std::size_t len = rec.noisy.empty() ? 0 : rec.noisy[0].size();
  for (const auto* set : {&rec.noisy, &rec.reverberant, &rec.noise}) {
    for (const auto& ch : *set) {
      if (ch.size() != len) throw InputError("utterance '" + entry.id + "' has channels of unequal length");
    }
  }
  rec.scene.room = {entry.room[0], entry.room[1], entry.room[2], entry.t60, 343.0};
  rec.scene.snr_db = entry.snr_db;
  rec.scene.seed = entry.seed;
  rec.scene.source = {entry.source[0], entry.source[1], entry.source[2]};
  for (const auto& m : entry.mics) rec.scene.mics.push_back({m[0], m[1], m[2]});
  for (const auto& n : entry.noises) rec.scene.noises.push_back({n[0], n[1], n[2]});
  return rec;
}

}  // namespace labnet::sim
