// Copyright 2026 The LABNet Authors
// SPDX-License-Identifier: Apache-2.0

#include <exception>

#include "labnet/common.hpp"
#include "labnet/metrics/metrics.hpp"
#include "labnet/sim/dataset.hpp"

namespace labnet::metrics {

namespace {

EvalRow score(const std::string& id, const sim::MultichannelRecording& rec, const Enhancer& enhancer) {
  EvalRow row;
  row.id = id;
  row.num_mics = rec.num_mics();
  try {
    if (rec.reverberant.empty()) throw InputError("recording has no clean reference");
    const auto& ref = rec.reverberant[0];
    const std::vector<float> est = enhancer(rec);
    if (est.size() != ref.size()) {
      throw InputError("enhancer returned " + std::to_string(est.size()) + " samples, expected " +
                       std::to_string(ref.size()));
    }
    row.si_snr = si_snr(est, ref);
    row.si_snr_noisy = si_snr(rec.noisy[0], ref);
    row.si_snr_improvement = row.si_snr - row.si_snr_noisy;
    row.stoi = stoi(est, ref);
    row.stoi_noisy = stoi(rec.noisy[0], ref);
    row.lsd = log_spectral_distance(est, ref);
  } catch (const std::exception& e) {
    row.error = e.what();
  }
  return row;
}

}  // namespace

EvalReport evaluate(const std::vector<io::ManifestEntry>& manifest, const std::string& base_dir,
                    const Enhancer& enhancer) {
  EvalReport report;
  for (const auto& entry : manifest) {
    sim::MultichannelRecording rec;
    try {
      rec = sim::load_recording(entry, base_dir);
    } catch (const std::exception& e) {
      EvalRow row;
      row.id = entry.id;
      row.num_mics = entry.num_mics;
      row.error = e.what();
      report.rows.push_back(std::move(row));
      continue;
    }
    report.rows.push_back(score(entry.id, rec, enhancer));
  }
  report.summary = summarize(report.rows);
  return report;
}

EvalReport evaluate(const std::vector<sim::MultichannelRecording>& recordings, const Enhancer& enhancer) {
  EvalReport report;
  for (std::size_t i = 0; i < recordings.size(); ++i) {
    report.rows.push_back(score("utt" + std::to_string(i), recordings[i], enhancer));
  }
  report.summary = summarize(report.rows);
  return report;
}

EvalSummary summarize(const std::vector<EvalRow>& rows) {
  EvalSummary s;
  for (const auto& r : rows) {
    if (!r.error.empty()) {
      ++s.failures;
      continue;
    }
    ++s.count;
    s.si_snr += r.si_snr;
    s.si_snr_noisy += r.si_snr_noisy;
    s.si_snr_improvement += r.si_snr_improvement;
    s.stoi += r.stoi;
    s.stoi_noisy += r.stoi_noisy;
    s.lsd += r.lsd;
  }
  if (s.count > 0) {
    const double n = static_cast<double>(s.count);
    s.si_snr /= n;
    s.si_snr_noisy /= n;
    s.si_snr_improvement /= n;
    s.stoi /= n;
    s.stoi_noisy /= n;
    s.lsd /= n;
  }
  return s;
}

nlohmann::json to_json(const EvalRow& row) {
  nlohmann::json j{{"id", row.id}, {"num_mics", row.num_mics}};
  if (!row.error.empty()) {
    j["error"] = row.error;
    return j;
  }
  j["si_snr"] = row.si_snr;
  j["si_snr_noisy"] = row.si_snr_noisy;
  j["si_snr_improvement"] = row.si_snr_improvement;
  j["stoi"] = row.stoi;
  j["stoi_noisy"] = row.stoi_noisy;
  j["lsd"] = row.lsd;
  return j;
}

nlohmann::json to_json(const EvalSummary& s) {
  return {{"count", s.count},
          {"failures", s.failures},
          {"si_snr", s.si_snr},
          {"si_snr_noisy", s.si_snr_noisy},
          {"si_snr_improvement", s.si_snr_improvement},
          {"stoi", s.stoi},
          {"stoi_noisy", s.stoi_noisy},
          {"lsd", s.lsd}};
}

}  // namespace labnet::metrics
