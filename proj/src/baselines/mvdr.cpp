// Copyright 2026 The LABNet Authors
// SPDX-License-Identifier: Apache-2.0

#include <cmath>

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>

#include "labnet/baselines/beamformers.hpp"
#include "labnet/common.hpp"
#include "labnet/util/parallel.hpp"

namespace labnet::baselines {

namespace {

std::vector<dsp::Spectrogram> analyse(const std::vector<std::vector<float>>& waves,
                                      const dsp::DspConfig& cfg) {
  std::vector<dsp::Spectrogram> out(waves.size());
  parallel_for(waves.size(), [&](std::size_t c) { out[c] = dsp::stft(waves[c], cfg); });
  return out;
}

CMatrix covariance(const std::vector<dsp::Spectrogram>& spec, std::size_t f) {
  const std::size_t C = spec.size(), T = spec[0].frames;
  CMatrix r = CMatrix::Zero(static_cast<long>(C), static_cast<long>(C));
  CVector x(static_cast<long>(C));
  for (std::size_t t = 0; t < T; ++t) {
    for (std::size_t c = 0; c < C; ++c) {
      const auto v = spec[c].at(t, f);
      x(static_cast<long>(c)) = {v.real(), v.imag()};
    }
    r.noalias() += x * x.adjoint();
  }
  return r / static_cast<double>(T);
}

void check_shapes(const std::vector<dsp::Spectrogram>& a, const char* what) {
  if (a.empty()) throw InputError(std::string(what) + ": no channels");
  for (const auto& s : a) {
    if (s.frames != a[0].frames || s.bins != a[0].bins) {
      throw InputError(std::string(what) + ": channel spectrograms differ in shape");
    }
  }
}

}  // namespace

OracleStats oracle_stats(const std::vector<dsp::Spectrogram>& speech,
                         const std::vector<dsp::Spectrogram>& noise) {
  check_shapes(speech, "oracle_stats");
  check_shapes(noise, "oracle_stats");
  if (speech.size() != noise.size() || speech[0].frames != noise[0].frames ||
      speech[0].bins != noise[0].bins) {
    throw InputError("oracle_stats: speech and noise decompositions differ in shape");
  }
  const std::size_t F = speech[0].bins;
  const double C = static_cast<double>(speech.size());
  OracleStats s;
  s.speech.resize(F);
  s.noise.resize(F);
  parallel_for(F, [&](std::size_t f) {
    s.speech[f] = covariance(speech, f);
    CMatrix rn = covariance(noise, f);
    const double load = 1e-6 * rn.trace().real() / C;
    rn.diagonal().array() += load;
    s.noise[f] = std::move(rn);
  });
  return s;
}

OracleStats oracle_stats(const sim::MultichannelRecording& rec, const dsp::DspConfig& cfg) {
  if (rec.reverberant.size() != rec.num_mics() || rec.noise.size() != rec.num_mics()) {
    throw InputError("oracle_stats: recording lacks its clean/noise decomposition");
  }
  return oracle_stats(analyse(rec.reverberant, cfg), analyse(rec.noise, cfg));
}

MvdrResult mvdr(const std::vector<dsp::Spectrogram>& noisy, const OracleStats& stats,
                const dsp::DspConfig& cfg, std::size_t length) {
  check_shapes(noisy, "mvdr");
  const std::size_t C = noisy.size(), T = noisy[0].frames, F = noisy[0].bins;
  if (stats.bins() != F || stats.channels() != C) {
    throw InputError("mvdr: statistics do not match the noisy input (" + std::to_string(C) +
                     " channels, " + std::to_string(F) + " bins)");
  }
  MvdrResult res;
  res.weights.resize(F);
  res.steering.resize(F);
  std::vector<double> errs(F, 0.0);
  parallel_for(F, [&](std::size_t f) {
    Eigen::SelfAdjointEigenSolver<CMatrix> eig(stats.speech[f]);
    CVector d = eig.eigenvectors().col(static_cast<long>(C) - 1);
    const std::complex<double> d0 = d(0);
    if (std::abs(d0) > 1e-12) {
      d /= d0;
    } else {
      // Reference sees none of the dominant component; fall back to a unit
      // reference entry so the constraint stays well defined.
      d(0) = 1.0;
    }
    Eigen::LLT<CMatrix> llt(stats.noise[f]);
    if (llt.info() != Eigen::Success || !stats.noise[f].allFinite()) {
      throw NumericalError("mvdr: noise covariance is singular at frequency bin " + std::to_string(f));
    }
    const CVector rinv_d = llt.solve(d);
    const std::complex<double> denom = d.adjoint() * rinv_d;
    if (!(std::abs(denom) > 0.0) || !std::isfinite(std::abs(denom))) {
      throw NumericalError("mvdr: degenerate steering response at frequency bin " + std::to_string(f));
    }
    CVector w = rinv_d / denom;
    errs[f] = std::abs(std::complex<double>(w.adjoint() * d) - 1.0);
    res.weights[f] = std::move(w);
    res.steering[f] = std::move(d);
  });
  for (double e : errs) res.max_constraint_error = std::max(res.max_constraint_error, e);

  dsp::Spectrogram out(T, F);
  for (std::size_t t = 0; t < T; ++t) {
    for (std::size_t f = 0; f < F; ++f) {
      std::complex<double> acc = 0.0;
      for (std::size_t c = 0; c < C; ++c) {
        const auto v = noisy[c].at(t, f);
        acc += std::conj(res.weights[f](static_cast<long>(c))) * std::complex<double>(v.real(), v.imag());
      }
      out.at(t, f) = {static_cast<float>(acc.real()), static_cast<float>(acc.imag())};
    }
  }
  res.wave = dsp::istft(out, cfg, length);
  return res;
}

MvdrResult mvdr(const sim::MultichannelRecording& rec, const dsp::DspConfig& cfg) {
  const OracleStats stats = oracle_stats(rec, cfg);
  return mvdr(analyse(rec.noisy, cfg), stats, cfg, rec.length());
}

}  // namespace labnet::baselines
