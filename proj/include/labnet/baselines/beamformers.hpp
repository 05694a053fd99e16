// Copyright 2026 The LABNet Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <complex>
#include <cstddef>
#include <vector>

#include <Eigen/Dense>

#include "labnet/dsp/stft.hpp"
#include "labnet/sim/scene.hpp"

namespace labnet::baselines {

using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;

// Utterance-level spatial covariances per frequency bin.
struct OracleStats {
  std::vector<CMatrix> speech;  // R_y[f]
  std::vector<CMatrix> noise;   // R_n[f], diagonally loaded
  std::size_t channels() const { return speech.empty() ? 0 : static_cast<std::size_t>(speech[0].rows()); }
  std::size_t bins() const { return speech.size(); }
};

// Time-averaged outer products of the STFT vectors of the reverberant
// speech and noise components; R_n gets 1e-6 * trace / C on its diagonal.
OracleStats oracle_stats(const std::vector<dsp::Spectrogram>& speech,
                         const std::vector<dsp::Spectrogram>& noise);
OracleStats oracle_stats(const sim::MultichannelRecording& rec, const dsp::DspConfig& cfg);

struct MvdrResult {
  std::vector<float> wave;
  std::vector<CVector> weights;   // w[f]
  std::vector<CVector> steering;  // d[f], reference entry 1
  double max_constraint_error = 0.0;  // max_f |w^H d - 1|
};

// Per bin: d = principal eigenvector of R_y scaled to d_ref = 1,
// w = R_n^{-1} d / (d^H R_n^{-1} d), output = w^H x. Throws NumericalError
// naming the bin when R_n cannot be factored.
MvdrResult mvdr(const std::vector<dsp::Spectrogram>& noisy, const OracleStats& stats,
                const dsp::DspConfig& cfg, std::size_t length);
MvdrResult mvdr(const sim::MultichannelRecording& rec, const dsp::DspConfig& cfg);

// out[n] = mean_c x_c[n + delay_c], delay_c the arrival lag of channel c
// relative to channel 0 in samples; samples outside the signal count as 0.
std::vector<float> delay_and_sum(const std::vector<std::vector<float>>& noisy,
                                 const std::vector<long>& delays);

// Direct-path lags from scene geometry, rounded to whole samples.
std::vector<long> geometric_delays(const sim::Scene& scene, int sample_rate = 16000);

}  // namespace labnet::baselines
