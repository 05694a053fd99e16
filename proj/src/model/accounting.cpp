// Copyright 2026 The LABNet Authors
// SPDX-License-Identifier: Apache-2.0

// Analytic MAC counting. Only weight products and attention dot products are
// counted; activations, norms and elementwise gates are not.

#include "labnet/model/params.hpp"

namespace labnet::model {

namespace {

double gru_step(double in, double hid) { return in * 3 * hid + hid * 3 * hid; }

double dpr_per_frame(const ModelHyper& h, double bins) {
  const double d = static_cast<double>(h.hidden);
  const double hf = static_cast<double>(h.freq_hidden);
  const double ht = static_cast<double>(h.time_hidden);
  const double per_bin = 2 * gru_step(d, hf) + 2 * hf * d + gru_step(d, ht) + ht * d + 2 * d * d;
  return bins * per_bin;
}

void add_aggregator(const ModelHyper& h, double bins, MacBreakdown& m) {
  const double d = static_cast<double>(h.hidden);
  if (h.aggregator == Aggregator::kCca) {
    m.per_channel += bins * (2 * d * d + 2 * d);  // K/V projections, scores and weighted sum
    m.shared += bins * (2 * d * d);               // Q and output projections
  } else {
    m.per_channel += bins * d * d;
    m.shared += bins * (d * d + 2 * d * d);
  }
}

}  // namespace

MacBreakdown mac_breakdown(const ModelHyper& h) {
  h.validate();
  const double d = static_cast<double>(h.hidden);
  const double kt = static_cast<double>(h.kernel_t);
  const double kf = static_cast<double>(h.kernel_f);
  const double f0 = static_cast<double>(h.num_bins);
  const double f2 = static_cast<double>(h.encoded_bins());
  const double f1 = 2 * f2 - 1;

  MacBreakdown m;
  m.per_channel += f1 * kt * kf * 3 * d + f2 * kt * kf * d * d;
  if (h.stage1) {
    m.per_channel += dpr_per_frame(h, f2);
    add_aggregator(h, f2, m);
  }
  if (h.stage2) {
    m.per_channel += f2 * 2 * d * d + dpr_per_frame(h, f2);
    add_aggregator(h, f2, m);
  }
  if (h.stage3) m.shared += dpr_per_frame(h, f2);
  m.shared += f1 * kt * kf * d * d + f0 * kt * kf * d;
  return m;
}

double count_macs(const ModelHyper& hyper, std::size_t channels, double seconds,
                  double frames_per_second) {
  const MacBreakdown m = mac_breakdown(hyper);
  const double per_frame = m.shared + m.per_channel * static_cast<double>(channels);
  return per_frame * frames_per_second * seconds;
}

}  // namespace labnet::model
