// Copyright 2026 The LABNet Authors
// SPDX-License-Identifier: Apache-2.0

#include "labnet/nn/ops.hpp"

#include <algorithm>
#include <cmath>
#include <initializer_list>
#include <limits>
#include <memory>
#include <string>

#include "labnet/simd/kernels.hpp"

namespace labnet::nn {

namespace {

template <typename Real>
bool recording(Tape<Real>* tape, std::initializer_list<const Var<Real>*> inputs) {
  if (!tape) return false;
  for (const Var<Real>* v : inputs) {
    if (v && *v && (*v)->requires_grad) return true;
  }
  return false;
}

template <typename Real>
Var<Real> make_output(Tensor<Real> value, bool requires_grad) {
  auto n = std::make_shared<Node<Real>>();
  n->value = std::move(value);
  n->requires_grad = requires_grad;
  return n;
}

template <typename Real>
bool wants_grad(const Var<Real>& v) {
  return v && v->requires_grad;
}

template <typename Real>
Real sigmoid_scalar(Real x) {
  return Real(1) / (Real(1) + std::exp(-x));
}

template <typename Real>
Real sigmoid_grad(Real x) {
  const Real e = std::exp(-std::abs(x));
  return e / ((Real(1) + e) * (Real(1) + e));
}

void require(bool cond, const std::string& msg) {
  if (!cond) throw ContractError(msg);
}

}  // namespace

template <typename Real>
Var<Real> linear(Tape<Real>* tape, const Var<Real>& x, const Var<Real>& w, const Var<Real>& b) {
  const Tensor<Real>& xv = x->value;
  const Tensor<Real>& wv = w->value;
  require(wv.rank() == 2, "linear: weight must be 2-D, got " + shape_str(wv.shape()));
  require(xv.rank() >= 1 && xv.last() == wv.dim(0),
          "linear: input " + shape_str(xv.shape()) + " incompatible with weight " +
              shape_str(wv.shape()));
  const std::size_t k = wv.dim(0), m = wv.dim(1), rows = xv.rows();
  if (b) require(b->value.size() == m, "linear: bias length mismatch");
  Shape out_shape = xv.shape();
  out_shape.back() = m;
  Tensor<Real> y(out_shape);
  simd::gemm(xv.data(), wv.data(), b ? b->value.data() : nullptr, y.data(), rows, k, m);
  const bool rec = recording(tape, {&x, &w, &b});
  Var<Real> out = make_output(std::move(y), rec);
  if (rec) {
    tape->record([x, w, b, out, rows, k, m] {
      if (out->grad.empty()) return;
      const Real* dy = out->grad.data();
      if (wants_grad(w)) simd::gemm_tn_acc(x->value.data(), dy, w->grad_buffer().data(), rows, k, m);
      if (wants_grad(b)) {
        Real* db = b->grad_buffer().data();
        for (std::size_t r = 0; r < rows; ++r)
          for (std::size_t j = 0; j < m; ++j) db[j] += dy[r * m + j];
      }
      if (wants_grad(x)) simd::gemm_nt_acc(dy, w->value.data(), x->grad_buffer().data(), rows, k, m);
    });
  }
  return out;
}

template <typename Real>
Var<Real> add(Tape<Real>* tape, const Var<Real>& a, const Var<Real>& b) {
  require(a->value.shape() == b->value.shape(), "add: shape mismatch " +
                                                    shape_str(a->value.shape()) + " vs " +
                                                    shape_str(b->value.shape()));
  Tensor<Real> y(a->value.shape());
  for (std::size_t i = 0; i < y.size(); ++i) y[i] = a->value[i] + b->value[i];
  const bool rec = recording(tape, {&a, &b});
  Var<Real> out = make_output(std::move(y), rec);
  if (rec) {
    tape->record([a, b, out] {
      if (out->grad.empty()) return;
      for (const Var<Real>* in : {&a, &b}) {
        if (!wants_grad(*in)) continue;
        Tensor<Real>& g = (*in)->grad_buffer();
        for (std::size_t i = 0; i < g.size(); ++i) g[i] += out->grad[i];
      }
    });
  }
  return out;
}

template <typename Real>
Var<Real> mul(Tape<Real>* tape, const Var<Real>& a, const Var<Real>& b) {
  require(a->value.shape() == b->value.shape(), "mul: shape mismatch");
  Tensor<Real> y(a->value.shape());
  for (std::size_t i = 0; i < y.size(); ++i) y[i] = a->value[i] * b->value[i];
  const bool rec = recording(tape, {&a, &b});
  Var<Real> out = make_output(std::move(y), rec);
  if (rec) {
    tape->record([a, b, out] {
      if (out->grad.empty()) return;
      if (wants_grad(a)) {
        Tensor<Real>& g = a->grad_buffer();
        for (std::size_t i = 0; i < g.size(); ++i) g[i] += out->grad[i] * b->value[i];
      }
      if (wants_grad(b)) {
        Tensor<Real>& g = b->grad_buffer();
        for (std::size_t i = 0; i < g.size(); ++i) g[i] += out->grad[i] * a->value[i];
      }
    });
  }
  return out;
}

template <typename Real>
Var<Real> sigmoid(Tape<Real>* tape, const Var<Real>& x) {
  Tensor<Real> y(x->value.shape());
  for (std::size_t i = 0; i < y.size(); ++i) y[i] = sigmoid_scalar(x->value[i]);
  const bool rec = recording(tape, {&x});
  Var<Real> out = make_output(std::move(y), rec);
  if (rec) {
    tape->record([x, out] {
      if (out->grad.empty()) return;
      Tensor<Real>& g = x->grad_buffer();
      // From the pre-activation: s * (1 - s) rounds to zero once s rounds to one.
      for (std::size_t i = 0; i < g.size(); ++i) g[i] += out->grad[i] * sigmoid_grad(x->value[i]);
    });
  }
  return out;
}

template <typename Real>
Var<Real> silu(Tape<Real>* tape, const Var<Real>& x) {
  Tensor<Real> y(x->value.shape());
  for (std::size_t i = 0; i < y.size(); ++i) y[i] = x->value[i] * sigmoid_scalar(x->value[i]);
  const bool rec = recording(tape, {&x});
  Var<Real> out = make_output(std::move(y), rec);
  if (rec) {
    tape->record([x, out] {
      if (out->grad.empty()) return;
      Tensor<Real>& g = x->grad_buffer();
      for (std::size_t i = 0; i < g.size(); ++i) {
        const Real v = x->value[i];
        const Real s = sigmoid_scalar(v);
        g[i] += out->grad[i] * s * (Real(1) + v * (Real(1) - s));
      }
    });
  }
  return out;
}

template <typename Real>
Var<Real> sum(Tape<Real>* tape, const Var<Real>& x) {
  Real acc = 0;
  for (Real v : x->value.values()) acc += v;
  const bool rec = recording(tape, {&x});
  Var<Real> out = make_output(Tensor<Real>({1}, std::vector<Real>{acc}), rec);
  if (rec) {
    tape->record([x, out] {
      if (out->grad.empty()) return;
      Tensor<Real>& g = x->grad_buffer();
      for (std::size_t i = 0; i < g.size(); ++i) g[i] += out->grad[0];
    });
  }
  return out;
}

template <typename Real>
Var<Real> layer_norm(Tape<Real>* tape, const Var<Real>& x, const Var<Real>& gamma,
                     const Var<Real>& beta) {
  const std::size_t d = x->value.last();
  const std::size_t rows = x->value.rows();
  require(d >= 1, "layer_norm: empty last axis");
  require(gamma->value.size() == d && beta->value.size() == d, "layer_norm: affine size mismatch");
  constexpr Real kEps = Real(1e-5);
  Tensor<Real> y(x->value.shape());
  Tensor<Real> xhat(x->value.shape());
  std::vector<Real> inv_std(rows);
  const Real* xv = x->value.data();
  for (std::size_t r = 0; r < rows; ++r) {
    const Real* row = xv + r * d;
    Real mean = 0;
    for (std::size_t j = 0; j < d; ++j) mean += row[j];
    mean /= Real(d);
    Real var = 0;
    for (std::size_t j = 0; j < d; ++j) var += (row[j] - mean) * (row[j] - mean);
    var /= Real(d);
    const Real is = Real(1) / std::sqrt(var + kEps);
    inv_std[r] = is;
    for (std::size_t j = 0; j < d; ++j) {
      const Real h = (row[j] - mean) * is;
      xhat[r * d + j] = h;
      y[r * d + j] = gamma->value[j] * h + beta->value[j];
    }
  }
  const bool rec = recording(tape, {&x, &gamma, &beta});
  Var<Real> out = make_output(std::move(y), rec);
  if (rec) {
    tape->record([x, gamma, beta, out, xhat = std::move(xhat), inv_std = std::move(inv_std), d,
                  rows] {
      if (out->grad.empty()) return;
      const Real* dy = out->grad.data();
      if (wants_grad(gamma) || wants_grad(beta)) {
        Tensor<Real>& gg = gamma->grad_buffer();
        Tensor<Real>& gb = beta->grad_buffer();
        for (std::size_t r = 0; r < rows; ++r) {
          for (std::size_t j = 0; j < d; ++j) {
            gg[j] += dy[r * d + j] * xhat[r * d + j];
            gb[j] += dy[r * d + j];
          }
        }
      }
      if (wants_grad(x)) {
        Tensor<Real>& gx = x->grad_buffer();
        std::vector<Real> dxhat(d);
        for (std::size_t r = 0; r < rows; ++r) {
          Real mean_d = 0, mean_dx = 0;
          for (std::size_t j = 0; j < d; ++j) {
            dxhat[j] = dy[r * d + j] * gamma->value[j];
            mean_d += dxhat[j];
            mean_dx += dxhat[j] * xhat[r * d + j];
          }
          mean_d /= Real(d);
          mean_dx /= Real(d);
          for (std::size_t j = 0; j < d; ++j) {
            gx[r * d + j] += inv_std[r] * (dxhat[j] - mean_d - xhat[r * d + j] * mean_dx);
          }
        }
      }
    });
  }
  return out;
}

template <typename Real>
Var<Real> reshape(Tape<Real>* tape, const Var<Real>& x, Shape shape) {
  Tensor<Real> y = x->value;
  y.reshape(std::move(shape));
  const bool rec = recording(tape, {&x});
  Var<Real> out = make_output(std::move(y), rec);
  if (rec) {
    tape->record([x, out] {
      if (out->grad.empty()) return;
      Tensor<Real>& g = x->grad_buffer();
      for (std::size_t i = 0; i < g.size(); ++i) g[i] += out->grad[i];
    });
  }
  return out;
}

namespace {

// Maps each output flat index to its source flat index.
std::vector<std::size_t> permutation_index(const Shape& in_shape,
                                           const std::vector<std::size_t>& perm) {
  const std::size_t rank = in_shape.size();
  std::vector<std::size_t> in_strides(rank, 1);
  for (std::size_t i = rank; i-- > 1;) in_strides[i - 1] = in_strides[i] * in_shape[i];
  Shape out_shape(rank);
  for (std::size_t i = 0; i < rank; ++i) out_shape[i] = in_shape[perm[i]];
  const std::size_t total = numel(in_shape);
  std::vector<std::size_t> index(total);
  std::vector<std::size_t> counter(rank, 0);
  for (std::size_t o = 0; o < total; ++o) {
    std::size_t src = 0;
    for (std::size_t i = 0; i < rank; ++i) src += counter[i] * in_strides[perm[i]];
    index[o] = src;
    for (std::size_t i = rank; i-- > 0;) {
      if (++counter[i] < out_shape[i]) break;
      counter[i] = 0;
    }
  }
  return index;
}

}  // namespace

template <typename Real>
Var<Real> permute(Tape<Real>* tape, const Var<Real>& x, const std::vector<std::size_t>& perm) {
  const Shape& in_shape = x->value.shape();
  require(perm.size() == in_shape.size(), "permute: rank mismatch");
  {
    std::vector<bool> seen(perm.size(), false);
    for (std::size_t p : perm) {
      require(p < perm.size() && !seen[p], "permute: invalid permutation");
      seen[p] = true;
    }
  }
  Shape out_shape(perm.size());
  for (std::size_t i = 0; i < perm.size(); ++i) out_shape[i] = in_shape[perm[i]];
  std::vector<std::size_t> index = permutation_index(in_shape, perm);
  Tensor<Real> y(out_shape);
  for (std::size_t o = 0; o < index.size(); ++o) y[o] = x->value[index[o]];
  const bool rec = recording(tape, {&x});
  Var<Real> out = make_output(std::move(y), rec);
  if (rec) {
    tape->record([x, out, index = std::move(index)] {
      if (out->grad.empty()) return;
      Tensor<Real>& g = x->grad_buffer();
      for (std::size_t o = 0; o < index.size(); ++o) g[index[o]] += out->grad[o];
    });
  }
  return out;
}

template <typename Real>
Var<Real> slice0(Tape<Real>* tape, const Var<Real>& x, std::size_t index) {
  const Shape& s = x->value.shape();
  require(!s.empty() && index < s[0], "slice0: index out of range");
  const std::size_t block = x->value.size() / s[0];
  Shape out_shape = s;
  out_shape[0] = 1;
  Tensor<Real> y(out_shape);
  std::copy_n(x->value.data() + index * block, block, y.data());
  const bool rec = recording(tape, {&x});
  Var<Real> out = make_output(std::move(y), rec);
  if (rec) {
    tape->record([x, out, index, block] {
      if (out->grad.empty()) return;
      Real* g = x->grad_buffer().data() + index * block;
      for (std::size_t i = 0; i < block; ++i) g[i] += out->grad[i];
    });
  }
  return out;
}

template <typename Real>
Var<Real> mean0(Tape<Real>* tape, const Var<Real>& x) {
  const Shape& s = x->value.shape();
  require(!s.empty() && s[0] >= 1, "mean0: empty axis");
  const std::size_t n = s[0];
  const std::size_t block = x->value.size() / n;
  Shape out_shape = s;
  out_shape[0] = 1;
  Tensor<Real> y(out_shape);
  for (std::size_t c = 0; c < n; ++c)
    for (std::size_t i = 0; i < block; ++i) y[i] += x->value[c * block + i];
  const Real inv = Real(1) / Real(n);
  for (std::size_t i = 0; i < block; ++i) y[i] *= inv;
  const bool rec = recording(tape, {&x});
  Var<Real> out = make_output(std::move(y), rec);
  if (rec) {
    tape->record([x, out, n, block, inv] {
      if (out->grad.empty()) return;
      Tensor<Real>& g = x->grad_buffer();
      for (std::size_t c = 0; c < n; ++c)
        for (std::size_t i = 0; i < block; ++i) g[c * block + i] += out->grad[i] * inv;
    });
  }
  return out;
}

template <typename Real>
Var<Real> concat_last(Tape<Real>* tape, const Var<Real>& a, const Var<Real>& b) {
  const Shape& sa = a->value.shape();
  const Shape& sb = b->value.shape();
  require(sa.size() == sb.size() && !sa.empty(), "concat_last: rank mismatch");
  require(sa[0] == sb[0] || sa[0] == 1, "concat_last: leading axis not broadcastable");
  for (std::size_t i = 1; i + 1 < sa.size(); ++i) {
    require(sa[i] == sb[i], "concat_last: inner shape mismatch " + shape_str(sa) + " vs " +
                                shape_str(sb));
  }
  const std::size_t da = sa.back(), db = sb.back();
  const std::size_t rows = b->value.rows();
  const std::size_t a_rows = a->value.rows();
  Shape out_shape = sb;
  out_shape.back() = da + db;
  Tensor<Real> y(out_shape);
  for (std::size_t r = 0; r < rows; ++r) {
    const std::size_t ra = r % a_rows;
    std::copy_n(a->value.data() + ra * da, da, y.data() + r * (da + db));
    std::copy_n(b->value.data() + r * db, db, y.data() + r * (da + db) + da);
  }
  const bool rec = recording(tape, {&a, &b});
  Var<Real> out = make_output(std::move(y), rec);
  if (rec) {
    tape->record([a, b, out, da, db, rows, a_rows] {
      if (out->grad.empty()) return;
      const Real* dy = out->grad.data();
      if (wants_grad(a)) {
        Real* g = a->grad_buffer().data();
        for (std::size_t r = 0; r < rows; ++r) {
          const std::size_t ra = r % a_rows;
          for (std::size_t j = 0; j < da; ++j) g[ra * da + j] += dy[r * (da + db) + j];
        }
      }
      if (wants_grad(b)) {
        Real* g = b->grad_buffer().data();
        for (std::size_t r = 0; r < rows; ++r)
          for (std::size_t j = 0; j < db; ++j) g[r * db + j] += dy[r * (da + db) + da + j];
      }
    });
  }
  return out;
}

template <typename Real>
Var<Real> gru(Tape<Real>* tape, const Var<Real>& x, const GruWeights<Real>& w,
              const Tensor<Real>* h0, bool reverse, Tensor<Real>* final_state) {
  const Tensor<Real>& xv = x->value;
  require(xv.rank() == 3, "gru: input must be [S, L, I], got " + shape_str(xv.shape()));
  const std::size_t S = xv.dim(0), L = xv.dim(1), I = xv.dim(2);
  const std::size_t H = w.hidden();
  const std::size_t G = 3 * H;
  require(w.w_ih->value.dim(0) == I && w.w_ih->value.dim(1) == G, "gru: w_ih shape mismatch");
  require(w.w_hh->value.dim(0) == H && w.w_hh->value.dim(1) == G, "gru: w_hh shape mismatch");
  require(w.b_ih->value.size() == G && w.b_hh->value.size() == G, "gru: bias shape mismatch");
  if (h0) require(h0->size() == S * H, "gru: h0 shape mismatch");

  // Input projections for every step at once: rows s*L + l.
  std::vector<Real> xg(S * L * G);
  simd::gemm(xv.data(), w.w_ih->value.data(), w.b_ih->value.data(), xg.data(), S * L, I, G);

  const bool rec = recording(tape, {&x, &w.w_ih, &w.w_hh, &w.b_ih, &w.b_hh});
  Tensor<Real> y({S, L, H});
  std::vector<Real> h(S * H, Real(0));
  if (h0) std::copy(h0->data(), h0->data() + S * H, h.begin());
  std::vector<Real> hg(S * G);
  // Saved per processed step (index = processing order).
  std::vector<Real> save_hprev, save_r, save_z, save_n, save_hgn;
  if (rec) {
    save_hprev.resize(L * S * H);
    save_r.resize(L * S * H);
    save_z.resize(L * S * H);
    save_n.resize(L * S * H);
    save_hgn.resize(L * S * H);
  }
  for (std::size_t step = 0; step < L; ++step) {
    const std::size_t l = reverse ? L - 1 - step : step;
    simd::gemm(h.data(), w.w_hh->value.data(), w.b_hh->value.data(), hg.data(), S, H, G);
    for (std::size_t s = 0; s < S; ++s) {
      const Real* xr = xg.data() + (s * L + l) * G;
      const Real* hr = hg.data() + s * G;
      Real* hs = h.data() + s * H;
      Real* yr = y.data() + (s * L + l) * H;
      for (std::size_t j = 0; j < H; ++j) {
        const Real r = sigmoid_scalar(xr[j] + hr[j]);
        const Real z = sigmoid_scalar(xr[H + j] + hr[H + j]);
        const Real n = std::tanh(xr[2 * H + j] + r * hr[2 * H + j]);
        const Real hp = hs[j];
        const Real hn = (Real(1) - z) * n + z * hp;
        if (rec) {
          const std::size_t o = (step * S + s) * H + j;
          save_hprev[o] = hp;
          save_r[o] = r;
          save_z[o] = z;
          save_n[o] = n;
          save_hgn[o] = hr[2 * H + j];
        }
        hs[j] = hn;
        yr[j] = hn;
      }
    }
  }
  if (final_state) *final_state = Tensor<Real>({S, H}, h);

  Var<Real> out = make_output(std::move(y), rec);
  if (rec) {
    tape->record([x, w, out, S, L, I, H, G, reverse, save_hprev = std::move(save_hprev),
                  save_r = std::move(save_r), save_z = std::move(save_z),
                  save_n = std::move(save_n), save_hgn = std::move(save_hgn)] {
      if (out->grad.empty()) return;
      const Real* dy = out->grad.data();
      std::vector<Real> dxg(S * L * G, Real(0));
      std::vector<Real> dh(S * H, Real(0));
      std::vector<Real> dhg(S * G);
      std::vector<Real> hprev_step(S * H);
      const bool g_whh = wants_grad(w.w_hh), g_bhh = wants_grad(w.b_hh);
      for (std::size_t step = L; step-- > 0;) {
        const std::size_t l = reverse ? L - 1 - step : step;
        for (std::size_t s = 0; s < S; ++s) {
          for (std::size_t j = 0; j < H; ++j) {
            const std::size_t o = (step * S + s) * H + j;
            const Real r = save_r[o], z = save_z[o], n = save_n[o], hp = save_hprev[o];
            const Real dht = dh[s * H + j] + dy[(s * L + l) * H + j];
            const Real dn = dht * (Real(1) - z);
            const Real dz = dht * (hp - n);
            dh[s * H + j] = dht * z;
            const Real dan = dn * (Real(1) - n * n);
            const Real dr = dan * save_hgn[o];
            const Real dar = dr * r * (Real(1) - r);
            const Real daz = dz * z * (Real(1) - z);
            Real* dx_row = dxg.data() + (s * L + l) * G;
            dx_row[j] = dar;
            dx_row[H + j] = daz;
            dx_row[2 * H + j] = dan;
            Real* dh_row = dhg.data() + s * G;
            dh_row[j] = dar;
            dh_row[H + j] = daz;
            dh_row[2 * H + j] = dan * r;
            hprev_step[s * H + j] = hp;
          }
        }
        if (g_whh) simd::gemm_tn_acc(hprev_step.data(), dhg.data(), w.w_hh->grad_buffer().data(), S, H, G);
        if (g_bhh) {
          Real* db = w.b_hh->grad_buffer().data();
          for (std::size_t s = 0; s < S; ++s)
            for (std::size_t j = 0; j < G; ++j) db[j] += dhg[s * G + j];
        }
        simd::gemm_nt_acc(dhg.data(), w.w_hh->value.data(), dh.data(), S, H, G);
      }
      if (wants_grad(w.w_ih)) simd::gemm_tn_acc(x->value.data(), dxg.data(), w.w_ih->grad_buffer().data(), S * L, I, G);
      if (wants_grad(w.b_ih)) {
        Real* db = w.b_ih->grad_buffer().data();
        for (std::size_t r = 0; r < S * L; ++r)
          for (std::size_t j = 0; j < G; ++j) db[j] += dxg[r * G + j];
      }
      if (wants_grad(x)) simd::gemm_nt_acc(dxg.data(), w.w_ih->value.data(), x->grad_buffer().data(), S * L, I, G);
    });
  }
  return out;
}

namespace {

// Builds the [Fo, kt*kf*Cin] patch matrix for output frame t of mic n.
template <typename Real>
void build_patches(const Tensor<Real>& x, const Tensor<Real>* history, std::size_t n,
                   std::size_t t, std::size_t kt, std::size_t kf, std::size_t stride,
                   std::size_t pad, std::size_t fo_count, Real* patch) {
  const std::size_t T = x.dim(1), F = x.dim(2), C = x.dim(3);
  const std::size_t P = kt - 1;
  const std::size_t K = kt * kf * C;
  std::fill(patch, patch + fo_count * K, Real(0));
  for (std::size_t dt = 0; dt < kt; ++dt) {
    const long ts = static_cast<long>(t) - static_cast<long>(P) + static_cast<long>(dt);
    const Real* frame = nullptr;
    if (ts >= 0) {
      frame = x.data() + ((n * T + static_cast<std::size_t>(ts)) * F) * C;
    } else if (history) {
      const std::size_t hi = static_cast<std::size_t>(static_cast<long>(P) + ts);
      frame = history->data() + ((n * P + hi) * F) * C;
    }
    if (!frame) continue;
    for (std::size_t fo = 0; fo < fo_count; ++fo) {
      for (std::size_t df = 0; df < kf; ++df) {
        const long fi = static_cast<long>(fo * stride + df) - static_cast<long>(pad);
        if (fi < 0 || fi >= static_cast<long>(F)) continue;
        std::copy_n(frame + static_cast<std::size_t>(fi) * C, C,
                    patch + fo * K + (dt * kf + df) * C);
      }
    }
  }
}

}  // namespace

template <typename Real>
Var<Real> conv2d_causal(Tape<Real>* tape, const Var<Real>& x, const Var<Real>& w,
                        const Var<Real>& b, std::size_t stride_f, std::size_t pad_f,
                        const Tensor<Real>* history, Tensor<Real>* history_out) {
  const Tensor<Real>& xv = x->value;
  const Tensor<Real>& wv = w->value;
  require(xv.rank() == 4, "conv2d_causal: input must be [N, T, F, Cin], got " + shape_str(xv.shape()));
  require(wv.rank() == 4, "conv2d_causal: weight must be [kt, kf, Cin, Cout]");
  const std::size_t N = xv.dim(0), T = xv.dim(1), F = xv.dim(2), C = xv.dim(3);
  const std::size_t kt = wv.dim(0), kf = wv.dim(1), Cout = wv.dim(3);
  require(kt >= 1 && kf >= 1 && stride_f >= 1, "conv2d_causal: invalid kernel or stride");
  require(wv.dim(2) == C, "conv2d_causal: Cin mismatch " + shape_str(xv.shape()) + " vs " +
                              shape_str(wv.shape()));
  require(b->value.size() == Cout, "conv2d_causal: bias length mismatch");
  require(F + 2 * pad_f >= kf, "conv2d_causal: kernel wider than padded input");
  const std::size_t P = kt - 1;
  if (history) {
    require(history->shape() == Shape({N, P, F, C}), "conv2d_causal: history shape mismatch");
  }
  const std::size_t Fo = (F + 2 * pad_f - kf) / stride_f + 1;
  const std::size_t K = kt * kf * C;
  Tensor<Real> y({N, T, Fo, Cout});
  std::vector<Real> patch(Fo * K);
  for (std::size_t n = 0; n < N; ++n) {
    for (std::size_t t = 0; t < T; ++t) {
      build_patches(xv, history, n, t, kt, kf, stride_f, pad_f, Fo, patch.data());
      simd::gemm(patch.data(), wv.data(), b->value.data(), y.data() + (n * T + t) * Fo * Cout,
                 Fo, K, Cout);
    }
  }
  if (history_out) {
    Tensor<Real> hist({N, P, F, C});
    for (std::size_t n = 0; n < N; ++n) {
      for (std::size_t p = 0; p < P; ++p) {
        // Position p of the new history is frame T - P + p of (history ++ x).
        const long src = static_cast<long>(T) - static_cast<long>(P) + static_cast<long>(p);
        Real* dst = hist.data() + ((n * P + p) * F) * C;
        if (src >= 0) {
          std::copy_n(xv.data() + ((n * T + static_cast<std::size_t>(src)) * F) * C, F * C, dst);
        } else if (history) {
          const std::size_t hi = static_cast<std::size_t>(static_cast<long>(P) + src);
          std::copy_n(history->data() + ((n * P + hi) * F) * C, F * C, dst);
        }
      }
    }
    *history_out = std::move(hist);
  }
  const bool rec = recording(tape, {&x, &w, &b});
  Var<Real> out = make_output(std::move(y), rec);
  if (rec) {
    std::shared_ptr<Tensor<Real>> hist_copy;
    if (history) hist_copy = std::make_shared<Tensor<Real>>(*history);
    tape->record([x, w, b, out, hist_copy, N, T, F, C, kt, kf, stride_f, pad_f, Fo, K, Cout] {
      if (out->grad.empty()) return;
      std::vector<Real> patch(Fo * K), dpatch(Fo * K);
      const bool gw = wants_grad(w), gb = wants_grad(b), gx = wants_grad(x);
      Real* dw = gw ? w->grad_buffer().data() : nullptr;
      Real* db = gb ? b->grad_buffer().data() : nullptr;
      Real* dx = gx ? x->grad_buffer().data() : nullptr;
      const std::size_t P = kt - 1;
      for (std::size_t n = 0; n < N; ++n) {
        for (std::size_t t = 0; t < T; ++t) {
          const Real* dy = out->grad.data() + (n * T + t) * Fo * Cout;
          if (gw) {
            build_patches(x->value, hist_copy.get(), n, t, kt, kf, stride_f, pad_f, Fo, patch.data());
            simd::gemm_tn_acc(patch.data(), dy, dw, Fo, K, Cout);
          }
          if (gb) {
            for (std::size_t fo = 0; fo < Fo; ++fo)
              for (std::size_t j = 0; j < Cout; ++j) db[j] += dy[fo * Cout + j];
          }
          if (gx) {
            std::fill(dpatch.begin(), dpatch.end(), Real(0));
            simd::gemm_nt_acc(dy, w->value.data(), dpatch.data(), Fo, K, Cout);
            for (std::size_t dt = 0; dt < kt; ++dt) {
              const long ts = static_cast<long>(t) - static_cast<long>(P) + static_cast<long>(dt);
              if (ts < 0) continue;
              Real* frame = dx + ((n * T + static_cast<std::size_t>(ts)) * F) * C;
              for (std::size_t fo = 0; fo < Fo; ++fo) {
                for (std::size_t df = 0; df < kf; ++df) {
                  const long fi = static_cast<long>(fo * stride_f + df) - static_cast<long>(pad_f);
                  if (fi < 0 || fi >= static_cast<long>(F)) continue;
                  const Real* src = dpatch.data() + fo * K + (dt * kf + df) * C;
                  Real* dst = frame + static_cast<std::size_t>(fi) * C;
                  for (std::size_t c = 0; c < C; ++c) dst[c] += src[c];
                }
              }
            }
          }
        }
      }
    });
  }
  return out;
}

template <typename Real>
Var<Real> upsample_freq(Tape<Real>* tape, const Var<Real>& x) {
  const Tensor<Real>& xv = x->value;
  require(xv.rank() == 4, "upsample_freq: input must be [N, T, F, C]");
  const std::size_t N = xv.dim(0), T = xv.dim(1), F = xv.dim(2), C = xv.dim(3);
  require(F >= 1, "upsample_freq: empty frequency axis");
  const std::size_t Fo = 2 * F - 1;
  Tensor<Real> y({N, T, Fo, C});
  for (std::size_t r = 0; r < N * T; ++r)
    for (std::size_t f = 0; f < F; ++f)
      std::copy_n(xv.data() + (r * F + f) * C, C, y.data() + (r * Fo + 2 * f) * C);
  const bool rec = recording(tape, {&x});
  Var<Real> out = make_output(std::move(y), rec);
  if (rec) {
    tape->record([x, out, N, T, F, C, Fo] {
      if (out->grad.empty()) return;
      Tensor<Real>& g = x->grad_buffer();
      for (std::size_t r = 0; r < N * T; ++r)
        for (std::size_t f = 0; f < F; ++f)
          for (std::size_t c = 0; c < C; ++c)
            g[(r * F + f) * C + c] += out->grad[(r * Fo + 2 * f) * C + c];
    });
  }
  return out;
}

template <typename Real>
Var<Real> attention(Tape<Real>* tape, const Var<Real>& q, const Var<Real>& k,
                    const Var<Real>& v, std::size_t heads) {
  const Tensor<Real>& qv = q->value;
  const Tensor<Real>& kv = k->value;
  const Tensor<Real>& vv = v->value;
  require(qv.rank() == 3 && kv.rank() == 3 && vv.rank() == 3, "attention: inputs must be 3-D");
  const std::size_t B = qv.dim(0), Lq = qv.dim(1), D = qv.dim(2), Lk = kv.dim(1);
  require(kv.dim(0) == B && vv.dim(0) == B && kv.dim(2) == D && vv.dim(2) == D &&
              vv.dim(1) == Lk,
          "attention: shape mismatch");
  require(heads >= 1 && D % heads == 0,
          "attention: hidden size " + std::to_string(D) + " not divisible by " +
              std::to_string(heads) + " heads");
  require(Lk >= 1, "attention: need at least one key");
  const std::size_t dh = D / heads;
  const Real scale = Real(1) / std::sqrt(Real(dh));
  Tensor<Real> y({B, Lq, D});
  std::vector<Real> probs(B * heads * Lq * Lk);
  std::vector<Real> scores(Lk);
  for (std::size_t bi = 0; bi < B; ++bi) {
    for (std::size_t h = 0; h < heads; ++h) {
      for (std::size_t i = 0; i < Lq; ++i) {
        const Real* qr = qv.data() + (bi * Lq + i) * D + h * dh;
        Real mx = -std::numeric_limits<Real>::infinity();
        for (std::size_t j = 0; j < Lk; ++j) {
          const Real* kr = kv.data() + (bi * Lk + j) * D + h * dh;
          Real s = 0;
          for (std::size_t d = 0; d < dh; ++d) s += qr[d] * kr[d];
          scores[j] = s * scale;
          mx = std::max(mx, scores[j]);
        }
        Real denom = 0;
        for (std::size_t j = 0; j < Lk; ++j) {
          scores[j] = std::exp(scores[j] - mx);
          denom += scores[j];
        }
        Real* pr = probs.data() + ((bi * heads + h) * Lq + i) * Lk;
        Real* yr = y.data() + (bi * Lq + i) * D + h * dh;
        for (std::size_t j = 0; j < Lk; ++j) {
          pr[j] = scores[j] / denom;
          const Real* vr = vv.data() + (bi * Lk + j) * D + h * dh;
          for (std::size_t d = 0; d < dh; ++d) yr[d] += pr[j] * vr[d];
        }
      }
    }
  }
  const bool rec = recording(tape, {&q, &k, &v});
  Var<Real> out = make_output(std::move(y), rec);
  if (rec) {
    tape->record([q, k, v, out, probs = std::move(probs), B, Lq, Lk, D, heads, dh, scale] {
      if (out->grad.empty()) return;
      const bool gq = wants_grad(q), gk = wants_grad(k), gv = wants_grad(v);
      Real* dq = gq ? q->grad_buffer().data() : nullptr;
      Real* dk = gk ? k->grad_buffer().data() : nullptr;
      Real* dv = gv ? v->grad_buffer().data() : nullptr;
      std::vector<Real> da(Lk);
      for (std::size_t bi = 0; bi < B; ++bi) {
        for (std::size_t h = 0; h < heads; ++h) {
          for (std::size_t i = 0; i < Lq; ++i) {
            const Real* pr = probs.data() + ((bi * heads + h) * Lq + i) * Lk;
            const Real* dor = out->grad.data() + (bi * Lq + i) * D + h * dh;
            Real dot_pa = 0;
            for (std::size_t j = 0; j < Lk; ++j) {
              const Real* vr = v->value.data() + (bi * Lk + j) * D + h * dh;
              Real s = 0;
              for (std::size_t d = 0; d < dh; ++d) s += dor[d] * vr[d];
              da[j] = s;
              dot_pa += pr[j] * s;
              if (gv) {
                Real* dvr = dv + (bi * Lk + j) * D + h * dh;
                for (std::size_t d = 0; d < dh; ++d) dvr[d] += pr[j] * dor[d];
              }
            }
            const Real* qr = q->value.data() + (bi * Lq + i) * D + h * dh;
            for (std::size_t j = 0; j < Lk; ++j) {
              const Real ds = pr[j] * (da[j] - dot_pa) * scale;
              const Real* kr = k->value.data() + (bi * Lk + j) * D + h * dh;
              if (gq) {
                Real* dqr = dq + (bi * Lq + i) * D + h * dh;
                for (std::size_t d = 0; d < dh; ++d) dqr[d] += ds * kr[d];
              }
              if (gk) {
                Real* dkr = dk + (bi * Lk + j) * D + h * dh;
                for (std::size_t d = 0; d < dh; ++d) dkr[d] += ds * qr[d];
              }
            }
          }
        }
      }
    });
  }
  return out;
}

template <typename Real>
Var<Real> mha(Tape<Real>* tape, const Var<Real>& q, const Var<Real>& k, const Var<Real>& v,
              const MhaWeights<Real>& w, std::size_t heads) {
  auto qp = linear(tape, q, w.wq, w.bq);
  auto kp = linear(tape, k, w.wk, w.bk);
  auto vp = linear(tape, v, w.wv, w.bv);
  auto att = attention(tape, qp, kp, vp, heads);
  return linear(tape, att, w.wo, w.bo);
}

#define LABNET_INSTANTIATE_OPS(Real)                                                        \
  template Var<Real> linear(Tape<Real>*, const Var<Real>&, const Var<Real>&,                \
                            const Var<Real>&);                                              \
  template Var<Real> add(Tape<Real>*, const Var<Real>&, const Var<Real>&);                  \
  template Var<Real> mul(Tape<Real>*, const Var<Real>&, const Var<Real>&);                  \
  template Var<Real> sigmoid(Tape<Real>*, const Var<Real>&);                                \
  template Var<Real> silu(Tape<Real>*, const Var<Real>&);                                   \
  template Var<Real> sum(Tape<Real>*, const Var<Real>&);                                    \
  template Var<Real> layer_norm(Tape<Real>*, const Var<Real>&, const Var<Real>&,            \
                                const Var<Real>&);                                          \
  template Var<Real> reshape(Tape<Real>*, const Var<Real>&, Shape);                         \
  template Var<Real> permute(Tape<Real>*, const Var<Real>&, const std::vector<std::size_t>&); \
  template Var<Real> slice0(Tape<Real>*, const Var<Real>&, std::size_t);                    \
  template Var<Real> mean0(Tape<Real>*, const Var<Real>&);                                  \
  template Var<Real> concat_last(Tape<Real>*, const Var<Real>&, const Var<Real>&);          \
  template Var<Real> gru(Tape<Real>*, const Var<Real>&, const GruWeights<Real>&,            \
                         const Tensor<Real>*, bool, Tensor<Real>*);                         \
  template Var<Real> conv2d_causal(Tape<Real>*, const Var<Real>&, const Var<Real>&,         \
                                   const Var<Real>&, std::size_t, std::size_t,              \
                                   const Tensor<Real>*, Tensor<Real>*);                     \
  template Var<Real> upsample_freq(Tape<Real>*, const Var<Real>&);                          \
  template Var<Real> attention(Tape<Real>*, const Var<Real>&, const Var<Real>&,             \
                               const Var<Real>&, std::size_t);                              \
  template Var<Real> mha(Tape<Real>*, const Var<Real>&, const Var<Real>&, const Var<Real>&, \
                         const MhaWeights<Real>&, std::size_t);

LABNET_INSTANTIATE_OPS(float)
LABNET_INSTANTIATE_OPS(double)

#undef LABNET_INSTANTIATE_OPS

}  // namespace labnet::nn
