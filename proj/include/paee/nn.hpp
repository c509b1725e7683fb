#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "paee/error.hpp"
#include "paee/matrix.hpp"
#include "paee/rng.hpp"
#include "paee/sequencing.hpp"

namespace paee {

inline double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

enum class Activation { ReLU, Linear };

// ---------------------------------------------------------------------------
// Parameter blocks

struct GruParams {
  size_t in = 0, hid = 0;
  Matrix Wz, Wr, Wh;  // in x hid
  Matrix Uz, Ur, Uh;  // hid x hid
  Matrix bz, br, bh;  // 1 x hid

  static GruParams sized(size_t in, size_t hid) {
    GruParams p;
    p.in = in;
    p.hid = hid;
    p.Wz = Matrix(in, hid); p.Wr = Matrix(in, hid); p.Wh = Matrix(in, hid);
    p.Uz = Matrix(hid, hid); p.Ur = Matrix(hid, hid); p.Uh = Matrix(hid, hid);
    p.bz = Matrix(1, hid); p.br = Matrix(1, hid); p.bh = Matrix(1, hid);
    return p;
  }
};

struct DenseParams {
  size_t in = 0, out = 0;
  Activation act = Activation::ReLU;
  Matrix W;  // in x out
  Matrix b;  // 1 x out

  static DenseParams sized(size_t in, size_t out, Activation act) {
    DenseParams p;
    p.in = in;
    p.out = out;
    p.act = act;
    p.W = Matrix(in, out);
    p.b = Matrix(1, out);
    return p;
  }
};

struct ModelConfig {
  size_t input_dim = 6;   // temporal channels (7 with the label channel)
  size_t static_dim = 0;  // 0 disables the static branch
  std::array<size_t, 3> hidden = {32, 256, 32};
  size_t static_hidden = 32;
  std::array<size_t, 2> head_hidden = {32, 16};
  double dropout_p = 0.5;

  bool has_static() const { return static_dim > 0; }
  size_t head_input() const { return hidden[2] + (has_static() ? static_hidden : 0); }
};

struct HybridModel {
  ModelConfig cfg;
  std::array<GruParams, 3> gru;
  DenseParams stat;               // static_dim -> static_hidden, ReLU
  std::array<DenseParams, 3> head;

  bool has_static() const { return cfg.has_static(); }
};

inline HybridModel model_sized(const ModelConfig& cfg) {
  HybridModel m;
  m.cfg = cfg;
  size_t in = cfg.input_dim;
  for (size_t i = 0; i < 3; ++i) {
    m.gru[i] = GruParams::sized(in, cfg.hidden[i]);
    in = cfg.hidden[i];
  }
  if (cfg.has_static()) {
    m.stat = DenseParams::sized(cfg.static_dim, cfg.static_hidden, Activation::ReLU);
  }
  m.head[0] = DenseParams::sized(cfg.head_input(), cfg.head_hidden[0], Activation::ReLU);
  m.head[1] = DenseParams::sized(cfg.head_hidden[0], cfg.head_hidden[1], Activation::ReLU);
  m.head[2] = DenseParams::sized(cfg.head_hidden[1], 1, Activation::Linear);
  return m;
}

// Fixed parameter traversal order shared by the optimizer, serialization, and
// gradient checks.
template <class F>
void visit_params(HybridModel& m, F&& f) {
  for (auto& g : m.gru) {
    f(g.Wz); f(g.Wr); f(g.Wh);
    f(g.Uz); f(g.Ur); f(g.Uh);
    f(g.bz); f(g.br); f(g.bh);
  }
  if (m.has_static()) { f(m.stat.W); f(m.stat.b); }
  for (auto& d : m.head) { f(d.W); f(d.b); }
}

template <class F>
void visit_params(const HybridModel& m, F&& f) {
  visit_params(const_cast<HybridModel&>(m), [&](Matrix& mat) { f(std::as_const(mat)); });
}

template <class F>
void visit_params2(HybridModel& a, const HybridModel& b, F&& f) {
  std::vector<const Matrix*> bs;
  visit_params(b, [&](const Matrix& m) { bs.push_back(&m); });
  size_t i = 0;
  visit_params(a, [&](Matrix& m) { f(m, *bs[i++]); });
}

inline size_t param_count(const HybridModel& m) {
  size_t n = 0;
  visit_params(m, [&](const Matrix& mat) { n += mat.size(); });
  return n;
}

inline HybridModel zeros_like(const HybridModel& m) {
  return model_sized(m.cfg);
}

// ---------------------------------------------------------------------------
// Initialization

namespace detail {

inline void glorot_fill(Matrix& w, size_t fan_in, size_t fan_out, Rng& rng) {
  const double bound = std::sqrt(6.0 / (double)(fan_in + fan_out));
  for (size_t i = 0; i < w.size(); ++i) w.data()[i] = rng.uniform(-bound, bound);
}

// Random orthogonal matrix: QR of a Gaussian matrix, columns sign-fixed so the
// decomposition is unique.
inline void orthogonal_fill(Matrix& u, Rng& rng) {
  const auto n = (Eigen::Index)u.rows();
  Eigen::MatrixXd a(n, n);
  for (Eigen::Index r = 0; r < n; ++r) {
    for (Eigen::Index c = 0; c < n; ++c) a(r, c) = rng.normal();
  }
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(a);
  Eigen::MatrixXd q = qr.householderQ() * Eigen::MatrixXd::Identity(n, n);
  Eigen::MatrixXd rmat = qr.matrixQR().triangularView<Eigen::Upper>();
  for (Eigen::Index c = 0; c < n; ++c) {
    if (rmat(c, c) < 0) q.col(c) = -q.col(c);
  }
  for (Eigen::Index r = 0; r < n; ++r) {
    for (Eigen::Index c = 0; c < n; ++c) u((size_t)r, (size_t)c) = q(r, c);
  }
}

}  // namespace detail

inline HybridModel init_params(const ModelConfig& cfg, uint64_t seed) {
  HybridModel m = model_sized(cfg);
  Rng rng(seed);
  for (auto& g : m.gru) {
    detail::glorot_fill(g.Wz, g.in, g.hid, rng);
    detail::glorot_fill(g.Wr, g.in, g.hid, rng);
    detail::glorot_fill(g.Wh, g.in, g.hid, rng);
    detail::orthogonal_fill(g.Uz, rng);
    detail::orthogonal_fill(g.Ur, rng);
    detail::orthogonal_fill(g.Uh, rng);
  }
  if (m.has_static()) detail::glorot_fill(m.stat.W, m.stat.in, m.stat.out, rng);
  for (auto& d : m.head) detail::glorot_fill(d.W, d.in, d.out, rng);
  return m;
}

// ---------------------------------------------------------------------------
// GRU forward/backward (batched, timestep-major: xs[t] is batch x in)

struct GruCache {
  std::vector<Matrix> x;            // T of B x in
  Matrix h0;                        // B x hid
  std::vector<Matrix> z, r, hc, h;  // T of B x hid
};

inline std::vector<Matrix> gru_forward(const GruParams& p, const std::vector<Matrix>& xs,
                                       const Matrix& h0, GruCache* cache) {
  const size_t T = xs.size();
  if (T == 0) throw ShapeMismatch("empty input sequence");
  const size_t B = xs[0].rows();
  if (xs[0].cols() != p.in) throw ShapeMismatch("gru input width");
  if (h0.rows() != B || h0.cols() != p.hid) throw ShapeMismatch("gru h0 shape");

  if (cache) {
    cache->x = xs;
    cache->h0 = h0;
    cache->z.assign(T, Matrix());
    cache->r.assign(T, Matrix());
    cache->hc.assign(T, Matrix());
    cache->h.assign(T, Matrix());
  }

  std::vector<Matrix> hs(T);
  Matrix az, ar, ac, rhp;
  const Matrix* hp = &h0;
  for (size_t t = 0; t < T; ++t) {
    matmul(xs[t], p.Wz, az);
    matmul_acc(*hp, p.Uz, az);
    add_row_bias(az, p.bz);
    matmul(xs[t], p.Wr, ar);
    matmul_acc(*hp, p.Ur, ar);
    add_row_bias(ar, p.br);
    for (size_t i = 0; i < az.size(); ++i) az.data()[i] = sigmoid(az.data()[i]);
    for (size_t i = 0; i < ar.size(); ++i) ar.data()[i] = sigmoid(ar.data()[i]);

    rhp = ar;
    for (size_t i = 0; i < rhp.size(); ++i) rhp.data()[i] *= hp->data()[i];
    matmul(xs[t], p.Wh, ac);
    matmul_acc(rhp, p.Uh, ac);
    add_row_bias(ac, p.bh);
    for (size_t i = 0; i < ac.size(); ++i) ac.data()[i] = std::tanh(ac.data()[i]);

    Matrix h(B, p.hid);
    for (size_t i = 0; i < h.size(); ++i) {
      const double z = az.data()[i];
      h.data()[i] = (1.0 - z) * hp->data()[i] + z * ac.data()[i];
    }
    if (cache) {
      cache->z[t] = az;
      cache->r[t] = ar;
      cache->hc[t] = ac;
      cache->h[t] = h;
    }
    hs[t] = std::move(h);
    hp = &hs[t];
  }
  return hs;
}

// Gradients for the forward map above. dh_seq[t] is the upstream gradient on
// h_t (zero matrices allowed). Fills param grads, per-timestep input grads,
// and the gradient on h0.
inline void gru_backward(const GruParams& p, const GruCache& cache,
                         const std::vector<Matrix>& dh_seq, GruParams& grads,
                         std::vector<Matrix>* dxs, Matrix* dh0) {
  const size_t T = cache.h.size();
  if (T == 0 || cache.x.size() != T) throw MissingCache("gru backward needs a training-mode cache");
  if (dh_seq.size() != T) throw ShapeMismatch("dh sequence length");
  const size_t B = cache.h0.rows();

  if (dxs) dxs->assign(T, Matrix());
  Matrix carry(B, p.hid);
  Matrix dz(B, p.hid), da_c(B, p.hid), da_r(B, p.hid), da_z(B, p.hid);
  Matrix drhp(B, p.hid), rhp(B, p.hid), dhp(B, p.hid);
  for (size_t t = T; t-- > 0;) {
    const Matrix& hp = t == 0 ? cache.h0 : cache.h[t - 1];
    const Matrix& z = cache.z[t];
    const Matrix& r = cache.r[t];
    const Matrix& hc = cache.hc[t];
    if (!dh_seq[t].same_shape(z)) throw ShapeMismatch("dh shape at step " + std::to_string(t));

    // dh = upstream at this step + carry from step t+1
    for (size_t i = 0; i < carry.size(); ++i) {
      const double dh = carry.data()[i] + dh_seq[t].data()[i];
      const double zi = z.data()[i];
      dz.data()[i] = dh * (hc.data()[i] - hp.data()[i]);
      da_c.data()[i] = dh * zi * (1.0 - hc.data()[i] * hc.data()[i]);
      dhp.data()[i] = dh * (1.0 - zi);
    }
    for (size_t i = 0; i < rhp.size(); ++i) rhp.data()[i] = r.data()[i] * hp.data()[i];

    matmul_tn_acc(cache.x[t], da_c, grads.Wh);
    matmul_tn_acc(rhp, da_c, grads.Uh);
    sum_rows_acc(da_c, grads.bh);

    matmul_nt(da_c, p.Uh, drhp);
    for (size_t i = 0; i < drhp.size(); ++i) {
      const double dr = drhp.data()[i] * hp.data()[i];
      const double ri = r.data()[i];
      dhp.data()[i] += drhp.data()[i] * ri;
      da_r.data()[i] = dr * ri * (1.0 - ri);
      const double zi = z.data()[i];
      da_z.data()[i] = dz.data()[i] * zi * (1.0 - zi);
    }

    matmul_tn_acc(cache.x[t], da_r, grads.Wr);
    matmul_tn_acc(hp, da_r, grads.Ur);
    sum_rows_acc(da_r, grads.br);
    matmul_tn_acc(cache.x[t], da_z, grads.Wz);
    matmul_tn_acc(hp, da_z, grads.Uz);
    sum_rows_acc(da_z, grads.bz);

    if (dxs) {
      Matrix& dx = (*dxs)[t];
      matmul_nt(da_c, p.Wh, dx);
      matmul_nt_acc(da_r, p.Wr, dx);
      matmul_nt_acc(da_z, p.Wz, dx);
    }

    matmul_nt(da_r, p.Ur, carry);
    matmul_nt_acc(da_z, p.Uz, carry);
    carry += dhp;
  }
  if (dh0) *dh0 = carry;
}

// ---------------------------------------------------------------------------
// Dense / dropout / loss

struct DenseCache {
  Matrix x, y;
};

inline Matrix dense_forward(const DenseParams& p, const Matrix& x, DenseCache* cache) {
  if (x.cols() != p.in) throw ShapeMismatch("dense input width");
  Matrix y;
  matmul(x, p.W, y);
  add_row_bias(y, p.b);
  if (p.act == Activation::ReLU) {
    for (size_t i = 0; i < y.size(); ++i) y.data()[i] = std::max(0.0, y.data()[i]);
  }
  if (cache) {
    cache->x = x;
    cache->y = y;
  }
  return y;
}

inline Matrix dense_backward(const DenseParams& p, const DenseCache& cache, const Matrix& dy,
                             DenseParams& grads) {
  if (cache.y.empty()) throw MissingCache("dense backward needs a cache");
  Matrix dpre = dy;
  if (p.act == Activation::ReLU) {
    for (size_t i = 0; i < dpre.size(); ++i) {
      if (cache.y.data()[i] <= 0.0) dpre.data()[i] = 0.0;
    }
  }
  matmul_tn_acc(cache.x, dpre, grads.W);
  sum_rows_acc(dpre, grads.b);
  Matrix dx;
  matmul_nt(dpre, p.W, dx);
  return dx;
}

// Inverted dropout: kept activations are scaled by 1/(1-p) at training time so
// the inference path is a plain identity. The mask stores the scale factor.
inline Matrix dropout_mask(size_t rows, size_t cols, double p, Rng& rng) {
  if (p < 0 || p >= 1) throw InvalidConfig("dropout p must be in [0,1)");
  Matrix mask(rows, cols);
  const double scale = 1.0 / (1.0 - p);
  for (size_t i = 0; i < mask.size(); ++i) {
    mask.data()[i] = rng.uniform() < p ? 0.0 : scale;
  }
  return mask;
}

inline void apply_mask(Matrix& m, const Matrix& mask) {
  if (!m.same_shape(mask)) throw ShapeMismatch("dropout mask shape");
  for (size_t i = 0; i < m.size(); ++i) m.data()[i] *= mask.data()[i];
}

// Mean squared error over a batch of single-output predictions. Fills the
// gradient d(loss)/d(pred) when requested.
inline double mse_loss(const Matrix& pred, const Matrix& target, Matrix* dpred) {
  if (!pred.same_shape(target)) throw ShapeMismatch("mse operand shapes");
  if (pred.empty()) throw ShapeMismatch("mse of empty batch");
  const double n = (double)pred.size();
  double loss = 0;
  if (dpred && !dpred->same_shape(pred)) *dpred = Matrix(pred.rows(), pred.cols());
  for (size_t i = 0; i < pred.size(); ++i) {
    const double e = pred.data()[i] - target.data()[i];
    loss += e * e;
    if (dpred) dpred->data()[i] = 2.0 * e / n;
  }
  return loss / n;
}

// ---------------------------------------------------------------------------
// Batch assembly

struct Batch {
  std::vector<Matrix> xs;  // T of B x input_dim
  Matrix stat;             // B x static_dim (empty when unused)
  Matrix target;           // B x 1
  std::vector<double> target_raw;  // kcal/min targets before normalization
};

inline Batch make_batch(const std::vector<TrainingExample>& data, std::span<const size_t> idx,
                        const ModelConfig& cfg) {
  if (idx.empty()) throw EmptyTrainingSet("empty batch");
  const size_t B = idx.size();
  const size_t T = data[idx[0]].accel.rows();
  const bool labels = cfg.input_dim == 7;
  Batch b;
  b.xs.assign(T, Matrix(B, cfg.input_dim));
  b.stat = cfg.has_static() ? Matrix(B, cfg.static_dim) : Matrix();
  b.target = Matrix(B, 1);
  b.target_raw.resize(B);
  for (size_t k = 0; k < B; ++k) {
    const TrainingExample& ex = data[idx[k]];
    if (ex.accel.rows() != T || ex.accel.cols() != 6) throw ShapeMismatch("example accel shape");
    if (labels && ex.labels.size() != T) {
      throw InvalidConfig("model expects a label channel the example lacks");
    }
    if (cfg.has_static() != !ex.stat.empty()) {
      throw StaticBranchMissing(cfg.has_static()
                                    ? "model has a static branch but example has no static data"
                                    : "example carries static data but model has no static branch");
    }
    for (size_t t = 0; t < T; ++t) {
      double* row = b.xs[t].row(k);
      const double* src = ex.accel.row(t);
      for (size_t c = 0; c < 6; ++c) row[c] = src[c];
      if (labels) row[6] = (double)ex.labels[t];
    }
    if (cfg.has_static()) {
      for (size_t c = 0; c < cfg.static_dim; ++c) b.stat(k, c) = ex.stat[c];
    }
    b.target(k, 0) = ex.target;
    b.target_raw[k] = ex.target;
  }
  return b;
}

// ---------------------------------------------------------------------------
// Hybrid model forward/backward

struct ModelCache {
  std::array<GruCache, 3> gru;
  std::vector<Matrix> mask1, mask2;  // per-timestep dropout masks
  Matrix mask3;                      // mask on the final hidden state
  DenseCache stat;
  std::array<DenseCache, 3> head;
  size_t stat_cols = 0;              // columns the GRU part occupies in the concat
  bool training = false;
};

inline Matrix model_forward(const HybridModel& m, const Batch& batch, bool training, Rng& rng,
                            ModelCache* cache) {
  const size_t T = batch.xs.size();
  const size_t B = batch.xs[0].rows();
  if (batch.xs[0].cols() != m.cfg.input_dim) throw ShapeMismatch("batch input width");
  if (m.has_static() && batch.stat.empty()) {
    throw StaticBranchMissing("model has a static branch but batch has no static data");
  }
  if (!m.has_static() && !batch.stat.empty()) {
    throw StaticBranchMissing("batch carries static data but model has no static branch");
  }
  const bool drop = training && m.cfg.dropout_p > 0;
  if (cache) cache->training = training;

  Matrix h0_a(B, m.cfg.hidden[0]), h0_b(B, m.cfg.hidden[1]), h0_c(B, m.cfg.hidden[2]);
  std::vector<Matrix> seq = gru_forward(m.gru[0], batch.xs, h0_a, cache ? &cache->gru[0] : nullptr);
  if (drop) {
    if (cache) cache->mask1.resize(T);
    for (size_t t = 0; t < T; ++t) {
      Matrix mask = dropout_mask(B, m.cfg.hidden[0], m.cfg.dropout_p, rng);
      apply_mask(seq[t], mask);
      if (cache) cache->mask1[t] = std::move(mask);
    }
  }
  seq = gru_forward(m.gru[1], seq, h0_b, cache ? &cache->gru[1] : nullptr);
  if (drop) {
    if (cache) cache->mask2.resize(T);
    for (size_t t = 0; t < T; ++t) {
      Matrix mask = dropout_mask(B, m.cfg.hidden[1], m.cfg.dropout_p, rng);
      apply_mask(seq[t], mask);
      if (cache) cache->mask2[t] = std::move(mask);
    }
  }
  seq = gru_forward(m.gru[2], seq, h0_c, cache ? &cache->gru[2] : nullptr);

  Matrix last = std::move(seq.back());
  if (drop) {
    Matrix mask = dropout_mask(B, m.cfg.hidden[2], m.cfg.dropout_p, rng);
    apply_mask(last, mask);
    if (cache) cache->mask3 = std::move(mask);
  }

  Matrix joined;
  if (m.has_static()) {
    Matrix s = dense_forward(m.stat, batch.stat, cache ? &cache->stat : nullptr);
    joined = Matrix(B, last.cols() + s.cols());
    for (size_t r = 0; r < B; ++r) {
      double* row = joined.row(r);
      for (size_t c = 0; c < last.cols(); ++c) row[c] = last(r, c);
      for (size_t c = 0; c < s.cols(); ++c) row[last.cols() + c] = s(r, c);
    }
  } else {
    joined = std::move(last);
  }
  if (cache) cache->stat_cols = m.cfg.hidden[2];

  Matrix y = dense_forward(m.head[0], joined, cache ? &cache->head[0] : nullptr);
  y = dense_forward(m.head[1], y, cache ? &cache->head[1] : nullptr);
  y = dense_forward(m.head[2], y, cache ? &cache->head[2] : nullptr);
  return y;
}

inline HybridModel model_backward(const HybridModel& m, const ModelCache& cache,
                                  const Matrix& dpred) {
  if (!cache.training) throw MissingCache("model backward needs a training-mode cache");
  HybridModel grads = zeros_like(m);
  Matrix d = dense_backward(m.head[2], cache.head[2], dpred, grads.head[2]);
  d = dense_backward(m.head[1], cache.head[1], d, grads.head[1]);
  d = dense_backward(m.head[0], cache.head[0], d, grads.head[0]);

  const size_t B = d.rows();
  const size_t gcols = cache.stat_cols;
  Matrix dlast(B, gcols);
  if (m.has_static()) {
    Matrix ds(B, d.cols() - gcols);
    for (size_t r = 0; r < B; ++r) {
      for (size_t c = 0; c < gcols; ++c) dlast(r, c) = d(r, c);
      for (size_t c = 0; c < ds.cols(); ++c) ds(r, c) = d(r, gcols + c);
    }
    dense_backward(m.stat, cache.stat, ds, grads.stat);
  } else {
    dlast = std::move(d);
  }
  if (!cache.mask3.empty()) apply_mask(dlast, cache.mask3);

  const size_t T = cache.gru[0].h.size();
  std::vector<Matrix> dh(T);
  for (size_t t = 0; t < T; ++t) dh[t] = Matrix(B, m.cfg.hidden[2]);
  dh[T - 1] = std::move(dlast);

  std::vector<Matrix> dmid, dbot;
  gru_backward(m.gru[2], cache.gru[2], dh, grads.gru[2], &dmid, nullptr);
  if (!cache.mask2.empty()) {
    for (size_t t = 0; t < T; ++t) apply_mask(dmid[t], cache.mask2[t]);
  }
  gru_backward(m.gru[1], cache.gru[1], dmid, grads.gru[1], &dbot, nullptr);
  if (!cache.mask1.empty()) {
    for (size_t t = 0; t < T; ++t) apply_mask(dbot[t], cache.mask1[t]);
  }
  gru_backward(m.gru[0], cache.gru[0], dbot, grads.gru[0], nullptr, nullptr);
  return grads;
}

}  // namespace paee
