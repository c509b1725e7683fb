#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <span>
#include <vector>

#include "paee/error.hpp"
#include "paee/nn.hpp"
#include "paee/rng.hpp"

namespace paee {

struct AdamParams {
  double lr = 0.001;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

// One bias-corrected Adam update of a single parameter. t is the 1-based step
// count after incrementing. This scalar rule is the single source of truth;
// the model-level step applies it elementwise.
inline void adam_update(double& theta, double& m, double& v, uint64_t t, double g,
                        const AdamParams& hp) {
  m = hp.beta1 * m + (1.0 - hp.beta1) * g;
  v = hp.beta2 * v + (1.0 - hp.beta2) * g * g;
  const double mhat = m / (1.0 - std::pow(hp.beta1, (double)t));
  const double vhat = v / (1.0 - std::pow(hp.beta2, (double)t));
  theta -= hp.lr * mhat / (std::sqrt(vhat) + hp.eps);
}

struct AdamState {
  HybridModel m, v;  // moment buffers shaped like the model
  uint64_t t = 0;
  AdamParams hp;

  static AdamState init(const HybridModel& model, const AdamParams& hp) {
    AdamState s;
    s.m = zeros_like(model);
    s.v = zeros_like(model);
    s.hp = hp;
    return s;
  }
};

inline void adam_step(AdamState& state, HybridModel& params, const HybridModel& grads) {
  ++state.t;
  std::vector<const Matrix*> gs;
  visit_params(grads, [&](const Matrix& g) { gs.push_back(&g); });
  std::vector<Matrix*> ms, vs;
  visit_params(state.m, [&](Matrix& m) { ms.push_back(&m); });
  visit_params(state.v, [&](Matrix& m) { vs.push_back(&m); });
  size_t k = 0;
  visit_params(params, [&](Matrix& p) {
    const Matrix& g = *gs[k];
    Matrix& m = *ms[k];
    Matrix& v = *vs[k];
    if (!p.same_shape(g)) throw ShapeMismatch("gradient shape");
    for (size_t i = 0; i < p.size(); ++i) {
      adam_update(p.data()[i], m.data()[i], v.data()[i], state.t, g.data()[i], state.hp);
    }
    ++k;
  });
}

// ---------------------------------------------------------------------------
// Training loop

struct TrainConfig {
  size_t epochs = 50;
  size_t batch_size = 512;
  AdamParams adam;
  uint64_t seed = 0;
  size_t patience = 0;  // early stop after this many epochs without val improvement; 0 = off

  void validate() const {
    if (epochs == 0 || batch_size == 0) throw InvalidConfig("epochs and batch size must be positive");
    if (adam.beta1 <= 0 || adam.beta1 >= 1 || adam.beta2 <= 0 || adam.beta2 >= 1) {
      throw InvalidConfig("betas must lie in (0,1)");
    }
  }
};

// Inference over a whole example list, in fixed-size chunks.
inline std::vector<double> predict(const HybridModel& model,
                                   const std::vector<TrainingExample>& data,
                                   size_t chunk = 256) {
  std::vector<double> out;
  out.reserve(data.size());
  Rng dummy(0);
  std::vector<size_t> idx;
  for (size_t start = 0; start < data.size(); start += chunk) {
    const size_t end = std::min(start + chunk, data.size());
    idx.resize(end - start);
    std::iota(idx.begin(), idx.end(), start);
    Batch b = make_batch(data, idx, model.cfg);
    Matrix pred = model_forward(model, b, false, dummy, nullptr);
    for (size_t r = 0; r < pred.rows(); ++r) out.push_back(pred(r, 0));
  }
  return out;
}

inline double eval_mse(const HybridModel& model, const std::vector<TrainingExample>& data) {
  std::vector<double> p = predict(model, data);
  double s = 0;
  for (size_t i = 0; i < p.size(); ++i) {
    const double e = p[i] - data[i].target;
    s += e * e;
  }
  return s / (double)p.size();
}

struct TrainResult {
  HybridModel model;               // parameters from the best-validation epoch
  std::vector<double> train_loss;  // per-epoch mean training MSE
  std::vector<double> val_loss;    // per-epoch validation MSE
  size_t best_epoch = 0;           // 0-based index into the histories
};

// Seeded shuffle, minibatch Adam, per-epoch validation; returns the parameters
// with the best validation MSE (training MSE when the validation set is empty).
inline TrainResult train(HybridModel model, const std::vector<TrainingExample>& train_set,
                         const std::vector<TrainingExample>& val_set, const TrainConfig& cfg) {
  cfg.validate();
  if (train_set.empty()) throw EmptyTrainingSet("training set is empty");

  Rng rng(mix_seed(cfg.seed, "train"));
  AdamState adam = AdamState::init(model, cfg.adam);
  std::vector<size_t> order(train_set.size());
  std::iota(order.begin(), order.end(), 0);

  TrainResult res;
  double best = std::numeric_limits<double>::infinity();
  size_t since_best = 0;
  for (size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    rng.shuffle(order);
    double loss_sum = 0;
    ModelCache cache;
    Matrix dpred;
    for (size_t start = 0; start < order.size(); start += cfg.batch_size) {
      const size_t end = std::min(start + cfg.batch_size, order.size());
      std::span<const size_t> idx(order.data() + start, end - start);
      Batch b = make_batch(train_set, idx, model.cfg);
      Matrix pred = model_forward(model, b, true, rng, &cache);
      const double loss = mse_loss(pred, b.target, &dpred);
      if (!std::isfinite(loss)) throw DivergedFold("non-finite training loss");
      loss_sum += loss * (double)idx.size();
      HybridModel grads = model_backward(model, cache, dpred);
      adam_step(adam, model, grads);
    }
    const double train_mse = loss_sum / (double)train_set.size();
    res.train_loss.push_back(train_mse);
    const double val_mse = val_set.empty() ? train_mse : eval_mse(model, val_set);
    if (!std::isfinite(val_mse)) throw DivergedFold("non-finite validation loss");
    res.val_loss.push_back(val_mse);
    if (val_mse < best) {
      best = val_mse;
      res.best_epoch = epoch;
      res.model = model;
      since_best = 0;
    } else if (cfg.patience > 0 && ++since_best >= cfg.patience) {
      break;
    }
  }
  return res;
}

}  // namespace paee
