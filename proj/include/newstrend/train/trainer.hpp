#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <numeric>
#include <optional>
#include <ostream>
#include <span>
#include <vector>

#include "newstrend/ad/graph.hpp"
#include "newstrend/corpus/io.hpp"
#include "newstrend/corpus/types.hpp"
#include "newstrend/model/han.hpp"
#include "newstrend/model/params.hpp"
#include "newstrend/random.hpp"
#include "newstrend/train/evaluate.hpp"
#include "newstrend/train/optimizer.hpp"
#include "newstrend/train/spl.hpp"

namespace newstrend::train {

struct TrainConfig {
  std::size_t epochs = 30;
  std::size_t batch_size = 32;
  double learning_rate = 1e-3;
  OptimizerKind optimizer = OptimizerKind::adam;
  bool spl_enabled = true;
  double lambda0_quantile = 0.6;
  double mu = 1.1;
  // Positive value fixes lambda0 instead of the quantile rule.
  double lambda0 = 0.0;
  std::uint64_t seed = 0;

  void validate() const {
    if (epochs < 1) throw ConfigError("train.epochs must be >= 1");
    if (batch_size < 1) throw ConfigError("train.batch_size must be >= 1");
    if (!(learning_rate > 0.0)) throw ConfigError("train.learning_rate must be > 0");
    if (!(mu > 1.0)) throw ConfigError("train.mu must be > 1");
    if (!(lambda0_quantile > 0.0 && lambda0_quantile <= 1.0)) {
      throw ConfigError("train.lambda0_quantile must be in (0, 1]");
    }
    if (lambda0 < 0.0 || std::isnan(lambda0)) throw ConfigError("train.lambda0 must be >= 0");
  }
};

struct EpochRecord {
  std::size_t epoch = 0;
  double weighted_loss = 0.0;
  double val_acc = 0.0;
  double test_acc = 0.0;
  double lambda = 0.0;
  double active_fraction = 0.0;
};

struct TrainHistory {
  std::vector<EpochRecord> records;
  std::size_t best_epoch = 0;
  std::size_t param_count = 0;
  std::string architecture;
};

struct TrainResult {
  model::HanParams best;
  model::HanParams last;
  TrainHistory history;
  std::vector<double> weights;  // v after the last epoch
};

// Adds d(scale * loss)/d(params) for one sample into `grads`; returns the loss.
inline double accumulate_gradient(const model::HanParams& params, const corpus::Sample& s, double scale,
                                  std::vector<ad::TensorValue>& grads) {
  ad::Graph g;
  const model::BoundParams b(g, params, true);
  const model::HanNodes nodes = model::build_forward(g, b, s);
  const ad::NodeId ce = g.cross_entropy(nodes.probs, static_cast<std::size_t>(s.label));
  const double loss = g.value(ce).item();
  const ad::GradientMap gm = g.backward(g.scale(ce, scale));
  for (std::size_t k = 0; k < params.size(); ++k) {
    const auto src = gm.at(b[k]).data();
    auto dst = grads[k].data();
    for (std::size_t i = 0; i < dst.size(); ++i) dst[i] += src[i];
  }
  return loss;
}

inline std::vector<ad::TensorValue> zero_grads(const model::HanParams& params) {
  std::vector<ad::TensorValue> grads;
  grads.reserve(params.size());
  for (const auto& t : params) grads.emplace_back(t.value.shape());
  return grads;
}

// One optimizer step on (sum v_i l_i) / (sum v_i). Returns that weighted
// loss, or nothing when every weight is zero (no step taken).
inline std::optional<double> weighted_update(model::HanParams& params, Optimizer& opt,
                                             std::span<const corpus::Sample* const> batch,
                                             std::span<const double> weights) {
  if (batch.empty()) throw ConfigError("weighted_update: empty batch");
  if (batch.size() != weights.size()) throw ShapeError("weighted_update: batch and weights differ in length");
  double total = 0.0;
  for (double w : weights) total += w;
  if (!(total > 0.0)) return std::nullopt;
  std::vector<ad::TensorValue> grads = zero_grads(params);
  double loss = 0.0;
  for (std::size_t i = 0; i < batch.size(); ++i) {
    if (weights[i] == 0.0) continue;
    const double f = weights[i] / total;
    loss += f * accumulate_gradient(params, *batch[i], f, grads);
  }
  opt.step(params, grads);
  return loss;
}

inline std::vector<double> dataset_losses(const model::HanParams& params, std::span<const corpus::Sample> data) {
  std::vector<double> out;
  out.reserve(data.size());
  for (const corpus::Sample& s : data) out.push_back(model::sample_loss(params, s));
  return out;
}

// Called after every epoch with the current parameters.
using EpochObserver = std::function<void(const EpochRecord&, const model::HanParams&)>;

inline std::uint64_t init_seed(std::uint64_t seed) { return mix64(seed ^ 0x9d2c5680a1b3e7f1ULL); }
inline std::uint64_t shuffle_seed(std::uint64_t seed) { return mix64(seed ^ 0x3c6ef372fe94f82bULL); }

// Alternates minibatch sweeps under fixed weights v with the closed-form v
// update. With spl disabled v stays 1 and lambda is reported as infinity.
inline TrainResult acs_train(std::span<const corpus::Sample> train, std::span<const corpus::Sample> validation,
                             std::span<const corpus::Sample> test, const TrainConfig& cfg,
                             const model::HyperParams& hyper, const EpochObserver& observe = {}) {
  cfg.validate();
  if (train.empty()) throw InputError("training set is empty");
  model::HanParams params = model::init_params(hyper, init_seed(cfg.seed));
  Optimizer opt(cfg.optimizer, cfg.learning_rate, params);
  Rng rng(shuffle_seed(cfg.seed));

  TrainResult result;
  result.history.param_count = params.scalar_count();
  result.history.architecture = hyper.arch.name();

  std::vector<double> v(train.size(), 1.0);
  std::optional<SplState> spl;
  std::vector<std::size_t> order(train.size());
  std::vector<const corpus::Sample*> batch;
  std::vector<double> batch_v;
  double best_val = -1.0;

  for (std::size_t epoch = 1; epoch <= cfg.epochs; ++epoch) {
    std::iota(order.begin(), order.end(), std::size_t{0});
    rng.shuffle(std::span<std::size_t>(order));
    double loss_sum = 0.0;
    std::size_t steps = 0;
    for (std::size_t start = 0; start < order.size(); start += cfg.batch_size) {
      const std::size_t stop = std::min(order.size(), start + cfg.batch_size);
      batch.clear();
      batch_v.clear();
      for (std::size_t i = start; i < stop; ++i) {
        batch.push_back(&train[order[i]]);
        batch_v.push_back(v[order[i]]);
      }
      if (const auto l = weighted_update(params, opt, batch, batch_v)) {
        loss_sum += *l;
        ++steps;
      }
    }

    EpochRecord rec;
    rec.epoch = epoch;
    rec.weighted_loss = steps ? loss_sum / static_cast<double>(steps) : 0.0;
    if (cfg.spl_enabled) {
      const std::vector<double> losses = dataset_losses(params, train);
      if (!spl) spl = SplState::start(losses, cfg.lambda0_quantile, cfg.mu, cfg.lambda0);
      spl->update_weights(losses);
      rec.lambda = spl->lambda;
      v = spl->v;
      spl->grow();
    } else {
      rec.lambda = std::numeric_limits<double>::infinity();
    }
    rec.active_fraction = active_fraction(v);
    rec.val_acc = validation.empty() ? std::nan("") : evaluate(params, validation).accuracy;
    rec.test_acc = test.empty() ? std::nan("") : evaluate(params, test).accuracy;
    result.history.records.push_back(rec);
    if (result.history.best_epoch == 0 || rec.val_acc > best_val) {
      best_val = rec.val_acc;
      result.history.best_epoch = epoch;
      result.best = params;
    }
    if (observe) observe(rec, params);
  }
  result.last = std::move(params);
  result.weights = std::move(v);
  return result;
}

inline const EpochRecord& best_record(const TrainHistory& h) { return h.records.at(h.best_epoch - 1); }

inline void write_history(std::ostream& out, const TrainHistory& h) {
  out << "# architecture=" << h.architecture << " param_count=" << h.param_count << " best_epoch=" << h.best_epoch
      << '\n';
  out << "epoch,weighted_loss,val_acc,test_acc,lambda,active_fraction\n";
  for (const EpochRecord& r : h.records) {
    out << r.epoch << ',' << corpus::fmt_double(r.weighted_loss) << ',' << corpus::fmt_double(r.val_acc) << ','
        << corpus::fmt_double(r.test_acc) << ',' << corpus::fmt_double(r.lambda) << ','
        << corpus::fmt_double(r.active_fraction) << '\n';
  }
}

}  // namespace newstrend::train
