#include "yatt/model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "yatt/adam.hpp"
#include "yatt/common.hpp"
#include "yatt/exec.hpp"
#include "yatt/rng.hpp"

namespace yatt {

const char* model_kind_name(ModelKind k) {
  return k == ModelKind::stacked ? "stacked" : "attention";
}

ModelKind model_kind_from_name(const std::string& name) {
  if (name == "stacked") return ModelKind::stacked;
  if (name == "attention") return ModelKind::attention;
  throw ConfigError("unknown model kind '" + name + "' (expected stacked or attention)");
}

void ModelConfig::validate() const {
  encoder.validate();
  if (epochs == 0) throw ConfigError("epochs must be >= 1");
  if (batch_size == 0) throw ConfigError("batch_size must be >= 1");
  if (!(learning_rate > 0.0) || !std::isfinite(learning_rate)) {
    throw ConfigError("learning_rate must be positive and finite");
  }
  if (grad_clip < 0.0 || !std::isfinite(grad_clip)) {
    throw ConfigError("grad_clip must be >= 0 and finite");
  }
}

std::size_t ModelConfig::head_inputs() const { return encoder.h2 + statics_after; }

std::size_t count_params(const ModelConfig& cfg) {
  const std::size_t in = cfg.encoder.input_dim;
  const std::size_t h1 = cfg.encoder.h1;
  const std::size_t h2 = cfg.encoder.h2;
  std::size_t n = 4 * h1 * (h1 + in + 1)   // first recurrent layer
                + 4 * h2 * (h2 + h1 + 1)   // second recurrent layer
                + (h2 + cfg.statics_after + 1);  // regression head
  if (cfg.kind == ModelKind::attention) n += h2 + 1;  // alignment scorer
  return n;
}

namespace {

template <class W, class Fn>
void visit_layer(W& layer, const Fn& fn) {
  fn(layer.w_forget.data.data(), layer.w_forget.data.size());
  fn(layer.b_forget.data(), layer.b_forget.size());
  fn(layer.w_input.data.data(), layer.w_input.data.size());
  fn(layer.b_input.data(), layer.b_input.size());
  fn(layer.w_cand.data.data(), layer.w_cand.data.size());
  fn(layer.b_cand.data(), layer.b_cand.size());
  fn(layer.w_output.data.data(), layer.w_output.data.size());
  fn(layer.b_output.data(), layer.b_output.size());
}

}  // namespace

void ModelWeights::visit_params(const std::function<void(double*, std::size_t)>& fn) {
  visit_layer(encoder.layer1, fn);
  visit_layer(encoder.layer2, fn);
  if (has_attention) {
    fn(attention.weight.data(), attention.weight.size());
    fn(&attention.bias, 1);
  }
  fn(head_w.data(), head_w.size());
  fn(&head_b, 1);
}

void ModelWeights::visit_params(
    const std::function<void(const double*, std::size_t)>& fn) const {
  const_cast<ModelWeights*>(this)->visit_params(
      [&fn](double* p, std::size_t n) { fn(p, n); });
}

std::size_t ModelWeights::param_count() const {
  std::size_t n = 0;
  visit_params([&n](const double*, std::size_t len) { n += len; });
  return n;
}

Vec ModelWeights::flatten() const {
  Vec out;
  out.reserve(param_count());
  visit_params([&out](const double* p, std::size_t n) {
    out.insert(out.end(), p, p + n);
  });
  return out;
}

void ModelWeights::unflatten(const Vec& flat) {
  if (flat.size() != param_count()) {
    throw ShapeError("unflatten: got " + std::to_string(flat.size()) +
                     " values, model has " + std::to_string(param_count()));
  }
  std::size_t pos = 0;
  visit_params([&flat, &pos](double* p, std::size_t n) {
    std::copy_n(flat.data() + pos, n, p);
    pos += n;
  });
}

ModelWeights build_model(const ModelConfig& cfg, std::uint64_t seed) {
  cfg.validate();
  Rng rng(seed);
  ModelWeights w;
  w.encoder.layer1 = init_lstm_weights(cfg.encoder.h1, cfg.encoder.input_dim, rng);
  w.encoder.layer2 = init_lstm_weights(cfg.encoder.h2, cfg.encoder.h1, rng);
  if (cfg.kind == ModelKind::attention) {
    w.has_attention = true;
    const double limit = std::sqrt(6.0 / static_cast<double>(cfg.encoder.h2 + 1));
    w.attention.weight.resize(cfg.encoder.h2);
    for (double& x : w.attention.weight) x = rng.uniform(-limit, limit);
    w.attention.bias = 0.0;
  }
  const std::size_t hi = cfg.head_inputs();
  const double limit = std::sqrt(6.0 / static_cast<double>(hi + 1));
  w.head_w.resize(hi);
  for (double& x : w.head_w) x = rng.uniform(-limit, limit);
  w.head_b = 0.0;
  return w;
}

ModelGrads zero_grads_like(const ModelWeights& w) {
  ModelGrads g = w;
  g.visit_params([](double* p, std::size_t n) { std::fill_n(p, n, 0.0); });
  return g;
}

double model_forward(const ModelConfig& cfg, const ModelWeights& w,
                     const PreparedRecord& rec, RunMode mode,
                     std::uint64_t dropout_seed, Vec* attention_out,
                     ModelForwardCache* cache) {
  if (rec.statics_after.size() != cfg.statics_after) {
    throw ShapeError("record " + rec.record_id + " carries " +
                     std::to_string(rec.statics_after.size()) +
                     " statics, model expects " + std::to_string(cfg.statics_after));
  }
  if (w.head_w.size() != cfg.head_inputs()) {
    throw ShapeError("head expects " + std::to_string(cfg.head_inputs()) +
                     " inputs, weights have " + std::to_string(w.head_w.size()));
  }
  if ((cfg.kind == ModelKind::attention) != w.has_attention) {
    throw ShapeError("model kind and weights disagree about attention");
  }

  std::vector<Vec> annotations = stacked_encode(
      cfg.encoder, w.encoder, rec.sequence, mode, dropout_seed,
      cache ? &cache->encoder : nullptr);

  Vec feature;
  if (cfg.kind == ModelKind::attention) {
    feature = attend(w.attention, annotations, attention_out,
                     cache ? &cache->attention : nullptr);
  } else {
    feature = annotations.back();
    if (attention_out) attention_out->clear();
  }

  Vec head_input;
  head_input.reserve(feature.size() + rec.statics_after.size());
  head_input.insert(head_input.end(), feature.begin(), feature.end());
  head_input.insert(head_input.end(), rec.statics_after.begin(),
                    rec.statics_after.end());
  const double pred = dot(w.head_w.data(), head_input.data(), head_input.size()) + w.head_b;
  if (cache) {
    cache->annotations = std::move(annotations);
    cache->head_input = std::move(head_input);
  }
  return pred;
}

namespace {

void take_layer_grads(LstmCellGrads&& src, LstmCellWeights& dst) {
  dst.w_forget = std::move(src.w_forget);
  dst.b_forget = std::move(src.b_forget);
  dst.w_input = std::move(src.w_input);
  dst.b_input = std::move(src.b_input);
  dst.w_cand = std::move(src.w_cand);
  dst.b_cand = std::move(src.b_cand);
  dst.w_output = std::move(src.w_output);
  dst.b_output = std::move(src.b_output);
}

}  // namespace

ModelGrads model_backward(const ModelConfig& cfg, const ModelWeights& w,
                          const PreparedRecord& rec,
                          const ModelForwardCache& cache, double upstream) {
  const std::size_t h2 = cfg.encoder.h2;
  const std::size_t t_steps = cache.annotations.size();

  ModelGrads grads = zero_grads_like(w);
  grads.head_b = upstream;
  for (std::size_t i = 0; i < cache.head_input.size(); ++i) {
    grads.head_w[i] = upstream * cache.head_input[i];
  }

  Vec dfeature(h2);
  for (std::size_t i = 0; i < h2; ++i) dfeature[i] = upstream * w.head_w[i];

  std::vector<Vec> upstream_annotations;
  if (cfg.kind == ModelKind::attention) {
    grads.attention =
        attend_backward(w.attention, cache.attention, dfeature, &upstream_annotations);
  } else {
    upstream_annotations.assign(t_steps, Vec(h2, 0.0));
    upstream_annotations.back() = dfeature;
  }

  EncoderGrads enc = encoder_backward(w.encoder, cache.encoder, upstream_annotations);
  take_layer_grads(std::move(enc.layer1), grads.encoder.layer1);
  take_layer_grads(std::move(enc.layer2), grads.encoder.layer2);
  (void)rec;
  return grads;
}

namespace {

void accumulate(ModelGrads& acc, const ModelGrads& g) {
  std::vector<std::pair<double*, std::size_t>> dst;
  acc.visit_params([&dst](double* p, std::size_t n) { dst.emplace_back(p, n); });
  std::size_t slot = 0;
  g.visit_params([&dst, &slot](const double* p, std::size_t n) {
    double* d = dst[slot].first;
    for (std::size_t i = 0; i < n; ++i) d[i] += p[i];
    ++slot;
  });
}

BatchGradResult batch_gradients_impl(const ModelConfig& cfg, const ModelWeights& w,
                                     const std::vector<const PreparedRecord*>& batch,
                                     const std::vector<std::uint64_t>& dropout_seeds,
                                     bool parallel) {
  if (batch.empty()) throw ShapeError("batch_gradients: empty batch");
  if (batch.size() != dropout_seeds.size()) {
    throw ShapeError("batch_gradients: " + std::to_string(batch.size()) +
                     " records but " + std::to_string(dropout_seeds.size()) + " seeds");
  }
  const double inv_b = 1.0 / static_cast<double>(batch.size());

  BatchGradResult out;
  out.grads = zero_grads_like(w);

  if (parallel) {
    // Per-record gradient slots; the reduction below runs in batch order, so
    // the result is bit-identical to the serial path.
    std::vector<ModelGrads> slots(batch.size());
    std::vector<double> losses(batch.size());
    exec::parallel_for(batch.size(), [&](std::size_t i) {
      ModelForwardCache cache;
      const double pred = model_forward(cfg, w, *batch[i], RunMode::train,
                                        dropout_seeds[i], nullptr, &cache);
      const double err = pred - batch[i]->target_scaled;
      losses[i] = err * err;
      slots[i] = model_backward(cfg, w, *batch[i], cache, 2.0 * err * inv_b);
    });
    for (std::size_t i = 0; i < batch.size(); ++i) {
      accumulate(out.grads, slots[i]);
      out.loss += losses[i];
    }
  } else {
    for (std::size_t i = 0; i < batch.size(); ++i) {
      ModelForwardCache cache;
      const double pred = model_forward(cfg, w, *batch[i], RunMode::train,
                                        dropout_seeds[i], nullptr, &cache);
      const double err = pred - batch[i]->target_scaled;
      out.loss += err * err;
      accumulate(out.grads, model_backward(cfg, w, *batch[i], cache, 2.0 * err * inv_b));
    }
  }
  out.loss *= inv_b;
  return out;
}

}  // namespace

BatchGradResult batch_gradients(const ModelConfig& cfg, const ModelWeights& w,
                                const std::vector<const PreparedRecord*>& batch,
                                const std::vector<std::uint64_t>& dropout_seeds) {
  return batch_gradients_impl(cfg, w, batch, dropout_seeds, true);
}

BatchGradResult batch_gradients_serial(const ModelConfig& cfg, const ModelWeights& w,
                                       const std::vector<const PreparedRecord*>& batch,
                                       const std::vector<std::uint64_t>& dropout_seeds) {
  return batch_gradients_impl(cfg, w, batch, dropout_seeds, false);
}

Vec predict_scaled(const ModelConfig& cfg, const ModelWeights& w,
                   const std::vector<PreparedRecord>& records) {
  Vec out(records.size());
  exec::parallel_for(records.size(), [&](std::size_t i) {
    out[i] = model_forward(cfg, w, records[i], RunMode::infer, 0);
  });
  return out;
}

Vec predict(const ModelConfig& cfg, const ModelWeights& w,
            const std::vector<PreparedRecord>& records, const Scaler& scaler) {
  Vec out = predict_scaled(cfg, w, records);
  for (double& x : out) x = scaler.invert_target(x);
  return out;
}

std::vector<AttentionMap> attention_maps(const ModelConfig& cfg, const ModelWeights& w,
                                         const std::vector<PreparedRecord>& records) {
  if (cfg.kind != ModelKind::attention) {
    throw ConfigError("attention weights requested from a model without attention");
  }
  std::vector<AttentionMap> out(records.size());
  exec::parallel_for(records.size(), [&](std::size_t i) {
    Vec alpha;
    model_forward(cfg, w, records[i], RunMode::infer, 0, &alpha);
    out[i].record_id = records[i].record_id;
    out[i].weights = std::move(alpha);
  });
  return out;
}

double rmse(const Vec& predicted, const Vec& actual) {
  return std::sqrt(mse_loss(predicted, actual));
}

double r2(const Vec& predicted, const Vec& actual) {
  if (predicted.size() != actual.size() || actual.empty()) {
    throw ShapeError("r2: predicted has length " + std::to_string(predicted.size()) +
                     ", actual has length " + std::to_string(actual.size()));
  }
  const double mean =
      std::accumulate(actual.begin(), actual.end(), 0.0) / static_cast<double>(actual.size());
  double sse = 0.0, sst = 0.0;
  for (std::size_t i = 0; i < actual.size(); ++i) {
    sse += (predicted[i] - actual[i]) * (predicted[i] - actual[i]);
    sst += (actual[i] - mean) * (actual[i] - mean);
  }
  if (sst == 0.0) {
    throw NumericError("r2 is undefined: actual values have zero variance");
  }
  return 1.0 - sse / sst;
}

TrainResult train_model(const ModelConfig& cfg, const DatasetSplit& data,
                        std::uint64_t seed,
                        const std::function<void(std::size_t, const TrainHistory::Epoch&)>&
                            on_epoch) {
  cfg.validate();
  if (data.train.empty()) throw DataError("training split is empty");
  if (data.input_dim != cfg.encoder.input_dim) {
    throw ConfigError("prepared input_dim " + std::to_string(data.input_dim) +
                      " does not match encoder input_dim " +
                      std::to_string(cfg.encoder.input_dim));
  }
  if (data.t_steps != cfg.encoder.t_steps) {
    throw ConfigError("prepared t_steps " + std::to_string(data.t_steps) +
                      " does not match encoder t_steps " +
                      std::to_string(cfg.encoder.t_steps));
  }
  if (data.statics_after_dim != cfg.statics_after) {
    throw ConfigError("prepared statics " + std::to_string(data.statics_after_dim) +
                      " does not match model statics " + std::to_string(cfg.statics_after));
  }

  ModelWeights weights = build_model(cfg, derive_seed(seed, "init"));
  Vec flat = weights.flatten();
  AdamState opt(flat.size(), cfg.learning_rate);

  Vec actual_val(data.validation.size());
  for (std::size_t i = 0; i < data.validation.size(); ++i) {
    actual_val[i] = data.validation[i].yield;
  }
  Vec actual_train;
  if (data.validation.empty()) {
    actual_train.resize(data.train.size());
    for (std::size_t i = 0; i < data.train.size(); ++i) {
      actual_train[i] = data.train[i].yield;
    }
  }

  TrainResult result;
  result.best_val_rmse = std::numeric_limits<double>::infinity();

  std::vector<std::size_t> order(data.train.size());
  std::iota(order.begin(), order.end(), 0);

  for (std::size_t epoch = 1; epoch <= cfg.epochs; ++epoch) {
    Rng shuffle_rng(derive_seed(seed, "epoch-shuffle", epoch));
    shuffle_rng.shuffle(order);
    const std::uint64_t epoch_seed = derive_seed(seed, "dropout-epoch", epoch);

    double loss_sum = 0.0;
    std::size_t batch_index = 0;
    for (std::size_t start = 0; start < order.size(); start += cfg.batch_size) {
      const std::size_t end = std::min(start + cfg.batch_size, order.size());
      std::vector<const PreparedRecord*> batch;
      std::vector<std::uint64_t> seeds;
      batch.reserve(end - start);
      seeds.reserve(end - start);
      for (std::size_t i = start; i < end; ++i) {
        batch.push_back(&data.train[order[i]]);
        seeds.push_back(derive_seed(epoch_seed, "record", i));
      }
      BatchGradResult bg = batch_gradients(cfg, weights, batch, seeds);
      ++batch_index;
      if (!std::isfinite(bg.loss)) {
        throw NumericError("training diverged at epoch " + std::to_string(epoch) +
                           ", batch " + std::to_string(batch_index) +
                           " (loss is not finite)");
      }
      loss_sum += bg.loss * static_cast<double>(end - start);

      Vec gflat = bg.grads.flatten();
      if (cfg.grad_clip > 0.0) {
        double norm2 = 0.0;
        for (double g : gflat) norm2 += g * g;
        const double norm = std::sqrt(norm2);
        if (norm > cfg.grad_clip) {
          const double scale = cfg.grad_clip / norm;
          for (double& g : gflat) g *= scale;
        }
      }
      adam_step(flat, gflat, opt);
      weights.unflatten(flat);
    }

    TrainHistory::Epoch entry;
    entry.train_loss = loss_sum / static_cast<double>(order.size());
    if (!data.validation.empty()) {
      entry.val_rmse = rmse(predict(cfg, weights, data.validation, data.scaler), actual_val);
    } else {
      entry.val_rmse = rmse(predict(cfg, weights, data.train, data.scaler), actual_train);
    }
    result.history.epochs.push_back(entry);
    if (on_epoch) on_epoch(epoch, entry);

    if (entry.val_rmse < result.best_val_rmse) {
      result.best_val_rmse = entry.val_rmse;
      result.best_epoch = epoch;
      result.weights = weights;
    }
  }

  if (result.best_epoch == 0) {  // every epoch produced NaN-free but equal RMSE
    result.best_epoch = cfg.epochs;
    result.weights = std::move(weights);
    result.best_val_rmse = result.history.epochs.back().val_rmse;
  }
  return result;
}

}  // namespace yatt
