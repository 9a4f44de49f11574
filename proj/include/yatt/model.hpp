#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "yatt/attention.hpp"
#include "yatt/lstm.hpp"
#include "yatt/pipeline.hpp"

namespace yatt {

enum class ModelKind { stacked, attention };

const char* model_kind_name(ModelKind k);
ModelKind model_kind_from_name(const std::string& name);  // ConfigError

struct ModelConfig {
  ModelKind kind = ModelKind::stacked;
  EncoderConfig encoder;  // input_dim must equal the prepared sequence_dim
  std::size_t statics_after = 2;  // extra inputs to the regression head
  std::size_t epochs = 200;
  std::size_t batch_size = 64;
  double learning_rate = 0.001;
  double grad_clip = 0.0;  // max gradient L2 norm per batch; 0 disables

  void validate() const;  // ConfigError
  std::size_t head_inputs() const;
};

/// Exact trainable parameter count:
///   4*h1*(h1 + input_dim + 1)  first LSTM layer
/// + 4*h2*(h2 + h1 + 1)         second LSTM layer
/// + (h2 + 1)                   attention scorer, attention kind only
/// + (h2 + statics_after + 1)   regression head
std::size_t count_params(const ModelConfig& cfg);

struct ModelWeights {
  EncoderWeights encoder;
  bool has_attention = false;
  AttentionParams attention;
  Vec head_w;
  double head_b = 0.0;

  /// Visits every tensor in serialization order: layer1 (W,b per gate),
  /// layer2, attention (if present), head.
  void visit_params(const std::function<void(double*, std::size_t)>& fn);
  void visit_params(const std::function<void(const double*, std::size_t)>& fn) const;

  std::size_t param_count() const;
  Vec flatten() const;
  void unflatten(const Vec& flat);  // ShapeError on size mismatch
};

using ModelGrads = ModelWeights;

/// Glorot-uniform weights, forget bias 1, other biases 0, seeded.
ModelWeights build_model(const ModelConfig& cfg, std::uint64_t seed);
ModelGrads zero_grads_like(const ModelWeights& w);

struct ModelForwardCache {
  EncoderCache encoder;
  std::vector<Vec> annotations;
  AttentionCache attention;
  Vec head_input;
};

/// Scaled-space prediction for one record. `attention_out`, if non-null and
/// the model has attention, receives the per-step weights.
double model_forward(const ModelConfig& cfg, const ModelWeights& w,
                     const PreparedRecord& rec, RunMode mode,
                     std::uint64_t dropout_seed, Vec* attention_out = nullptr,
                     ModelForwardCache* cache = nullptr);

/// Gradients of `upstream * prediction` w.r.t. every parameter.
ModelGrads model_backward(const ModelConfig& cfg, const ModelWeights& w,
                          const PreparedRecord& rec,
                          const ModelForwardCache& cache, double upstream);

struct BatchGradResult {
  ModelGrads grads;  // of the mean squared error over the batch
  double loss = 0.0;
};

/// Mean-squared-error gradients over a batch. Per-record work runs through the
/// active execution mode; reduction always happens in batch order, so serial
/// and OpenMP runs produce bit-identical sums.
BatchGradResult batch_gradients(const ModelConfig& cfg, const ModelWeights& w,
                                const std::vector<const PreparedRecord*>& batch,
                                const std::vector<std::uint64_t>& dropout_seeds);

/// Single-threaded reference with in-place accumulation; kept as the oracle
/// for the parallel kernel.
BatchGradResult batch_gradients_serial(const ModelConfig& cfg, const ModelWeights& w,
                                       const std::vector<const PreparedRecord*>& batch,
                                       const std::vector<std::uint64_t>& dropout_seeds);

struct TrainHistory {
  struct Epoch {
    double train_loss = 0.0;  // mean over batches, scaled space
    double val_rmse = 0.0;    // original units
  };
  std::vector<Epoch> epochs;
};

struct TrainResult {
  ModelWeights weights;  // best validation RMSE, not last epoch
  TrainHistory history;
  std::size_t best_epoch = 0;  // 1-based
  double best_val_rmse = 0.0;
};

/// Mini-batch Adam over shuffled epochs. Keeps the weights from the epoch
/// with the lowest validation RMSE. An empty validation set falls back to
/// final-epoch weights with train RMSE recorded instead. Non-finite loss
/// aborts with NumericError naming the epoch and batch.
TrainResult train_model(const ModelConfig& cfg, const DatasetSplit& data,
                        std::uint64_t seed,
                        const std::function<void(std::size_t, const TrainHistory::Epoch&)>&
                            on_epoch = nullptr);

/// Scaled-space predictions (no dropout), parallel over records.
Vec predict_scaled(const ModelConfig& cfg, const ModelWeights& w,
                   const std::vector<PreparedRecord>& records);

/// Predictions in original units via the scaler's inverse target map.
Vec predict(const ModelConfig& cfg, const ModelWeights& w,
            const std::vector<PreparedRecord>& records, const Scaler& scaler);

/// Per-record attention weights (attention models only; ConfigError otherwise).
std::vector<AttentionMap> attention_maps(const ModelConfig& cfg, const ModelWeights& w,
                                         const std::vector<PreparedRecord>& records);

double rmse(const Vec& predicted, const Vec& actual);
double r2(const Vec& predicted, const Vec& actual);  // NumericError on zero variance

}  // namespace yatt
