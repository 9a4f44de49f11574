#pragma once

#include <cstdint>
#include <vector>

#include "yatt/matrix.hpp"
#include "yatt/rng.hpp"

namespace yatt {

enum class RunMode { train, infer };

/// One LSTM cell. Gate matrices act on the concatenation [hidden_prev, x];
/// columns 0..hidden-1 multiply the previous hidden state, the rest the input.
/// Serialization order of the gates is forget, input, candidate, output.
struct LstmCellWeights {
  Matrix w_forget, w_input, w_cand, w_output;  // hidden x (hidden + input)
  Vec b_forget, b_input, b_cand, b_output;     // hidden

  std::size_t hidden_size() const { return w_forget.rows; }
  std::size_t input_size() const { return w_forget.cols - w_forget.rows; }
};

struct LstmStepState {
  Vec hidden;
  Vec cell;
};

// everything the backward pass needs from one time step
struct CellCache {
  Vec concat;     // [hidden_prev, x]
  Vec cell_prev;
  Vec forget_g, input_g, cand, output_g;
  Vec cell_new, tanh_cell;
};

struct LstmCellGrads {
  Matrix w_forget, w_input, w_cand, w_output;
  Vec b_forget, b_input, b_cand, b_output;
};

struct LayerCache {
  std::vector<CellCache> steps;
  std::vector<Vec> masks;    // inverted-dropout factors; empty when dropout is identity
  std::vector<Vec> outputs;  // post-dropout hidden states
};

struct EncoderConfig {
  std::size_t input_dim = 7;
  std::size_t h1 = 128;
  std::size_t h2 = 50;
  double dropout_rate = 0.2;
  std::size_t t_steps = 30;

  void validate() const;
};

struct EncoderWeights {
  LstmCellWeights layer1, layer2;
};

struct EncoderCache {
  LayerCache layer1, layer2;
};

struct EncoderGrads {
  LstmCellGrads layer1, layer2;
};

// Glorot-uniform gate matrices; biases zero except the forget bias, which
// starts at 1.0 so long sequences keep their memory early in training.
LstmCellWeights init_lstm_weights(std::size_t hidden, std::size_t input, Rng& rng);

LstmCellGrads zero_grads_like(const LstmCellWeights& w);

LstmStepState cell_forward(const LstmCellWeights& w, const LstmStepState& prev,
                           const Vec& x, CellCache* cache = nullptr);

/// Unrolls one layer from a zero initial state. In train mode the outputs get
/// inverted dropout (scale 1/(1-p)); infer mode is the identity.
std::vector<Vec> layer_forward(const LstmCellWeights& w,
                               const std::vector<Vec>& seq, double dropout_rate,
                               RunMode mode, std::uint64_t dropout_seed,
                               LayerCache* cache = nullptr);

/// Exact gradients accumulated across time. `upstream` is the gradient with
/// respect to the layer outputs (post-dropout). When `input_grads` is given it
/// receives the per-step gradient with respect to the inputs.
LstmCellGrads layer_backward(const LstmCellWeights& w, const LayerCache& cache,
                             const std::vector<Vec>& upstream,
                             std::vector<Vec>* input_grads = nullptr);

/// Two stacked layers; the returned sequence is the annotations a<1..T_x>
/// (the final element doubles as the whole-sequence embedding).
std::vector<Vec> stacked_encode(const EncoderConfig& cfg, const EncoderWeights& w,
                                const std::vector<Vec>& seq, RunMode mode,
                                std::uint64_t dropout_seed,
                                EncoderCache* cache = nullptr);

EncoderGrads encoder_backward(const EncoderWeights& w, const EncoderCache& cache,
                              const std::vector<Vec>& upstream_annotations);

}  // namespace yatt
