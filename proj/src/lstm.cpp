#include "yatt/lstm.hpp"

#include <cmath>
#include <string>

#include "yatt/common.hpp"

namespace yatt {

void EncoderConfig::validate() const {
  if (input_dim < 1) throw ConfigError("encoder: input_dim must be >= 1");
  if (h1 < 1 || h2 < 1) throw ConfigError("encoder: hidden sizes must be >= 1");
  if (t_steps < 1) throw ConfigError("encoder: t_steps must be >= 1");
  if (dropout_rate < 0.0 || dropout_rate >= 1.0) {
    throw ConfigError("encoder: dropout_rate must be in [0, 1)");
  }
}

LstmCellWeights init_lstm_weights(std::size_t hidden, std::size_t input, Rng& rng) {
  LstmCellWeights w;
  const std::size_t cols = hidden + input;
  const double limit = std::sqrt(6.0 / static_cast<double>(cols + hidden));
  auto init_mat = [&](Matrix& m) {
    m = Matrix(hidden, cols);
    for (double& x : m.data) x = rng.uniform(-limit, limit);
  };
  init_mat(w.w_forget);
  init_mat(w.w_input);
  init_mat(w.w_cand);
  init_mat(w.w_output);
  w.b_forget.assign(hidden, 1.0);
  w.b_input.assign(hidden, 0.0);
  w.b_cand.assign(hidden, 0.0);
  w.b_output.assign(hidden, 0.0);
  return w;
}

LstmCellGrads zero_grads_like(const LstmCellWeights& w) {
  LstmCellGrads g;
  const std::size_t h = w.hidden_size(), c = w.w_forget.cols;
  g.w_forget = Matrix(h, c);
  g.w_input = Matrix(h, c);
  g.w_cand = Matrix(h, c);
  g.w_output = Matrix(h, c);
  g.b_forget.assign(h, 0.0);
  g.b_input.assign(h, 0.0);
  g.b_cand.assign(h, 0.0);
  g.b_output.assign(h, 0.0);
  return g;
}

LstmStepState cell_forward(const LstmCellWeights& w, const LstmStepState& prev,
                           const Vec& x, CellCache* cache) {
  const std::size_t h = w.hidden_size();
  const std::size_t in = w.input_size();
  if (x.size() != in) {
    throw ShapeError("cell_forward: input has length " + std::to_string(x.size()) +
                     ", cell expects " + std::to_string(in));
  }
  if (prev.hidden.size() != h || prev.cell.size() != h) {
    throw ShapeError("cell_forward: previous state has lengths " +
                     std::to_string(prev.hidden.size()) + "/" +
                     std::to_string(prev.cell.size()) + ", cell expects " +
                     std::to_string(h));
  }

  Vec concat(h + in);
  for (std::size_t i = 0; i < h; ++i) concat[i] = prev.hidden[i];
  for (std::size_t i = 0; i < in; ++i) concat[h + i] = x[i];

  Vec forget_g(h), input_g(h), cand(h), output_g(h);
  for (std::size_t r = 0; r < h; ++r) {
    forget_g[r] = sigmoid(w.b_forget[r] + dot(w.w_forget.row(r), concat.data(), h + in));
    input_g[r] = sigmoid(w.b_input[r] + dot(w.w_input.row(r), concat.data(), h + in));
    cand[r] = std::tanh(w.b_cand[r] + dot(w.w_cand.row(r), concat.data(), h + in));
    output_g[r] = sigmoid(w.b_output[r] + dot(w.w_output.row(r), concat.data(), h + in));
  }

  LstmStepState next;
  next.cell.resize(h);
  next.hidden.resize(h);
  Vec tanh_cell(h);
  for (std::size_t r = 0; r < h; ++r) {
    next.cell[r] = forget_g[r] * prev.cell[r] + input_g[r] * cand[r];
    tanh_cell[r] = std::tanh(next.cell[r]);
    next.hidden[r] = output_g[r] * tanh_cell[r];
  }

  if (cache) {
    cache->concat = std::move(concat);
    cache->cell_prev = prev.cell;
    cache->forget_g = std::move(forget_g);
    cache->input_g = std::move(input_g);
    cache->cand = std::move(cand);
    cache->output_g = std::move(output_g);
    cache->cell_new = next.cell;
    cache->tanh_cell = std::move(tanh_cell);
  }
  return next;
}

std::vector<Vec> layer_forward(const LstmCellWeights& w,
                               const std::vector<Vec>& seq, double dropout_rate,
                               RunMode mode, std::uint64_t dropout_seed,
                               LayerCache* cache) {
  if (seq.empty()) throw ShapeError("layer_forward: empty sequence");
  const std::size_t h = w.hidden_size();
  const std::size_t t_steps = seq.size();
  const bool drop = mode == RunMode::train && dropout_rate > 0.0;

  LstmStepState state;
  state.hidden.assign(h, 0.0);
  state.cell.assign(h, 0.0);

  if (cache) {
    cache->steps.resize(t_steps);
    cache->masks.clear();
    cache->outputs.resize(t_steps);
  }

  Rng rng(dropout_seed);
  std::vector<Vec> outputs(t_steps);
  for (std::size_t t = 0; t < t_steps; ++t) {
    state = cell_forward(w, state, seq[t], cache ? &cache->steps[t] : nullptr);
    Vec out = state.hidden;
    if (drop) {
      Vec mask(h);
      const double keep_scale = 1.0 / (1.0 - dropout_rate);
      for (std::size_t i = 0; i < h; ++i) {
        mask[i] = rng.uniform() < dropout_rate ? 0.0 : keep_scale;
        out[i] *= mask[i];
      }
      if (cache) cache->masks.push_back(std::move(mask));
    }
    if (cache) cache->outputs[t] = out;
    outputs[t] = std::move(out);
  }
  return outputs;
}

LstmCellGrads layer_backward(const LstmCellWeights& w, const LayerCache& cache,
                             const std::vector<Vec>& upstream,
                             std::vector<Vec>* input_grads) {
  const std::size_t t_steps = cache.steps.size();
  if (t_steps == 0) throw ShapeError("layer_backward: empty cache");
  if (upstream.size() != t_steps) {
    throw ShapeError("layer_backward: upstream has " +
                     std::to_string(upstream.size()) + " steps, cache has " +
                     std::to_string(t_steps));
  }
  const std::size_t h = w.hidden_size();
  const std::size_t in = w.input_size();
  const bool masked = !cache.masks.empty();

  LstmCellGrads g = zero_grads_like(w);
  if (input_grads) {
    input_grads->assign(t_steps, Vec(in, 0.0));
  }

  Vec da_next(h, 0.0), dc_next(h, 0.0);
  Vec da(h), dc(h), dpre_f(h), dpre_i(h), dpre_c(h), dpre_o(h), dz(h + in);

  for (std::size_t ti = t_steps; ti-- > 0;) {
    const CellCache& c = cache.steps[ti];
    if (upstream[ti].size() != h) {
      throw ShapeError("layer_backward: upstream step " + std::to_string(ti) +
                       " has length " + std::to_string(upstream[ti].size()) +
                       ", expected " + std::to_string(h));
    }
    for (std::size_t r = 0; r < h; ++r) {
      double u = upstream[ti][r];
      if (masked) u *= cache.masks[ti][r];
      da[r] = u + da_next[r];
      dc[r] = dc_next[r] + da[r] * c.output_g[r] * (1.0 - c.tanh_cell[r] * c.tanh_cell[r]);
      const double d_out = da[r] * c.tanh_cell[r];
      dpre_o[r] = d_out * c.output_g[r] * (1.0 - c.output_g[r]);
      const double d_forget = dc[r] * c.cell_prev[r];
      dpre_f[r] = d_forget * c.forget_g[r] * (1.0 - c.forget_g[r]);
      const double d_input = dc[r] * c.cand[r];
      dpre_i[r] = d_input * c.input_g[r] * (1.0 - c.input_g[r]);
      const double d_cand = dc[r] * c.input_g[r];
      dpre_c[r] = d_cand * (1.0 - c.cand[r] * c.cand[r]);
    }

    std::fill(dz.begin(), dz.end(), 0.0);
    const double* z = c.concat.data();
    for (std::size_t r = 0; r < h; ++r) {
      const double pf = dpre_f[r], pi = dpre_i[r], pc = dpre_c[r], po = dpre_o[r];
      double* gwf = g.w_forget.row(r);
      double* gwi = g.w_input.row(r);
      double* gwc = g.w_cand.row(r);
      double* gwo = g.w_output.row(r);
      const double* wf = w.w_forget.row(r);
      const double* wi = w.w_input.row(r);
      const double* wc = w.w_cand.row(r);
      const double* wo = w.w_output.row(r);
      for (std::size_t k = 0; k < h + in; ++k) {
        gwf[k] += pf * z[k];
        gwi[k] += pi * z[k];
        gwc[k] += pc * z[k];
        gwo[k] += po * z[k];
        dz[k] += pf * wf[k] + pi * wi[k] + pc * wc[k] + po * wo[k];
      }
      g.b_forget[r] += pf;
      g.b_input[r] += pi;
      g.b_cand[r] += pc;
      g.b_output[r] += po;
    }

    for (std::size_t r = 0; r < h; ++r) {
      da_next[r] = dz[r];
      dc_next[r] = dc[r] * c.forget_g[r];
    }
    if (input_grads) {
      for (std::size_t k = 0; k < in; ++k) (*input_grads)[ti][k] = dz[h + k];
    }
  }
  return g;
}

std::vector<Vec> stacked_encode(const EncoderConfig& cfg, const EncoderWeights& w,
                                const std::vector<Vec>& seq, RunMode mode,
                                std::uint64_t dropout_seed, EncoderCache* cache) {
  cfg.validate();
  if (seq.size() != cfg.t_steps) {
    throw ShapeError("stacked_encode: sequence has " + std::to_string(seq.size()) +
                     " steps, config expects " + std::to_string(cfg.t_steps));
  }
  if (w.layer1.hidden_size() != cfg.h1 || w.layer1.input_size() != cfg.input_dim ||
      w.layer2.hidden_size() != cfg.h2 || w.layer2.input_size() != cfg.h1) {
    throw ShapeError("stacked_encode: weight shapes do not match config (layer1 " +
                     w.layer1.w_forget.shape_str() + ", layer2 " +
                     w.layer2.w_forget.shape_str() + ")");
  }
  std::vector<Vec> mid = layer_forward(w.layer1, seq, cfg.dropout_rate, mode,
                                       derive_seed(dropout_seed, "dropout-layer1"),
                                       cache ? &cache->layer1 : nullptr);
  return layer_forward(w.layer2, mid, cfg.dropout_rate, mode,
                       derive_seed(dropout_seed, "dropout-layer2"),
                       cache ? &cache->layer2 : nullptr);
}

EncoderGrads encoder_backward(const EncoderWeights& w, const EncoderCache& cache,
                              const std::vector<Vec>& upstream_annotations) {
  EncoderGrads g;
  std::vector<Vec> mid_grads;
  g.layer2 = layer_backward(w.layer2, cache.layer2, upstream_annotations, &mid_grads);
  g.layer1 = layer_backward(w.layer1, cache.layer1, mid_grads, nullptr);
  return g;
}

}  // namespace yatt
