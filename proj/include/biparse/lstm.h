#ifndef BIPARSE_LSTM_H_
#define BIPARSE_LSTM_H_

#include <random>
#include <span>
#include <string>
#include <vector>

#include "biparse/autodiff.h"

namespace biparse {

// Standard LSTM cell: input, forget and output gates plus a tanh candidate.
// One weight matrix of shape (4h x (e + h)) acts on [x; h]; row blocks are
// ordered input, forget, output, candidate.
struct LstmParams {
  Tensor* weight = nullptr;
  Tensor* bias = nullptr;
  std::size_t input_dim = 0;
  std::size_t hidden_dim = 0;
};

struct LstmState {
  Expr h;
  Expr c;
};

struct BiLstmLayer {
  LstmParams forward;
  LstmParams backward;
};

// Registers "<prefix>/W" and "<prefix>/b".
LstmParams add_lstm(ParameterStore& store, const std::string& prefix,
                    std::size_t input_dim, std::size_t hidden_dim);
BiLstmLayer add_bilstm(ParameterStore& store, const std::string& prefix,
                       std::size_t input_dim, std::size_t hidden_dim);

// Glorot weights, zero biases except +1 on the forget gate.
void init_lstm(const LstmParams& p, std::mt19937_64& rng);

LstmState lstm_initial(Graph& g, const LstmParams& p);
LstmState lstm_step(Graph& g, const LstmParams& p, LstmState state, Expr x);

// Output i is [forward state after inputs 0..i ; backward state after inputs
// n-1..i]. Layers are stacked: layer l + 1 reads the outputs of layer l.
std::vector<Expr> bilstm_encode(Graph& g, std::span<const BiLstmLayer> layers,
                                std::span<const Expr> inputs);

// [final forward state ; final backward state] of a single layer.
Expr bilstm_final(Graph& g, const BiLstmLayer& layer,
                  std::span<const Expr> inputs);

}  // namespace biparse

#endif  // BIPARSE_LSTM_H_
