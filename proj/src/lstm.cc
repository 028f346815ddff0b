#include "biparse/lstm.h"

namespace biparse {

LstmParams add_lstm(ParameterStore& store, const std::string& prefix,
                    std::size_t input_dim, std::size_t hidden_dim) {
  LstmParams p;
  p.input_dim = input_dim;
  p.hidden_dim = hidden_dim;
  p.weight = &store.add(prefix + "/W",
                        Shape{4 * hidden_dim, input_dim + hidden_dim});
  p.bias = &store.add(prefix + "/b", Shape{4 * hidden_dim, 1});
  return p;
}

BiLstmLayer add_bilstm(ParameterStore& store, const std::string& prefix,
                       std::size_t input_dim, std::size_t hidden_dim) {
  return BiLstmLayer{add_lstm(store, prefix + "/fwd", input_dim, hidden_dim),
                     add_lstm(store, prefix + "/bwd", input_dim, hidden_dim)};
}

void init_lstm(const LstmParams& p, std::mt19937_64& rng) {
  glorot_uniform(*p.weight, rng);
  auto b = p.bias->values();
  std::fill(b.begin(), b.end(), real(0));
  for (std::size_t i = p.hidden_dim; i < 2 * p.hidden_dim; ++i) b[i] = 1;
}

LstmState lstm_initial(Graph& g, const LstmParams& p) {
  return LstmState{g.zeros(p.hidden_dim), g.zeros(p.hidden_dim)};
}

LstmState lstm_step(Graph& g, const LstmParams& p, LstmState state, Expr x) {
  const std::size_t d = p.hidden_dim;
  if (g.shape(x).rows != p.input_dim)
    throw DimensionError("lstm_step: input " + g.shape(x).str() +
                         " but cell expects " + std::to_string(p.input_dim));
  if (g.shape(state.h).rows != d || g.shape(state.c).rows != d)
    throw DimensionError("lstm_step: state " + g.shape(state.h).str() +
                         " but cell hidden size is " + std::to_string(d));
  Expr z = g.affine(g.parameter(*p.weight), g.concat({x, state.h}),
                    g.parameter(*p.bias));
  Expr in = g.sigmoid(g.slice(z, 0, d));
  Expr forget = g.sigmoid(g.slice(z, d, d));
  Expr out = g.sigmoid(g.slice(z, 2 * d, d));
  Expr cand = g.tanh(g.slice(z, 3 * d, d));
  Expr c = g.add(g.cmul(forget, state.c), g.cmul(in, cand));
  Expr h = g.cmul(out, g.tanh(c));
  return LstmState{h, c};
}

namespace {

std::vector<Expr> run_direction(Graph& g, const LstmParams& p,
                                std::span<const Expr> inputs, bool reverse) {
  const std::size_t n = inputs.size();
  std::vector<Expr> states(n);
  LstmState s = lstm_initial(g, p);
  for (std::size_t k = 0; k < n; ++k) {
    const std::size_t i = reverse ? n - 1 - k : k;
    s = lstm_step(g, p, s, inputs[i]);
    states[i] = s.h;
  }
  return states;
}

}  // namespace

std::vector<Expr> bilstm_encode(Graph& g, std::span<const BiLstmLayer> layers,
                                std::span<const Expr> inputs) {
  if (inputs.empty()) throw UsageError("bilstm_encode: empty input sequence");
  if (layers.empty()) throw UsageError("bilstm_encode: no layers");
  std::vector<Expr> current(inputs.begin(), inputs.end());
  for (const BiLstmLayer& layer : layers) {
    auto fwd = run_direction(g, layer.forward, current, false);
    auto bwd = run_direction(g, layer.backward, current, true);
    for (std::size_t i = 0; i < current.size(); ++i)
      current[i] = g.concat({fwd[i], bwd[i]});
  }
  return current;
}

Expr bilstm_final(Graph& g, const BiLstmLayer& layer,
                  std::span<const Expr> inputs) {
  if (inputs.empty()) throw UsageError("bilstm_final: empty input sequence");
  auto fwd = run_direction(g, layer.forward, inputs, false);
  auto bwd = run_direction(g, layer.backward, inputs, true);
  return g.concat({fwd.back(), bwd.front()});
}

}  // namespace biparse
