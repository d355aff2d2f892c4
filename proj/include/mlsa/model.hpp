#ifndef MLSA_MODEL_HPP
#define MLSA_MODEL_HPP

#include <optional>
#include <string>
#include <vector>

#include "mlsa/corpus.hpp"
#include "mlsa/embeddings.hpp"
#include "mlsa/graph.hpp"
#include "mlsa/rng.hpp"
#include "mlsa/tensor.hpp"
#include "mlsa/textproc.hpp"

namespace mlsa {

enum class CellType { GRU, LSTM };

const char* cell_name(CellType c);
CellType cell_from_name(const std::string& name);

struct Hyperparams {
  int emb_dim = 100;
  int layers = 2;
  int hidden = 40; // per direction
  double dropout_p = 0.2;
  int max_len = 200;
  CellType cell = CellType::GRU;
  int num_classes = 2;

  void validate() const;
};

/// Classifier output. Class order is [Negative, Positive]; an exact tie
/// resolves to Negative, mirroring the lexicon baseline's tie rule.
struct Prediction {
  double p_neg = 0.5;
  double p_pos = 0.5;
  Label label = Label::Negative;
};

/// Trainable artifact: all weight tensors plus the identities of the
/// vocabulary and frozen embedding matrix it was built against.
struct Model {
  Hyperparams hp;
  ParamSet<float> params;
  std::string vocab_sha256;
  std::string embedding_sha256;
};

/// Glorot-uniform weights (limit sqrt(6/(fan_in+fan_out))), zero biases,
/// deterministic in the seed.
Model init_model(const Hyperparams& hp, const EmbeddingMatrix& emb,
                 const Vocabulary& vocab, std::uint64_t seed);

/// Throws unless the model was built against exactly this vocabulary and
/// embedding projection.
void verify_compat(const Model& model, const Vocabulary& vocab,
                   const EmbeddingMatrix& emb);

/// Recorded forward pass over one batch.
template <typename T>
struct ForwardPass {
  Graph<T> graph;
  std::vector<typename Graph<T>::Id> param_ids; // aligned with ParamSet order
  typename Graph<T>::Id pooled = -1;            // pre-dropout pooled state
  typename Graph<T>::Id logits = -1;
};

/// Builds the full graph: embedding lookup, `layers` bidirectional
/// recurrent layers with dropout on each layer's per-timestep outputs,
/// final-state pooling, dropout, dense head. The time loop covers the
/// longest real sequence in the batch; masked steps leave state untouched,
/// which is exactly what running over the full padded length would do.
template <typename T>
void build_forward(ForwardPass<T>& fp, const Hyperparams& hp,
                   const ParamSet<T>& params, const Tensor<T>& emb,
                   const std::vector<EncodedSequence>& batch, bool train_mode,
                   Rng dropout_rng);

/// Mean cross-entropy over the batch; fills `grads` (fresh tensors, same
/// layout as params) when non-null. Dropout masks derive from dropout_rng,
/// so an identical rng reproduces the identical stochastic forward.
template <typename T>
T batch_loss(const Hyperparams& hp, const ParamSet<T>& params, const Tensor<T>& emb,
             const std::vector<EncodedSequence>& batch,
             const std::vector<int>& labels, bool train_mode, Rng dropout_rng,
             ParamSet<T>* grads);

/// Eval-mode (or fixed-rng train-mode) predictions for a batch.
std::vector<Prediction> predict(const Model& model, const EmbeddingMatrix& emb,
                                const std::vector<EncodedSequence>& batch,
                                bool train_mode = false, Rng rng = Rng(0));

/// 0 for Negative, 1 for Positive; Unlabeled is rejected.
int class_index(Label l);

// --- serialization ---------------------------------------------------------
// Layout: magic "MLSA", one version byte, u32-LE header length, UTF-8 JSON
// header (hyperparams, tensor directory with shapes and byte offsets,
// vocabulary and embedding hashes), then all tensors as little-endian
// IEEE-754 32-bit floats in directory order.

void save_model(const Model& model, const std::string& path);

/// Restores a model bit-exactly. When expected_cell is set, a file carrying
/// a different cell type is rejected.
Model load_model(const std::string& path,
                 std::optional<CellType> expected_cell = std::nullopt);

// --- template implementation ------------------------------------------------

namespace detail {

template <typename T>
struct CellParams {
  // Gate order: GRU z,r,h ; LSTM i,f,o,g.
  std::vector<typename Graph<T>::Id> W, U, b;
};

/// One recurrent step. Returns the new hidden state id (and updates the cell
/// state id in place for LSTM).
template <typename T>
typename Graph<T>::Id cell_step(Graph<T>& g, CellType cell, const CellParams<T>& p,
                                typename Graph<T>::Id x, typename Graph<T>::Id h,
                                typename Graph<T>::Id& c) {
  auto gate = [&](int k, typename Graph<T>::Id hin) {
    return g.add(g.add(g.matmul_nt(x, p.W[k]), g.matmul_nt(hin, p.U[k])), p.b[k]);
  };
  if (cell == CellType::GRU) {
    auto z = g.sigmoid_of(gate(0, h));
    auto r = g.sigmoid_of(gate(1, h));
    auto rh = g.mul(r, h);
    auto cand =
        g.tanh_of(g.add(g.add(g.matmul_nt(x, p.W[2]), g.matmul_nt(rh, p.U[2])), p.b[2]));
    // h_new = h + z * (cand - h)  ==  (1-z)*h + z*cand
    return g.add(h, g.mul(z, g.sub(cand, h)));
  }
  auto i = g.sigmoid_of(gate(0, h));
  auto f = g.sigmoid_of(gate(1, h));
  auto o = g.sigmoid_of(gate(2, h));
  auto cand = g.tanh_of(gate(3, h));
  c = g.add(g.mul(f, c), g.mul(i, cand));
  return g.mul(o, g.tanh_of(c));
}

inline std::vector<std::string> gate_names(CellType cell) {
  if (cell == CellType::GRU) return {"z", "r", "h"};
  return {"i", "f", "o", "g"};
}

} // namespace detail

template <typename T>
void build_forward(ForwardPass<T>& fp, const Hyperparams& hp,
                   const ParamSet<T>& params, const Tensor<T>& emb,
                   const std::vector<EncodedSequence>& batch, bool train_mode,
                   Rng dropout_rng) {
  using Id = typename Graph<T>::Id;
  if (batch.empty()) throw ValidationError("predict: empty batch");
  const std::size_t B = batch.size();
  std::size_t L = 0;
  for (const auto& seq : batch) {
    if (seq.true_length < 1)
      throw ValidationError("predict: sequence with true_length 0");
    L = std::max(L, static_cast<std::size_t>(seq.true_length));
  }

  Graph<T>& g = fp.graph;

  fp.param_ids.clear();
  for (const auto& t : params.tensors) fp.param_ids.push_back(g.param(t));

  auto pid = [&](const std::string& name) {
    int i = params.index_of(name);
    if (i < 0) throw Error("model parameter missing: " + name);
    return fp.param_ids[static_cast<std::size_t>(i)];
  };
  const auto gates = detail::gate_names(hp.cell);
  auto cell_of = [&](int layer, const char* dir) {
    detail::CellParams<T> cp;
    std::string prefix = "l" + std::to_string(layer) + "." + dir + ".";
    for (const auto& gn : gates) {
      cp.W.push_back(pid(prefix + "W_" + gn));
      cp.U.push_back(pid(prefix + "U_" + gn));
      cp.b.push_back(pid(prefix + "b_" + gn));
    }
    return cp;
  };

  // Per-timestep token ids and masks for the whole batch.
  std::vector<std::vector<int>> ids_at(L, std::vector<int>(B, Vocabulary::kPad));
  std::vector<std::vector<std::uint8_t>> mask_at(L, std::vector<std::uint8_t>(B, 0));
  for (std::size_t i = 0; i < B; ++i) {
    const auto& seq = batch[i];
    for (std::size_t t = 0; t < L && t < seq.indices.size(); ++t) {
      ids_at[t][i] = seq.indices[t];
      mask_at[t][i] = seq.mask[t];
    }
  }

  std::vector<Id> inputs(L);
  for (std::size_t t = 0; t < L; ++t) inputs[t] = g.embedding_lookup(emb, ids_at[t]);

  const std::size_t H = static_cast<std::size_t>(hp.hidden);
  Id pooled = -1;
  for (int layer = 0; layer < hp.layers; ++layer) {
    auto fwd = cell_of(layer, "fwd");
    auto bwd = cell_of(layer, "bwd");

    std::vector<Id> fwd_h(L), bwd_h(L);
    Id h = g.constant(Tensor<T>::zeros({B, H}));
    Id c = g.constant(Tensor<T>::zeros({B, H}));
    for (std::size_t t = 0; t < L; ++t) {
      Id cin = c;
      Id hn = detail::cell_step(g, hp.cell, fwd, inputs[t], h, cin);
      h = g.masked_select(mask_at[t], hn, h);
      if (hp.cell == CellType::LSTM) c = g.masked_select(mask_at[t], cin, c);
      fwd_h[t] = h;
    }
    h = g.constant(Tensor<T>::zeros({B, H}));
    c = g.constant(Tensor<T>::zeros({B, H}));
    for (std::size_t t = L; t-- > 0;) {
      Id cin = c;
      Id hn = detail::cell_step(g, hp.cell, bwd, inputs[t], h, cin);
      h = g.masked_select(mask_at[t], hn, h);
      if (hp.cell == CellType::LSTM) c = g.masked_select(mask_at[t], cin, c);
      bwd_h[t] = h;
    }

    if (layer + 1 < hp.layers) {
      for (std::size_t t = 0; t < L; ++t)
        inputs[t] = g.dropout(g.concat_cols(fwd_h[t], bwd_h[t]), hp.dropout_p,
                              train_mode, dropout_rng);
    } else {
      // Forward state at the last real token, backward state at the first.
      pooled = g.concat_cols(fwd_h[L - 1], bwd_h[0]);
    }
  }

  fp.pooled = pooled;
  Id dropped = g.dropout(pooled, hp.dropout_p, train_mode, dropout_rng);
  fp.logits = g.add(g.matmul_nt(dropped, pid("out.W")), pid("out.b"));
}

template <typename T>
T batch_loss(const Hyperparams& hp, const ParamSet<T>& params, const Tensor<T>& emb,
             const std::vector<EncodedSequence>& batch,
             const std::vector<int>& labels, bool train_mode, Rng dropout_rng,
             ParamSet<T>* grads) {
  ForwardPass<T> fp;
  build_forward(fp, hp, params, emb, batch, train_mode, dropout_rng);
  auto loss = fp.graph.softmax_cross_entropy(fp.logits, labels);
  T value = fp.graph.val(loss).data[0];
  if (grads != nullptr) {
    fp.graph.backward(loss);
    ParamSet<T> out;
    out.names = params.names;
    for (std::size_t p = 0; p < params.size(); ++p)
      out.tensors.push_back(fp.graph.grad(fp.param_ids[p]));
    *grads = std::move(out);
  }
  return value;
}

} // namespace mlsa

#endif
