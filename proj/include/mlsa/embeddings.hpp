#ifndef MLSA_EMBEDDINGS_HPP
#define MLSA_EMBEDDINGS_HPP

#include <string>
#include <unordered_map>
#include <vector>

#include "mlsa/tensor.hpp"
#include "mlsa/textproc.hpp"

namespace mlsa {

struct EmbeddingTable {
  std::unordered_map<std::string, std::vector<float>> vectors;
  int dim = 0;
};

/// Parses GloVe plain text: `word v1 ... v_dim`, single spaces, no header.
/// Words are lowercased; on duplicates the first occurrence wins.
EmbeddingTable load_glove(const std::string& path, int dim);

/// Vocabulary-aligned V x dim matrix. Rows 0 (PAD) and 1 (UNK) are zero;
/// rows for tokens missing from the table are zero. Frozen during training.
struct EmbeddingMatrix {
  Tensor<float> matrix;
  double coverage = 0.0; // found / (V - 2)

  /// Content hash over shape and row data; identifies the projection.
  std::string sha256() const;
};

EmbeddingMatrix project(const Vocabulary& vocab, const EmbeddingTable& table);

} // namespace mlsa

#endif
