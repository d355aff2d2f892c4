#ifndef MLSA_TRAINING_HPP
#define MLSA_TRAINING_HPP

#include <string>
#include <utility>
#include <vector>

#include "mlsa/corpus.hpp"
#include "mlsa/embeddings.hpp"
#include "mlsa/model.hpp"
#include "mlsa/textproc.hpp"

namespace mlsa {

struct TrainConfig {
  int batch_size = 32;
  int epochs_pretrain = 10;
  int epochs_finetune = 6;
  double lr = 1e-3;
  std::uint64_t seed = 1;
  bool shuffle = true;
  int patience = 3;          // early-stop patience on validation accuracy
  double val_fraction = 0.1; // held-out split, deterministic by seed
  bool class_weighting = false; // reserved; rejected if set
  std::string checkpoint_prefix; // when nonempty, per-epoch model files

  void validate() const;
};

struct EpochStats {
  double train_loss = 0.0;
  double val_accuracy = 0.0;
};

struct TrainLog {
  std::vector<EpochStats> epochs;
  int chosen_epoch = 0; // 1-based epoch whose weights were kept
  long total_steps = 0; // optimizer steps taken
};

std::string trainlog_to_json(const TrainLog& log);

/// Stage 1: trains a fresh Glorot-initialized model on the general corpus
/// with shuffled mini-batch Adam, early stopping on a held-out split.
/// Returns the weights of the best validation epoch.
std::pair<Model, TrainLog> pretrain(const LabeledDataset& general,
                                    const Hyperparams& hp, const TrainConfig& cfg,
                                    const Vocabulary& vocab,
                                    const EmbeddingMatrix& emb);

/// Stage 2: continues training every weight of `start` (classifier head
/// included) on the domain corpus, with a fresh optimizer state.
std::pair<Model, TrainLog> finetune(const Model& start, const LabeledDataset& domain,
                                    const TrainConfig& cfg, const Vocabulary& vocab,
                                    const EmbeddingMatrix& emb);

/// Eval-mode predictions for every review, input order preserved.
std::vector<std::pair<std::string, Prediction>> score_dataset(
    const Model& model, const LabeledDataset& ds, const Vocabulary& vocab,
    const EmbeddingMatrix& emb);

/// Fraction of correct eval-mode predictions against the dataset's labels.
double dataset_accuracy(const Model& model, const LabeledDataset& ds,
                        const Vocabulary& vocab, const EmbeddingMatrix& emb);

} // namespace mlsa

#endif
