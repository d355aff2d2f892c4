#include "mlsa/training.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>

#include "mlsa/adam.hpp"

namespace mlsa {

void TrainConfig::validate() const {
  if (batch_size < 1) throw ValidationError("train config: batch_size must be >= 1");
  if (epochs_pretrain < 1 || epochs_finetune < 1)
    throw ValidationError("train config: epochs must be >= 1");
  if (lr < 0.0) throw ValidationError("train config: lr must be >= 0");
  if (patience < 1) throw ValidationError("train config: patience must be >= 1");
  if (!(val_fraction > 0.0 && val_fraction < 0.5))
    throw ValidationError("train config: validation fraction must be in (0, 0.5)");
  if (class_weighting)
    throw ValidationError("train config: class weighting is reserved and not implemented");
}

std::string trainlog_to_json(const TrainLog& log) {
  nlohmann::ordered_json j;
  j["schema"] = 1;
  j["chosen_epoch"] = log.chosen_epoch;
  j["total_steps"] = log.total_steps;
  j["epochs"] = nlohmann::ordered_json::array();
  for (const EpochStats& e : log.epochs) {
    nlohmann::ordered_json je;
    je["train_loss"] = e.train_loss;
    je["val_accuracy"] = e.val_accuracy;
    j["epochs"].push_back(je);
  }
  return j.dump(2);
}

namespace {

struct Encoded {
  std::vector<EncodedSequence> seqs;
  std::vector<int> labels; // class indices
  std::vector<std::string> ids;
};

Encoded encode_dataset(const LabeledDataset& ds, const Vocabulary& vocab, int max_len,
                       bool need_labels) {
  Encoded enc;
  enc.seqs.reserve(ds.size());
  for (const Review& r : ds.reviews) {
    enc.seqs.push_back(encode(tokenize(r.text), vocab, max_len));
    enc.ids.push_back(r.id);
    if (need_labels) enc.labels.push_back(class_index(r.label));
  }
  return enc;
}

void shuffle_indices(std::vector<std::size_t>& idx, Rng rng) {
  for (std::size_t i = idx.size(); i > 1; --i)
    std::swap(idx[i - 1], idx[static_cast<std::size_t>(rng.next_below(i))]);
}

double eval_accuracy(const Hyperparams& hp, const ParamSet<float>& params,
                     const Tensor<float>& emb, const Encoded& enc,
                     const std::vector<std::size_t>& idx, int batch_size) {
  if (idx.empty()) return 0.0;
  std::size_t correct = 0;
  Rng none(0);
  for (std::size_t pos = 0; pos < idx.size(); pos += static_cast<std::size_t>(batch_size)) {
    std::size_t n = std::min(idx.size() - pos, static_cast<std::size_t>(batch_size));
    std::vector<EncodedSequence> batch;
    batch.reserve(n);
    for (std::size_t i = 0; i < n; ++i) batch.push_back(enc.seqs[idx[pos + i]]);
    ForwardPass<float> fp;
    build_forward<float>(fp, hp, params, emb, batch, false, none);
    const Tensor<float>& logits = fp.graph.val(fp.logits);
    Tensor<float> probs = softmax_rows(logits);
    for (std::size_t i = 0; i < n; ++i) {
      int pred = probs.at(i, 1) > 0.5f ? 1 : 0;
      if (pred == enc.labels[idx[pos + i]]) ++correct;
    }
  }
  return static_cast<double>(correct) / static_cast<double>(idx.size());
}

/// Shared mini-batch loop for both stages.
std::pair<Model, TrainLog> train_loop(Model model, const LabeledDataset& data,
                                      const TrainConfig& cfg, int epochs,
                                      const Vocabulary& vocab,
                                      const EmbeddingMatrix& emb) {
  cfg.validate();
  LabelDistribution dist = label_distribution(data);
  if (dist.unlabeled > 0)
    throw ValidationError("training data contains unlabeled reviews");
  if (dist.positives == 0 || dist.negatives == 0)
    throw ValidationError("training data must contain both classes (got " +
                          std::to_string(dist.positives) + " pos / " +
                          std::to_string(dist.negatives) + " neg)");
  verify_compat(model, vocab, emb);

  Encoded enc = encode_dataset(data, vocab, model.hp.max_len, true);
  const std::size_t N = enc.seqs.size();

  Rng root(cfg.seed);
  std::vector<std::size_t> order(N);
  for (std::size_t i = 0; i < N; ++i) order[i] = i;
  shuffle_indices(order, root.fork("valsplit"));
  std::size_t val_n = std::max<std::size_t>(
      1, static_cast<std::size_t>(std::floor(cfg.val_fraction * static_cast<double>(N))));
  if (val_n >= N)
    throw ValidationError("dataset too small for the validation split");
  std::vector<std::size_t> val_idx(order.begin(), order.begin() + static_cast<long>(val_n));
  std::vector<std::size_t> train_idx(order.begin() + static_cast<long>(val_n), order.end());

  AdamState<float> opt = AdamState<float>::init(model.params, static_cast<float>(cfg.lr));

  TrainLog log;
  ParamSet<float> best = model.params;
  double best_acc = -1.0;
  int best_epoch = 0;
  int bad_streak = 0;

  for (int epoch = 1; epoch <= epochs; ++epoch) {
    std::vector<std::size_t> idx = train_idx;
    if (cfg.shuffle) shuffle_indices(idx, root.fork("shuffle", static_cast<std::uint64_t>(epoch)));

    double loss_sum = 0.0;
    std::size_t batch_no = 0;
    for (std::size_t pos = 0; pos < idx.size();
         pos += static_cast<std::size_t>(cfg.batch_size), ++batch_no) {
      std::size_t n = std::min(idx.size() - pos, static_cast<std::size_t>(cfg.batch_size));
      std::vector<EncodedSequence> batch;
      std::vector<int> labels;
      batch.reserve(n);
      labels.reserve(n);
      for (std::size_t i = 0; i < n; ++i) {
        batch.push_back(enc.seqs[idx[pos + i]]);
        labels.push_back(enc.labels[idx[pos + i]]);
      }
      ParamSet<float> grads;
      float loss = batch_loss<float>(model.hp, model.params, emb.matrix, batch, labels,
                                     true,
                                     root.fork("dropout", static_cast<std::uint64_t>(epoch),
                                               batch_no),
                                     &grads);
      adam_step(model.params, grads, opt);
      ++log.total_steps;
      loss_sum += static_cast<double>(loss) * static_cast<double>(n);
    }

    EpochStats stats;
    stats.train_loss = loss_sum / static_cast<double>(idx.size());
    stats.val_accuracy =
        eval_accuracy(model.hp, model.params, emb.matrix, enc, val_idx, cfg.batch_size);
    log.epochs.push_back(stats);

    if (!cfg.checkpoint_prefix.empty()) {
      Model snap = model;
      save_model(snap, cfg.checkpoint_prefix + ".epoch" + std::to_string(epoch) + ".bin");
    }

    if (stats.val_accuracy > best_acc) {
      best_acc = stats.val_accuracy;
      best = model.params;
      best_epoch = epoch;
      bad_streak = 0;
    } else {
      ++bad_streak;
      if (bad_streak >= cfg.patience) break;
    }
  }

  model.params = std::move(best);
  log.chosen_epoch = best_epoch;
  return {std::move(model), std::move(log)};
}

} // namespace

std::pair<Model, TrainLog> pretrain(const LabeledDataset& general,
                                    const Hyperparams& hp, const TrainConfig& cfg,
                                    const Vocabulary& vocab,
                                    const EmbeddingMatrix& emb) {
  Model fresh = init_model(hp, emb, vocab, cfg.seed);
  return train_loop(std::move(fresh), general, cfg, cfg.epochs_pretrain, vocab, emb);
}

std::pair<Model, TrainLog> finetune(const Model& start, const LabeledDataset& domain,
                                    const TrainConfig& cfg, const Vocabulary& vocab,
                                    const EmbeddingMatrix& emb) {
  return train_loop(start, domain, cfg, cfg.epochs_finetune, vocab, emb);
}

std::vector<std::pair<std::string, Prediction>> score_dataset(
    const Model& model, const LabeledDataset& ds, const Vocabulary& vocab,
    const EmbeddingMatrix& emb) {
  if (ds.size() == 0) throw ValidationError("score: dataset is empty");
  verify_compat(model, vocab, emb);
  Encoded enc = encode_dataset(ds, vocab, model.hp.max_len, false);

  std::vector<std::pair<std::string, Prediction>> out;
  out.reserve(enc.seqs.size());
  const std::size_t chunk = 64;
  for (std::size_t pos = 0; pos < enc.seqs.size(); pos += chunk) {
    std::size_t n = std::min(enc.seqs.size() - pos, chunk);
    std::vector<EncodedSequence> batch(enc.seqs.begin() + static_cast<long>(pos),
                                       enc.seqs.begin() + static_cast<long>(pos + n));
    std::vector<Prediction> preds = predict(model, emb, batch);
    for (std::size_t i = 0; i < n; ++i)
      out.emplace_back(enc.ids[pos + i], preds[i]);
  }
  return out;
}

double dataset_accuracy(const Model& model, const LabeledDataset& ds,
                        const Vocabulary& vocab, const EmbeddingMatrix& emb) {
  auto preds = score_dataset(model, ds, vocab, emb);
  std::size_t correct = 0;
  for (std::size_t i = 0; i < preds.size(); ++i)
    if (preds[i].second.label == ds.reviews[i].label) ++correct;
  return static_cast<double>(correct) / static_cast<double>(preds.size());
}

} // namespace mlsa
