#ifndef MLSA_BASELINES_HPP
#define MLSA_BASELINES_HPP

#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "mlsa/corpus.hpp"
#include "mlsa/textproc.hpp"

namespace mlsa {

/// Word-level sentiment scores aggregated from a SentiWordNet-format file:
/// per word, the arithmetic mean of (PosScore, NegScore) over every synset
/// term that names it, across POS tags and senses.
struct Lexicon {
  struct Scores {
    double pos = 0.0;
    double neg = 0.0;
  };
  std::unordered_map<std::string, Scores> words;
  std::string source_sha256;

  bool empty() const { return words.empty(); }
  std::size_t size() const { return words.size(); }
};

/// Accuracy of always predicting the most frequent class, as a percentage
/// with two decimals (half-up). Requires a fully labeled dataset.
double majority_accuracy(const LabeledDataset& ds);

/// Parses SentiWordNet 3.0 TSV (POS, ID, PosScore, NegScore, SynsetTerms,
/// Gloss; '#' comments). Terms look like `word#sense`; multiword terms
/// (containing '_') are skipped. Scores outside [0,1] are rejected.
Lexicon parse_sentiwordnet(const std::string& path);

/// Sum-rule label: Positive iff the summed positive scores of the tokens
/// found in the lexicon strictly exceed the summed negative scores;
/// ties (including all-unknown tokens) are Negative.
Label lexicon_label(const std::vector<Token>& tokens, const Lexicon& lex);

/// Applies the sum rule to every review. Rejects an empty lexicon.
std::vector<std::pair<std::string, Label>> lexicon_score_dataset(
    const LabeledDataset& ds, const Lexicon& lex);

} // namespace mlsa

#endif
