#ifndef MLSA_TEXTPROC_HPP
#define MLSA_TEXTPROC_HPP

#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "mlsa/corpus.hpp"

namespace mlsa {

/// Lowercase NFKC-normalized token: a maximal run of Unicode letters/digits,
/// optionally carrying single internal apostrophes.
using Token = std::string;

/// NFKC-normalize, lowercase, and split into tokens. Punctuation is
/// discarded; an apostrophe survives only between two letter/digit
/// characters ("don't" stays one token, "'quoted'" loses its quotes).
std::vector<Token> tokenize(std::string_view text);

/// True when every codepoint of the token is a Unicode letter.
bool is_pure_alpha(const Token& t);

class Vocabulary {
public:
  static constexpr int kPad = 0;
  static constexpr int kUnk = 1;

  Vocabulary() = default;

  /// Token for a given index; indices 0/1 are the reserved "<pad>"/"<unk>".
  const std::string& token_at(int index) const;
  int size() const { return static_cast<int>(tokens_.size()); }
  int min_count() const { return min_count_; }

  /// Index of a token, or kUnk when absent.
  int lookup(const Token& t) const {
    auto it = index_.find(t);
    return it == index_.end() ? kUnk : it->second;
  }
  bool contains(const Token& t) const { return index_.count(t) != 0; }

  /// Hash over the ordered token list; identifies the mapping.
  std::string sha256() const;

  void save(const std::string& path) const;
  static Vocabulary load(const std::string& path, int min_count = 1);

  friend Vocabulary build_vocab(const std::vector<const LabeledDataset*>& datasets,
                                int min_count);

  /// Tokens in index order, reserved entries included.
  const std::vector<std::string>& tokens() const { return tokens_; }

private:
  std::unordered_map<std::string, int> index_;
  std::vector<std::string> tokens_;
  int min_count_ = 1;
};

/// Builds the vocabulary of all tokens with corpus frequency >= min_count.
/// Indices are dense, assigned by descending frequency with lexicographic
/// tie-break, after the reserved PAD=0 and UNK=1 slots.
Vocabulary build_vocab(const std::vector<const LabeledDataset*>& datasets,
                       int min_count);

struct EncodedSequence {
  std::vector<int> indices;      // length max_len, PAD-filled past true_length
  std::vector<std::uint8_t> mask; // mask[i] != 0  iff  i < true_length
  int true_length = 0;
};

/// Maps tokens to indices (unknown -> UNK), keeps the first max_len tokens,
/// pads the rest. Throws on an empty token list.
EncodedSequence encode(const std::vector<Token>& tokens, const Vocabulary& vocab,
                       int max_len);

/// Reference lexicon for the English-membership test.
struct WordList {
  std::unordered_set<std::string> words;

  bool contains(const std::string& w) const { return words.count(w) != 0; }

  /// One lowercase word per line; '#'-prefixed lines are comments.
  static WordList from_file(const std::string& path);
  /// Membership test backed by the embedding/vocabulary token set.
  static WordList from_tokens(const std::vector<std::string>& tokens);
};

/// True iff at least one purely-alphabetic token is absent from the word
/// list. Numeric and mixed tokens are ignored.
bool contains_non_english(const std::vector<Token>& tokens, const WordList& wl);

} // namespace mlsa

#endif
