#include "mlsa/textproc.hpp"

#include <unicode/normalizer2.h>
#include <unicode/uchar.h>
#include <unicode/unistr.h>

#include <algorithm>
#include <fstream>
#include <map>
#include <sstream>

#include "mlsa/errors.hpp"
#include "mlsa/sha256.hpp"

namespace mlsa {

namespace {

const icu::Normalizer2& nfkc() {
  UErrorCode ec = U_ZERO_ERROR;
  const icu::Normalizer2* n = icu::Normalizer2::getNFKCInstance(ec);
  if (U_FAILURE(ec) || n == nullptr)
    throw Error("ICU NFKC normalizer unavailable");
  return *n;
}

bool is_word_char(UChar32 c) { return u_isalpha(c) || u_isdigit(c); }

} // namespace

std::vector<Token> tokenize(std::string_view text) {
  if (text.empty()) return {};

  UErrorCode ec = U_ZERO_ERROR;
  icu::UnicodeString us = icu::UnicodeString::fromUTF8(
      icu::StringPiece(text.data(), static_cast<int32_t>(text.size())));
  icu::UnicodeString norm = nfkc().normalize(us, ec);
  if (U_FAILURE(ec)) throw Error("Unicode normalization failed");
  norm.toLower();

  // Collect codepoints once so the apostrophe rule can look ahead.
  std::vector<UChar32> cps;
  cps.reserve(static_cast<size_t>(norm.length()));
  for (int32_t i = 0; i < norm.length();) {
    UChar32 c = norm.char32At(i);
    cps.push_back(c);
    i += U16_LENGTH(c);
  }

  std::vector<Token> out;
  icu::UnicodeString cur;
  auto flush = [&] {
    if (cur.isEmpty()) return;
    std::string t;
    cur.toUTF8String(t);
    out.push_back(std::move(t));
    cur.remove();
  };

  for (size_t i = 0; i < cps.size(); ++i) {
    UChar32 c = cps[i];
    if (is_word_char(c)) {
      cur.append(c);
    } else if (c == U'\'' && !cur.isEmpty() && i + 1 < cps.size() &&
               is_word_char(cps[i + 1])) {
      cur.append(c); // internal apostrophe
    } else {
      flush();
    }
  }
  flush();
  return out;
}

bool is_pure_alpha(const Token& t) {
  if (t.empty()) return false;
  icu::UnicodeString us = icu::UnicodeString::fromUTF8(t);
  for (int32_t i = 0; i < us.length();) {
    UChar32 c = us.char32At(i);
    if (!u_isalpha(c)) return false;
    i += U16_LENGTH(c);
  }
  return true;
}

const std::string& Vocabulary::token_at(int index) const {
  if (index < 0 || index >= size())
    throw ValidationError("vocabulary index out of range: " + std::to_string(index));
  return tokens_[static_cast<size_t>(index)];
}

std::string Vocabulary::sha256() const {
  std::string joined;
  for (const auto& t : tokens_) {
    joined += t;
    joined += '\n';
  }
  return sha256_hex(joined);
}

void Vocabulary::save(const std::string& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ValidationError("cannot write vocabulary file: " + path);
  // Reserved entries are implicit; persist real tokens in index order.
  for (size_t i = 2; i < tokens_.size(); ++i) out << tokens_[i] << "\n";
  if (!out) throw Error("write failed: " + path);
}

Vocabulary Vocabulary::load(const std::string& path, int min_count) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot open vocabulary file: " + path);
  Vocabulary v;
  v.min_count_ = min_count;
  v.tokens_ = {"<pad>", "<unk>"};
  std::string line;
  size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (!v.index_.emplace(line, static_cast<int>(v.tokens_.size())).second)
      throw ParseError(path + ":" + std::to_string(lineno) + ": duplicate token '" +
                       line + "'");
    v.tokens_.push_back(line);
  }
  if (v.size() <= 2) throw ValidationError("vocabulary file has no tokens: " + path);
  return v;
}

Vocabulary build_vocab(const std::vector<const LabeledDataset*>& datasets,
                       int min_count) {
  if (min_count < 1) throw ValidationError("build_vocab: min_count must be >= 1");

  std::unordered_map<std::string, long long> freq;
  for (const LabeledDataset* ds : datasets) {
    if (ds == nullptr) throw ValidationError("build_vocab: null dataset");
    for (const Review& r : ds->reviews)
      for (Token& t : tokenize(r.text)) ++freq[std::move(t)];
  }

  std::vector<std::pair<std::string, long long>> kept;
  kept.reserve(freq.size());
  for (auto& [tok, n] : freq)
    if (n >= min_count) kept.emplace_back(tok, n);
  if (kept.empty())
    throw ValidationError("build_vocab: no token reaches min_count " +
                          std::to_string(min_count));

  std::sort(kept.begin(), kept.end(), [](const auto& a, const auto& b) {
    if (a.second != b.second) return a.second > b.second;
    return a.first < b.first;
  });

  Vocabulary v;
  v.min_count_ = min_count;
  v.tokens_ = {"<pad>", "<unk>"};
  for (auto& [tok, n] : kept) {
    v.index_.emplace(tok, static_cast<int>(v.tokens_.size()));
    v.tokens_.push_back(tok);
  }
  return v;
}

EncodedSequence encode(const std::vector<Token>& tokens, const Vocabulary& vocab,
                       int max_len) {
  if (max_len < 1) throw ValidationError("encode: max_len must be >= 1");
  if (tokens.empty()) throw ValidationError("cannot encode empty review");

  EncodedSequence seq;
  seq.true_length = static_cast<int>(std::min<size_t>(tokens.size(),
                                                      static_cast<size_t>(max_len)));
  seq.indices.assign(static_cast<size_t>(max_len), Vocabulary::kPad);
  seq.mask.assign(static_cast<size_t>(max_len), 0);
  for (int i = 0; i < seq.true_length; ++i) {
    seq.indices[static_cast<size_t>(i)] = vocab.lookup(tokens[static_cast<size_t>(i)]);
    seq.mask[static_cast<size_t>(i)] = 1;
  }
  return seq;
}

WordList WordList::from_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot open wordlist file: " + path);
  WordList wl;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    wl.words.insert(line);
  }
  if (wl.words.empty()) throw ValidationError("wordlist is empty: " + path);
  return wl;
}

WordList WordList::from_tokens(const std::vector<std::string>& tokens) {
  WordList wl;
  for (const auto& t : tokens)
    if (t != "<pad>" && t != "<unk>") wl.words.insert(t);
  if (wl.words.empty()) throw ValidationError("wordlist is empty");
  return wl;
}

bool contains_non_english(const std::vector<Token>& tokens, const WordList& wl) {
  for (const Token& t : tokens)
    if (is_pure_alpha(t) && !wl.contains(t)) return true;
  return false;
}

} // namespace mlsa
