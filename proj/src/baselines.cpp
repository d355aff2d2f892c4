#include "mlsa/baselines.hpp"

#include <unicode/unistr.h>

#include <charconv>
#include <fstream>

#include "mlsa/errors.hpp"
#include "mlsa/round.hpp"
#include "mlsa/sha256.hpp"

namespace mlsa {

double majority_accuracy(const LabeledDataset& ds) {
  if (ds.size() == 0) throw ValidationError("majority baseline: dataset is empty");
  LabelDistribution dist = label_distribution(ds);
  if (dist.unlabeled > 0)
    throw ValidationError("majority baseline: dataset contains unlabeled reviews");
  double frac = static_cast<double>(std::max(dist.positives, dist.negatives)) /
                static_cast<double>(ds.size());
  return round_pct(100.0 * frac);
}

namespace {

std::vector<std::string> split_tabs(const std::string& line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    std::size_t tab = line.find('\t', start);
    if (tab == std::string::npos) {
      out.push_back(line.substr(start));
      break;
    }
    out.push_back(line.substr(start, tab - start));
    start = tab + 1;
  }
  return out;
}

double parse_score(const std::string& s, const std::string& path, std::size_t lineno,
                   const char* which) {
  double v = 0.0;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || p != s.data() + s.size())
    throw ParseError(path + ":" + std::to_string(lineno) + ": bad " + which +
                     " '" + s + "'");
  if (!(v >= 0.0 && v <= 1.0))
    throw ParseError(path + ":" + std::to_string(lineno) + ": " + which + " " + s +
                     " outside [0,1]");
  return v;
}

std::string lower_utf8(const std::string& s) {
  icu::UnicodeString us = icu::UnicodeString::fromUTF8(s);
  us.toLower();
  std::string out;
  us.toUTF8String(out);
  return out;
}

} // namespace

Lexicon parse_sentiwordnet(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot open lexicon file: " + path);

  struct Acc {
    double pos = 0.0, neg = 0.0;
    std::size_t n = 0;
  };
  std::unordered_map<std::string, Acc> acc;

  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;

    std::vector<std::string> fields = split_tabs(line);
    if (fields.size() < 5)
      throw ParseError(path + ":" + std::to_string(lineno) +
                       ": expected 6 tab-separated SentiWordNet fields, found " +
                       std::to_string(fields.size()));
    double pos = parse_score(fields[2], path, lineno, "PosScore");
    double neg = parse_score(fields[3], path, lineno, "NegScore");

    // SynsetTerms: space-separated `word#sense` entries.
    std::size_t start = 0;
    const std::string& terms = fields[4];
    while (start < terms.size()) {
      std::size_t sp = terms.find(' ', start);
      std::string term = terms.substr(start, sp == std::string::npos ? sp : sp - start);
      start = sp == std::string::npos ? terms.size() : sp + 1;
      if (term.empty()) continue;
      std::size_t hash = term.rfind('#');
      std::string word = hash == std::string::npos ? term : term.substr(0, hash);
      if (word.empty() || word.find('_') != std::string::npos) continue;
      Acc& a = acc[lower_utf8(word)];
      a.pos += pos;
      a.neg += neg;
      a.n += 1;
    }
  }

  Lexicon lex;
  lex.source_sha256 = sha256_file_hex(path);
  for (auto& [word, a] : acc)
    lex.words.emplace(word, Lexicon::Scores{a.pos / static_cast<double>(a.n),
                                            a.neg / static_cast<double>(a.n)});
  return lex;
}

Label lexicon_label(const std::vector<Token>& tokens, const Lexicon& lex) {
  double pos_sum = 0.0, neg_sum = 0.0;
  for (const Token& t : tokens) {
    auto it = lex.words.find(t);
    if (it == lex.words.end()) continue;
    pos_sum += it->second.pos;
    neg_sum += it->second.neg;
  }
  return pos_sum > neg_sum ? Label::Positive : Label::Negative;
}

std::vector<std::pair<std::string, Label>> lexicon_score_dataset(
    const LabeledDataset& ds, const Lexicon& lex) {
  if (lex.empty()) throw ValidationError("empty lexicon");
  std::vector<std::pair<std::string, Label>> out;
  out.reserve(ds.size());
  for (const Review& r : ds.reviews)
    out.emplace_back(r.id, lexicon_label(tokenize(r.text), lex));
  return out;
}

} // namespace mlsa
