#include "mlsa/embeddings.hpp"

#include <unicode/unistr.h>

#include <charconv>
#include <cmath>
#include <cstring>
#include <fstream>

#include "mlsa/errors.hpp"
#include "mlsa/sha256.hpp"

namespace mlsa {

namespace {

std::string lower_utf8(const std::string& s) {
  icu::UnicodeString us = icu::UnicodeString::fromUTF8(s);
  us.toLower();
  std::string out;
  us.toUTF8String(out);
  return out;
}

} // namespace

EmbeddingTable load_glove(const std::string& path, int dim) {
  if (dim < 1) throw ValidationError("load_glove: dim must be >= 1");
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot open embeddings file: " + path);

  EmbeddingTable table;
  table.dim = dim;
  std::string line;
  size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;

    size_t sp = line.find(' ');
    if (sp == std::string::npos || sp == 0)
      throw ParseError(path + ":" + std::to_string(lineno) +
                       ": expected `word v1 ... v" + std::to_string(dim) + "`");
    std::string word = lower_utf8(line.substr(0, sp));

    std::vector<float> vec;
    vec.reserve(static_cast<size_t>(dim));
    const char* p = line.c_str() + sp;
    const char* end = line.c_str() + line.size();
    while (p < end) {
      while (p < end && *p == ' ') ++p;
      if (p == end) break;
      float v = 0.f;
      auto [next, ec] = std::from_chars(p, end, v);
      if (ec != std::errc())
        throw ParseError(path + ":" + std::to_string(lineno) +
                         ": bad numeric component");
      if (!std::isfinite(v))
        throw ParseError(path + ":" + std::to_string(lineno) +
                         ": non-finite embedding value");
      vec.push_back(v);
      p = next;
    }
    if (vec.size() != static_cast<size_t>(dim))
      throw ParseError(path + ":" + std::to_string(lineno) + ": expected " +
                       std::to_string(dim) + " values, found " +
                       std::to_string(vec.size()));

    table.vectors.emplace(std::move(word), std::move(vec)); // first wins
  }
  return table;
}

std::string EmbeddingMatrix::sha256() const {
  std::string bytes;
  bytes.reserve(16 + matrix.data.size() * sizeof(float));
  for (std::size_t d : matrix.shape) {
    std::uint64_t v = d;
    bytes.append(reinterpret_cast<const char*>(&v), sizeof(v));
  }
  bytes.append(reinterpret_cast<const char*>(matrix.data.data()),
               matrix.data.size() * sizeof(float));
  return sha256_hex(bytes);
}

EmbeddingMatrix project(const Vocabulary& vocab, const EmbeddingTable& table) {
  const int V = vocab.size();
  const size_t dim = static_cast<size_t>(table.dim);
  EmbeddingMatrix em;
  em.matrix = Tensor<float>::zeros({static_cast<size_t>(V), dim});

  size_t found = 0;
  for (int i = 2; i < V; ++i) {
    auto it = table.vectors.find(vocab.token_at(i));
    if (it == table.vectors.end()) continue;
    ++found;
    for (size_t j = 0; j < dim; ++j)
      em.matrix.at(static_cast<size_t>(i), j) = it->second[j];
  }
  em.coverage = V > 2 ? static_cast<double>(found) / static_cast<double>(V - 2) : 0.0;
  return em;
}

} // namespace mlsa
