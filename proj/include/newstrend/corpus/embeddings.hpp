#pragma once

#include <cstdint>
#include <fstream>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "newstrend/corpus/text.hpp"
#include "newstrend/corpus/types.hpp"
#include "newstrend/error.hpp"
#include "newstrend/random.hpp"

namespace newstrend::corpus {

// Fixed word vectors indexed like the vocabulary.
class WordEmbeddings {
 public:
  WordEmbeddings() = default;
  WordEmbeddings(std::size_t dim, std::size_t words) : dim_(dim), flat_(dim * words, 0.0) {
    if (dim == 0) throw ConfigError("embedding dim must be >= 1");
  }

  std::size_t dim() const { return dim_; }
  std::size_t words() const { return dim_ == 0 ? 0 : flat_.size() / dim_; }
  std::span<const double> vector(std::size_t word) const { return {flat_.data() + word * dim_, dim_}; }
  std::span<double> vector(std::size_t word) { return {flat_.data() + word * dim_, dim_}; }

 private:
  std::size_t dim_ = 0;
  std::vector<double> flat_;
};

// Uniform(-0.5/dim, 0.5/dim) entries from a counter-based stream keyed on
// (seed, word), so the vector of a word does not depend on vocabulary order.
inline void fallback_vector(std::string_view word, std::uint64_t seed, std::span<double> out) {
  const std::uint64_t key = mix64(seed ^ mix64(fnv1a(word)));
  const double half = 0.5 / static_cast<double>(out.size());
  for (std::size_t j = 0; j < out.size(); ++j) {
    const std::uint64_t bits = mix64(key + 0x632be59bd9b4e019ULL * (j + 1));
    const double u = static_cast<double>(bits >> 11) * 0x1.0p-53;
    out[j] = (2.0 * u - 1.0) * half;
  }
}

inline WordEmbeddings deterministic_embeddings(const Vocabulary& vocab, std::size_t dim, std::uint64_t seed) {
  WordEmbeddings emb(dim, vocab.size());
  for (std::size_t i = 0; i < vocab.size(); ++i) fallback_vector(vocab.word(i), seed, emb.vector(i));
  return emb;
}

// Text format: header "count dim", then "word v1 ... vD" per line. Vocabulary
// words missing from the file get the fallback vector for `fallback_seed`.
inline WordEmbeddings load_embeddings(const std::string& path, const Vocabulary& vocab, std::uint64_t fallback_seed) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open embeddings file " + path);
  std::string line;
  if (!std::getline(in, line)) throw InputError(path + ":1: missing header line");
  std::size_t count = 0, dim = 0;
  {
    std::istringstream hs(line);
    if (!(hs >> count >> dim) || dim == 0) throw InputError(path + ":1: header must be 'count dim'");
  }
  WordEmbeddings emb(dim, vocab.size());
  std::vector<bool> seen(vocab.size(), false);
  std::vector<double> values;
  values.reserve(dim);
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line == "\r") continue;
    std::istringstream ls(line);
    std::string word;
    ls >> word;
    values.clear();
    std::string tok;
    while (ls >> tok) {
      try {
        std::size_t used = 0;
        values.push_back(std::stod(tok, &used));
        if (used != tok.size()) throw std::invalid_argument(tok);
      } catch (const std::exception&) {
        throw InputError(path + ":" + std::to_string(lineno) + ": malformed number '" + tok + "'");
      }
    }
    if (values.size() != dim) {
      throw InputError(path + ":" + std::to_string(lineno) + ": expected " + std::to_string(dim) + " values, got " +
                       std::to_string(values.size()));
    }
    if (auto idx = vocab.find(word)) {
      std::copy(values.begin(), values.end(), emb.vector(*idx).begin());
      seen[*idx] = true;
    }
  }
  for (std::size_t i = 0; i < vocab.size(); ++i) {
    if (!seen[i]) fallback_vector(vocab.word(i), fallback_seed, emb.vector(i));
  }
  return emb;
}

// Mean of the in-vocabulary word vectors of title then content; zero vector
// when no token is in the vocabulary.
inline std::vector<double> embed_news(const NewsRecord& record, const WordEmbeddings& emb, const Vocabulary& vocab) {
  std::vector<double> out(emb.dim(), 0.0);
  std::size_t n = 0;
  for (const std::string& tok : tokenize(record)) {
    if (auto idx = vocab.find(tok)) {
      const auto v = emb.vector(*idx);
      for (std::size_t j = 0; j < out.size(); ++j) out[j] += v[j];
      ++n;
    }
  }
  if (n > 0) {
    for (double& x : out) x /= static_cast<double>(n);
  }
  return out;
}

}  // namespace newstrend::corpus
