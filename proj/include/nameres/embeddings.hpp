#pragma once

#include <cstdint>
#include <string>
#include <unordered_map>
#include <vector>

#include "nameres/mat.hpp"
#include "nameres/tokens.hpp"
#include "nameres/types.hpp"

namespace nameres {

/// Token table for one tag. Tokens are stored sorted so ids are reproducible
/// from the corpus alone.
struct Vocab {
  std::vector<std::string> tokens;
  std::unordered_map<std::string, int> index;

  int id(const std::string& token) const {
    auto it = index.find(token);
    return it == index.end() ? -1 : it->second;
  }
  int size() const { return static_cast<int>(tokens.size()); }

  static Vocab from_tokens(std::vector<std::string> sorted_unique);
};

/// Embedding rows for one tag; row i belongs to vocab token i. Unknown
/// tokens read as the zero vector.
template <class T>
struct EmbBlockT {
  Vocab vocab;
  Mat<T> vec;

  template <class U>
  EmbBlockT<U> cast() const {
    EmbBlockT<U> out;
    out.vocab = vocab;
    out.vec = Mat<U>(vec.rows, vec.cols);
    for (size_t i = 0; i < vec.a.size(); ++i) out.vec.a[i] = static_cast<U>(vec.a[i]);
    return out;
  }
};
using EmbBlock = EmbBlockT<float>;

struct SkipgramConfig {
  int dim = 100;
  int negatives = 5;
  int epochs = 5;
  double lr = 0.025;
  uint64_t seed = 1;
};

struct SkipgramResult {
  EmbBlock block;
  std::vector<double> epoch_loss;  // mean pair loss per epoch
};

/// Skip-gram with negative sampling over per-paper bags: every token of the
/// tag in a paper is context for every other token of that tag in the same
/// paper. Negatives follow the unigram distribution raised to 0.75.
/// Single-threaded; identical seeds give identical tables.
SkipgramResult train_skipgram(const Corpus& corpus, FieldTag tag, const TokenizerConfig& tok_cfg,
                              const SkipgramConfig& cfg);

/// Both tags trained with seeds derived from `cfg.seed`.
struct EmbTables {
  int dim = 0;
  EmbBlock names;
  EmbBlock words;
};
EmbTables train_embeddings(const Corpus& corpus, const TokenizerConfig& tok_cfg,
                           const SkipgramConfig& cfg);

/// JSON manifest (dim, format version, per-tag vocab) next to a flat
/// little-endian float32 row file.
void save_embeddings(const EmbTables& tables, const std::string& manifest_path,
                     const std::string& bin_path);
EmbTables load_embeddings(const std::string& manifest_path, const std::string& bin_path);

}  // namespace nameres
