#include "nameres/embeddings.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>

#include <json.hpp>

#include "nameres/errors.hpp"
#include "nameres/rng.hpp"

namespace nameres {

using nlohmann::json;

Vocab Vocab::from_tokens(std::vector<std::string> sorted_unique) {
  Vocab v;
  v.tokens = std::move(sorted_unique);
  v.index.reserve(v.tokens.size());
  for (size_t i = 0; i < v.tokens.size(); ++i) v.index.emplace(v.tokens[i], static_cast<int>(i));
  return v;
}

namespace {

std::vector<std::vector<int>> paper_bags(const Corpus& corpus, FieldTag tag,
                                         const TokenizerConfig& tok_cfg, Vocab& vocab,
                                         std::vector<int64_t>& counts) {
  // Token count pass. Map keeps vocabulary ids independent of paper order.
  std::map<std::string, int64_t> freq;
  std::vector<std::vector<std::string>> bags;
  for (const auto& [id, paper] : corpus.papers) {
    TokenLists lists = tokenize_paper(paper, std::nullopt, tok_cfg);
    auto& src = tag == FieldTag::coauthors ? lists.names : lists.words;
    for (const std::string& t : src) ++freq[t];
    bags.push_back(std::move(src));
  }
  std::vector<std::string> tokens;
  tokens.reserve(freq.size());
  counts.clear();
  for (auto& [tok, n] : freq) {
    tokens.push_back(tok);
    counts.push_back(n);
  }
  vocab = Vocab::from_tokens(std::move(tokens));

  std::vector<std::vector<int>> out;
  out.reserve(bags.size());
  for (auto& bag : bags) {
    std::vector<int> ids;
    ids.reserve(bag.size());
    for (const std::string& t : bag) ids.push_back(vocab.id(t));
    out.push_back(std::move(ids));
  }
  return out;
}

inline double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

}  // namespace

SkipgramResult train_skipgram(const Corpus& corpus, FieldTag tag, const TokenizerConfig& tok_cfg,
                              const SkipgramConfig& cfg) {
  if (cfg.dim < 1) throw ConfigError("embedding dimension must be positive");
  if (cfg.negatives < 1) throw ConfigError("negative sample count must be positive");

  SkipgramResult result;
  std::vector<int64_t> counts;
  std::vector<std::vector<int>> bags = paper_bags(corpus, tag, tok_cfg, result.block.vocab, counts);
  const int V = result.block.vocab.size();
  const int D = cfg.dim;
  result.block.vec = Mat<float>(V, D);
  if (V == 0) return result;

  Rng rng(cfg.seed);
  Mat<float>& in = result.block.vec;          // token vectors, kept after training
  Mat<float> out_vec(V, D);                   // context side, discarded
  for (float& x : in.a) x = static_cast<float>(rng.uniform(-0.5, 0.5) / D);

  // cumulative unigram^0.75 table for negative draws
  std::vector<double> cum(static_cast<size_t>(V));
  double total = 0.0;
  for (int i = 0; i < V; ++i) {
    total += std::pow(static_cast<double>(counts[static_cast<size_t>(i)]), 0.75);
    cum[static_cast<size_t>(i)] = total;
  }
  auto draw_negative = [&]() -> int {
    double u = rng.next_double() * total;
    return static_cast<int>(std::lower_bound(cum.begin(), cum.end(), u) - cum.begin());
  };

  std::vector<float> grad_center(static_cast<size_t>(D));
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    double loss_sum = 0.0;
    int64_t pairs = 0;
    for (const std::vector<int>& bag : bags) {
      for (size_t ci = 0; ci < bag.size(); ++ci) {
        for (size_t oi = 0; oi < bag.size(); ++oi) {
          if (ci == oi) continue;
          const int center = bag[ci];
          float* vc = in.row(center);
          std::fill(grad_center.begin(), grad_center.end(), 0.0f);
          double pair_loss = 0.0;
          for (int k = 0; k <= cfg.negatives; ++k) {
            const int target = k == 0 ? bag[oi] : draw_negative();
            const double label = k == 0 ? 1.0 : 0.0;
            float* vo = out_vec.row(target);
            double dot = 0.0;
            for (int d = 0; d < D; ++d) dot += static_cast<double>(vc[d]) * vo[d];
            const double p = sigmoid(dot);
            pair_loss -= label > 0.5 ? std::log(std::max(p, 1e-12))
                                     : std::log(std::max(1.0 - p, 1e-12));
            const float g = static_cast<float>(cfg.lr * (label - p));
            for (int d = 0; d < D; ++d) {
              grad_center[static_cast<size_t>(d)] += g * vo[d];
              vo[d] += g * vc[d];
            }
          }
          for (int d = 0; d < D; ++d) vc[d] += grad_center[static_cast<size_t>(d)];
          loss_sum += pair_loss;
          ++pairs;
        }
      }
    }
    result.epoch_loss.push_back(pairs ? loss_sum / static_cast<double>(pairs) : 0.0);
  }
  return result;
}

EmbTables train_embeddings(const Corpus& corpus, const TokenizerConfig& tok_cfg,
                           const SkipgramConfig& cfg) {
  EmbTables tables;
  tables.dim = cfg.dim;
  SkipgramConfig names_cfg = cfg;
  names_cfg.seed = derive_seed(cfg.seed, "embed.names");
  SkipgramConfig words_cfg = cfg;
  words_cfg.seed = derive_seed(cfg.seed, "embed.words");
  tables.names = train_skipgram(corpus, FieldTag::coauthors, tok_cfg, names_cfg).block;
  tables.words = train_skipgram(corpus, FieldTag::content, tok_cfg, words_cfg).block;
  return tables;
}

void save_embeddings(const EmbTables& tables, const std::string& manifest_path,
                     const std::string& bin_path) {
  json manifest;
  manifest["format_version"] = 1;
  manifest["dim"] = tables.dim;
  manifest["tables"] = json::array();
  int64_t offset = 0;
  for (const auto* block : {&tables.names, &tables.words}) {
    json t;
    t["tag"] = block == &tables.names ? "coauthors" : "content";
    t["vocab"] = block->vocab.tokens;
    t["offset_rows"] = offset;
    manifest["tables"].push_back(std::move(t));
    offset += block->vec.rows;
  }
  std::ofstream mout(manifest_path);
  if (!mout) throw DataError("cannot write \"" + manifest_path + "\"");
  mout << manifest.dump(2) << "\n";

  std::ofstream bout(bin_path, std::ios::binary);
  if (!bout) throw DataError("cannot write \"" + bin_path + "\"");
  for (const auto* block : {&tables.names, &tables.words}) {
    bout.write(reinterpret_cast<const char*>(block->vec.a.data()),
               static_cast<std::streamsize>(block->vec.a.size() * sizeof(float)));
  }
}

EmbTables load_embeddings(const std::string& manifest_path, const std::string& bin_path) {
  std::ifstream min(manifest_path);
  if (!min) throw DataError("cannot open \"" + manifest_path + "\"");
  json manifest;
  try {
    manifest = json::parse(min);
  } catch (const json::parse_error& e) {
    throw DataError(manifest_path + ": " + e.what());
  }
  if (manifest.value("format_version", -1) != 1)
    throw DataError("unsupported embedding format version in \"" + manifest_path + "\"");

  EmbTables tables;
  tables.dim = manifest.at("dim").get<int>();
  std::ifstream bin(bin_path, std::ios::binary);
  if (!bin) throw DataError("cannot open \"" + bin_path + "\"");
  for (const json& t : manifest.at("tables")) {
    EmbBlock block;
    std::vector<std::string> tokens = t.at("vocab").get<std::vector<std::string>>();
    block.vocab = Vocab::from_tokens(std::move(tokens));
    block.vec = Mat<float>(block.vocab.size(), tables.dim);
    bin.read(reinterpret_cast<char*>(block.vec.a.data()),
             static_cast<std::streamsize>(block.vec.a.size() * sizeof(float)));
    if (bin.gcount() != static_cast<std::streamsize>(block.vec.a.size() * sizeof(float)))
      throw DataError("embedding binary \"" + bin_path + "\" shorter than manifest declares");
    const std::string tag = t.at("tag").get<std::string>();
    if (tag == "coauthors")
      tables.names = std::move(block);
    else if (tag == "content")
      tables.words = std::move(block);
    else
      throw DataError("unknown embedding tag \"" + tag + "\"");
  }
  return tables;
}

}  // namespace nameres
