#include "nameres/matcher.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <fstream>
#include <set>

#include <json.hpp>

#include "nameres/candidates.hpp"
#include "nameres/errors.hpp"
#include "nameres/rng.hpp"

static_assert(std::endian::native == std::endian::little,
              "checkpoint blocks are raw little-endian float32");

namespace nameres {

using nlohmann::json;

std::string to_string(MatchVariant v) {
  switch (v) {
    case MatchVariant::bp:
      return "bp";
    case MatchVariant::mfp:
      return "mfp";
    case MatchVariant::mfmi:
      return "mfmi";
    default:
      return "combined";
  }
}

MatchVariant variant_from_string(const std::string& s) {
  if (s == "bp") return MatchVariant::bp;
  if (s == "mfp") return MatchVariant::mfp;
  if (s == "mfmi") return MatchVariant::mfmi;
  if (s == "combined") return MatchVariant::combined;
  throw ConfigError("unknown matcher variant \"" + s + "\"");
}

MatcherParams init_matcher(const EmbTables& tables, const MatcherInitConfig& cfg) {
  if (tables.dim < 1) throw ConfigError("embedding tables carry no dimension");
  MatcherParams p;
  p.variant = cfg.variant;
  p.bank = cfg.bank;
  if (p.bank.size() < 1 || p.bank.mu.size() != p.bank.sigma.size())
    throw ConfigError("kernel bank is malformed");
  p.dim = tables.dim;
  p.names = tables.names;
  p.words = tables.words;
  p.margin = static_cast<float>(cfg.margin);
  const size_t K = static_cast<size_t>(p.bank.size());
  // Zero attention parameters start every member at uniform weight.
  p.field_attn.w.assign(K, 0.0f);
  p.inst_attn.w.assign(K, 0.0f);
  std::vector<int> widths;
  widths.push_back(p.phi_width());
  for (int h : cfg.hidden) widths.push_back(h);
  widths.push_back(1);
  p.g = MlpT<float>::shaped(widths);
  Rng rng(derive_seed(cfg.seed, "matcher.init"));
  p.g.init_xavier(rng);
  return p;
}

// ---------------------------------------------------------------------------
// MatchContext

MatchContext::MatchContext(const Corpus& corpus, const Vocab& names_vocab, const Vocab& words_vocab,
                           TokenizerConfig tok_cfg)
    : corpus_(&corpus), names_vocab_(&names_vocab), words_vocab_(&words_vocab), tok_cfg_(tok_cfg) {}

const MatchContext::PaperTokens& MatchContext::tokens_for(const std::string& paper_id, int slot) {
  const auto key = std::make_pair(paper_id, slot);
  auto it = cache_.find(key);
  if (it != cache_.end()) return it->second;
  auto pit = corpus_->papers.find(paper_id);
  if (pit == corpus_->papers.end()) throw DataError("unknown paper \"" + paper_id + "\"");
  PaperTokens pt;
  pt.strings = tokenize_paper(pit->second, slot >= 0 ? std::optional<int>(slot) : std::nullopt,
                              tok_cfg_);
  pt.ids.names.reserve(pt.strings.names.size());
  for (const std::string& t : pt.strings.names) pt.ids.names.push_back(names_vocab_->id(t));
  pt.ids.words.reserve(pt.strings.words.size());
  for (const std::string& t : pt.strings.words) pt.ids.words.push_back(words_vocab_->id(t));
  return cache_.emplace(key, std::move(pt)).first->second;
}

const TokenIds& MatchContext::target_tokens(const TargetPair& target) {
  auto pit = corpus_->papers.find(target.paper_id);
  if (pit == corpus_->papers.end()) throw DataError("unknown paper \"" + target.paper_id + "\"");
  if (target.author_index < 0 ||
      target.author_index >= static_cast<int>(pit->second.authors.size()))
    throw DataError("author index " + std::to_string(target.author_index) +
                    " out of range for paper \"" + target.paper_id + "\"");
  return tokens_for(target.paper_id, target.author_index).ids;
}

CandidateTokens MatchContext::candidate_tokens(const std::string& person_id,
                                               const std::string& exclude_paper) {
  auto pit = corpus_->persons.find(person_id);
  if (pit == corpus_->persons.end()) throw DataError("unknown person \"" + person_id + "\"");
  const PersonRecord& person = pit->second;

  CandidateTokens out;
  std::set<std::string> seen_names, seen_words;
  int used = 0;
  for (const std::string& paper_id : person.papers) {
    if (paper_id == exclude_paper) continue;
    if (used >= kMaxProfilePapers) break;
    ++used;

    const std::string slot_key = person_id + "|" + paper_id;
    auto sit = slot_cache_.find(slot_key);
    if (sit == slot_cache_.end()) {
      const PaperRecord& paper = corpus_->papers.at(paper_id);
      sit = slot_cache_.emplace(slot_key, person_slot(paper, person.name)).first;
    }
    const PaperTokens& pt = tokens_for(paper_id, sit->second.value_or(-1));
    out.papers.push_back(pt.ids);

    // Profile lists keep each token once, in first-occurrence order.
    for (size_t i = 0; i < pt.strings.names.size(); ++i) {
      if (static_cast<int>(out.profile.names.size()) >= kMaxNameTokens) break;
      if (seen_names.insert(pt.strings.names[i]).second)
        out.profile.names.push_back(pt.ids.names[i]);
    }
    for (size_t i = 0; i < pt.strings.words.size(); ++i) {
      if (static_cast<int>(out.profile.words.size()) >= kMaxWordTokens) break;
      if (seen_words.insert(pt.strings.words[i]).second)
        out.profile.words.push_back(pt.ids.words[i]);
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// triplet sampling

TripletSamplingResult sample_triplets(const std::vector<CandidateSet>& instances,
                                      int negatives_per_target, uint64_t seed) {
  if (negatives_per_target < 1) throw ConfigError("negatives per target must be positive");
  TripletSamplingResult result;
  for (const CandidateSet& inst : instances) {
    if (inst.gold != GoldKind::person) continue;
    std::vector<std::string> negs;
    for (const std::string& c : inst.candidates)
      if (c != inst.gold_person) negs.push_back(c);
    if (negs.empty()) {
      ++result.skipped_no_negative;
      continue;
    }
    Rng rng(derive_seed(seed, "triplets:" + inst.target.paper_id + ":" +
                                  std::to_string(inst.target.author_index)));
    rng.shuffle(negs);
    const size_t take = std::min(static_cast<size_t>(negatives_per_target), negs.size());
    for (size_t i = 0; i < take; ++i)
      result.triplets.push_back({inst.target, inst.gold_person, negs[i]});
  }
  return result;
}

// ---------------------------------------------------------------------------
// training

namespace {

struct TripletWork {
  const TokenIds* tgt;
  const CandidateTokens* pos;
  const CandidateTokens* neg;
};

/// Materializes candidate token lists once per (person, excluded paper).
class CandTokenCache {
 public:
  explicit CandTokenCache(MatchContext& ctx) : ctx_(&ctx) {}

  const CandidateTokens* get(const std::string& person, const std::string& exclude) {
    auto key = std::make_pair(person, exclude);
    auto it = store_.find(key);
    if (it == store_.end())
      it = store_.emplace(key, ctx_->candidate_tokens(person, exclude)).first;
    return &it->second;
  }

 private:
  MatchContext* ctx_;
  std::map<std::pair<std::string, std::string>, CandidateTokens> store_;
};

std::vector<TripletWork> prepare_work(MatchContext& ctx, CandTokenCache& cache,
                                      const std::vector<TripletSample>& triplets) {
  std::vector<TripletWork> work;
  work.reserve(triplets.size());
  for (const TripletSample& t : triplets) {
    TripletWork w;
    w.tgt = &ctx.target_tokens(t.target);
    w.pos = cache.get(t.pos, t.target.paper_id);
    w.neg = cache.get(t.neg, t.target.paper_id);
    work.push_back(w);
  }
  return work;
}

}  // namespace

void apply_sgd(MatcherParams& p, const MatcherGradT<float>& g, float lr) {
  for (size_t k = 0; k < p.field_attn.w.size(); ++k) p.field_attn.w[k] -= lr * g.field.w[k];
  p.field_attn.b -= lr * g.field.b;
  for (size_t k = 0; k < p.inst_attn.w.size(); ++k) p.inst_attn.w[k] -= lr * g.inst.w[k];
  p.inst_attn.b -= lr * g.inst.b;
  for (size_t l = 0; l < p.g.W.size(); ++l) {
    for (size_t i = 0; i < p.g.W[l].a.size(); ++i) p.g.W[l].a[i] -= lr * g.g.W[l].a[i];
    for (size_t i = 0; i < p.g.b[l].size(); ++i) p.g.b[l][i] -= lr * g.g.b[l][i];
  }
  auto emb = [lr](EmbBlock& block, const std::map<int, std::vector<float>>& grads) {
    for (const auto& [id, vec] : grads) {
      float* row = block.vec.row(id);
      for (size_t d = 0; d < vec.size(); ++d) row[d] -= lr * vec[d];
    }
  };
  emb(p.names, g.emb_names);
  emb(p.words, g.emb_words);
}

namespace {

struct AdamState {
  static constexpr double kBeta1 = 0.9, kBeta2 = 0.999, kEps = 1e-8;
  int64_t t = 0;
  std::vector<float> fw_m, fw_v, iw_m, iw_v;
  float fb_m = 0, fb_v = 0, ib_m = 0, ib_v = 0;
  MlpGradT<float> g_m, g_v;
  Mat<float> en_m, en_v, ew_m, ew_v;

  explicit AdamState(const MatcherParams& p)
      : fw_m(p.field_attn.w.size(), 0.0f),
        fw_v(p.field_attn.w.size(), 0.0f),
        iw_m(p.inst_attn.w.size(), 0.0f),
        iw_v(p.inst_attn.w.size(), 0.0f),
        g_m(MlpGradT<float>::shaped_like(p.g)),
        g_v(MlpGradT<float>::shaped_like(p.g)),
        en_m(p.names.vec.rows, p.names.vec.cols),
        en_v(p.names.vec.rows, p.names.vec.cols),
        ew_m(p.words.vec.rows, p.words.vec.cols),
        ew_v(p.words.vec.rows, p.words.vec.cols) {}
};

/// Adam step; embedding moments update lazily, only on rows the batch touched.
void apply_adam(MatcherParams& p, const MatcherGradT<float>& g, float lr, AdamState& st) {
  ++st.t;
  const double corr =
      std::sqrt(1.0 - std::pow(AdamState::kBeta2, static_cast<double>(st.t))) /
      (1.0 - std::pow(AdamState::kBeta1, static_cast<double>(st.t)));
  const float a = static_cast<float>(lr * corr);
  auto upd = [a](float& param, float grad, float& m, float& v) {
    m = static_cast<float>(AdamState::kBeta1 * m + (1.0 - AdamState::kBeta1) * grad);
    v = static_cast<float>(AdamState::kBeta2 * v + (1.0 - AdamState::kBeta2) * grad * grad);
    param -= a * m / (std::sqrt(v) + static_cast<float>(AdamState::kEps));
  };
  for (size_t k = 0; k < p.field_attn.w.size(); ++k)
    upd(p.field_attn.w[k], g.field.w[k], st.fw_m[k], st.fw_v[k]);
  upd(p.field_attn.b, g.field.b, st.fb_m, st.fb_v);
  for (size_t k = 0; k < p.inst_attn.w.size(); ++k)
    upd(p.inst_attn.w[k], g.inst.w[k], st.iw_m[k], st.iw_v[k]);
  upd(p.inst_attn.b, g.inst.b, st.ib_m, st.ib_v);
  for (size_t l = 0; l < p.g.W.size(); ++l) {
    for (size_t i = 0; i < p.g.W[l].a.size(); ++i)
      upd(p.g.W[l].a[i], g.g.W[l].a[i], st.g_m.W[l].a[i], st.g_v.W[l].a[i]);
    for (size_t i = 0; i < p.g.b[l].size(); ++i)
      upd(p.g.b[l][i], g.g.b[l][i], st.g_m.b[l][i], st.g_v.b[l][i]);
  }
  auto emb = [&](EmbBlock& block, const std::map<int, std::vector<float>>& grads, Mat<float>& m,
                 Mat<float>& v) {
    for (const auto& [id, vec] : grads) {
      float* row = block.vec.row(id);
      float* mr = m.row(id);
      float* vr = v.row(id);
      for (size_t d = 0; d < vec.size(); ++d) upd(row[d], vec[d], mr[d], vr[d]);
    }
  };
  emb(p.names, g.emb_names, st.en_m, st.en_v);
  emb(p.words, g.emb_words, st.ew_m, st.ew_v);
}

}  // namespace

MatcherTrainResult train_matcher(MatcherParams& params, MatchContext& ctx,
                                 const std::vector<TripletSample>& triplets,
                                 const MatcherTrainConfig& cfg) {
  if (cfg.batch < 1) throw ConfigError("batch size must be positive");
  if (!(cfg.lr > 0)) throw ConfigError("learning rate must be positive");
  if (cfg.epochs < 0) throw ConfigError("epoch count must be non-negative");
  const bool adam = cfg.optimizer == "adam";
  if (!adam && cfg.optimizer != "sgd")
    throw ConfigError("unknown optimizer \"" + cfg.optimizer + "\"");

  CandTokenCache cache(ctx);
  const std::vector<TripletWork> work = prepare_work(ctx, cache, triplets);
  std::optional<AdamState> adam_state;
  if (adam) adam_state.emplace(params);

  MatcherTrainResult result;
  const float lr = static_cast<float>(cfg.lr);
  std::vector<size_t> order(work.size());
  for (size_t i = 0; i < order.size(); ++i) order[i] = i;

  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    Rng shuf(derive_seed(cfg.seed, "matcher.epoch:" + std::to_string(epoch)));
    shuf.shuffle(order);
    double loss_sum = 0.0;

    for (size_t start = 0; start < order.size(); start += static_cast<size_t>(cfg.batch)) {
      const size_t stop = std::min(order.size(), start + static_cast<size_t>(cfg.batch));
      const int bs = static_cast<int>(stop - start);
      std::vector<MatcherGradT<float>> grads(static_cast<size_t>(bs));
      std::vector<float> losses(static_cast<size_t>(bs), 0.0f);

#pragma omp parallel for schedule(dynamic)
      for (int i = 0; i < bs; ++i) {
        const TripletWork& w = work[order[start + static_cast<size_t>(i)]];
        grads[static_cast<size_t>(i)] =
            MatcherGradT<float>::shaped_like(params, cfg.fine_tune_embeddings);
        losses[static_cast<size_t>(i)] =
            triplet_loss(params, *w.tgt, *w.pos, *w.neg, &grads[static_cast<size_t>(i)]);
      }

      // Serial in-order reduction keeps the update independent of thread count.
      MatcherGradT<float> total =
          MatcherGradT<float>::shaped_like(params, cfg.fine_tune_embeddings);
      for (int i = 0; i < bs; ++i) {
        if (!std::isfinite(losses[static_cast<size_t>(i)])) {
          const TripletSample& t = triplets[order[start + static_cast<size_t>(i)]];
          throw NumericError("non-finite triplet loss (epoch " + std::to_string(epoch) +
                             ", paper \"" + t.target.paper_id + "\", negative \"" + t.neg + "\")");
        }
        loss_sum += losses[static_cast<size_t>(i)];
        total.add(grads[static_cast<size_t>(i)]);
      }
      total.scale(1.0f / static_cast<float>(bs));
      if (adam)
        apply_adam(params, total, lr, *adam_state);
      else
        apply_sgd(params, total, lr);
    }
    result.epoch_loss.push_back(work.empty() ? 0.0
                                             : loss_sum / static_cast<double>(work.size()));
  }
  return result;
}

double mean_triplet_loss(MatcherParams& params, MatchContext& ctx,
                         const std::vector<TripletSample>& triplets) {
  if (triplets.empty()) return 0.0;
  CandTokenCache cache(ctx);
  const std::vector<TripletWork> work = prepare_work(ctx, cache, triplets);
  std::vector<double> losses(work.size(), 0.0);
#pragma omp parallel for schedule(dynamic)
  for (int i = 0; i < static_cast<int>(work.size()); ++i) {
    const TripletWork& w = work[static_cast<size_t>(i)];
    losses[static_cast<size_t>(i)] =
        static_cast<double>(triplet_loss<float>(params, *w.tgt, *w.pos, *w.neg, nullptr));
  }
  double sum = 0.0;
  for (double l : losses) sum += l;
  return sum / static_cast<double>(work.size());
}

std::vector<RankedCandidate> rank_candidates(MatchContext& ctx, const MatcherParams& params,
                                             const TargetPair& target,
                                             const std::vector<std::string>& candidates) {
  const TokenIds& tgt = ctx.target_tokens(target);
  std::vector<CandidateTokens> cands;
  cands.reserve(candidates.size());
  for (const std::string& person : candidates)
    cands.push_back(ctx.candidate_tokens(person, target.paper_id));

  std::vector<RankedCandidate> out(candidates.size());
#pragma omp parallel for schedule(dynamic)
  for (int i = 0; i < static_cast<int>(candidates.size()); ++i) {
    PhiEval<float> ev;
    const float s = score_forward(params, tgt, cands[static_cast<size_t>(i)], ev);
    out[static_cast<size_t>(i)] = {candidates[static_cast<size_t>(i)], s, std::move(ev.phi)};
  }
  for (const RankedCandidate& rc : out)
    if (!std::isfinite(rc.score))
      throw NumericError("non-finite score for paper \"" + target.paper_id + "\" candidate \"" +
                         rc.person + "\"");
  std::sort(out.begin(), out.end(), [](const RankedCandidate& a, const RankedCandidate& b) {
    if (a.score != b.score) return a.score > b.score;
    return a.person < b.person;
  });
  return out;
}

// ---------------------------------------------------------------------------
// persistence

namespace {

void write_block(std::ofstream& out, const float* data, size_t count) {
  out.write(reinterpret_cast<const char*>(data),
            static_cast<std::streamsize>(count * sizeof(float)));
}

void read_block(std::ifstream& in, const std::string& path, float* data, size_t count) {
  in.read(reinterpret_cast<char*>(data), static_cast<std::streamsize>(count * sizeof(float)));
  if (in.gcount() != static_cast<std::streamsize>(count * sizeof(float)))
    throw DataError("checkpoint \"" + path + "\" shorter than its manifest declares");
}

}  // namespace

void save_matcher(const MatcherParams& params, const std::string& path) {
  json manifest;
  manifest["format_version"] = 1;
  manifest["kind"] = "matcher";
  manifest["variant"] = to_string(params.variant);
  manifest["dim"] = params.dim;
  manifest["margin"] = static_cast<double>(params.margin);
  manifest["kernel_mu"] = params.bank.mu;
  manifest["kernel_sigma"] = params.bank.sigma;
  manifest["g_widths"] = params.g.widths;
  manifest["names_vocab"] = params.names.vocab.tokens;
  manifest["words_vocab"] = params.words.vocab.tokens;

  std::vector<std::pair<std::string, const std::vector<float>*>> blocks;
  blocks.emplace_back("emb_names", &params.names.vec.a);
  blocks.emplace_back("emb_words", &params.words.vec.a);
  blocks.emplace_back("field_w", &params.field_attn.w);
  std::vector<float> fb = {params.field_attn.b};
  blocks.emplace_back("field_b", &fb);
  blocks.emplace_back("inst_w", &params.inst_attn.w);
  std::vector<float> ib = {params.inst_attn.b};
  blocks.emplace_back("inst_b", &ib);
  for (size_t l = 0; l < params.g.W.size(); ++l) {
    blocks.emplace_back("g_w" + std::to_string(l), &params.g.W[l].a);
    blocks.emplace_back("g_b" + std::to_string(l), &params.g.b[l]);
  }
  manifest["blocks"] = json::array();
  for (const auto& [name, vec] : blocks)
    manifest["blocks"].push_back({{"name", name}, {"count", vec->size()}});

  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write \"" + path + "\"");
  out << manifest.dump() << "\n";
  for (const auto& [name, vec] : blocks) write_block(out, vec->data(), vec->size());
  if (!out) throw DataError("short write to \"" + path + "\"");
}

MatcherParams load_matcher(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open \"" + path + "\"");
  std::string line;
  if (!std::getline(in, line)) throw DataError("checkpoint \"" + path + "\" has no manifest line");
  json manifest;
  try {
    manifest = json::parse(line);
  } catch (const json::parse_error& e) {
    throw DataError(path + ": " + e.what());
  }
  if (manifest.value("format_version", -1) != 1)
    throw DataError("unsupported checkpoint format version in \"" + path + "\"");
  if (manifest.value("kind", "") != "matcher")
    throw DataError("\"" + path + "\" is not a matcher checkpoint");

  MatcherParams p;
  p.variant = variant_from_string(manifest.at("variant").get<std::string>());
  p.dim = manifest.at("dim").get<int>();
  p.margin = static_cast<float>(manifest.at("margin").get<double>());
  p.bank.mu = manifest.at("kernel_mu").get<std::vector<double>>();
  p.bank.sigma = manifest.at("kernel_sigma").get<std::vector<double>>();
  if (p.bank.mu.size() != p.bank.sigma.size())
    throw DataError("checkpoint kernel bank is malformed in \"" + path + "\"");
  p.names.vocab = Vocab::from_tokens(manifest.at("names_vocab").get<std::vector<std::string>>());
  p.words.vocab = Vocab::from_tokens(manifest.at("words_vocab").get<std::vector<std::string>>());
  p.names.vec = Mat<float>(p.names.vocab.size(), p.dim);
  p.words.vec = Mat<float>(p.words.vocab.size(), p.dim);
  p.g = MlpT<float>::shaped(manifest.at("g_widths").get<std::vector<int>>());
  if (p.g.input_width() != p.phi_width())
    throw DataError("checkpoint scorer width disagrees with variant in \"" + path + "\"");
  const size_t K = static_cast<size_t>(p.bank.size());
  p.field_attn.w.assign(K, 0.0f);
  p.inst_attn.w.assign(K, 0.0f);

  std::vector<std::pair<std::string, std::vector<float>*>> blocks;
  blocks.emplace_back("emb_names", &p.names.vec.a);
  blocks.emplace_back("emb_words", &p.words.vec.a);
  blocks.emplace_back("field_w", &p.field_attn.w);
  std::vector<float> fb(1), ib(1);
  blocks.emplace_back("field_b", &fb);
  blocks.emplace_back("inst_w", &p.inst_attn.w);
  blocks.emplace_back("inst_b", &ib);
  for (size_t l = 0; l < p.g.W.size(); ++l) {
    blocks.emplace_back("g_w" + std::to_string(l), &p.g.W[l].a);
    blocks.emplace_back("g_b" + std::to_string(l), &p.g.b[l]);
  }

  const json& declared = manifest.at("blocks");
  if (declared.size() != blocks.size())
    throw DataError("checkpoint block list disagrees with its kind in \"" + path + "\"");
  for (size_t i = 0; i < blocks.size(); ++i) {
    const json& d = declared[i];
    if (d.at("name").get<std::string>() != blocks[i].first ||
        d.at("count").get<size_t>() != blocks[i].second->size())
      throw DataError("checkpoint block \"" + blocks[i].first + "\" has unexpected shape in \"" +
                      path + "\"");
    read_block(in, path, blocks[i].second->data(), blocks[i].second->size());
  }
  if (in.peek() != std::ifstream::traits_type::eof())
    throw DataError("checkpoint \"" + path + "\" carries trailing bytes");
  p.field_attn.b = fb[0];
  p.inst_attn.b = ib[0];
  return p;
}

}  // namespace nameres
