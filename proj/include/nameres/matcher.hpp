#pragma once

#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "nameres/embeddings.hpp"
#include "nameres/kernels.hpp"
#include "nameres/mlp.hpp"
#include "nameres/tokens.hpp"
#include "nameres/types.hpp"

namespace nameres {

enum class MatchVariant { bp, mfp, mfmi, combined };

std::string to_string(MatchVariant v);
MatchVariant variant_from_string(const std::string& s);

/// Everything the matcher learns: token embeddings (fine-tunable), the two
/// attention parameter sets, and the scoring perceptron. Templated so the
/// gradient checks can run the whole model in double precision.
template <class T>
struct MatcherParamsT {
  MatchVariant variant = MatchVariant::combined;
  KernelBank bank = KernelBank::standard();
  int dim = 0;
  EmbBlockT<T> names;
  EmbBlockT<T> words;
  AttnParamsT<T> field_attn;  // weighs coauthor phi against content phi
  AttnParamsT<T> inst_attn;   // weighs per-paper embeddings against each other
  MlpT<T> g;
  T margin = T(1);

  int phi_width() const {
    return variant == MatchVariant::combined ? 2 * bank.size() : bank.size();
  }

  template <class U>
  MatcherParamsT<U> cast() const {
    MatcherParamsT<U> out;
    out.variant = variant;
    out.bank = bank;
    out.dim = dim;
    out.names = names.template cast<U>();
    out.words = words.template cast<U>();
    out.field_attn.w.assign(field_attn.w.begin(), field_attn.w.end());
    out.field_attn.b = static_cast<U>(field_attn.b);
    out.inst_attn.w.assign(inst_attn.w.begin(), inst_attn.w.end());
    out.inst_attn.b = static_cast<U>(inst_attn.b);
    out.g = g.template cast<U>();
    out.margin = static_cast<U>(margin);
    return out;
  }
};
using MatcherParams = MatcherParamsT<float>;

struct MatcherInitConfig {
  MatchVariant variant = MatchVariant::combined;
  std::vector<int> hidden = {64, 32};
  double margin = 1.0;
  uint64_t seed = 1;
  KernelBank bank = KernelBank::standard();
};

/// Fresh parameters around pre-trained embeddings: attention at zero
/// (uniform weights), scoring layers Xavier-uniform from the seed.
MatcherParams init_matcher(const EmbTables& tables, const MatcherInitConfig& cfg);

/// Token ids into the two vocabularies; -1 marks out-of-vocabulary tokens,
/// which read as zero vectors and never receive gradient.
struct TokenIds {
  std::vector<int> names;
  std::vector<int> words;
};

/// Candidate person material: the deduplicated profile token lists plus the
/// per-paper lists for instance-level matching. The target's own paper is
/// excluded at construction.
struct CandidateTokens {
  TokenIds profile;
  std::vector<TokenIds> papers;
};

/// Token lookup and caching over one corpus + vocabulary pair. Build calls
/// are not thread safe; prepare tokens serially, score in parallel.
class MatchContext {
 public:
  MatchContext(const Corpus& corpus, const Vocab& names_vocab, const Vocab& words_vocab,
               TokenizerConfig tok_cfg = {});

  const Corpus& corpus() const { return *corpus_; }

  /// Tokens of the target occurrence: coauthor names without the target
  /// slot, content words with the slot's affiliation.
  const TokenIds& target_tokens(const TargetPair& target);

  /// Profile and per-paper tokens of a person, skipping `exclude_paper`.
  CandidateTokens candidate_tokens(const std::string& person_id, const std::string& exclude_paper);

 private:
  struct PaperTokens {
    TokenLists strings;
    TokenIds ids;
  };
  const PaperTokens& tokens_for(const std::string& paper_id, int slot);

  const Corpus* corpus_;
  const Vocab* names_vocab_;
  const Vocab* words_vocab_;
  TokenizerConfig tok_cfg_;
  std::map<std::pair<std::string, int>, PaperTokens> cache_;
  std::map<std::string, std::optional<int>> slot_cache_;  // person_id|paper_id -> slot
};

// ---------------------------------------------------------------------------
// forward / backward core (templated for the 64-bit gradient checks)

template <class T>
struct Gather {
  std::vector<int8_t> tag;  // 0 = names table, 1 = words table
  std::vector<int> id;
  Mat<T> unit;              // normalized embedding rows; zero rows stay zero
  std::vector<T> inv_norm;  // 0 marks rows that must not propagate gradient
  Mat<T> dunit;             // sized on demand by the backward pass
};

template <class T>
struct MatcherGradT {
  AttnParamsT<T> field, inst;
  MlpGradT<T> g;
  std::map<int, std::vector<T>> emb_names, emb_words;
  bool with_embeddings = false;

  static MatcherGradT shaped_like(const MatcherParamsT<T>& p, bool with_emb) {
    MatcherGradT out;
    out.field.w.assign(p.field_attn.w.size(), T(0));
    out.inst.w.assign(p.inst_attn.w.size(), T(0));
    out.g = MlpGradT<T>::shaped_like(p.g);
    out.with_embeddings = with_emb;
    return out;
  }

  void add(const MatcherGradT& o) {
    for (size_t i = 0; i < field.w.size(); ++i) field.w[i] += o.field.w[i];
    field.b += o.field.b;
    for (size_t i = 0; i < inst.w.size(); ++i) inst.w[i] += o.inst.w[i];
    inst.b += o.inst.b;
    g.add(o.g);
    auto merge = [](std::map<int, std::vector<T>>& dst, const std::map<int, std::vector<T>>& src) {
      for (const auto& [id, vec] : src) {
        auto [it, fresh] = dst.try_emplace(id, vec);
        if (!fresh)
          for (size_t d = 0; d < vec.size(); ++d) it->second[d] += vec[d];
      }
    };
    merge(emb_names, o.emb_names);
    merge(emb_words, o.emb_words);
  }

  void scale(T s) {
    for (T& x : field.w) x *= s;
    field.b *= s;
    for (T& x : inst.w) x *= s;
    inst.b *= s;
    for (auto& w : g.W)
      for (T& x : w.a) x *= s;
    for (auto& layer : g.b)
      for (T& x : layer) x *= s;
    for (auto& [id, vec] : emb_names)
      for (T& x : vec) x *= s;
    for (auto& [id, vec] : emb_words)
      for (T& x : vec) x *= s;
  }
};

/// Full forward state of one (target, candidate) evaluation, kept so the
/// backward pass can replay it exactly.
template <class T>
struct PhiEval {
  Gather<T> tgt_names, tgt_words, tgt_merged;
  Gather<T> prof_names, prof_words, prof_merged;
  std::vector<Gather<T>> paper_names, paper_words;

  Mat<T> S_bp;
  PoolCache<T> pc_bp;
  Mat<T> S_fn, S_fw;
  PoolCache<T> pc_fn, pc_fw;
  std::vector<Mat<T>> S_pn, S_pw;
  std::vector<PoolCache<T>> pc_pn, pc_pw;

  std::vector<std::vector<T>> mfp_phis;  // {coauthors, content}
  AttendCache<T> mfp_attn;
  std::vector<std::vector<std::vector<T>>> paper_phis;
  std::vector<AttendCache<T>> paper_attn;
  std::vector<std::vector<T>> inst_phis;
  AttendCache<T> inst_attn;

  std::vector<T> phi;
  MlpCache<T> gcache;
  T score = T(0);
};

namespace detail {

template <class T>
void gather_append(const MatcherParamsT<T>& P, const std::vector<int>& ids, int8_t tag,
                   Gather<T>& out) {
  const Mat<T>& table = tag == 0 ? P.names.vec : P.words.vec;
  const int d = P.dim;
  for (int id : ids) {
    out.tag.push_back(tag);
    out.id.push_back(id);
  }
  const int base = out.unit.rows;
  Mat<T> grown(base + static_cast<int>(ids.size()), d);
  std::copy(out.unit.a.begin(), out.unit.a.end(), grown.a.begin());
  out.unit = std::move(grown);
  out.inv_norm.resize(static_cast<size_t>(out.unit.rows), T(0));
  for (size_t r = 0; r < ids.size(); ++r) {
    const int id = ids[r];
    T* dst = out.unit.row(base + static_cast<int>(r));
    if (id < 0) continue;
    const T* src = table.row(id);
    T norm2 = T(0);
    for (int k = 0; k < d; ++k) norm2 += src[k] * src[k];
    if (norm2 <= T(0)) continue;
    const T inv = T(1) / std::sqrt(norm2);
    out.inv_norm[static_cast<size_t>(base) + r] = inv;
    for (int k = 0; k < d; ++k) dst[k] = src[k] * inv;
  }
}

template <class T>
Gather<T> make_gather(const MatcherParamsT<T>& P, const TokenIds& toks, bool merged,
                      bool names_only) {
  Gather<T> g;
  g.unit = Mat<T>(0, P.dim);
  if (merged) {
    gather_append(P, toks.names, 0, g);
    gather_append(P, toks.words, 1, g);
  } else if (names_only) {
    gather_append(P, toks.names, 0, g);
  } else {
    gather_append(P, toks.words, 1, g);
  }
  return g;
}

/// dA_unit += dS * B_unit ; dB_unit += dS^T * A_unit
template <class T>
void backprop_similarity(const Mat<T>& dS, Gather<T>& a, Gather<T>& b) {
  const int d = a.unit.cols;
  if (a.dunit.rows == 0) a.dunit = Mat<T>(a.unit.rows, d);
  if (b.dunit.rows == 0) b.dunit = Mat<T>(b.unit.rows, d);
  for (int i = 0; i < dS.rows; ++i) {
    const T* dsi = dS.row(i);
    T* dai = a.dunit.row(i);
    for (int j = 0; j < dS.cols; ++j) {
      const T v = dsi[j];
      if (v == T(0)) continue;
      const T* bu = b.unit.row(j);
      T* dbj = b.dunit.row(j);
      const T* au = a.unit.row(i);
      for (int k = 0; k < d; ++k) {
        dai[k] += v * bu[k];
        dbj[k] += v * au[k];
      }
    }
  }
}

/// Normalization Jacobian, then scatter-add into the sparse tables:
/// draw = (dunit - (dunit . unit) unit) / |raw|.
template <class T>
void scatter_gather(const Gather<T>& g, int dim, MatcherGradT<T>& grad) {
  if (g.dunit.rows == 0) return;
  for (int r = 0; r < g.unit.rows; ++r) {
    const T inv = g.inv_norm[static_cast<size_t>(r)];
    const int id = g.id[static_cast<size_t>(r)];
    if (inv == T(0) || id < 0) continue;
    const T* du = g.dunit.row(r);
    const T* u = g.unit.row(r);
    T proj = T(0);
    for (int k = 0; k < dim; ++k) proj += du[k] * u[k];
    auto& table = g.tag[static_cast<size_t>(r)] == 0 ? grad.emb_names : grad.emb_words;
    auto [it, fresh] = table.try_emplace(id, std::vector<T>(static_cast<size_t>(dim), T(0)));
    std::vector<T>& dst = it->second;
    for (int k = 0; k < dim; ++k) dst[static_cast<size_t>(k)] += inv * (du[k] - proj * u[k]);
  }
}

template <class T>
std::vector<T> pooled_pair(const MatcherParamsT<T>& P, const Gather<T>& a, const Gather<T>& b,
                           Mat<T>& S, PoolCache<T>& pc) {
  if (a.unit.rows == 0 || b.unit.rows == 0) {
    S = Mat<T>();
    return std::vector<T>(static_cast<size_t>(P.bank.size()), T(0));
  }
  S = similarity_from_units(a.unit, b.unit);
  return kernel_pool(S, P.bank, {}, {}, &pc);
}

template <class T>
void backprop_pooled_pair(const MatcherParamsT<T>& P, Gather<T>& a, Gather<T>& b, const Mat<T>& S,
                          const PoolCache<T>& pc, std::span<const T> dphi) {
  if (S.empty()) return;
  Mat<T> dS = kernel_pool_backward(S, P.bank, pc, dphi);
  backprop_similarity(dS, a, b);
}

}  // namespace detail

template <class T>
void phi_forward(const MatcherParamsT<T>& P, const TokenIds& target, const CandidateTokens& cand,
                 PhiEval<T>& ev) {
  using namespace detail;
  const int K = P.bank.size();
  const bool want_mfp = P.variant == MatchVariant::mfp || P.variant == MatchVariant::combined;
  const bool want_mfmi = P.variant == MatchVariant::mfmi || P.variant == MatchVariant::combined;

  if (P.variant == MatchVariant::bp) {
    ev.tgt_merged = make_gather(P, target, true, false);
    ev.prof_merged = make_gather(P, cand.profile, true, false);
    ev.phi = pooled_pair(P, ev.tgt_merged, ev.prof_merged, ev.S_bp, ev.pc_bp);
    return;
  }

  ev.tgt_names = make_gather(P, target, false, true);
  ev.tgt_words = make_gather(P, target, false, false);

  std::vector<T> phi_mfp, phi_mfmi;
  if (want_mfp) {
    ev.prof_names = make_gather(P, cand.profile, false, true);
    ev.prof_words = make_gather(P, cand.profile, false, false);
    ev.mfp_phis.clear();
    ev.mfp_phis.push_back(pooled_pair(P, ev.tgt_names, ev.prof_names, ev.S_fn, ev.pc_fn));
    ev.mfp_phis.push_back(pooled_pair(P, ev.tgt_words, ev.prof_words, ev.S_fw, ev.pc_fw));
    phi_mfp = attend(ev.mfp_phis, P.field_attn, &ev.mfp_attn);
  }
  if (want_mfmi) {
    const size_t n = cand.papers.size();
    ev.paper_names.resize(n);
    ev.paper_words.resize(n);
    ev.S_pn.resize(n);
    ev.S_pw.resize(n);
    ev.pc_pn.resize(n);
    ev.pc_pw.resize(n);
    ev.paper_phis.resize(n);
    ev.paper_attn.resize(n);
    ev.inst_phis.clear();
    for (size_t t = 0; t < n; ++t) {
      ev.paper_names[t] = make_gather(P, cand.papers[t], false, true);
      ev.paper_words[t] = make_gather(P, cand.papers[t], false, false);
      ev.paper_phis[t].clear();
      ev.paper_phis[t].push_back(
          pooled_pair(P, ev.tgt_names, ev.paper_names[t], ev.S_pn[t], ev.pc_pn[t]));
      ev.paper_phis[t].push_back(
          pooled_pair(P, ev.tgt_words, ev.paper_words[t], ev.S_pw[t], ev.pc_pw[t]));
      ev.inst_phis.push_back(attend(ev.paper_phis[t], P.field_attn, &ev.paper_attn[t]));
    }
    phi_mfmi = ev.inst_phis.empty() ? std::vector<T>(static_cast<size_t>(K), T(0))
                                    : attend(ev.inst_phis, P.inst_attn, &ev.inst_attn);
  }

  switch (P.variant) {
    case MatchVariant::mfp:
      ev.phi = std::move(phi_mfp);
      break;
    case MatchVariant::mfmi:
      ev.phi = std::move(phi_mfmi);
      break;
    default:
      ev.phi = phi_mfp;
      ev.phi.insert(ev.phi.end(), phi_mfmi.begin(), phi_mfmi.end());
      break;
  }
}

template <class T>
T score_forward(const MatcherParamsT<T>& P, const TokenIds& target, const CandidateTokens& cand,
                PhiEval<T>& ev) {
  phi_forward(P, target, cand, ev);
  ev.score = mlp_forward(P.g, std::span<const T>(ev.phi), &ev.gcache)[0];
  return ev.score;
}

/// Backward from dscore through g, the attentions, pooling, cosine, and
/// (when grad.with_embeddings) the embedding tables.
template <class T>
void score_backward(const MatcherParamsT<T>& P, PhiEval<T>& ev, T dscore, MatcherGradT<T>& grad) {
  using namespace detail;
  const size_t K = static_cast<size_t>(P.bank.size());
  const std::vector<T> dout = {dscore};
  std::vector<T> dphi = mlp_backward(P.g, ev.gcache, std::span<const T>(dout), grad.g);

  const bool want_mfp = P.variant == MatchVariant::mfp || P.variant == MatchVariant::combined;
  const bool want_mfmi = P.variant == MatchVariant::mfmi || P.variant == MatchVariant::combined;

  if (P.variant == MatchVariant::bp) {
    if (grad.with_embeddings) {
      backprop_pooled_pair(P, ev.tgt_merged, ev.prof_merged, ev.S_bp, ev.pc_bp,
                           std::span<const T>(dphi));
      scatter_gather(ev.tgt_merged, P.dim, grad);
      scatter_gather(ev.prof_merged, P.dim, grad);
    }
    return;
  }

  std::span<const T> dmfp, dmfmi;
  if (P.variant == MatchVariant::mfp) {
    dmfp = dphi;
  } else if (P.variant == MatchVariant::mfmi) {
    dmfmi = dphi;
  } else {
    dmfp = std::span<const T>(dphi.data(), K);
    dmfmi = std::span<const T>(dphi.data() + K, K);
  }

  if (want_mfp) {
    std::vector<std::vector<T>> dfields(2, std::vector<T>(K, T(0)));
    attend_backward(ev.mfp_phis, P.field_attn, ev.mfp_attn, dmfp, dfields, grad.field);
    if (grad.with_embeddings) {
      backprop_pooled_pair(P, ev.tgt_names, ev.prof_names, ev.S_fn, ev.pc_fn,
                           std::span<const T>(dfields[0]));
      backprop_pooled_pair(P, ev.tgt_words, ev.prof_words, ev.S_fw, ev.pc_fw,
                           std::span<const T>(dfields[1]));
    }
  }
  if (want_mfmi && !ev.inst_phis.empty()) {
    std::vector<std::vector<T>> dinst(ev.inst_phis.size(), std::vector<T>(K, T(0)));
    attend_backward(ev.inst_phis, P.inst_attn, ev.inst_attn, dmfmi, dinst, grad.inst);
    for (size_t t = 0; t < ev.inst_phis.size(); ++t) {
      std::vector<std::vector<T>> dfields(2, std::vector<T>(K, T(0)));
      attend_backward(ev.paper_phis[t], P.field_attn, ev.paper_attn[t],
                      std::span<const T>(dinst[t]), dfields, grad.field);
      if (grad.with_embeddings) {
        backprop_pooled_pair(P, ev.tgt_names, ev.paper_names[t], ev.S_pn[t], ev.pc_pn[t],
                             std::span<const T>(dfields[0]));
        backprop_pooled_pair(P, ev.tgt_words, ev.paper_words[t], ev.S_pw[t], ev.pc_pw[t],
                             std::span<const T>(dfields[1]));
      }
    }
  }
  if (grad.with_embeddings) {
    scatter_gather(ev.tgt_names, P.dim, grad);
    scatter_gather(ev.tgt_words, P.dim, grad);
    if (want_mfp) {
      scatter_gather(ev.prof_names, P.dim, grad);
      scatter_gather(ev.prof_words, P.dim, grad);
    }
    if (want_mfmi) {
      for (auto& g : ev.paper_names) scatter_gather(g, P.dim, grad);
      for (auto& g : ev.paper_words) scatter_gather(g, P.dim, grad);
    }
  }
}

/// Hinge on the score gap: max{0, s(neg) - s(pos) + margin}. Gradient flows
/// only when the margin is violated.
template <class T>
T triplet_loss(const MatcherParamsT<T>& P, const TokenIds& target, const CandidateTokens& pos,
               const CandidateTokens& neg, MatcherGradT<T>* grad = nullptr) {
  PhiEval<T> ep, en;
  const T sp = score_forward(P, target, pos, ep);
  const T sn = score_forward(P, target, neg, en);
  const T loss = std::max(T(0), sn - sp + P.margin);
  if (grad && loss > T(0)) {
    score_backward(P, ep, T(-1), *grad);
    score_backward(P, en, T(1), *grad);
  }
  return loss;
}

// ---------------------------------------------------------------------------
// training, ranking, sampling, persistence (float instantiations)

struct TripletSample {
  TargetPair target;
  std::string pos;
  std::string neg;
};

struct TripletSamplingResult {
  std::vector<TripletSample> triplets;
  int skipped_no_negative = 0;
};

/// Up to `negatives_per_target` wrong persons per positive instance, drawn
/// without replacement from the candidate set. NIL instances and instances
/// with no wrong candidate contribute nothing.
TripletSamplingResult sample_triplets(const std::vector<CandidateSet>& instances,
                                      int negatives_per_target, uint64_t seed);

struct MatcherTrainConfig {
  int batch = 80;
  double lr = 0.001;
  int epochs = 5;
  uint64_t seed = 1;
  bool fine_tune_embeddings = true;
  std::string optimizer = "sgd";  // or "adam"
};

struct MatcherTrainResult {
  std::vector<double> epoch_loss;  // mean triplet loss per epoch
};

/// Mini-batch descent on the mean hinge loss. Per-triplet gradients are
/// computed in parallel and reduced in triplet order, so a fixed seed gives
/// bit-identical parameters at any thread count. Non-finite losses abort
/// with the offending batch named.
MatcherTrainResult train_matcher(MatcherParams& params, MatchContext& ctx,
                                 const std::vector<TripletSample>& triplets,
                                 const MatcherTrainConfig& cfg);

/// One plain descent step: p -= lr * g, embeddings touched sparsely.
void apply_sgd(MatcherParams& p, const MatcherGradT<float>& g, float lr);

struct RankedCandidate {
  std::string person;
  float score = 0.0f;
  std::vector<float> phi;  // kept for the downstream decision stage
};

/// Scores every candidate and sorts by (score desc, person id asc).
std::vector<RankedCandidate> rank_candidates(MatchContext& ctx, const MatcherParams& params,
                                             const TargetPair& target,
                                             const std::vector<std::string>& candidates);

/// Mean triplet loss at the current parameters, no updates.
double mean_triplet_loss(MatcherParams& params, MatchContext& ctx,
                         const std::vector<TripletSample>& triplets);

/// One-file checkpoint: a single JSON manifest line followed by flat
/// little-endian float32 blocks in declared order.
void save_matcher(const MatcherParams& params, const std::string& path);
MatcherParams load_matcher(const std::string& path);

}  // namespace nameres
