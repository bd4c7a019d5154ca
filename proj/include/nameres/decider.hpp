#pragma once

#include <array>
#include <cmath>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "nameres/errors.hpp"
#include "nameres/matcher.hpp"
#include "nameres/mlp.hpp"
#include "nameres/types.hpp"

namespace nameres {

/// Accept/reject head over the pooled match feature: a perceptron ending in
/// two logits whose softmax gives P(top candidate is wrong), P(right).
template <class T>
struct DeciderParamsT {
  MlpT<T> h;  // widths: [phi width, hidden..., 2]

  template <class U>
  DeciderParamsT<U> cast() const {
    return DeciderParamsT<U>{h.template cast<U>()};
  }
};

using DeciderParams = DeciderParamsT<float>;

struct DeciderInitConfig {
  int input_width = 22;
  std::vector<int> hidden = {64, 32};
  uint64_t seed = 1;
};

DeciderParams init_decider(const DeciderInitConfig& cfg);

/// One classifier example: the pooled feature of (target, person) plus the
/// right/wrong label, with provenance kept for diagnostics.
struct DecisionInstance {
  std::vector<float> phi;
  int label = 0;  // 1 = this person is the right owner of the occurrence
  TargetPair target;
  std::string person;
};

struct DecisionDataset {
  std::vector<DecisionInstance> instances;
  int skipped_no_negative = 0;  // gold-only candidate lists: no wrong person to rank
  int skipped_empty = 0;        // unresolvable samples with no candidates at all
};

/// Ranks every sample under the current matcher and emits, per resolvable
/// sample: the gold person's feature labeled 1 plus the highest-ranked wrong
/// person's feature labeled 0; unlinkable samples contribute only their top
/// candidate labeled 0.
DecisionDataset build_decision_dataset(MatchContext& ctx, const MatcherParams& matcher,
                                       const std::vector<CandidateSet>& samples);

template <class T>
struct DeciderEvalT {
  MlpCache<T> cache;
  std::array<T, 2> probs{};
};

/// Softmax over the two logits; max-subtracted for overflow safety.
template <class T>
void decider_forward(const DeciderParamsT<T>& P, std::span<const T> phi, DeciderEvalT<T>& ev) {
  const std::vector<T> logits = mlp_forward(P.h, phi, &ev.cache);
  const T m = logits[0] > logits[1] ? logits[0] : logits[1];
  const T e0 = std::exp(logits[0] - m);
  const T e1 = std::exp(logits[1] - m);
  const T denom = e0 + e1;
  ev.probs = {e0 / denom, e1 / denom};
}

/// Cross-entropy -log P(label); when `grad` is given, accumulates parameter
/// gradients and (optionally) the input-feature gradient.
template <class T>
T decider_ce(const DeciderParamsT<T>& P, std::span<const T> phi, int label,
             MlpGradT<T>* grad = nullptr, std::vector<T>* dphi = nullptr) {
  if (label != 0 && label != 1) throw DataError("decision label must be 0 or 1");
  DeciderEvalT<T> ev;
  decider_forward(P, phi, ev);
  const std::vector<T>& logits = ev.cache.act.back();
  const T m = logits[0] > logits[1] ? logits[0] : logits[1];
  const T lse = m + std::log(std::exp(logits[0] - m) + std::exp(logits[1] - m));
  const T loss = lse - logits[static_cast<size_t>(label)];
  if (grad) {
    std::array<T, 2> dlogits = {ev.probs[0], ev.probs[1]};
    dlogits[static_cast<size_t>(label)] -= T(1);
    std::vector<T> din = mlp_backward(P.h, ev.cache, std::span<const T>(dlogits), *grad);
    if (dphi) *dphi = std::move(din);
  }
  return loss;
}

struct DeciderTrainConfig {
  int batch = 128;
  double lr = 0.001;
  int epochs = 50;
  uint64_t seed = 1;
};

struct DeciderTrainResult {
  std::vector<double> epoch_loss;  // mean cross-entropy per epoch
};

/// Mini-batch descent on mean cross-entropy. Per-example gradients are
/// computed in parallel and reduced in example order, so a fixed seed gives
/// bit-identical parameters at any thread count.
DeciderTrainResult train_decider(DeciderParams& params,
                                 const std::vector<DecisionInstance>& dataset,
                                 const DeciderTrainConfig& cfg);

struct Prediction {
  int label = 0;    // 1 = accept the candidate, 0 = unresolvable
  float p1 = 0.0f;  // probability the candidate is right
};

/// Argmax of the two class probabilities; an exact tie rejects (the
/// conservative choice when the evidence is balanced).
Prediction predict(std::span<const float> phi, const DeciderParams& params);

/// Full resolution of one occurrence: rank the candidates, then accept the
/// top one only if the decider does. nullopt = no owner in the corpus.
std::optional<std::string> assign(MatchContext& ctx, const MatcherParams& matcher,
                                  const DeciderParams& decider, const TargetPair& target,
                                  const std::vector<std::string>& candidates);

/// Same one-file manifest + float32-block layout as the matcher checkpoint.
void save_decider(const DeciderParams& params, const std::string& path);
DeciderParams load_decider(const std::string& path);

}  // namespace nameres
