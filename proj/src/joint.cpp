#include "nameres/joint.hpp"

#include <cmath>
#include <fstream>
#include <span>
#include <string>

#include <nlohmann/json.hpp>

#include "nameres/evaluation.hpp"
#include "nameres/rng.hpp"

namespace nameres {

using json = nlohmann::json;

FinetuneOutcome finetune_step(MatchContext& ctx, MatcherParams& theta,
                              const DeciderParams& decider, const CandidateSet& sample, double mu,
                              bool fine_tune_embeddings, bool skip_nil) {
  FinetuneOutcome out;
  if (sample.candidates.size() < 2) return out;  // nothing to pit against the top

  std::vector<RankedCandidate> ranked =
      rank_candidates(ctx, theta, sample.target, sample.candidates);
  const Prediction pred = predict(std::span<const float>(ranked.front().phi), decider);
  const int y =
      sample.gold == GoldKind::person && ranked.front().person == sample.gold_person ? 1 : 0;
  out.reward = reward(y, pred.label);
  if (out.reward == 0) return out;
  if (skip_nil && sample.gold == GoldKind::nil) return out;

  const TokenIds& tgt = ctx.target_tokens(sample.target);
  const CandidateTokens top = ctx.candidate_tokens(ranked.front().person, sample.target.paper_id);
  std::vector<CandidateTokens> negs;
  negs.reserve(ranked.size() - 1);
  for (size_t i = 1; i < ranked.size(); ++i)
    negs.push_back(ctx.candidate_tokens(ranked[i].person, sample.target.paper_id));

  const int n = static_cast<int>(negs.size());
  std::vector<MatcherGradT<float>> grads(static_cast<size_t>(n));
  std::vector<float> losses(static_cast<size_t>(n), 0.0f);
#pragma omp parallel for schedule(dynamic)
  for (int i = 0; i < n; ++i) {
    grads[static_cast<size_t>(i)] = MatcherGradT<float>::shaped_like(theta, fine_tune_embeddings);
    losses[static_cast<size_t>(i)] =
        triplet_loss(theta, tgt, top, negs[static_cast<size_t>(i)], &grads[static_cast<size_t>(i)]);
  }

  // Serial in-order reduction keeps the step independent of thread count.
  MatcherGradT<float> total = MatcherGradT<float>::shaped_like(theta, fine_tune_embeddings);
  for (int i = 0; i < n; ++i) {
    if (!std::isfinite(losses[static_cast<size_t>(i)]))
      throw NumericError("non-finite fine-tune loss (paper \"" + sample.target.paper_id +
                         "\", negative \"" + ranked[static_cast<size_t>(i) + 1].person + "\")");
    out.triplet_loss_sum += losses[static_cast<size_t>(i)];
    total.add(grads[static_cast<size_t>(i)]);
  }
  out.triplets = n;
  apply_sgd(theta, total, static_cast<float>(mu));
  out.updated = true;
  return out;
}

JointResult joint_train(MatchContext& ctx, MatcherParams& theta, DeciderParams& decider,
                        const std::vector<CandidateSet>& train,
                        const std::vector<CandidateSet>& validation, const JointConfig& cfg) {
  if (cfg.max_rounds < 0) throw ConfigError("round count must be non-negative");
  if (!(cfg.mu > 0)) throw ConfigError("fine-tune rate must be positive");
  if (cfg.converge_patience < 1) throw ConfigError("convergence patience must be positive");

  JointResult result;
  double prev_f1 = 0.0;
  bool have_prev = false;
  int stalled = 0;

  for (int round = 0; round < cfg.max_rounds; ++round) {
    JointRound entry;
    entry.round = round;
    try {
      // Phase 1: walk the samples sequentially; each rewarded step moves the
      // matcher before the next sample is ranked.
      double loss_sum = 0.0;
      long triplets = 0;
      for (const CandidateSet& sample : train) {
        const FinetuneOutcome out =
            finetune_step(ctx, theta, decider, sample, cfg.mu, cfg.fine_tune_embeddings,
                          cfg.skip_nil_reward_updates);
        loss_sum += out.triplet_loss_sum;
        triplets += out.triplets;
      }
      entry.matcher_loss = triplets > 0 ? loss_sum / static_cast<double>(triplets) : 0.0;

      // Phase 2: only now, with the round's matcher frozen, refresh the
      // decider on re-ranked features.
      DecisionDataset dataset = build_decision_dataset(ctx, theta, train);
      DeciderTrainConfig dcfg = cfg.decider;
      dcfg.seed = derive_seed(cfg.seed, "joint.decider:" + std::to_string(round));
      const DeciderTrainResult dres = train_decider(decider, dataset.instances, dcfg);
      entry.decider_loss = dres.epoch_loss.empty() ? 0.0 : dres.epoch_loss.back();

      // Phase 3: score the held-out slice with both stages frozen.
      const SliceEval ev = evaluate_slice(ctx, theta, decider, validation);
      entry.hr1 = ev.hr1;
      entry.f1_pos = ev.metrics.pos.f1;
      entry.f1_nil = ev.metrics.nil.f1;
    } catch (const NumericError& e) {
      throw NumericError("joint round " + std::to_string(round) + ": " + e.what());
    }
    result.history.push_back(entry);

    const double f1 = 0.5 * (entry.f1_pos + entry.f1_nil);
    if (have_prev) {
      if (f1 - prev_f1 < cfg.converge_eps)
        ++stalled;
      else
        stalled = 0;
    }
    prev_f1 = f1;
    have_prev = true;
    if (stalled >= cfg.converge_patience) break;
  }
  return result;
}

void save_history(const std::vector<JointRound>& history, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write \"" + path + "\"");
  for (const JointRound& r : history) {
    json j;
    j["round"] = r.round;
    j["matcher_loss"] = r.matcher_loss;
    j["decider_loss"] = r.decider_loss;
    j["hr1"] = r.hr1;
    j["f1_pos"] = r.f1_pos;
    j["f1_nil"] = r.f1_nil;
    out << j.dump() << "\n";
  }
  if (!out) throw DataError("short write to \"" + path + "\"");
}

}  // namespace nameres
