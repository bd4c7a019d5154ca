#pragma once

#include <string>
#include <vector>

#include "nameres/decider.hpp"
#include "nameres/matcher.hpp"
#include "nameres/types.hpp"

namespace nameres {

/// Agreement indicator between the true top-candidate label and the
/// decision: the matcher is only pushed further in directions the decision
/// stage confirms.
inline int reward(int y, int y_hat) { return y == y_hat ? 1 : 0; }

struct FinetuneOutcome {
  int reward = 0;
  int triplets = 0;             // triplets formed (0 when the list is too short)
  double triplet_loss_sum = 0;  // summed hinge loss before the update
  bool updated = false;         // an actual parameter step was taken
};

/// One self-correction step on a single sample: rank its candidates, let the
/// decider judge the top one, and when that judgement agrees with the truth,
/// descend the summed triplet loss that pins the top candidate above the
/// rest. Disagreement leaves the matcher bit-identical. `skip_nil` exempts
/// unresolvable samples, whose update would entrench a wrong person.
FinetuneOutcome finetune_step(MatchContext& ctx, MatcherParams& theta,
                              const DeciderParams& decider, const CandidateSet& sample, double mu,
                              bool fine_tune_embeddings, bool skip_nil);

struct JointConfig {
  int max_rounds = 10;
  double mu = 1e-4;  // fine-tune rate, one order below pre-training
  uint64_t seed = 1;
  bool skip_nil_reward_updates = false;
  bool fine_tune_embeddings = true;
  DeciderTrainConfig decider;     // per-round refresh; its seed is re-derived per round
  double converge_eps = 1e-3;     // minimum mean-F1 gain that still counts as progress
  int converge_patience = 2;      // stop after this many stalled rounds in a row
};

struct JointRound {
  int round = 0;
  double matcher_loss = 0.0;  // mean triplet loss across the round's fine-tune steps
  double decider_loss = 0.0;  // final-epoch cross-entropy of the refreshed decider
  double hr1 = 0.0;
  double f1_pos = 0.0;
  double f1_nil = 0.0;
};

struct JointResult {
  std::vector<JointRound> history;
};

/// Alternates matcher fine-tuning with decider refresh: every round walks
/// the training samples sequentially (each step may move the matcher), then
/// re-ranks, rebuilds the decision dataset, retrains the decider on it, and
/// scores the validation slice. Stops early once mean validation F1 gains
/// stay below `converge_eps` for `converge_patience` consecutive rounds.
JointResult joint_train(MatchContext& ctx, MatcherParams& theta, DeciderParams& decider,
                        const std::vector<CandidateSet>& train,
                        const std::vector<CandidateSet>& validation, const JointConfig& cfg);

/// One JSON object per round, newline-delimited.
void save_history(const std::vector<JointRound>& history, const std::string& path);

}  // namespace nameres
