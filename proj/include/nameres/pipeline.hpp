#pragma once

#include <string>
#include <vector>

#include "nameres/baselines.hpp"
#include "nameres/candidates.hpp"
#include "nameres/corpus.hpp"
#include "nameres/decider.hpp"
#include "nameres/embeddings.hpp"
#include "nameres/evaluation.hpp"
#include "nameres/joint.hpp"
#include "nameres/matcher.hpp"
#include "nameres/types.hpp"

namespace nameres {

struct SplitFractions {
  double person_test = 0.2;
  double paper_holdout = 0.2;
};

/// Every knob of the offline pipeline in one serializable bundle. A single
/// root seed reproduces everything: each stage draws from its own derived
/// stream, so per-stage seed fields do not exist here.
struct RunConfig {
  uint64_t seed = 1;
  CandidateMode candidate_mode = CandidateMode::variants;
  SynthConfig synth;
  SplitFractions split;
  TokenizerConfig tokenizer;
  SkipgramConfig skipgram;
  MatcherInitConfig matcher_init;
  MatcherTrainConfig matcher_train;
  int negatives_per_target = 9;
  DeciderInitConfig decider_init;  // input width is derived from the variant
  DeciderTrainConfig decider_train;
  JointConfig joint;
};

/// Strict parse: unknown keys are configuration errors, not typo sinks.
RunConfig run_config_from_json_text(const std::string& text, const std::string& source);
std::string run_config_to_json_text(const RunConfig& cfg);

/// Dotted-path override, e.g. ("matcher.lr", "0.01") or ("synth.clique",
/// "6"). The value is parsed as JSON when possible, else taken as a string.
void apply_override(RunConfig& cfg, const std::string& key, const std::string& value);

/// Synthetic corpus for cfg.synth under the root-derived stream.
Corpus make_synth_corpus(const RunConfig& cfg);

/// Candidate sets for known-owner targets (candidates found by name).
std::vector<CandidateSet> build_candidate_sets(const Corpus& corpus,
                                               const std::vector<TargetInstance>& targets,
                                               CandidateMode mode);

/// Everything the end-to-end run produces, kept in memory for inspection.
struct PipelineArtifacts {
  SplitResult split;
  EmbTables tables;
  MatcherParams matcher;
  DeciderParams decider;
  std::vector<CandidateSet> train_sets;   // resolvable training samples
  std::vector<CandidateSet> train_mixed;  // + right-person-removed variants
  std::vector<CandidateSet> test_sets;
  std::vector<CandidateSet> test_mixed;
  std::vector<double> matcher_epoch_loss;
  std::vector<JointRound> history;
  SliceEval pre_joint;   // test metrics before any joint round
  SliceEval post_joint;  // test metrics after the joint loop
};

/// The full offline flow: split, embedding pre-training, matcher training,
/// decision training, joint fine-tuning, with the held-out slice scored
/// before and after the joint loop. Deterministic in cfg.seed.
PipelineArtifacts run_pipeline(const Corpus& corpus, const RunConfig& cfg);

/// Test-slice report with the coauthor-separation breakdown attached.
EvalReport assemble_report(MatchContext& ctx, const MatcherParams& matcher,
                           const DeciderParams& decider,
                           const std::vector<CandidateSet>& samples);

// Flat-file forms of the intermediate artifacts the CLI passes between
// stages (JSON lines; one record per line).
void save_candidate_sets(const std::vector<CandidateSet>& sets, const std::string& path);
std::vector<CandidateSet> load_candidate_sets(const std::string& path);
void save_triplets(const std::vector<TripletSample>& triplets, const std::string& path);
std::vector<TripletSample> load_triplets(const std::string& path);
void save_decisions(const DecisionDataset& dataset, const std::string& path);
std::vector<DecisionInstance> load_decisions(const std::string& path);

}  // namespace nameres
