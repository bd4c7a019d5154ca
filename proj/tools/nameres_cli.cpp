// Command-line front end: one subcommand per pipeline stage plus single-shot
// prediction. Stages communicate through fixed file names under --out, and
// every stage rewrites run_config.json so a directory always documents the
// exact configuration that produced its artifacts.
//
// Exit codes: 0 success, 1 usage/config error, 2 data error, 3 numeric
// failure. Each failure prints one line to stderr: "[kind] reason".

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "nameres/baselines.hpp"
#include "nameres/candidates.hpp"
#include "nameres/corpus.hpp"
#include "nameres/decider.hpp"
#include "nameres/embeddings.hpp"
#include "nameres/errors.hpp"
#include "nameres/evaluation.hpp"
#include "nameres/features.hpp"
#include "nameres/gbdt.hpp"
#include "nameres/joint.hpp"
#include "nameres/matcher.hpp"
#include "nameres/pipeline.hpp"
#include "nameres/rng.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace nameres;

namespace {

struct CommonArgs {
  std::string config_path;
  std::string out_dir = ".";
  std::string corpus_path;  // defaults to <out>/corpus.json
  std::optional<uint64_t> seed;
  std::string variant;
  std::vector<std::string> overrides;
};

void add_common(CLI::App* sub, CommonArgs& c) {
  sub->add_option("--config", c.config_path, "RunConfig JSON file");
  sub->add_option("--out", c.out_dir, "artifact directory (default .)");
  sub->add_option("--seed", c.seed, "root seed override");
  sub->add_option("--variant", c.variant, "matcher variant: bp, mfp, mfmi, combined");
  sub->add_option("--set", c.overrides, "dotted-path override, key=value; repeatable");
}

void add_corpus_flag(CLI::App* sub, CommonArgs& c) {
  sub->add_option("--corpus", c.corpus_path, "corpus file (default <out>/corpus.json)");
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void spit(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path.string());
  out << text;
}

/// Defaults <- config file (explicit --config, else <out>/run_config.json if
/// present) <- --seed/--variant <- --set overrides in order.
RunConfig resolve_config(const CommonArgs& c) {
  RunConfig cfg;
  std::string path = c.config_path;
  if (path.empty()) {
    const fs::path stored = fs::path(c.out_dir) / "run_config.json";
    if (fs::exists(stored)) path = stored.string();
  }
  if (!path.empty()) cfg = run_config_from_json_text(slurp(path), path);
  if (c.seed) cfg.seed = *c.seed;
  if (!c.variant.empty()) cfg.matcher_init.variant = variant_from_string(c.variant);
  for (const std::string& kv : c.overrides) {
    const size_t eq = kv.find('=');
    if (eq == std::string::npos || eq == 0)
      throw ConfigError("--set expects key=value, got '" + kv + "'");
    apply_override(cfg, kv.substr(0, eq), kv.substr(eq + 1));
  }
  return cfg;
}

fs::path out_file(const CommonArgs& c, const char* name) { return fs::path(c.out_dir) / name; }

void store_config(const CommonArgs& c, const RunConfig& cfg) {
  fs::create_directories(c.out_dir);
  spit(out_file(c, "run_config.json"), run_config_to_json_text(cfg));
}

Corpus load_input_corpus(const CommonArgs& c) {
  const std::string path =
      c.corpus_path.empty() ? out_file(c, "corpus.json").string() : c.corpus_path;
  return load_corpus_file(path);
}

SplitResult make_split(const Corpus& corpus, const RunConfig& cfg) {
  return split_corpus(corpus, cfg.split.person_test, cfg.split.paper_holdout,
                      derive_seed(cfg.seed, "split"));
}

std::vector<CandidateSet> with_nil_variants(std::vector<CandidateSet> sets) {
  for (CandidateSet& s : make_nil_variants(sets)) sets.push_back(std::move(s));
  return sets;
}

/// A decider trained against one matcher head is meaningless against
/// another; refuse mismatched artifact pairs before they mis-score quietly.
void check_compatible(const RunConfig& cfg, const MatcherParams& matcher,
                      const DeciderParams* decider) {
  if (matcher.variant != cfg.matcher_init.variant)
    throw DataError("matcher checkpoint holds variant " + to_string(matcher.variant) +
                    " but the configuration asks for " + to_string(cfg.matcher_init.variant));
  if (decider && decider->h.input_width() != matcher.phi_width())
    throw DataError("decider checkpoint expects feature width " +
                    std::to_string(decider->h.input_width()) + " but the matcher produces " +
                    std::to_string(matcher.phi_width()));
}

json slice_json(const SliceEval& ev) {
  json j;
  j["n_pos"] = ev.n_pos;
  j["n_nil"] = ev.n_nil;
  j["hr1"] = ev.hr1;
  j["hr3"] = ev.hr3;
  j["hr5"] = ev.hr5;
  j["mrr"] = ev.mrr;
  j["confusion"] = {{"tp", ev.confusion.tp}, {"fn", ev.confusion.fn},
                    {"tn", ev.confusion.tn}, {"fp", ev.confusion.fp}};
  j["pos"] = {{"precision", ev.metrics.pos.precision},
              {"recall", ev.metrics.pos.recall},
              {"f1", ev.metrics.pos.f1}};
  j["nil"] = {{"precision", ev.metrics.nil.precision},
              {"recall", ev.metrics.nil.recall},
              {"f1", ev.metrics.nil.f1}};
  return j;
}

// ---------------------------------------------------------------------------
// subcommands

int cmd_gen_synth(const CommonArgs& c) {
  const RunConfig cfg = resolve_config(c);
  const Corpus corpus = make_synth_corpus(cfg);
  fs::create_directories(c.out_dir);
  save_corpus_file(corpus, out_file(c, "corpus.json").string());
  store_config(c, cfg);
  std::cout << "corpus.json: " << corpus.papers.size() << " papers, " << corpus.persons.size()
            << " persons\n";
  return 0;
}

int cmd_train_embed(const CommonArgs& c) {
  const RunConfig cfg = resolve_config(c);
  const Corpus corpus = load_input_corpus(c);
  const SplitResult split = make_split(corpus, cfg);
  SkipgramConfig sg = cfg.skipgram;
  sg.seed = derive_seed(cfg.seed, "embed");
  const EmbTables tables = train_embeddings(split.corpus, cfg.tokenizer, sg);
  fs::create_directories(c.out_dir);
  save_embeddings(tables, out_file(c, "embed.manifest").string(), out_file(c, "embed.bin").string());
  store_config(c, cfg);
  std::cout << "embed.manifest + embed.bin: dim " << tables.dim << ", " << tables.names.vocab.size()
            << " name tokens, " << tables.words.vocab.size() << " word tokens\n";
  return 0;
}

int cmd_sample_triplets(const CommonArgs& c) {
  const RunConfig cfg = resolve_config(c);
  const Corpus corpus = load_input_corpus(c);
  const SplitResult split = make_split(corpus, cfg);
  const auto train_sets =
      build_candidate_sets(split.corpus, split.train_targets, cfg.candidate_mode);
  const TripletSamplingResult res =
      sample_triplets(train_sets, cfg.negatives_per_target, derive_seed(cfg.seed, "triplets"));
  fs::create_directories(c.out_dir);
  save_triplets(res.triplets, out_file(c, "triplets.jsonl").string());
  store_config(c, cfg);
  std::cout << "triplets.jsonl: " << res.triplets.size() << " triplets ("
            << res.skipped_no_negative << " targets had no wrong candidate)\n";
  return 0;
}

int cmd_train_match(const CommonArgs& c) {
  const RunConfig cfg = resolve_config(c);
  const Corpus corpus = load_input_corpus(c);
  const SplitResult split = make_split(corpus, cfg);
  const EmbTables tables =
      load_embeddings(out_file(c, "embed.manifest").string(), out_file(c, "embed.bin").string());
  MatcherInitConfig mi = cfg.matcher_init;
  mi.seed = derive_seed(cfg.seed, "matcher");
  MatcherParams matcher = init_matcher(tables, mi);
  const std::vector<TripletSample> triplets = load_triplets(out_file(c, "triplets.jsonl").string());
  MatchContext ctx(split.corpus, matcher.names.vocab, matcher.words.vocab, cfg.tokenizer);
  MatcherTrainConfig mt = cfg.matcher_train;
  mt.seed = derive_seed(cfg.seed, "matcher.train");
  const MatcherTrainResult res = train_matcher(matcher, ctx, triplets, mt);
  save_matcher(matcher, out_file(c, "matcher.ckpt").string());
  store_config(c, cfg);
  std::cout << "matcher.ckpt: " << to_string(matcher.variant) << " variant";
  if (!res.epoch_loss.empty())
    std::cout << ", triplet loss " << res.epoch_loss.front() << " -> " << res.epoch_loss.back();
  std::cout << "\n";
  return 0;
}

int cmd_build_decision(const CommonArgs& c) {
  const RunConfig cfg = resolve_config(c);
  const Corpus corpus = load_input_corpus(c);
  const SplitResult split = make_split(corpus, cfg);
  const MatcherParams matcher = load_matcher(out_file(c, "matcher.ckpt").string());
  check_compatible(cfg, matcher, nullptr);
  const auto train_mixed = with_nil_variants(
      build_candidate_sets(split.corpus, split.train_targets, cfg.candidate_mode));
  MatchContext ctx(split.corpus, matcher.names.vocab, matcher.words.vocab, cfg.tokenizer);
  const DecisionDataset dataset = build_decision_dataset(ctx, matcher, train_mixed);
  save_decisions(dataset, out_file(c, "decisions.jsonl").string());
  store_config(c, cfg);
  std::cout << "decisions.jsonl: " << dataset.instances.size() << " instances ("
            << dataset.skipped_no_negative << " gold-only, " << dataset.skipped_empty
            << " empty)\n";
  return 0;
}

int cmd_train_decide(const CommonArgs& c) {
  const RunConfig cfg = resolve_config(c);
  const MatcherParams matcher = load_matcher(out_file(c, "matcher.ckpt").string());
  const std::vector<DecisionInstance> rows =
      load_decisions(out_file(c, "decisions.jsonl").string());
  DeciderInitConfig di = cfg.decider_init;
  di.input_width = matcher.phi_width();
  di.seed = derive_seed(cfg.seed, "decider");
  DeciderParams decider = init_decider(di);
  DeciderTrainConfig dt = cfg.decider_train;
  dt.seed = derive_seed(cfg.seed, "decider.train");
  const DeciderTrainResult res = train_decider(decider, rows, dt);
  save_decider(decider, out_file(c, "decider.ckpt").string());
  store_config(c, cfg);
  std::cout << "decider.ckpt: cross-entropy " << res.epoch_loss.front() << " -> "
            << res.epoch_loss.back() << " over " << res.epoch_loss.size() << " epochs\n";
  return 0;
}

int cmd_joint_finetune(const CommonArgs& c) {
  const RunConfig cfg = resolve_config(c);
  const Corpus corpus = load_input_corpus(c);
  const SplitResult split = make_split(corpus, cfg);
  MatcherParams matcher = load_matcher(out_file(c, "matcher.ckpt").string());
  DeciderParams decider = load_decider(out_file(c, "decider.ckpt").string());
  check_compatible(cfg, matcher, &decider);
  const auto train_mixed = with_nil_variants(
      build_candidate_sets(split.corpus, split.train_targets, cfg.candidate_mode));
  const auto test_mixed = with_nil_variants(
      build_candidate_sets(split.corpus, split.test_targets, cfg.candidate_mode));
  MatchContext ctx(split.corpus, matcher.names.vocab, matcher.words.vocab, cfg.tokenizer);
  JointConfig jc = cfg.joint;
  jc.seed = derive_seed(cfg.seed, "joint");
  const JointResult res = joint_train(ctx, matcher, decider, train_mixed, test_mixed, jc);
  save_matcher(matcher, out_file(c, "matcher.ckpt").string());
  save_decider(decider, out_file(c, "decider.ckpt").string());
  save_history(res.history, out_file(c, "history.jsonl").string());
  store_config(c, cfg);
  for (const JointRound& r : res.history)
    std::cout << "round " << r.round << ": matcher loss " << r.matcher_loss << ", decider loss "
              << r.decider_loss << ", hr@1 " << r.hr1 << ", f1 " << r.f1_pos << "/" << r.f1_nil
              << "\n";
  std::cout << "history.jsonl: " << res.history.size() << " rounds\n";
  return 0;
}

int cmd_evaluate(const CommonArgs& c) {
  const RunConfig cfg = resolve_config(c);
  const Corpus corpus = load_input_corpus(c);
  const SplitResult split = make_split(corpus, cfg);
  const MatcherParams matcher = load_matcher(out_file(c, "matcher.ckpt").string());
  const DeciderParams decider = load_decider(out_file(c, "decider.ckpt").string());
  check_compatible(cfg, matcher, &decider);
  const auto test_mixed = with_nil_variants(
      build_candidate_sets(split.corpus, split.test_targets, cfg.candidate_mode));
  MatchContext ctx(split.corpus, matcher.names.vocab, matcher.words.vocab, cfg.tokenizer);
  const EvalReport report = assemble_report(ctx, matcher, decider, test_mixed);
  spit(out_file(c, "report.json"), eval_report_json(report));
  store_config(c, cfg);
  std::cout << eval_report_text(report);
  return 0;
}

int cmd_predict(const CommonArgs& c, const std::string& paper_id, int author_index) {
  const RunConfig cfg = resolve_config(c);
  const Corpus corpus = load_input_corpus(c);
  const MatcherParams matcher = load_matcher(out_file(c, "matcher.ckpt").string());
  const DeciderParams decider = load_decider(out_file(c, "decider.ckpt").string());
  check_compatible(cfg, matcher, &decider);
  const TargetPair target{paper_id, author_index};
  const std::vector<std::string> candidates = find_candidates(corpus, target, cfg.candidate_mode);
  MatchContext ctx(corpus, matcher.names.vocab, matcher.words.vocab, cfg.tokenizer);
  const std::vector<RankedCandidate> ranked = rank_candidates(ctx, matcher, target, candidates);

  json out;
  out["paper_id"] = paper_id;
  out["author_index"] = author_index;
  out["candidates"] = json::array();
  for (const RankedCandidate& rc : ranked)
    out["candidates"].push_back({{"person", rc.person}, {"score", rc.score}});
  out["assignment"] = nullptr;
  if (!ranked.empty()) {
    const Prediction pred = predict(std::span<const float>(ranked.front().phi), decider);
    if (pred.label == 1) out["assignment"] = ranked.front().person;
  }
  std::cout << out.dump(2) << "\n";
  return 0;
}

int cmd_features(const CommonArgs& c) {
  const RunConfig cfg = resolve_config(c);
  const Corpus corpus = load_input_corpus(c);
  const SplitResult split = make_split(corpus, cfg);
  auto sets = build_candidate_sets(split.corpus, split.train_targets, cfg.candidate_mode);
  for (CandidateSet& s :
       build_candidate_sets(split.corpus, split.test_targets, cfg.candidate_mode))
    sets.push_back(std::move(s));
  const std::vector<FeatureRow> rows = feature_rows(split.corpus, sets);
  fs::create_directories(c.out_dir);
  write_features_csv(rows, out_file(c, "features.csv").string());
  store_config(c, cfg);
  std::cout << "features.csv: " << rows.size() << " rows x " << kFeatureCount << " features\n";
  return 0;
}

int cmd_baseline(const CommonArgs& c, const std::string& kind) {
  const RunConfig cfg = resolve_config(c);
  const Corpus corpus = load_input_corpus(c);
  const SplitResult split = make_split(corpus, cfg);
  const auto train_mixed = with_nil_variants(
      build_candidate_sets(split.corpus, split.train_targets, cfg.candidate_mode));
  const auto test_mixed = with_nil_variants(
      build_candidate_sets(split.corpus, split.test_targets, cfg.candidate_mode));

  json out;
  if (kind == "threshold" || kind == "both") {
    const MatcherParams matcher = load_matcher(out_file(c, "matcher.ckpt").string());
    check_compatible(cfg, matcher, nullptr);
    MatchContext ctx(split.corpus, matcher.names.vocab, matcher.words.vocab, cfg.tokenizer);
    std::vector<double> scores;
    std::vector<int> labels;
    collect_top_scores(ctx, matcher, train_mixed, scores, labels);
    const ThresholdChoice choice = fit_threshold(scores, labels);
    const SliceEval ev = evaluate_threshold(ctx, matcher, choice.theta, test_mixed);
    out["threshold"] = slice_json(ev);
    out["threshold"]["theta"] = choice.theta;
    out["threshold"]["train_accuracy"] = choice.accuracy;
    std::cout << "threshold: theta " << choice.theta << ", hr@1 " << ev.hr1 << ", f1 "
              << ev.metrics.pos.f1 << "/" << ev.metrics.nil.f1 << "\n";
  }
  if (kind == "boosted" || kind == "both") {
    const std::vector<FeatureRow> train_rows = feature_rows(split.corpus, train_mixed);
    std::vector<FeatureVector> xs;
    std::vector<int> ys;
    xs.reserve(train_rows.size());
    ys.reserve(train_rows.size());
    for (const FeatureRow& r : train_rows) {
      xs.push_back(r.x);
      ys.push_back(r.label);
    }
    const BoostedModel model = train_boosted(xs, ys, BoostConfig{});
    const SliceEval ev = evaluate_boosted(split.corpus, model, test_mixed);
    out["boosted"] = slice_json(ev);
    out["boosted"]["trees"] = model.trees.size();
    std::cout << "boosted: " << model.trees.size() << " trees, hr@1 " << ev.hr1 << ", f1 "
              << ev.metrics.pos.f1 << "/" << ev.metrics.nil.f1 << "\n";
  }
  fs::create_directories(c.out_dir);
  spit(out_file(c, "baseline.json"), out.dump(2) + "\n");
  store_config(c, cfg);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"continuous author-name disambiguation pipeline"};
  app.require_subcommand(1);

  CommonArgs c;
  std::string paper_id, baseline_kind = "both";
  int author_index = 0;
  std::function<int()> run;

  auto* gen = app.add_subcommand("gen-synth", "generate a planted synthetic corpus");
  add_common(gen, c);
  gen->callback([&] { run = [&] { return cmd_gen_synth(c); }; });

  auto* embed = app.add_subcommand("train-embed", "pre-train token embeddings");
  add_common(embed, c);
  add_corpus_flag(embed, c);
  embed->callback([&] { run = [&] { return cmd_train_embed(c); }; });

  auto* trip = app.add_subcommand("sample-triplets", "draw training triplets");
  add_common(trip, c);
  add_corpus_flag(trip, c);
  trip->callback([&] { run = [&] { return cmd_sample_triplets(c); }; });

  auto* match = app.add_subcommand("train-match", "train the ranking matcher");
  add_common(match, c);
  add_corpus_flag(match, c);
  match->callback([&] { run = [&] { return cmd_train_match(c); }; });

  auto* build = app.add_subcommand("build-decision", "rank and label decision examples");
  add_common(build, c);
  add_corpus_flag(build, c);
  build->callback([&] { run = [&] { return cmd_build_decision(c); }; });

  auto* decide = app.add_subcommand("train-decide", "train the accept/reject head");
  add_common(decide, c);
  decide->callback([&] { run = [&] { return cmd_train_decide(c); }; });

  auto* joint = app.add_subcommand("joint-finetune", "reward-gated joint fine-tuning");
  add_common(joint, c);
  add_corpus_flag(joint, c);
  joint->callback([&] { run = [&] { return cmd_joint_finetune(c); }; });

  auto* eval = app.add_subcommand("evaluate", "score the held-out slice");
  add_common(eval, c);
  add_corpus_flag(eval, c);
  eval->callback([&] { run = [&] { return cmd_evaluate(c); }; });

  auto* pred = app.add_subcommand("predict", "resolve one paper-author occurrence");
  add_common(pred, c);
  add_corpus_flag(pred, c);
  pred->add_option("--paper", paper_id, "target paper id")->required();
  pred->add_option("--author-index", author_index, "target author slot")->required();
  pred->callback([&] { run = [&] { return cmd_predict(c, paper_id, author_index); }; });

  auto* feat = app.add_subcommand("features", "write the hand-engineered feature table");
  add_common(feat, c);
  add_corpus_flag(feat, c);
  feat->callback([&] { run = [&] { return cmd_features(c); }; });

  auto* base = app.add_subcommand("baseline", "score-cut and boosted-tree baselines");
  add_common(base, c);
  add_corpus_flag(base, c);
  base->add_option("--kind", baseline_kind, "threshold, boosted, or both")
      ->check(CLI::IsMember({"threshold", "boosted", "both"}));
  base->callback([&] { run = [&] { return cmd_baseline(c, baseline_kind); }; });

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "[usage] " << e.what() << "\n";
    return 1;
  }

  try {
    return run();
  } catch (const ConfigError& e) {
    std::cerr << "[usage] " << e.what() << "\n";
    return 1;
  } catch (const DataError& e) {
    std::cerr << "[data] " << e.what() << "\n";
    return 2;
  } catch (const NumericError& e) {
    std::cerr << "[numeric] " << e.what() << "\n";
    return 3;
  }
}
