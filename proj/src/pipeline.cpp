#include "nameres/pipeline.hpp"

#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "nameres/candidates.hpp"
#include "nameres/errors.hpp"
#include "nameres/rng.hpp"

namespace nameres {

using json = nlohmann::json;

namespace {

void reject_unknown(const json& j, std::initializer_list<const char*> known,
                    const std::string& where) {
  for (const auto& [key, value] : j.items()) {
    bool ok = false;
    for (const char* k : known)
      if (key == k) {
        ok = true;
        break;
      }
    if (!ok) throw ConfigError("unknown key \"" + key + "\" in " + where);
  }
}

template <class T>
void take(const json& j, const char* key, T& out) {
  auto it = j.find(key);
  if (it == j.end()) return;
  try {
    out = it->get<T>();
  } catch (const json::exception& e) {
    throw ConfigError(std::string("bad value for \"") + key + "\": " + e.what());
  }
}

std::string mode_to_string(CandidateMode m) {
  return m == CandidateMode::variants ? "variants" : "jaro_winkler";
}

CandidateMode mode_from_string(const std::string& s) {
  if (s == "variants") return CandidateMode::variants;
  if (s == "jaro_winkler") return CandidateMode::jaro_winkler;
  throw ConfigError("unknown candidate mode \"" + s + "\"");
}

}  // namespace

RunConfig run_config_from_json_text(const std::string& text, const std::string& source) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(source + ": " + e.what());
  }
  if (!j.is_object()) throw ConfigError(source + ": configuration must be a JSON object");
  reject_unknown(j,
                 {"seed", "variant", "candidate_mode", "synth", "split", "tokenizer", "skipgram",
                  "matcher", "decider", "joint"},
                 source);

  RunConfig cfg;
  take(j, "seed", cfg.seed);
  if (j.contains("variant"))
    cfg.matcher_init.variant = variant_from_string(j.at("variant").get<std::string>());
  if (j.contains("candidate_mode"))
    cfg.candidate_mode = mode_from_string(j.at("candidate_mode").get<std::string>());

  if (j.contains("synth")) {
    const json& s = j.at("synth");
    reject_unknown(s,
                   {"num_names", "persons_per_name", "papers_per_person", "topic_vocab",
                    "shared_vocab", "clique", "coauthor_overlap"},
                   source + ":synth");
    take(s, "num_names", cfg.synth.num_names);
    take(s, "persons_per_name", cfg.synth.persons_per_name);
    take(s, "papers_per_person", cfg.synth.papers_per_person);
    take(s, "topic_vocab", cfg.synth.topic_vocab);
    take(s, "shared_vocab", cfg.synth.shared_vocab);
    take(s, "clique", cfg.synth.clique);
    take(s, "coauthor_overlap", cfg.synth.coauthor_overlap);
  }
  if (j.contains("split")) {
    const json& s = j.at("split");
    reject_unknown(s, {"person_test_fraction", "paper_holdout_fraction"}, source + ":split");
    take(s, "person_test_fraction", cfg.split.person_test);
    take(s, "paper_holdout_fraction", cfg.split.paper_holdout);
  }
  if (j.contains("tokenizer")) {
    const json& s = j.at("tokenizer");
    reject_unknown(s, {"stem"}, source + ":tokenizer");
    take(s, "stem", cfg.tokenizer.stem);
  }
  if (j.contains("skipgram")) {
    const json& s = j.at("skipgram");
    reject_unknown(s, {"dim", "negatives", "epochs", "lr"}, source + ":skipgram");
    take(s, "dim", cfg.skipgram.dim);
    take(s, "negatives", cfg.skipgram.negatives);
    take(s, "epochs", cfg.skipgram.epochs);
    take(s, "lr", cfg.skipgram.lr);
  }
  if (j.contains("matcher")) {
    const json& s = j.at("matcher");
    reject_unknown(s,
                   {"hidden", "margin", "batch", "lr", "epochs", "fine_tune_embeddings",
                    "optimizer", "negatives_per_target"},
                   source + ":matcher");
    take(s, "hidden", cfg.matcher_init.hidden);
    take(s, "margin", cfg.matcher_init.margin);
    take(s, "batch", cfg.matcher_train.batch);
    take(s, "lr", cfg.matcher_train.lr);
    take(s, "epochs", cfg.matcher_train.epochs);
    take(s, "fine_tune_embeddings", cfg.matcher_train.fine_tune_embeddings);
    take(s, "optimizer", cfg.matcher_train.optimizer);
    take(s, "negatives_per_target", cfg.negatives_per_target);
  }
  if (j.contains("decider")) {
    const json& s = j.at("decider");
    reject_unknown(s, {"hidden", "batch", "lr", "epochs"}, source + ":decider");
    take(s, "hidden", cfg.decider_init.hidden);
    take(s, "batch", cfg.decider_train.batch);
    take(s, "lr", cfg.decider_train.lr);
    take(s, "epochs", cfg.decider_train.epochs);
  }
  if (j.contains("joint")) {
    const json& s = j.at("joint");
    reject_unknown(s,
                   {"max_rounds", "mu", "skip_nil_reward_updates", "fine_tune_embeddings",
                    "converge_eps", "converge_patience", "decider"},
                   source + ":joint");
    take(s, "max_rounds", cfg.joint.max_rounds);
    take(s, "mu", cfg.joint.mu);
    take(s, "skip_nil_reward_updates", cfg.joint.skip_nil_reward_updates);
    take(s, "fine_tune_embeddings", cfg.joint.fine_tune_embeddings);
    take(s, "converge_eps", cfg.joint.converge_eps);
    take(s, "converge_patience", cfg.joint.converge_patience);
    if (s.contains("decider")) {
      const json& d = s.at("decider");
      reject_unknown(d, {"batch", "lr", "epochs"}, source + ":joint:decider");
      take(d, "batch", cfg.joint.decider.batch);
      take(d, "lr", cfg.joint.decider.lr);
      take(d, "epochs", cfg.joint.decider.epochs);
    }
  }
  return cfg;
}

std::string run_config_to_json_text(const RunConfig& cfg) {
  json j;
  j["seed"] = cfg.seed;
  j["variant"] = to_string(cfg.matcher_init.variant);
  j["candidate_mode"] = mode_to_string(cfg.candidate_mode);
  j["synth"] = {{"num_names", cfg.synth.num_names},
                {"persons_per_name", cfg.synth.persons_per_name},
                {"papers_per_person", cfg.synth.papers_per_person},
                {"topic_vocab", cfg.synth.topic_vocab},
                {"shared_vocab", cfg.synth.shared_vocab},
                {"clique", cfg.synth.clique},
                {"coauthor_overlap", cfg.synth.coauthor_overlap}};
  j["split"] = {{"person_test_fraction", cfg.split.person_test},
                {"paper_holdout_fraction", cfg.split.paper_holdout}};
  j["tokenizer"] = {{"stem", cfg.tokenizer.stem}};
  j["skipgram"] = {{"dim", cfg.skipgram.dim},
                   {"negatives", cfg.skipgram.negatives},
                   {"epochs", cfg.skipgram.epochs},
                   {"lr", cfg.skipgram.lr}};
  j["matcher"] = {{"hidden", cfg.matcher_init.hidden},
                  {"margin", cfg.matcher_init.margin},
                  {"batch", cfg.matcher_train.batch},
                  {"lr", cfg.matcher_train.lr},
                  {"epochs", cfg.matcher_train.epochs},
                  {"fine_tune_embeddings", cfg.matcher_train.fine_tune_embeddings},
                  {"optimizer", cfg.matcher_train.optimizer},
                  {"negatives_per_target", cfg.negatives_per_target}};
  j["decider"] = {{"hidden", cfg.decider_init.hidden},
                  {"batch", cfg.decider_train.batch},
                  {"lr", cfg.decider_train.lr},
                  {"epochs", cfg.decider_train.epochs}};
  j["joint"] = {{"max_rounds", cfg.joint.max_rounds},
                {"mu", cfg.joint.mu},
                {"skip_nil_reward_updates", cfg.joint.skip_nil_reward_updates},
                {"fine_tune_embeddings", cfg.joint.fine_tune_embeddings},
                {"converge_eps", cfg.joint.converge_eps},
                {"converge_patience", cfg.joint.converge_patience},
                {"decider",
                 {{"batch", cfg.joint.decider.batch},
                  {"lr", cfg.joint.decider.lr},
                  {"epochs", cfg.joint.decider.epochs}}}};
  return j.dump(2) + "\n";
}

void apply_override(RunConfig& cfg, const std::string& key, const std::string& value) {
  json j = json::parse(run_config_to_json_text(cfg));
  json* node = &j;
  size_t start = 0;
  while (true) {
    const size_t dot = key.find('.', start);
    const std::string part = key.substr(start, dot - start);
    if (part.empty()) throw ConfigError("empty segment in override key \"" + key + "\"");
    if (!node->is_object() || !node->contains(part))
      throw ConfigError("unknown override key \"" + key + "\"");
    node = &(*node)[part];
    if (dot == std::string::npos) break;
    start = dot + 1;
  }
  json parsed;
  try {
    parsed = json::parse(value);
  } catch (const json::parse_error&) {
    parsed = value;  // unquoted strings like --set matcher.optimizer=adam
  }
  *node = parsed;
  cfg = run_config_from_json_text(j.dump(), "--set " + key);
}

Corpus make_synth_corpus(const RunConfig& cfg) {
  return gen_synthetic(cfg.synth, derive_seed(cfg.seed, "synth"));
}

std::vector<CandidateSet> build_candidate_sets(const Corpus& corpus,
                                               const std::vector<TargetInstance>& targets,
                                               CandidateMode mode) {
  std::vector<CandidateSet> sets;
  sets.reserve(targets.size());
  for (const TargetInstance& t : targets) {
    CandidateSet s;
    s.target = t.target;
    s.gold = GoldKind::person;
    s.gold_person = t.gold_person;
    s.candidates = find_candidates(corpus, t.target, mode);
    sets.push_back(std::move(s));
  }
  return sets;
}

PipelineArtifacts run_pipeline(const Corpus& corpus, const RunConfig& cfg) {
  PipelineArtifacts art;
  art.split = split_corpus(corpus, cfg.split.person_test, cfg.split.paper_holdout,
                           derive_seed(cfg.seed, "split"));

  SkipgramConfig sg = cfg.skipgram;
  sg.seed = derive_seed(cfg.seed, "embed");
  art.tables = train_embeddings(art.split.corpus, cfg.tokenizer, sg);

  art.train_sets = build_candidate_sets(art.split.corpus, art.split.train_targets,
                                        cfg.candidate_mode);
  art.test_sets = build_candidate_sets(art.split.corpus, art.split.test_targets,
                                       cfg.candidate_mode);
  // Mixed slices double every resolvable sample with its right-person-removed
  // variant, so the decision stage sees both answers.
  art.train_mixed = art.train_sets;
  for (CandidateSet& s : make_nil_variants(art.train_sets)) art.train_mixed.push_back(std::move(s));
  art.test_mixed = art.test_sets;
  for (CandidateSet& s : make_nil_variants(art.test_sets)) art.test_mixed.push_back(std::move(s));

  MatcherInitConfig mi = cfg.matcher_init;
  mi.seed = derive_seed(cfg.seed, "matcher");
  art.matcher = init_matcher(art.tables, mi);
  MatchContext ctx(art.split.corpus, art.matcher.names.vocab, art.matcher.words.vocab,
                   cfg.tokenizer);

  const TripletSamplingResult triplets =
      sample_triplets(art.train_sets, cfg.negatives_per_target, derive_seed(cfg.seed, "triplets"));
  MatcherTrainConfig mt = cfg.matcher_train;
  mt.seed = derive_seed(cfg.seed, "matcher.train");
  art.matcher_epoch_loss = train_matcher(art.matcher, ctx, triplets.triplets, mt).epoch_loss;

  DeciderInitConfig di = cfg.decider_init;
  di.input_width = art.matcher.phi_width();
  di.seed = derive_seed(cfg.seed, "decider");
  art.decider = init_decider(di);
  const DecisionDataset decisions = build_decision_dataset(ctx, art.matcher, art.train_mixed);
  DeciderTrainConfig dt = cfg.decider_train;
  dt.seed = derive_seed(cfg.seed, "decider.train");
  train_decider(art.decider, decisions.instances, dt);

  art.pre_joint = evaluate_slice(ctx, art.matcher, art.decider, art.test_mixed);

  JointConfig jc = cfg.joint;
  jc.seed = derive_seed(cfg.seed, "joint");
  art.history =
      joint_train(ctx, art.matcher, art.decider, art.train_mixed, art.test_mixed, jc).history;

  art.post_joint = evaluate_slice(ctx, art.matcher, art.decider, art.test_mixed);
  return art;
}

EvalReport assemble_report(MatchContext& ctx, const MatcherParams& matcher,
                           const DeciderParams& decider,
                           const std::vector<CandidateSet>& samples) {
  EvalReport report;
  report.slice = evaluate_slice(ctx, matcher, decider, samples);

  std::vector<StratifiedInstance> strat;
  size_t pos_index = 0;
  for (const CandidateSet& sample : samples) {
    if (sample.gold != GoldKind::person) continue;
    StratifiedInstance inst;
    inst.hit = report.slice.pos_gold_ranks[pos_index] == 1;
    ++pos_index;
    if (sample.candidates.size() < 2) {
      inst.defined = false;
    } else {
      const std::vector<int> counts =
          shared_coauthor_counts(ctx.corpus(), sample.target, sample.candidates);
      const auto [lo, hi] = std::minmax_element(counts.begin(), counts.end());
      inst.defined = *lo != *hi;
      if (inst.defined)
        inst.ratio = same_coauthor_ratio(ctx.corpus(), sample.target, sample.candidates);
    }
    strat.push_back(inst);
  }
  report.stratified = stratified_report(strat);
  return report;
}

// ---------------------------------------------------------------------------
// flat-file artifact forms

namespace {

std::vector<std::string> read_lines(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open \"" + path + "\"");
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line))
    if (!line.empty()) lines.push_back(line);
  return lines;
}

json parse_line(const std::string& line, const std::string& path, size_t index) {
  try {
    return json::parse(line);
  } catch (const json::parse_error& e) {
    throw DataError(path + ":" + std::to_string(index + 1) + ": " + e.what());
  }
}

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write \"" + path + "\"");
  return out;
}

}  // namespace

void save_candidate_sets(const std::vector<CandidateSet>& sets, const std::string& path) {
  std::ofstream out = open_out(path);
  for (const CandidateSet& s : sets) {
    json j;
    j["paper_id"] = s.target.paper_id;
    j["author_index"] = s.target.author_index;
    j["gold"] = s.gold == GoldKind::person ? "person" : "nil";
    if (s.gold == GoldKind::person) j["gold_person"] = s.gold_person;
    j["candidates"] = s.candidates;
    out << j.dump() << "\n";
  }
  if (!out) throw DataError("short write to \"" + path + "\"");
}

std::vector<CandidateSet> load_candidate_sets(const std::string& path) {
  std::vector<CandidateSet> sets;
  const std::vector<std::string> lines = read_lines(path);
  for (size_t i = 0; i < lines.size(); ++i) {
    const json j = parse_line(lines[i], path, i);
    CandidateSet s;
    try {
      s.target.paper_id = j.at("paper_id").get<std::string>();
      s.target.author_index = j.at("author_index").get<int>();
      const std::string gold = j.at("gold").get<std::string>();
      if (gold == "person") {
        s.gold = GoldKind::person;
        s.gold_person = j.at("gold_person").get<std::string>();
      } else if (gold == "nil") {
        s.gold = GoldKind::nil;
      } else {
        throw DataError("gold must be \"person\" or \"nil\"");
      }
      s.candidates = j.at("candidates").get<std::vector<std::string>>();
    } catch (const json::exception& e) {
      throw DataError(path + ":" + std::to_string(i + 1) + ": " + e.what());
    }
    sets.push_back(std::move(s));
  }
  return sets;
}

void save_triplets(const std::vector<TripletSample>& triplets, const std::string& path) {
  std::ofstream out = open_out(path);
  for (const TripletSample& t : triplets) {
    json j;
    j["paper_id"] = t.target.paper_id;
    j["author_index"] = t.target.author_index;
    j["pos"] = t.pos;
    j["neg"] = t.neg;
    out << j.dump() << "\n";
  }
  if (!out) throw DataError("short write to \"" + path + "\"");
}

std::vector<TripletSample> load_triplets(const std::string& path) {
  std::vector<TripletSample> triplets;
  const std::vector<std::string> lines = read_lines(path);
  for (size_t i = 0; i < lines.size(); ++i) {
    const json j = parse_line(lines[i], path, i);
    TripletSample t;
    try {
      t.target.paper_id = j.at("paper_id").get<std::string>();
      t.target.author_index = j.at("author_index").get<int>();
      t.pos = j.at("pos").get<std::string>();
      t.neg = j.at("neg").get<std::string>();
    } catch (const json::exception& e) {
      throw DataError(path + ":" + std::to_string(i + 1) + ": " + e.what());
    }
    triplets.push_back(std::move(t));
  }
  return triplets;
}

void save_decisions(const DecisionDataset& dataset, const std::string& path) {
  std::ofstream out = open_out(path);
  for (const DecisionInstance& d : dataset.instances) {
    json j;
    j["paper_id"] = d.target.paper_id;
    j["author_index"] = d.target.author_index;
    j["person"] = d.person;
    j["label"] = d.label;
    j["phi"] = d.phi;
    out << j.dump() << "\n";
  }
  if (!out) throw DataError("short write to \"" + path + "\"");
}

std::vector<DecisionInstance> load_decisions(const std::string& path) {
  std::vector<DecisionInstance> instances;
  const std::vector<std::string> lines = read_lines(path);
  for (size_t i = 0; i < lines.size(); ++i) {
    const json j = parse_line(lines[i], path, i);
    DecisionInstance d;
    try {
      d.target.paper_id = j.at("paper_id").get<std::string>();
      d.target.author_index = j.at("author_index").get<int>();
      d.person = j.at("person").get<std::string>();
      d.label = j.at("label").get<int>();
      d.phi = j.at("phi").get<std::vector<float>>();
    } catch (const json::exception& e) {
      throw DataError(path + ":" + std::to_string(i + 1) + ": " + e.what());
    }
    instances.push_back(std::move(d));
  }
  return instances;
}

}  // namespace nameres
