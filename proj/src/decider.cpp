#include "nameres/decider.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <string>

#include <nlohmann/json.hpp>

#include "nameres/rng.hpp"

namespace nameres {

using json = nlohmann::json;

DeciderParams init_decider(const DeciderInitConfig& cfg) {
  if (cfg.input_width < 1) throw ConfigError("decider input width must be positive");
  std::vector<int> widths;
  widths.push_back(cfg.input_width);
  widths.insert(widths.end(), cfg.hidden.begin(), cfg.hidden.end());
  widths.push_back(2);
  DeciderParams p;
  p.h = MlpT<float>::shaped(widths);
  Rng rng(derive_seed(cfg.seed, "decider.init"));
  p.h.init_xavier(rng);
  return p;
}

DecisionDataset build_decision_dataset(MatchContext& ctx, const MatcherParams& matcher,
                                       const std::vector<CandidateSet>& samples) {
  DecisionDataset out;
  for (const CandidateSet& sample : samples) {
    if (sample.candidates.empty()) {
      ++out.skipped_empty;
      continue;
    }
    std::vector<RankedCandidate> ranked =
        rank_candidates(ctx, matcher, sample.target, sample.candidates);
    if (sample.gold == GoldKind::nil) {
      // No right person exists; the best-looking candidate is the wrong one
      // the classifier must learn to reject.
      out.instances.push_back({ranked.front().phi, 0, sample.target, ranked.front().person});
      continue;
    }
    const RankedCandidate* gold = nullptr;
    const RankedCandidate* wrong = nullptr;
    for (const RankedCandidate& rc : ranked) {
      if (rc.person == sample.gold_person) {
        if (!gold) gold = &rc;
      } else if (!wrong) {
        wrong = &rc;
      }
      if (gold && wrong) break;
    }
    std::vector<RankedCandidate> extra;
    if (!gold) {
      // The gold person was not among the candidates; score it directly so
      // the positive example still reflects the current matcher.
      extra = rank_candidates(ctx, matcher, sample.target, {sample.gold_person});
      gold = &extra.front();
    }
    out.instances.push_back({gold->phi, 1, sample.target, sample.gold_person});
    if (wrong)
      out.instances.push_back({wrong->phi, 0, sample.target, wrong->person});
    else
      ++out.skipped_no_negative;
  }
  return out;
}

DeciderTrainResult train_decider(DeciderParams& params,
                                 const std::vector<DecisionInstance>& dataset,
                                 const DeciderTrainConfig& cfg) {
  if (cfg.batch < 1) throw ConfigError("batch size must be positive");
  if (!(cfg.lr > 0)) throw ConfigError("learning rate must be positive");
  if (cfg.epochs < 0) throw ConfigError("epoch count must be non-negative");
  if (dataset.empty()) throw DataError("decision dataset is empty");

  bool seen[2] = {false, false};
  for (const DecisionInstance& inst : dataset) {
    if (inst.label != 0 && inst.label != 1) throw DataError("decision label must be 0 or 1");
    if (static_cast<int>(inst.phi.size()) != params.h.input_width())
      throw DataError("decision feature width disagrees with the classifier");
    seen[inst.label] = true;
  }
  if (!seen[0] || !seen[1])
    throw DataError("decision dataset carries a single label; nothing separable to learn");

  DeciderTrainResult result;
  const float lr = static_cast<float>(cfg.lr);
  std::vector<size_t> order(dataset.size());
  std::iota(order.begin(), order.end(), size_t{0});

  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    Rng shuf(derive_seed(cfg.seed, "decider.epoch:" + std::to_string(epoch)));
    shuf.shuffle(order);
    double loss_sum = 0.0;

    for (size_t start = 0; start < order.size(); start += static_cast<size_t>(cfg.batch)) {
      const size_t stop = std::min(order.size(), start + static_cast<size_t>(cfg.batch));
      const int bs = static_cast<int>(stop - start);
      std::vector<MlpGradT<float>> grads(static_cast<size_t>(bs));
      std::vector<float> losses(static_cast<size_t>(bs), 0.0f);

#pragma omp parallel for schedule(dynamic)
      for (int i = 0; i < bs; ++i) {
        const DecisionInstance& inst = dataset[order[start + static_cast<size_t>(i)]];
        grads[static_cast<size_t>(i)] = MlpGradT<float>::shaped_like(params.h);
        losses[static_cast<size_t>(i)] =
            decider_ce<float>(params, std::span<const float>(inst.phi), inst.label,
                              &grads[static_cast<size_t>(i)]);
      }

      // Serial in-order reduction keeps the update independent of thread count.
      MlpGradT<float> total = MlpGradT<float>::shaped_like(params.h);
      for (int i = 0; i < bs; ++i) {
        if (!std::isfinite(losses[static_cast<size_t>(i)])) {
          const DecisionInstance& inst = dataset[order[start + static_cast<size_t>(i)]];
          throw NumericError("non-finite decision loss (epoch " + std::to_string(epoch) +
                             ", paper \"" + inst.target.paper_id + "\", person \"" + inst.person +
                             "\")");
        }
        loss_sum += losses[static_cast<size_t>(i)];
        total.add(grads[static_cast<size_t>(i)]);
      }
      const float scale = lr / static_cast<float>(bs);
      for (size_t l = 0; l < params.h.W.size(); ++l) {
        for (size_t i = 0; i < params.h.W[l].a.size(); ++i)
          params.h.W[l].a[i] -= scale * total.W[l].a[i];
        for (size_t i = 0; i < params.h.b[l].size(); ++i)
          params.h.b[l][i] -= scale * total.b[l][i];
      }
    }
    result.epoch_loss.push_back(loss_sum / static_cast<double>(dataset.size()));
  }
  return result;
}

Prediction predict(std::span<const float> phi, const DeciderParams& params) {
  DeciderEvalT<float> ev;
  decider_forward(params, phi, ev);
  Prediction out;
  out.p1 = ev.probs[1];
  out.label = ev.probs[1] > 0.5f ? 1 : 0;
  return out;
}

std::optional<std::string> assign(MatchContext& ctx, const MatcherParams& matcher,
                                  const DeciderParams& decider, const TargetPair& target,
                                  const std::vector<std::string>& candidates) {
  if (candidates.empty()) return std::nullopt;
  std::vector<RankedCandidate> ranked = rank_candidates(ctx, matcher, target, candidates);
  const Prediction pred = predict(std::span<const float>(ranked.front().phi), decider);
  if (pred.label == 1) return ranked.front().person;
  return std::nullopt;
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

void save_decider(const DeciderParams& params, const std::string& path) {
  json manifest;
  manifest["format_version"] = 1;
  manifest["kind"] = "decider";
  manifest["widths"] = params.h.widths;

  std::vector<std::pair<std::string, const std::vector<float>*>> blocks;
  for (size_t l = 0; l < params.h.W.size(); ++l) {
    blocks.emplace_back("h_w" + std::to_string(l), &params.h.W[l].a);
    blocks.emplace_back("h_b" + std::to_string(l), &params.h.b[l]);
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

DeciderParams load_decider(const std::string& path) {
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
  if (manifest.value("kind", "") != "decider")
    throw DataError("\"" + path + "\" is not a decider checkpoint");

  DeciderParams p;
  p.h = MlpT<float>::shaped(manifest.at("widths").get<std::vector<int>>());
  if (p.h.output_width() != 2)
    throw DataError("decider checkpoint must end in two classes in \"" + path + "\"");

  std::vector<std::pair<std::string, std::vector<float>*>> blocks;
  for (size_t l = 0; l < p.h.W.size(); ++l) {
    blocks.emplace_back("h_w" + std::to_string(l), &p.h.W[l].a);
    blocks.emplace_back("h_b" + std::to_string(l), &p.h.b[l]);
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
  return p;
}

}  // namespace nameres
