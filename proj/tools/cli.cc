// Copyright 2026 The nlidebias Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
// https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "cli.h"

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <map>
#include <memory>
#include <optional>
#include <ostream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "nlidebias/artifact_stats.h"
#include "nlidebias/corpus.h"
#include "nlidebias/error.h"
#include "nlidebias/evaluation.h"
#include "nlidebias/llm_client.h"
#include "nlidebias/sampler.h"
#include "nlidebias/synthesis.h"
#include "nlidebias/util.h"

#ifndef NLIDEBIAS_VERSION
#define NLIDEBIAS_VERSION "dev"
#endif

namespace nlidebias {
namespace {

namespace fs = std::filesystem;
using ordered_json = nlohmann::ordered_json;

constexpr char kGeminiOpenAiUrl[] =
    "https://generativelanguage.googleapis.com/v1beta/openai";

// Options shared by every subcommand.
struct CommonArgs {
  std::string config;
  std::string out;
};

struct DataArgs {
  std::string path;
  std::string format = "auto";
};

struct CountArgs {
  std::size_t ngram_order = 2;
  std::string metric = "lf_lmi";
  std::uint64_t min_joint = kDefaultMinJoint;
  std::string field = "hypothesis";
  std::vector<std::string> labels = {"entailment", "neutral", "contradiction"};
};

struct DetectArgs {
  CommonArgs common;
  DataArgs data;
  CountArgs count;
  std::size_t top_k = 15;
};

struct SynthesizeArgs {
  CommonArgs common;
  DataArgs data;
  CountArgs count;
  std::string rankings;
  std::string artifacts_data;
  std::size_t top_k = 20;
  std::size_t m = 0;
  std::uint64_t seed = 0;
  std::string generator = "gpt-5-mini";
  std::vector<std::string> judges;
  int max_retries = 3;
  int backoff_ms = 500;
  int timeout_ms = 60000;
  int concurrency = 4;
  std::optional<double> temperature;
  int generation_attempts = 2;
  int judge_asks = 2;
  int workers = 0;
  std::string mock;
};

struct SampleArgs {
  CommonArgs common;
  std::string contrast;
  std::string pool;
  std::string pool_format = "auto";
  int epochs = 3;
  std::uint64_t seed = 0;
  bool include_anchors = false;
};

struct EvaluateArgs {
  CommonArgs common;
  std::string gold;
  std::string predictions;
  std::string original_gold;
  std::string original_predictions;
  std::string train;
  std::string train_format = "auto";
  bool hypothesis_only_baseline = false;
  std::size_t ngram_order = 2;
  std::string scaling;
};

struct VerifyArgs {
  CommonArgs common;
  std::string contrast;
  std::string train;
  std::string train_format = "auto";
  std::size_t ngram_order = 2;
};

// ---------------------------------------------------------------------------
// Option parsing helpers.

DatasetFormat ResolveFormat(const std::string& flag, const fs::path& path) {
  if (flag == "auto") return GuessDatasetFormat(path);
  auto f = ParseDatasetFormat(flag);
  if (!f) throw InputError("unknown format '" + flag + "' (jsonl|tsv|auto)");
  return *f;
}

Metric ResolveMetric(const std::string& text) {
  auto m = ParseMetric(text);
  if (!m) throw InputError("unknown metric '" + text + "' (lmi|lf_lmi)");
  return *m;
}

TextField ResolveField(const std::string& text) {
  auto f = ParseTextField(text);
  if (!f) {
    throw InputError("unknown field '" + text + "' (hypothesis|premise|both)");
  }
  return *f;
}

std::vector<Label> ResolveLabels(const std::vector<std::string>& names) {
  std::vector<Label> labels;
  for (const auto& name : names) {
    auto l = ParseLabel(name);
    if (!l) throw InputError("unknown label '" + name + "'");
    if (std::find(labels.begin(), labels.end(), *l) == labels.end()) {
      labels.push_back(*l);
    }
  }
  if (labels.empty()) throw InputError("--labels is empty");
  return labels;
}

// "MODEL[,BASE_URL[,KEY_ENV]]"
LlmEndpointConfig ParseEndpoint(const std::string& text, EndpointRole role) {
  LlmEndpointConfig c;
  c.role = role;
  std::vector<std::string> parts;
  std::stringstream ss(text);
  std::string part;
  while (std::getline(ss, part, ',')) parts.emplace_back(Trim(part));
  if (parts.empty() || parts.size() > 3 || parts[0].empty()) {
    throw InputError("bad endpoint '" + text + "' (MODEL[,BASE_URL[,KEY_ENV]])");
  }
  c.model_id = parts[0];
  if (parts.size() >= 2 && !parts[1].empty()) c.base_url = parts[1];
  if (parts.size() == 3 && !parts[2].empty()) c.api_key_env = parts[2];
  if (parts.size() < 2 && c.model_id.starts_with("gemini")) {
    c.base_url = kGeminiOpenAiUrl;
    c.api_key_env = "GEMINI_API_KEY";
  }
  return c;
}

void CheckInput(const std::string& path, std::string_view what) {
  if (path.empty()) throw InputError(std::string(what) + " is required");
  if (!fs::is_regular_file(path)) {
    throw InputError("cannot read " + std::string(what) + ": " + path);
  }
}

fs::path PrepareOut(const std::string& out) {
  if (out.empty()) throw InputError("--out is required");
  std::error_code ec;
  fs::create_directories(out, ec);
  if (!fs::is_directory(out)) {
    throw InputError("cannot create output directory: " + out);
  }
  return fs::path(out);
}

LoadResult Load(const std::string& path, const std::string& format,
                std::string_view what) {
  CheckInput(path, what);
  return LoadDataset(path, ResolveFormat(format, path));
}

ordered_json Digest(const std::string& path) {
  ordered_json j;
  j["path"] = path;
  j["sha256"] = FileSha256Hex(path);
  return j;
}

ordered_json LoadStatsJson(const LoadResult& r) {
  ordered_json j;
  j["examples"] = r.dataset.size();
  j["unlabeled_skipped"] = r.stats.unlabeled_skipped;
  j["empty_skipped"] = r.stats.empty_skipped;
  return j;
}

ordered_json LabelsJson(const std::vector<Label>& labels) {
  ordered_json j = ordered_json::array();
  for (Label l : labels) j.push_back(LabelName(l));
  return j;
}

void WriteRunManifest(const fs::path& out_dir, std::string_view command,
                      ordered_json config, ordered_json inputs,
                      ordered_json results) {
  ordered_json j;
  j["tool"] = "nlidebias";
  j["version"] = NLIDEBIAS_VERSION;
  j["command"] = command;
  j["config"] = std::move(config);
  j["inputs"] = std::move(inputs);
  j["results"] = std::move(results);
  WriteFileAtomic(out_dir / "run_manifest.json", j.dump(2) + "\n");
}

// Folds `--config FILE` (key = value lines, CLI11 INI reader) into argv just
// after the subcommand name, for every key not given on the command line.
// Flags given explicitly are parsed later and therefore win.
std::vector<std::string> ExpandConfig(const CLI::App& app,
                                      std::vector<std::string> args) {
  if (args.size() < 2) return args;
  const CLI::App* sub = nullptr;
  for (const auto* s : app.get_subcommands([](const CLI::App*) { return true; })) {
    if (s->get_name() == args[1]) sub = s;
  }
  if (sub == nullptr) return args;
  std::string config_path;
  std::set<std::string> given;
  for (std::size_t i = 2; i < args.size(); ++i) {
    const std::string& a = args[i];
    if (!a.starts_with("--")) continue;
    const auto eq = a.find('=');
    const std::string name = a.substr(2, eq == std::string::npos ? a.npos : eq - 2);
    given.insert(name);
    if (name == "config") {
      if (eq != std::string::npos) {
        config_path = a.substr(eq + 1);
      } else if (i + 1 < args.size()) {
        config_path = args[i + 1];
      }
    }
  }
  if (config_path.empty()) return args;
  std::ifstream in(config_path);
  if (!in) throw InputError("cannot read config file: " + config_path);
  std::vector<CLI::ConfigItem> items;
  try {
    items = CLI::ConfigINI().from_config(in);
  } catch (const CLI::Error& e) {
    throw InputError("config file " + config_path + ": " + e.what());
  }
  std::vector<std::string> injected;
  for (const auto& item : items) {
    if (item.name == "++" || item.name == "--") continue;
    const bool ours = item.parents.empty() ||
                      (item.parents.size() == 1 &&
                       (item.parents[0] == "default" ||
                        item.parents[0] == sub->get_name()));
    if (!ours) continue;
    std::string name = item.name;
    std::replace(name.begin(), name.end(), '_', '-');
    if (name == "config") continue;
    const CLI::Option* opt = sub->get_option_no_throw("--" + name);
    if (opt == nullptr) {
      throw InputError("config file " + config_path + ": unknown key '" +
                       item.name + "' for " + sub->get_name());
    }
    if (given.contains(name)) continue;
    if (opt->get_type_size() == 0) {
      const std::string v = item.inputs.empty() ? "true" : item.inputs[0];
      if (v == "true" || v == "1" || v == "yes" || v == "on") {
        injected.push_back("--" + name);
      }
      continue;
    }
    for (const auto& v : item.inputs) {
      injected.push_back("--" + name);
      injected.push_back(v);
    }
  }
  args.insert(args.begin() + 2, injected.begin(), injected.end());
  return args;
}

void AddCommon(CLI::App* sub, CommonArgs& c) {
  sub->add_option("--config", c.config, "key = value file (flags win)");
  sub->add_option("--out", c.out, "Output directory")->required();
}

void AddCount(CLI::App* sub, CountArgs& c) {
  sub->add_option("--ngram-order", c.ngram_order, "n-gram order")
      ->check(CLI::PositiveNumber);
  sub->add_option("--metric", c.metric, "lmi | lf_lmi");
  sub->add_option("--min-joint", c.min_joint, "Minimum count(w,l) to rank");
  sub->add_option("--field", c.field, "hypothesis | premise | both");
  sub->add_option("--labels", c.labels, "Labels to rank")->delimiter(',');
}

ordered_json CountJson(const CountArgs& c) {
  ordered_json j;
  j["ngram_order"] = c.ngram_order;
  j["metric"] = c.metric;
  j["min_joint"] = c.min_joint;
  j["field"] = c.field;
  j["labels"] = LabelsJson(ResolveLabels(c.labels));
  return j;
}

std::vector<Ranking> DetectRankings(const Dataset& data, const CountArgs& c,
                                    std::size_t top_k,
                                    NgramLabelCounts* counts_out) {
  const Metric metric = ResolveMetric(c.metric);
  const TextField field = ResolveField(c.field);
  const auto labels = ResolveLabels(c.labels);
  NgramLabelCounts counts = AccumulateCounts(data, c.ngram_order, field);
  std::vector<Ranking> rankings;
  for (Label l : labels) {
    rankings.push_back(RankTopK(counts, l, top_k, metric, c.min_joint));
  }
  if (counts_out != nullptr) *counts_out = std::move(counts);
  return rankings;
}

void PrintRankings(std::span<const Ranking> rankings, std::ostream& out) {
  for (const auto& r : rankings) {
    out << "top " << r.entries.size() << " " << LabelName(r.label) << " by "
        << MetricName(r.metric) << '\n';
    std::size_t rank = 0;
    for (const auto& e : r.entries) {
      out << "  " << std::setw(3) << ++rank << "  " << std::left
          << std::setw(24) << e.ngram.Text() << std::right << std::setw(12)
          << FormatFixed(e.Value(r.metric), 4) << std::setw(9) << e.freq
          << std::setw(8) << FormatFixed(e.p_label_given_w, 2) << '\n';
    }
  }
}

// ---------------------------------------------------------------------------
// Subcommands.

int RunDetect(const DetectArgs& a, std::ostream& out) {
  const fs::path out_dir = PrepareOut(a.common.out);
  const LoadResult loaded = Load(a.data.path, a.data.format, "--data");
  NgramLabelCounts counts;
  const auto rankings = DetectRankings(loaded.dataset, a.count, a.top_k, &counts);
  WriteArtifactReport(rankings, out_dir / "artifacts.csv");
  PrintRankings(rankings, out);

  ordered_json config = CountJson(a.count);
  config["data"] = a.data.path;
  config["format"] = a.data.format;
  config["top_k"] = a.top_k;
  ordered_json inputs;
  inputs["data"] = Digest(a.data.path);
  ordered_json results;
  results["load"] = LoadStatsJson(loaded);
  results["ngram_tokens"] = counts.Total();
  ordered_json per_label;
  for (Label l : kAllLabels) per_label[LabelName(l)] = counts.LabelTotal(l);
  results["ngram_tokens_per_label"] = std::move(per_label);
  results["distinct_ngrams"] = counts.DistinctNgrams();
  results["report"] = "artifacts.csv";
  WriteRunManifest(out_dir, "detect", std::move(config), std::move(inputs),
                   std::move(results));
  return kExitOk;
}

int RunSynthesize(const SynthesizeArgs& a, std::ostream& out) {
  if (a.m == 0) throw InputError("--m must be >= 1");
  if (a.top_k == 0) throw InputError("--top-k must be >= 1");

  // Endpoints and credentials are checked before any input is read, so a
  // missing key never gets as far as a network call.
  LlmEndpointConfig gen = ParseEndpoint(a.generator, EndpointRole::kGenerator);
  std::vector<LlmEndpointConfig> judges;
  if (a.judges.empty()) {
    judges.push_back(ParseEndpoint("gpt-5-mini", EndpointRole::kJudge));
    judges.push_back(ParseEndpoint("gemini-2.5-flash", EndpointRole::kJudge));
  } else {
    for (const auto& j : a.judges) {
      judges.push_back(ParseEndpoint(j, EndpointRole::kJudge));
    }
  }
  std::vector<LlmEndpointConfig*> all = {&gen};
  for (auto& j : judges) all.push_back(&j);
  for (auto* c : all) {
    c->max_retries = a.max_retries;
    c->backoff_base_ms = a.backoff_ms;
    c->timeout_ms = a.timeout_ms;
    c->max_concurrency = a.concurrency;
    c->temperature = a.temperature;
    c->Validate();
    if (a.mock.empty()) {
      const char* key = std::getenv(c->api_key_env.c_str());
      if (key == nullptr || *key == '\0') {
        throw InputError("environment variable " + c->api_key_env +
                         " (API key for " + c->model_id +
                         ") is not set; pass --mock TABLE for an offline run");
      }
    }
  }
  if (!a.mock.empty()) CheckInput(a.mock, "--mock");

  const fs::path out_dir = PrepareOut(a.common.out);
  const LoadResult loaded = Load(a.data.path, a.data.format, "--data");

  ordered_json inputs;
  inputs["data"] = Digest(a.data.path);
  std::vector<Ranking> rankings;
  if (!a.rankings.empty()) {
    CheckInput(a.rankings, "--rankings");
    rankings = ReadArtifactReport(a.rankings);
    const auto wanted = ResolveLabels(a.count.labels);
    std::erase_if(rankings, [&](const Ranking& r) {
      return std::find(wanted.begin(), wanted.end(), r.label) == wanted.end();
    });
    inputs["rankings"] = Digest(a.rankings);
  } else if (!a.artifacts_data.empty()) {
    const LoadResult source = Load(a.artifacts_data, "auto", "--artifacts-data");
    rankings = DetectRankings(source.dataset, a.count, a.top_k, nullptr);
    inputs["artifacts_data"] = Digest(a.artifacts_data);
  } else {
    rankings = DetectRankings(loaded.dataset, a.count, a.top_k, nullptr);
  }
  if (rankings.empty()) throw InputError("no rankings to draw anchors from");

  const AnchorSet anchors =
      SelectAnchors(loaded.dataset, rankings, a.top_k, a.m, a.seed);

  std::shared_ptr<ChatBackend> backend;
  if (!a.mock.empty()) {
    backend = MockChatBackend::FromFile(a.mock);
    inputs["mock"] = Digest(a.mock);
  } else {
    backend = std::make_shared<HttpChatBackend>();
  }
  LlmClient generator(gen, backend, a.seed);
  std::vector<std::unique_ptr<LlmClient>> judge_clients;
  std::vector<LlmClient*> judge_ptrs;
  for (std::size_t i = 0; i < judges.size(); ++i) {
    judge_clients.push_back(
        std::make_unique<LlmClient>(judges[i], backend, a.seed + 1 + i));
    judge_ptrs.push_back(judge_clients.back().get());
  }

  SynthesisOptions opts;
  opts.seed = a.seed;
  opts.generation_attempts = a.generation_attempts;
  opts.judge_asks = a.judge_asks;
  opts.workers = a.workers;
  const SynthesisResult result =
      GenerateContrastSet(anchors, generator, judge_ptrs, opts);

  const Dataset contrast = ContrastSetToDataset(result.pairs, "contrast");
  WriteDataset(contrast, out_dir / "contrast.jsonl");
  WriteRejectionLog(result.rejections, out_dir / "rejections.jsonl");
  WriteVerdicts(result.pairs, out_dir / "verdicts.jsonl");

  ordered_json config = CountJson(a.count);
  config["data"] = a.data.path;
  config["format"] = a.data.format;
  config["rankings"] = a.rankings.empty() ? ordered_json() : ordered_json(a.rankings);
  config["artifacts_data"] =
      a.artifacts_data.empty() ? ordered_json() : ordered_json(a.artifacts_data);
  config["top_k"] = a.top_k;
  config["m"] = a.m;
  config["seed"] = a.seed;
  config["generation_attempts"] = a.generation_attempts;
  config["judge_asks"] = a.judge_asks;
  config["workers"] = a.workers;
  config["mock"] = a.mock.empty() ? ordered_json() : ordered_json(a.mock);
  config["generator"] = gen.ToJson();
  ordered_json judge_json = ordered_json::array();
  for (const auto& j : judges) judge_json.push_back(j.ToJson());
  config["judges"] = std::move(judge_json);

  ordered_json results;
  results["load"] = LoadStatsJson(loaded);
  results["anchors"] = anchors.anchors.size();
  results["per_ngram_quota"] = anchors.per_ngram_quota;
  ordered_json alloc = ordered_json::array();
  for (const auto& r : anchors.ngram_list) {
    ordered_json e;
    e["ngram"] = r.ngram.Text();
    e["label"] = LabelName(r.label);
    e["rank"] = r.rank;
    e["available"] = r.available;
    e["selected"] = r.selected;
    alloc.push_back(std::move(e));
  }
  results["allocation"] = std::move(alloc);
  ordered_json shortfalls = ordered_json::array();
  for (const auto& r : anchors.Shortfalls()) {
    shortfalls.push_back(r.ngram.Text() + " (" + std::string(LabelName(r.label)) +
                         "): " + std::to_string(r.selected) + "/" +
                         std::to_string(anchors.per_ngram_quota));
  }
  results["quota_shortfalls"] = std::move(shortfalls);
  results["pairs"] = result.pairs.size();
  results["contrast_examples"] = contrast.size();
  std::map<std::string, std::size_t> by_reason;
  for (const auto& r : result.rejections) {
    ++by_reason[std::string(RejectionReasonName(r.reason))];
  }
  ordered_json rej;
  for (RejectionReason r :
       {RejectionReason::kGenerationFailed, RejectionReason::kNoPerturbation,
        RejectionReason::kJudgeRejected, RejectionReason::kJudgeUnreachable}) {
    const std::string name(RejectionReasonName(r));
    rej[name] = by_reason[name];
  }
  results["rejections"] = std::move(rej);
  results["neutral_to_entailment"] = result.neutral_to_entailment;
  results["neutral_to_contradiction"] = result.neutral_to_contradiction;
  ordered_json attempts;
  attempts[gen.model_id + " (generator)"] = generator.attempts_total();
  for (const auto& c : judge_clients) {
    attempts[c->config().model_id + " (judge)"] = c->attempts_total();
  }
  results["requests"] = std::move(attempts);
  WriteRunManifest(out_dir, "synthesize", std::move(config), std::move(inputs),
                   std::move(results));

  out << "anchors " << anchors.anchors.size() << ", pairs kept "
      << result.pairs.size() << ", rejected " << result.rejections.size()
      << ", contrast examples " << contrast.size() << '\n';
  if (!anchors.Shortfalls().empty()) {
    out << anchors.Shortfalls().size()
        << " n-gram(s) below quota; see run_manifest.json\n";
  }
  return kExitOk;
}

int RunSample(const SampleArgs& a, std::ostream& out) {
  const fs::path out_dir = PrepareOut(a.common.out);
  const LoadResult contrast = Load(a.contrast, "jsonl", "--contrast");
  if (contrast.dataset.empty()) {
    throw InputError("contrast set is empty: " + a.contrast);
  }
  const LoadResult pool = Load(a.pool, a.pool_format, "--pool");
  MixConfig config;
  config.base_seed = a.seed;
  config.epochs = a.epochs;
  config.exclude_anchor_ids = !a.include_anchors;
  const auto mixes = BuildAllEpochs(contrast.dataset, pool.dataset, config);

  ordered_json extra;
  extra["tool"] = "nlidebias";
  extra["version"] = NLIDEBIAS_VERSION;
  ordered_json resolved;
  resolved["contrast"] = a.contrast;
  resolved["pool"] = a.pool;
  resolved["pool_format"] = a.pool_format;
  resolved["epochs"] = a.epochs;
  resolved["seed"] = a.seed;
  resolved["include_anchors"] = a.include_anchors;
  extra["config"] = std::move(resolved);
  ordered_json inputs;
  inputs["contrast"] = Digest(a.contrast);
  inputs["pool"] = Digest(a.pool);
  extra["inputs"] = std::move(inputs);
  EmitEpochFiles(mixes, config, out_dir, extra);

  for (const auto& m : mixes) {
    out << "epoch_" << m.manifest.epoch << ".jsonl  " << m.mix.size()
        << " examples  sha256 " << m.manifest.output_digest << '\n';
  }
  return kExitOk;
}

EvalReport EvaluateFiles(const std::string& gold_path,
                         const std::string& pred_path, ordered_json& inputs,
                         const std::string& key) {
  const LoadResult gold = Load(gold_path, "auto", "gold file");
  CheckInput(pred_path, "predictions file");
  const auto preds = LoadPredictions(pred_path);
  inputs[key + "_gold"] = Digest(gold_path);
  inputs[key + "_predictions"] = Digest(pred_path);
  return Evaluate(gold.dataset, preds);
}

int RunEvaluate(const EvaluateArgs& a, std::ostream& out) {
  const fs::path out_dir = PrepareOut(a.common.out);
  if (a.predictions.empty() && !a.hypothesis_only_baseline &&
      a.scaling.empty()) {
    throw InputError(
        "nothing to evaluate: pass --predictions, --hypothesis-only-baseline "
        "or --scaling");
  }
  ordered_json inputs;
  ordered_json results;
  std::optional<LoadResult> gold;
  if (!a.predictions.empty() || a.hypothesis_only_baseline) {
    gold = Load(a.gold, "auto", "--gold");
    inputs["gold"] = Digest(a.gold);
    const auto dist = ClassDistribution(gold->dataset);
    ordered_json d;
    for (Label l : kAllLabels) {
      d[LabelName(l)] = std::stod(FormatFixed(dist[LabelIndex(l)], 4));
    }
    results["gold_class_distribution"] = std::move(d);
  }
  if (!a.predictions.empty()) {
    CheckInput(a.predictions, "--predictions");
    const auto preds = LoadPredictions(a.predictions);
    inputs["predictions"] = Digest(a.predictions);
    const EvalReport report = Evaluate(gold->dataset, preds);
    PrintReport(report, "model on " + a.gold, out);
    results["model"] = report.ToJson();
  }
  if (!a.original_gold.empty() || !a.original_predictions.empty()) {
    const EvalReport report = EvaluateFiles(a.original_gold,
                                            a.original_predictions, inputs,
                                            "original");
    PrintReport(report, "model on " + a.original_gold, out);
    results["original"] = report.ToJson();
  }
  if (a.hypothesis_only_baseline) {
    const LoadResult train = Load(a.train, a.train_format, "--train");
    inputs["train"] = Digest(a.train);
    const NgramLabelCounts counts =
        AccumulateCounts(train.dataset, a.ngram_order, TextField::kHypothesis);
    const HypothesisOnlyRuleClassifier clf(counts);
    const auto preds = clf.PredictBatch(gold->dataset);
    WritePredictions(preds, out_dir / "baseline_predictions.jsonl");
    const EvalReport report = Evaluate(gold->dataset, preds);
    PrintReport(report, "hypothesis-only rule baseline on " + a.gold, out);
    results["hypothesis_only_baseline"] = report.ToJson();
  }
  if (!a.scaling.empty()) {
    CheckInput(a.scaling, "--scaling");
    inputs["scaling"] = Digest(a.scaling);
    nlohmann::json points;
    try {
      points = nlohmann::json::parse(ReadFile(a.scaling));
    } catch (const nlohmann::json::exception& e) {
      throw InputError("--scaling: invalid JSON in " + a.scaling);
    }
    if (!points.is_array()) throw InputError("--scaling: expected a JSON array");
    const fs::path base = fs::path(a.scaling).parent_path();
    auto resolve = [&](const nlohmann::json& p, const char* key) {
      if (!p.contains(key) || !p.at(key).is_string()) {
        throw InputError(std::string("--scaling: point needs \"") + key + "\"");
      }
      fs::path path = p.at(key).get<std::string>();
      return (path.is_relative() ? base / path : path).string();
    };
    std::vector<ScalingPoint> sp;
    for (const auto& p : points) {
      if (!p.contains("n") || !p.at("n").is_number_unsigned()) {
        throw InputError("--scaling: point needs a non-negative integer \"n\"");
      }
      ScalingPoint s;
      s.n = p.at("n").get<std::size_t>();
      const std::string tag = "scaling_" + std::to_string(s.n);
      s.original = EvaluateFiles(resolve(p, "original_gold"),
                                 resolve(p, "original_predictions"), inputs,
                                 tag + "_original");
      s.contrast = EvaluateFiles(resolve(p, "contrast_gold"),
                                 resolve(p, "contrast_predictions"), inputs,
                                 tag + "_contrast");
      sp.push_back(std::move(s));
    }
    WriteScalingCsv(std::move(sp), out_dir / "scaling.csv");
    out << "wrote " << (out_dir / "scaling.csv").string() << '\n';
    results["scaling_csv"] = "scaling.csv";
  }
  WriteFileAtomic(out_dir / "report.json", results.dump(2) + "\n");

  ordered_json config;
  config["gold"] = a.gold;
  config["predictions"] = a.predictions;
  config["original_gold"] = a.original_gold;
  config["original_predictions"] = a.original_predictions;
  config["train"] = a.train;
  config["train_format"] = a.train_format;
  config["hypothesis_only_baseline"] = a.hypothesis_only_baseline;
  config["ngram_order"] = a.ngram_order;
  config["scaling"] = a.scaling;
  WriteRunManifest(out_dir, "evaluate", std::move(config), std::move(inputs),
                   std::move(results));
  return kExitOk;
}

int RunVerify(const VerifyArgs& a, std::ostream& out, std::ostream& err) {
  const fs::path out_dir = PrepareOut(a.common.out);
  const LoadResult contrast = Load(a.contrast, "jsonl", "--contrast");
  if (contrast.dataset.empty()) {
    throw InputError("contrast set is empty: " + a.contrast);
  }
  ordered_json inputs;
  inputs["contrast"] = Digest(a.contrast);
  std::optional<NgramLabelCounts> counts;
  if (!a.train.empty()) {
    const LoadResult train = Load(a.train, a.train_format, "--train");
    inputs["train"] = Digest(a.train);
    counts = AccumulateCounts(train.dataset, a.ngram_order,
                              TextField::kHypothesis);
  }

  std::vector<std::string> problems = AuditContrastSet(contrast.dataset);
  const auto artifacts = ArtifactsFromContrastSet(contrast.dataset);
  const auto rows = NeutralizationReport(counts ? &*counts : nullptr,
                                         contrast.dataset, artifacts);
  PrintNeutralization(rows, out);
  ordered_json table = ordered_json::array();
  for (const auto& r : rows) {
    if (!r.missing && r.contrast_p && *r.contrast_p != 0.5) {
      problems.push_back("artifact '" + r.ngram.Text() + "' (" +
                         std::string(LabelName(r.label)) +
                         ") not neutralized: P = " +
                         FormatFixed(*r.contrast_p, 4));
    }
    ordered_json j;
    j["ngram"] = r.ngram.Text();
    j["label"] = LabelName(r.label);
    j["pairs"] = r.contrast_pairs;
    auto opt = [](std::optional<double> v) {
      return v ? ordered_json(*v) : ordered_json();
    };
    j["original_p"] = opt(r.original_p);
    j["contrast_p"] = opt(r.contrast_p);
    j["contrast_p_contained"] = opt(r.contrast_p_contained);
    table.push_back(std::move(j));
  }
  for (const auto& p : problems) err << "FAIL: " << p << '\n';
  out << (problems.empty() ? "PASS" : "FAIL") << ": "
      << contrast.dataset.size() << " examples, " << problems.size()
      << " problem(s)\n";

  ordered_json config;
  config["contrast"] = a.contrast;
  config["train"] = a.train;
  config["train_format"] = a.train_format;
  config["ngram_order"] = a.ngram_order;
  ordered_json results;
  results["pass"] = problems.empty();
  results["problems"] = problems;
  results["neutralization"] = std::move(table);
  WriteRunManifest(out_dir, "verify", std::move(config), std::move(inputs),
                   std::move(results));
  return problems.empty() ? kExitOk : kExitIntegrity;
}

}  // namespace

int RunCli(int argc, const char* const* argv, std::ostream& out,
           std::ostream& err) {
  CLI::App app{"nlidebias: artifact detection, contrast synthesis, balanced "
               "sampling and evaluation for NLI data"};
  app.name("nlidebias");
  app.set_version_flag("--version", std::string(NLIDEBIAS_VERSION));
  app.require_subcommand(1);

  DetectArgs detect;
  auto* d = app.add_subcommand("detect", "Rank label-associated n-grams");
  AddCommon(d, detect.common);
  d->add_option("--data", detect.data.path, "Dataset (jsonl or tsv)")->required();
  d->add_option("--format", detect.data.format, "jsonl | tsv | auto");
  AddCount(d, detect.count);
  d->add_option("--top-k", detect.top_k, "Entries per label");

  SynthesizeArgs synth;
  auto* s = app.add_subcommand("synthesize", "Build a contrast set with LLMs");
  AddCommon(s, synth.common);
  s->add_option("--data", synth.data.path, "Anchor source dataset")->required();
  s->add_option("--format", synth.data.format, "jsonl | tsv | auto");
  AddCount(s, synth.count);
  s->add_option("--rankings", synth.rankings, "artifacts.csv from detect");
  s->add_option("--artifacts-data", synth.artifacts_data,
                "Dataset to rank n-grams on (default: --data)");
  s->add_option("--top-k", synth.top_k, "Ranked n-grams per label");
  s->add_option("--m", synth.m, "Anchors per n-gram")->required();
  s->add_option("--seed", synth.seed, "Base seed");
  s->add_option("--generator", synth.generator, "MODEL[,BASE_URL[,KEY_ENV]]");
  s->add_option("--judge", synth.judges, "MODEL[,BASE_URL[,KEY_ENV]], repeatable");
  s->add_option("--max-retries", synth.max_retries);
  s->add_option("--backoff-ms", synth.backoff_ms);
  s->add_option("--timeout-ms", synth.timeout_ms);
  s->add_option("--concurrency", synth.concurrency, "In-flight cap per endpoint");
  s->add_option("--temperature", synth.temperature);
  s->add_option("--generation-attempts", synth.generation_attempts);
  s->add_option("--judge-asks", synth.judge_asks);
  s->add_option("--workers", synth.workers);
  s->add_option("--mock", synth.mock, "Offline response table (jsonl)");

  SampleArgs sample;
  auto* sm = app.add_subcommand("sample", "Emit per-epoch balanced mixes");
  AddCommon(sm, sample.common);
  sm->add_option("--contrast", sample.contrast, "Contrast set jsonl")->required();
  sm->add_option("--pool", sample.pool, "Original training data")->required();
  sm->add_option("--pool-format", sample.pool_format, "jsonl | tsv | auto");
  sm->add_option("--epochs", sample.epochs);
  sm->add_option("--seed", sample.seed, "Base seed");
  sm->add_flag("--include-anchors", sample.include_anchors,
               "Let contrast ids be drawn as originals");

  EvaluateArgs eval;
  auto* e = app.add_subcommand("evaluate", "Score prediction files");
  AddCommon(e, eval.common);
  e->add_option("--gold", eval.gold, "Gold dataset (contrast or original)");
  e->add_option("--predictions", eval.predictions, "jsonl of {id, predicted}");
  e->add_option("--original-gold", eval.original_gold);
  e->add_option("--original-predictions", eval.original_predictions);
  e->add_option("--train", eval.train, "Training data for the rule baseline");
  e->add_option("--train-format", eval.train_format, "jsonl | tsv | auto");
  e->add_flag("--hypothesis-only-baseline", eval.hypothesis_only_baseline);
  e->add_option("--ngram-order", eval.ngram_order)->check(CLI::PositiveNumber);
  e->add_option("--scaling", eval.scaling, "points.json");

  VerifyArgs verify;
  auto* v = app.add_subcommand("verify", "Audit a contrast set");
  AddCommon(v, verify.common);
  v->add_option("--contrast", verify.contrast, "Contrast set jsonl")->required();
  v->add_option("--train", verify.train, "Original data for P(l|w) before");
  v->add_option("--train-format", verify.train_format, "jsonl | tsv | auto");
  v->add_option("--ngram-order", verify.ngram_order)->check(CLI::PositiveNumber);

  try {
    std::vector<std::string> args(argv, argv + argc);
    args = ExpandConfig(app, std::move(args));
    std::vector<std::string> rev(args.rbegin(), args.rend() - 1);
    try {
      app.parse(std::move(rev));
    } catch (const CLI::ParseError& pe) {
      std::ostringstream o, er;
      const int code = app.exit(pe, o, er);
      out << o.str();
      err << er.str();
      return code == 0 ? kExitOk : kExitUsage;
    }
    if (d->parsed()) return RunDetect(detect, out);
    if (s->parsed()) return RunSynthesize(synth, out);
    if (sm->parsed()) return RunSample(sample, out);
    if (e->parsed()) {
      if (!eval.predictions.empty() || eval.hypothesis_only_baseline) {
        if (eval.gold.empty()) throw InputError("--gold is required");
      }
      if (eval.hypothesis_only_baseline && eval.train.empty()) {
        throw InputError("--hypothesis-only-baseline needs --train");
      }
      return RunEvaluate(eval, out);
    }
    if (v->parsed()) return RunVerify(verify, out, err);
  } catch (const IntegrityError& ex) {
    err << "integrity error: " << ex.what() << '\n';
    return kExitIntegrity;
  } catch (const InputError& ex) {
    err << "error: " << ex.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& ex) {
    err << "error: " << ex.what() << '\n';
    return kExitFailure;
  }
  return kExitUsage;
}

}  // namespace nlidebias
