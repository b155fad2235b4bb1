// eae: command-line front end for corpus preparation, training, prediction,
// scoring, LLM evaluation and report assembly.

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <set>

#include <CLI11.hpp>
#include <json.hpp>

#include "eae/corpus.hpp"
#include "eae/evaluation.hpp"
#include "eae/llm.hpp"
#include "eae/manifest.hpp"
#include "eae/ontology.hpp"
#include "eae/synthetic.hpp"
#include "eae/training.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

using namespace eae;

void write_json(const fs::path& path, const json& j) {
  std::ofstream out(path);
  if (!out) throw PathError("cannot write '" + path.string() + "'");
  out << j.dump(2) << '\n';
}

json read_json(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw PathError("cannot open '" + path.string() + "'");
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw PathError("cannot write '" + path.string() + "'");
  out << text;
}

std::vector<fs::path> as_paths(const std::vector<std::string>& files) {
  std::vector<fs::path> out;
  for (const auto& f : files) {
    if (!f.empty()) out.emplace_back(f);
  }
  return out;
}

// ---- prepare ---------------------------------------------------------------

struct PrepareArgs {
  std::string data;
  std::string out;
  std::string ontology;
};

void cmd_prepare(const PrepareArgs& a) {
  const auto started = utc_now();
  if (!fs::is_directory(a.data)) throw PathError("'" + a.data + "' is not a directory");
  std::vector<fs::path> files;
  for (const auto& e : fs::directory_iterator(a.data)) {
    const auto ext = e.path().extension();
    if (e.is_regular_file() && (ext == ".jsonlines" || ext == ".jsonl")) files.push_back(e.path());
  }
  if (files.empty()) throw PathError("no input files (*.jsonlines) in '" + a.data + "'");
  std::sort(files.begin(), files.end());

  CorpusSplit corpus;
  for (const auto& f : files) {
    if (!split_from_filename(f)) {
      throw UsageError("cannot tell the split of '" + f.string() + "' (name must contain train, dev or test)");
    }
    corpus.append(load_rams(f));
  }
  const Ontology ontology = a.ontology.empty() ? Ontology::derive(corpus) : Ontology::load(a.ontology);
  ontology.validate(corpus);

  fs::create_directories(a.out);
  write_rams(fs::path(a.out) / "corpus.jsonlines", corpus);
  ontology.save(fs::path(a.out) / "ontology.tsv");
  std::vector<std::string> outputs = {"corpus.jsonlines", "ontology.tsv", "stats.json"};
  for (Split s : {Split::kTrain, Split::kDev, Split::kTest}) {
    const auto part = corpus.subset(s);
    if (part.documents.empty()) continue;
    const std::string name = std::string(split_name(s)) + ".jsonlines";
    write_rams(fs::path(a.out) / name, part);
    outputs.push_back(name);
  }

  json docs = json::object(), events = json::object(), args = json::object();
  for (Split s : {Split::kTrain, Split::kDev, Split::kTest}) {
    const auto part = corpus.subset(s);
    docs[split_name(s)] = part.documents.size();
    events[split_name(s)] = part.event_count();
    args[split_name(s)] = part.argument_count();
  }
  const json stats = {{"event_types", ontology.event_type_count()},
                      {"role_types", ontology.role_inventory().size()},
                      {"documents", docs},
                      {"documents_total", corpus.documents.size()},
                      {"events", events},
                      {"arguments", args}};
  write_json(fs::path(a.out) / "stats.json", stats);

  RunStep step{"prepare", {{"data", a.data}, {"ontology", a.ontology}}, corpus_checksum(files), 0, started,
               utc_now(), outputs};
  RunManifest::record(a.out, step);
  std::cout << stats.dump(2) << '\n';
}

// ---- train -----------------------------------------------------------------

struct TrainArgs {
  std::string config;
  std::string out;
  bool quiet = false;
};

void cmd_train(const TrainArgs& a) {
  const auto started = utc_now();
  auto cfg = TrainConfig::load(a.config);
  if (!a.out.empty()) cfg.output_dir = a.out;
  if (cfg.output_dir.empty()) throw ConfigError("config field 'output_dir': required (or pass --out)");
  if (cfg.train_file.empty() || cfg.dev_file.empty()) {
    throw ConfigError("config fields 'train_file' and 'dev_file' are required");
  }
  const fs::path out = cfg.output_dir;
  fs::create_directories(out);

  CorpusSplit corpus;
  corpus.append(load_rams(cfg.train_file, Split::kTrain));
  corpus.append(load_rams(cfg.dev_file, Split::kDev));

  Trainer<float> trainer(cfg, corpus);
  if (!a.quiet) {
    trainer.on_epoch([](const EpochMetrics& m) {
      std::cerr << "epoch " << m.epoch << "  loss " << m.train_loss << "  dev F1 " << format_pct(m.dev_f1)
                << '\n';
    });
  }
  write_json(out / "run_config.json", cfg.to_json());
  const auto report = trainer.train();

  // Wall time goes to the manifest only, so reruns give identical reports.
  auto rj = report.to_json();
  rj.erase("wall_seconds");
  write_json(out / "train_report.json", rj);

  RunStep step{"train", cfg.to_json(), corpus_checksum(as_paths({cfg.train_file, cfg.dev_file})), cfg.seed,
               started, utc_now(), {"run_config.json", "metrics.jsonl", "checkpoint", "train_report.json"}};
  step.config["wall_seconds"] = report.wall_seconds;
  RunManifest::record(out, step);
  std::cout << "best dev F1 " << format_pct(report.best_dev_f1) << " at epoch " << report.best_epoch << " -> "
            << report.best_checkpoint << '\n';
}

// ---- predict ---------------------------------------------------------------

struct PredictArgs {
  std::string checkpoint;
  std::string data;
  std::string out;
};

void cmd_predict(const PredictArgs& a) {
  const auto started = utc_now();
  const auto sys = ExtractionSystem<float>::load(a.checkpoint);
  const auto split = load_rams(a.data);
  sys.ontology.validate(split);
  const auto preds = Trainer<float>::predict_with(sys, split);
  const fs::path out = a.out;
  fs::create_directories(out);
  write_predictions(out / "predictions.jsonl", preds);
  // Carry the run identity along so `report` can label the row.
  fs::copy_file(fs::path(a.checkpoint) / "run_config.json", out / "run_config.json",
                fs::copy_options::overwrite_existing);
  RunStep step{"predict", {{"checkpoint", a.checkpoint}, {"data", a.data}}, corpus_checksum({a.data}),
               sys.config.seed, started, utc_now(), {"predictions.jsonl", "run_config.json"}};
  RunManifest::record(out, step);
  std::cout << preds.size() << " prediction records -> " << (out / "predictions.jsonl").string() << '\n';
}

// ---- evaluate --------------------------------------------------------------

struct EvaluateArgs {
  std::string predictions;
  std::string gold;
  std::string out;
};

void cmd_evaluate(const EvaluateArgs& a) {
  const auto started = utc_now();
  const auto preds = read_predictions(a.predictions);
  const auto gold = load_rams(a.gold);
  const auto report = evaluate(preds, gold);
  const fs::path out = a.out.empty() ? fs::path(a.predictions).parent_path() : fs::path(a.out);
  fs::create_directories(out);
  write_json(out / "eval.json", report.to_json());
  RunStep step{"evaluate", {{"predictions", a.predictions}, {"gold", a.gold}},
               corpus_checksum({a.gold}), 0, started, utc_now(), {"eval.json"}};
  RunManifest::record(out, step);
  std::cout << "P " << format_pct(report.overall.precision) << "  R " << format_pct(report.overall.recall)
            << "  F1 " << format_pct(report.overall.f1) << '\n';
}

// ---- report ----------------------------------------------------------------

struct ReportArgs {
  std::vector<std::string> runs;
  std::string out;
};

void cmd_report(const ReportArgs& a) {
  std::vector<GridRun> runs;
  for (const auto& dir : a.runs) {
    const fs::path d = dir;
    const auto cfg = TrainConfig::from_json(read_json(d / "run_config.json"));
    const auto report = EvalReport::from_json(read_json(d / "eval.json"));
    runs.push_back({variant_name(cfg.variant), cfg.encoder_label, loss_name(cfg.loss), report});
  }
  const auto table = report_grid(runs);
  std::cout << table.text;
  if (!a.out.empty()) {
    fs::create_directories(a.out);
    write_json(fs::path(a.out) / "report.json", table.data);
    write_text(fs::path(a.out) / "report.txt", table.text);
  }
}

// ---- llm-eval --------------------------------------------------------------

// Settings for an LLM evaluation run; see README for the field list.
struct LlmEvalConfig {
  std::string data;
  std::string ontology;
  std::string split = "dev";
  std::string demo_data;
  std::vector<std::string> models;
  std::vector<std::string> variants = {"role", "mrole", "mrole-ceiling"};
  std::size_t subset_size = 50;
  std::uint64_t seed = 2024;
  int shots = 0;
  double temperature = 0.0;
  int max_tokens = 256;
  std::string cache_dir;
  std::string output_dir;
  int max_in_flight = 4;
  double requests_per_second = 0.0;
  int max_retries = 5;
  int timeout_seconds = 120;

  static LlmEvalConfig from_json(const json& j) {
    if (!j.is_object()) throw ConfigError("LLM config must be a JSON object");
    LlmEvalConfig c;
    static const std::set<std::string> kKnown = {
        "data", "ontology", "split", "demo_data", "models", "variants", "subset_size", "seed", "shots",
        "temperature", "max_tokens", "cache_dir", "output_dir", "max_in_flight", "requests_per_second",
        "max_retries", "timeout_seconds"};
    for (const auto& [key, v] : j.items()) {
      if (!kKnown.count(key)) throw ConfigError("LLM config field '" + key + "': unknown field");
      try {
        if (key == "data") c.data = v.get<std::string>();
        else if (key == "ontology") c.ontology = v.get<std::string>();
        else if (key == "split") c.split = v.get<std::string>();
        else if (key == "demo_data") c.demo_data = v.get<std::string>();
        else if (key == "models") c.models = v.get<std::vector<std::string>>();
        else if (key == "variants") c.variants = v.get<std::vector<std::string>>();
        else if (key == "subset_size") c.subset_size = v.get<std::size_t>();
        else if (key == "seed") c.seed = v.get<std::uint64_t>();
        else if (key == "shots") c.shots = v.get<int>();
        else if (key == "temperature") c.temperature = v.get<double>();
        else if (key == "max_tokens") c.max_tokens = v.get<int>();
        else if (key == "cache_dir") c.cache_dir = v.get<std::string>();
        else if (key == "output_dir") c.output_dir = v.get<std::string>();
        else if (key == "max_in_flight") c.max_in_flight = v.get<int>();
        else if (key == "requests_per_second") c.requests_per_second = v.get<double>();
        else if (key == "max_retries") c.max_retries = v.get<int>();
        else if (key == "timeout_seconds") c.timeout_seconds = v.get<int>();
      } catch (const json::exception& e) {
        throw ConfigError("LLM config field '" + key + "': " + e.what());
      }
    }
    if (c.data.empty()) throw ConfigError("LLM config field 'data': required");
    if (c.output_dir.empty()) throw ConfigError("LLM config field 'output_dir': required");
    if (c.models.empty()) throw ConfigError("LLM config field 'models': at least one model is required");
    if (!parse_split(c.split)) throw ConfigError("LLM config field 'split': expected train, dev or test");
    if (c.shots < 0) throw ConfigError("LLM config field 'shots': must be >= 0");
    if (c.shots > 0 && c.demo_data.empty()) {
      throw ConfigError("LLM config field 'demo_data': required when shots > 0");
    }
    if (c.max_in_flight < 1) throw ConfigError("LLM config field 'max_in_flight': must be >= 1");
    for (const auto& v : c.variants) {
      PromptVariant pv;
      try {
        pv = parse_variant(v);
      } catch (const Error&) {
        throw ConfigError("LLM config field 'variants': unknown variant '" + v + "'");
      }
      if (!llm::supported_variant(pv)) {
        throw ConfigError("LLM config field 'variants': '" + v + "' is not supported for LLM evaluation");
      }
    }
    return c;
  }

  json to_json() const {
    return {{"data", data}, {"ontology", ontology}, {"split", split}, {"demo_data", demo_data},
            {"models", models}, {"variants", variants}, {"subset_size", subset_size}, {"seed", seed},
            {"shots", shots}, {"temperature", temperature}, {"max_tokens", max_tokens},
            {"cache_dir", cache_dir}, {"output_dir", output_dir}, {"max_in_flight", max_in_flight},
            {"requests_per_second", requests_per_second}, {"max_retries", max_retries},
            {"timeout_seconds", timeout_seconds}};
  }
};

struct LlmEvalArgs {
  std::string config;
};

void cmd_llm_eval(const LlmEvalArgs& a) {
  const auto started = utc_now();
  const auto cfg = LlmEvalConfig::from_json(read_json(a.config));
  const auto corpus = load_rams(cfg.data);
  const auto split = corpus.subset(*parse_split(cfg.split));
  const Ontology ontology = cfg.ontology.empty() ? Ontology::derive(corpus) : Ontology::load(cfg.ontology);
  ontology.validate(split);

  const fs::path out = cfg.output_dir;
  fs::create_directories(out);
  // The subset is fixed once per output directory so every model sees it.
  const auto subset_path = out / "subset.json";
  std::vector<llm::LlmInstance> subset;
  if (fs::exists(subset_path)) {
    subset = llm::read_subset(subset_path);
  } else {
    subset = llm::sample_subset(split, cfg.subset_size, cfg.seed);
    llm::write_subset(subset_path, subset);
  }

  // Demonstrations: the first `shots` (event, role) pairs with a gold argument,
  // taken from a seeded shuffle of the demonstration corpus.
  CorpusSplit demo_corpus;
  std::vector<llm::Demonstration> demos;
  if (cfg.shots > 0) {
    demo_corpus = load_rams(cfg.demo_data);
    auto pool = llm::all_instances(demo_corpus);
    Rng rng(cfg.seed + 1);
    rng.shuffle(pool);
    for (const auto& inst : pool) {
      if (static_cast<int>(demos.size()) >= cfg.shots) break;
      const auto* doc = demo_corpus.find(inst.doc_key);
      const auto& events = demo_corpus.events_of(inst.doc_key);
      const auto& ev = events.at(static_cast<std::size_t>(inst.event_index));
      if (ev.arguments.empty()) continue;
      demos.push_back(llm::Demonstration{doc, &events, static_cast<std::size_t>(inst.event_index), ev.arguments.begin()->first});
    }
    if (static_cast<int>(demos.size()) < cfg.shots) {
      throw UsageError("demonstration corpus has fewer than " + std::to_string(cfg.shots) + " usable examples");
    }
  }

  auto creds = llm::credentials_from_env();
  llm::OpenAiTransport transport(creds, cfg.timeout_seconds);
  llm::ClientOptions opts;
  opts.cache_dir = cfg.cache_dir.empty() ? out / "cache" : fs::path(cfg.cache_dir);
  opts.retry.max_retries = cfg.max_retries;
  opts.max_in_flight = cfg.max_in_flight;
  opts.requests_per_second = cfg.requests_per_second;
  llm::LlmClient client(transport, opts);

  std::vector<llm::LlmRunResult> results;
  json runs = json::array();
  fs::create_directories(out / "transcripts");
  for (const auto& model : cfg.models) {
    for (const auto& vname : cfg.variants) {
      const auto variant = parse_variant(vname);
      auto res = llm::run_variant(client, model, variant, split, ontology, subset, demos);
      std::cerr << model << " " << vname << ": F1 " << format_pct(res.report.overall.f1) << ", ungrounded "
                << format_pct(res.ungrounded_rate()) << '\n';
      std::string safe = model;
      std::replace_if(safe.begin(), safe.end(), [](char c) { return !std::isalnum(static_cast<unsigned char>(c)) && c != '-' && c != '.'; }, '_');
      {
        std::ofstream t(out / "transcripts" / (safe + "." + vname + ".jsonl"));
        for (const auto& line : res.transcript) t << line.dump() << '\n';
      }
      write_predictions(out / "transcripts" / (safe + "." + vname + ".predictions.jsonl"), res.predictions);
      json r = res.report.to_json();
      r["model"] = model;
      r["variant"] = vname;
      r["answer_strings"] = res.answer_strings;
      r["ungrounded_strings"] = res.ungrounded_strings;
      r["ungrounded_rate"] = res.ungrounded_rate() * 100.0;
      runs.push_back(r);
      results.push_back(std::move(res));
    }
  }
  const auto table = llm::report_llm(results);
  write_json(out / "llm_report.json", {{"runs", runs}, {"table", table.data}});
  write_text(out / "llm_report.txt", table.text);
  const auto stats = client.stats();
  auto snapshot = cfg.to_json();
  snapshot["client_stats"] = {{"network_calls", stats.network_calls}, {"cache_hits", stats.cache_hits},
                              {"retries", stats.retries}};
  RunStep step{"llm-eval", snapshot, corpus_checksum({cfg.data}), cfg.seed, started, utc_now(),
               {"subset.json", "transcripts", "llm_report.json", "llm_report.txt"}};
  RunManifest::record(out, step);
  std::cout << table.text;
}

// ---- synth -----------------------------------------------------------------

struct SynthArgs {
  std::string out;
  int train = 20;
  int dev = 6;
  int test = 6;
  std::uint64_t seed = 7;
};

void cmd_synth(const SynthArgs& a) {
  synthetic::Options opts;
  opts.train_docs = a.train;
  opts.dev_docs = a.dev;
  opts.test_docs = a.test;
  opts.seed = a.seed;
  const auto corpus = synthetic::generate(opts);
  fs::create_directories(a.out);
  for (Split s : {Split::kTrain, Split::kDev, Split::kTest}) {
    write_rams(fs::path(a.out) / (std::string(split_name(s)) + ".jsonlines"), corpus.subset(s));
  }
  synthetic::ontology().save(fs::path(a.out) / "ontology.tsv");
  std::cout << corpus.documents.size() << " synthetic documents -> " << a.out << '\n';
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Prompt-based document-level event argument extraction"};
  app.require_subcommand(1);
  app.set_version_flag("--version", eae::code_version());

  PrepareArgs prep;
  auto* sp = app.add_subcommand("prepare", "Validate RAMS files and write corpus, ontology and stats");
  sp->add_option("--data", prep.data, "Directory of RAMS *.jsonlines files")->required();
  sp->add_option("--out", prep.out, "Output directory")->required();
  sp->add_option("--ontology", prep.ontology, "Ontology TSV (default: derived from the data)");

  TrainArgs tr;
  auto* st = app.add_subcommand("train", "Train an extractor from a run config");
  st->add_option("--config", tr.config, "Run config JSON")->required();
  st->add_option("--out", tr.out, "Output directory (overrides output_dir)");
  st->add_flag("--quiet", tr.quiet, "No per-epoch progress");

  PredictArgs pr;
  auto* spr = app.add_subcommand("predict", "Predict argument spans with a checkpoint");
  spr->add_option("--checkpoint", pr.checkpoint, "Checkpoint directory")->required();
  spr->add_option("--data", pr.data, "RAMS file to predict on")->required();
  spr->add_option("--out", pr.out, "Output directory")->required();

  EvaluateArgs ev;
  auto* se = app.add_subcommand("evaluate", "Score predictions against gold");
  se->add_option("--predictions", ev.predictions, "predictions.jsonl")->required();
  se->add_option("--gold", ev.gold, "Gold RAMS file")->required();
  se->add_option("--out", ev.out, "Output directory (default: next to the predictions)");

  LlmEvalArgs le;
  auto* sl = app.add_subcommand("llm-eval", "Evaluate chat LLMs on a fixed subset");
  sl->add_option("--config", le.config, "LLM evaluation config JSON")->required();

  ReportArgs rp;
  auto* sr = app.add_subcommand("report", "Assemble a results grid from run directories");
  sr->add_option("runs", rp.runs, "Run directories holding eval.json and run_config.json")->required();
  sr->add_option("--out", rp.out, "Write report.json and report.txt here");

  SynthArgs sy;
  auto* ss = app.add_subcommand("synth", "Write a small synthetic RAMS-format corpus");
  ss->add_option("--out", sy.out, "Output directory")->required();
  ss->add_option("--train", sy.train, "Training documents");
  ss->add_option("--dev", sy.dev, "Development documents");
  ss->add_option("--test", sy.test, "Test documents");
  ss->add_option("--seed", sy.seed, "Generator seed");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : static_cast<int>(eae::ErrorCategory::kUsage);
  }

  try {
    if (*sp) cmd_prepare(prep);
    else if (*st) cmd_train(tr);
    else if (*spr) cmd_predict(pr);
    else if (*se) cmd_evaluate(ev);
    else if (*sl) cmd_llm_eval(le);
    else if (*sr) cmd_report(rp);
    else if (*ss) cmd_synth(sy);
  } catch (const eae::Error& e) {
    std::cerr << "error (" << eae::category_name(e.category()) << "): " << e.what() << '\n';
    return e.exit_code();
  } catch (const std::filesystem::filesystem_error& e) {
    std::cerr << "error (path): " << e.what() << '\n';
    return static_cast<int>(eae::ErrorCategory::kPath);
  }
  return 0;
}
