#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "eae/corpus.hpp"
#include "eae/encoding.hpp"
#include "eae/error.hpp"
#include "eae/evaluation.hpp"
#include "eae/loss.hpp"
#include "eae/model.hpp"
#include "eae/ontology.hpp"
#include "eae/optim.hpp"
#include "eae/prompting.hpp"
#include "eae/rng.hpp"
#include "eae/safetensors.hpp"
#include "eae/tokenizer.hpp"

namespace eae {

// Run configuration. Serialized as a flat JSON object; see README for the schema.
struct TrainConfig {
  PromptVariant variant = PromptVariant::kRole;
  TriggerMarking marking = TriggerMarking::kMarkers;
  LossKind loss = LossKind::kCe;
  double learning_rate = 1e-3;
  int batch_size = 8;
  int max_epochs = 20;
  int patience = 5;
  std::uint64_t seed = 13;
  double dice_eps = kDefaultDiceEps;

  std::string encoder = "mini";      // "mini" or a checkpoint directory
  std::string encoder_label = "mini";
  int hidden = 64;
  int layers = 2;
  int heads = 4;
  int intermediate = 128;
  double dropout = 0.1;
  std::optional<bool> use_segment;   // defaults to marking == segment
  int min_word_count = 1;

  int max_len = kDefaultMaxLen;
  double threshold = kDefaultThreshold;
  double weight_decay = 0.01;
  double warmup_ratio = 0.1;
  std::string schedule = "linear";   // linear | constant
  double grad_clip = 1.0;
  bool predicted_clues = false;      // two-pass inference for mrole/mevent

  std::string train_file;
  std::string dev_file;
  std::string test_file;
  std::string ontology_file;
  std::string output_dir;

  bool segment_enabled() const { return use_segment.value_or(marking == TriggerMarking::kSegment); }

  void validate() const {
    if (max_epochs < 1) throw ConfigError("config field 'max_epochs' must be >= 1");
    if (patience < 1 || patience > max_epochs) {
      throw ConfigError("config field 'patience' must lie in [1, max_epochs]");
    }
    if (!(dice_eps > 0.0)) throw ConfigError("config field 'dice_eps' must be > 0");
    if (batch_size < 1) throw ConfigError("config field 'batch_size' must be >= 1");
    if (!(learning_rate > 0.0)) throw ConfigError("config field 'learning_rate' must be > 0");
    if (!(threshold > 0.0 && threshold < 1.0)) throw ConfigError("config field 'threshold' must lie in (0,1)");
    if (max_len < 8) throw ConfigError("config field 'max_len' must be >= 8");
    if (warmup_ratio < 0.0 || warmup_ratio >= 1.0) throw ConfigError("config field 'warmup_ratio' must lie in [0,1)");
    if (schedule != "linear" && schedule != "constant") {
      throw ConfigError("config field 'schedule' must be 'linear' or 'constant'");
    }
    if (segment_enabled() != (marking == TriggerMarking::kSegment)) {
      throw ConfigError("config field 'use_segment' must be true exactly when marking is 'segment'");
    }
    if (predicted_clues && !(variant == PromptVariant::kMRole || variant == PromptVariant::kMEvent)) {
      throw ConfigError("config field 'predicted_clues' applies only to mrole and mevent");
    }
  }

  nlohmann::json to_json() const {
    nlohmann::json j = {
        {"variant", variant_name(variant)}, {"marking", marking_name(marking)},
        {"loss", loss_name(loss)},          {"learning_rate", learning_rate},
        {"batch_size", batch_size},         {"max_epochs", max_epochs},
        {"patience", patience},             {"seed", seed},
        {"dice_eps", dice_eps},             {"encoder", encoder},
        {"encoder_label", encoder_label},   {"hidden", hidden},
        {"layers", layers},                 {"heads", heads},
        {"intermediate", intermediate},     {"dropout", dropout},
        {"min_word_count", min_word_count}, {"max_len", max_len},
        {"threshold", threshold},           {"weight_decay", weight_decay},
        {"warmup_ratio", warmup_ratio},     {"schedule", schedule},
        {"grad_clip", grad_clip},           {"predicted_clues", predicted_clues},
        {"train_file", train_file},         {"dev_file", dev_file},
        {"test_file", test_file},           {"ontology_file", ontology_file},
        {"output_dir", output_dir},         {"optimizer", "adamw"}};
    if (use_segment) j["use_segment"] = *use_segment;
    return j;
  }

  static TrainConfig from_json(const nlohmann::json& j) {
    if (!j.is_object()) throw ConfigError("run config must be a JSON object");
    TrainConfig c;
    const std::map<std::string, std::function<void(const nlohmann::json&)>> fields = {
        {"variant", [&](const auto& v) { c.variant = parse_variant(v.template get<std::string>()); }},
        {"marking", [&](const auto& v) { c.marking = parse_marking(v.template get<std::string>()); }},
        {"loss", [&](const auto& v) { c.loss = parse_loss(v.template get<std::string>()); }},
        {"learning_rate", [&](const auto& v) { c.learning_rate = v.template get<double>(); }},
        {"batch_size", [&](const auto& v) { c.batch_size = v.template get<int>(); }},
        {"max_epochs", [&](const auto& v) { c.max_epochs = v.template get<int>(); }},
        {"patience", [&](const auto& v) { c.patience = v.template get<int>(); }},
        {"seed", [&](const auto& v) { c.seed = v.template get<std::uint64_t>(); }},
        {"dice_eps", [&](const auto& v) { c.dice_eps = v.template get<double>(); }},
        {"encoder", [&](const auto& v) { c.encoder = v.template get<std::string>(); }},
        {"encoder_label", [&](const auto& v) { c.encoder_label = v.template get<std::string>(); }},
        {"hidden", [&](const auto& v) { c.hidden = v.template get<int>(); }},
        {"layers", [&](const auto& v) { c.layers = v.template get<int>(); }},
        {"heads", [&](const auto& v) { c.heads = v.template get<int>(); }},
        {"intermediate", [&](const auto& v) { c.intermediate = v.template get<int>(); }},
        {"dropout", [&](const auto& v) { c.dropout = v.template get<double>(); }},
        {"use_segment", [&](const auto& v) { c.use_segment = v.template get<bool>(); }},
        {"min_word_count", [&](const auto& v) { c.min_word_count = v.template get<int>(); }},
        {"max_len", [&](const auto& v) { c.max_len = v.template get<int>(); }},
        {"threshold", [&](const auto& v) { c.threshold = v.template get<double>(); }},
        {"weight_decay", [&](const auto& v) { c.weight_decay = v.template get<double>(); }},
        {"warmup_ratio", [&](const auto& v) { c.warmup_ratio = v.template get<double>(); }},
        {"schedule", [&](const auto& v) { c.schedule = v.template get<std::string>(); }},
        {"grad_clip", [&](const auto& v) { c.grad_clip = v.template get<double>(); }},
        {"predicted_clues", [&](const auto& v) { c.predicted_clues = v.template get<bool>(); }},
        {"train_file", [&](const auto& v) { c.train_file = v.template get<std::string>(); }},
        {"dev_file", [&](const auto& v) { c.dev_file = v.template get<std::string>(); }},
        {"test_file", [&](const auto& v) { c.test_file = v.template get<std::string>(); }},
        {"ontology_file", [&](const auto& v) { c.ontology_file = v.template get<std::string>(); }},
        {"output_dir", [&](const auto& v) { c.output_dir = v.template get<std::string>(); }},
        {"optimizer", [&](const auto& v) {
           if (v.template get<std::string>() != "adamw") throw ConfigError("only 'adamw' is supported");
         }},
    };
    for (const auto& [key, value] : j.items()) {
      auto it = fields.find(key);
      if (it == fields.end()) throw ConfigError("unknown config field '" + key + "'");
      try {
        it->second(value);
      } catch (const nlohmann::json::exception&) {
        throw ConfigError("config field '" + key + "' has the wrong type");
      } catch (const UsageError& e) {
        throw ConfigError("config field '" + key + "': " + e.what());
      }
    }
    c.validate();
    return c;
  }

  static TrainConfig load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw PathError("cannot open run config '" + path.string() + "'");
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
      throw ConfigError(path.string() + ": " + e.what());
    }
    return from_json(j);
  }
};

// One (event, role) query, ready for the model.
struct Instance {
  std::size_t doc = 0;  // index into the split's documents
  int event = 0;
  std::string role;
  ModelInput input;
  TokenLabelVector labels;  // over retained original tokens
};

// Instances for every (event, ontology role) of a split, including roles
// without gold arguments.
inline std::vector<Instance> build_instances(const CorpusSplit& split, const Ontology& ontology,
                                             const WordPieceTokenizer& tok, PromptVariant variant,
                                             TriggerMarking marking, int max_len,
                                             const std::map<std::string, std::vector<RolePredictions>>*
                                                 predicted = nullptr) {
  std::vector<Instance> out;
  for (std::size_t di = 0; di < split.documents.size(); ++di) {
    const Document& doc = split.documents[di];
    const auto& events = split.events_of(doc.doc_key);
    const std::vector<RolePredictions>* doc_preds = nullptr;
    if (predicted != nullptr) {
      auto it = predicted->find(doc.doc_key);
      if (it != predicted->end()) doc_preds = &it->second;
    }
    for (int ei = 0; ei < static_cast<int>(events.size()); ++ei) {
      const auto& event = events[static_cast<std::size_t>(ei)];
      for (const auto& role : ontology.roles_for(event.trigger.event_type)) {
        PromptRequest req;
        req.doc = &doc;
        req.events = &events;
        req.event_index = static_cast<std::size_t>(ei);
        req.role = role;
        req.variant = variant;
        req.marking = marking;
        req.predicted = doc_preds;
        const PromptText prompt = build_prompt(req, ontology);
        const AssembledSequence seq = assemble_input(prompt, doc, event.trigger, marking);
        Instance inst;
        inst.doc = di;
        inst.event = ei;
        inst.role = role;
        inst.input = encode(seq, tok, max_len);
        inst.labels = window_labels(make_labels(event, role, doc.size()), inst.input);
        out.push_back(std::move(inst));
      }
    }
  }
  return out;
}

// Stops once `patience` consecutive epochs fail to improve on the best score.
class EarlyStopping {
 public:
  explicit EarlyStopping(int patience) : patience_(patience) {}

  // Returns true when training should stop after this epoch.
  bool update(double score) {
    if (!best_ || score > *best_) {
      best_ = score;
      since_best_ = 0;
      improved_ = true;
    } else {
      ++since_best_;
      improved_ = false;
    }
    return since_best_ >= patience_;
  }

  bool improved() const { return improved_; }
  double best() const { return best_.value_or(0.0); }

 private:
  int patience_;
  std::optional<double> best_;
  int since_best_ = 0;
  bool improved_ = false;
};

struct EpochMetrics {
  int epoch = 0;
  double train_loss = 0.0;
  double dev_f1 = 0.0;
  double dev_p = 0.0;
  double dev_r = 0.0;
  double lr = 0.0;
};

struct TrainReport {
  std::vector<double> dev_f1;
  std::vector<EpochMetrics> epochs;
  std::string best_checkpoint;
  double best_dev_f1 = 0.0;
  int best_epoch = 0;
  double wall_seconds = 0.0;
  bool stopped_early = false;

  nlohmann::json to_json() const {
    nlohmann::json ep = nlohmann::json::array();
    for (const auto& e : epochs) {
      ep.push_back({{"epoch", e.epoch}, {"train_loss", e.train_loss}, {"dev_f1", e.dev_f1},
                    {"dev_p", e.dev_p}, {"dev_r", e.dev_r}, {"lr", e.lr}});
    }
    return {{"dev_f1", dev_f1},       {"best_dev_f1", best_dev_f1}, {"best_epoch", best_epoch},
            {"best_checkpoint", best_checkpoint}, {"wall_seconds", wall_seconds},
            {"stopped_early", stopped_early}, {"epochs", ep}};
  }
};

// Words the fixed prompt templates can emit.
inline std::vector<std::string> template_words() {
  return {"What", "is", "the", "in", "event", "triggered", "by", "The", "'", "?", ":", ";", "|", ",", "."};
}

// Model, tokenizer and ontology travelling together.
template <typename Scalar>
struct ExtractionSystem {
  ExtractionModel<Scalar> model;
  WordPieceTokenizer tokenizer;
  Ontology ontology;
  TrainConfig config;

  void save(const std::filesystem::path& dir) const {
    std::filesystem::create_directories(dir);
    nlohmann::json enc = model.config().to_json();
    enc["format"] = "eae-checkpoint";
    enc["format_version"] = kCheckpointFormatVersion;
    std::ofstream(dir / "encoder_config.json") << enc.dump(2) << '\n';
    std::ofstream(dir / "run_config.json") << config.to_json().dump(2) << '\n';
    tokenizer.save(dir / "vocab.txt");
    ontology.save(dir / "ontology.tsv");
    safetensors::save(dir / "model.safetensors", model.to_tensors(),
                      {{"format", "eae-checkpoint"}, {"format_version", std::to_string(kCheckpointFormatVersion)}});
  }

  static ExtractionSystem load(const std::filesystem::path& dir) {
    if (!std::filesystem::exists(dir / "encoder_config.json")) {
      throw PathError("'" + dir.string() + "' is not a checkpoint directory (no encoder_config.json)");
    }
    nlohmann::json enc;
    try {
      enc = nlohmann::json::parse(std::ifstream(dir / "encoder_config.json"));
    } catch (const nlohmann::json::parse_error& e) {
      throw FormatError(dir.string() + "/encoder_config.json: " + e.what());
    }
    if (enc.value("format", "") != "eae-checkpoint" ||
        enc.value("format_version", 0) != kCheckpointFormatVersion) {
      throw FormatError("'" + dir.string() + "' has an unsupported checkpoint format version");
    }
    ExtractionSystem sys;
    const auto ecfg = EncoderConfig::from_json(enc);
    sys.tokenizer = WordPieceTokenizer::load(dir / "vocab.txt", ecfg.lowercase);
    sys.ontology = Ontology::load(dir / "ontology.tsv");
    sys.config = TrainConfig::load(dir / "run_config.json");
    sys.model = ExtractionModel<Scalar>(ecfg, 0);
    sys.model.load_tensors(safetensors::load(dir / "model.safetensors"));
    return sys;
  }
};

// Encoder + tokenizer for a run: a fresh miniature encoder, or an import of
// a BERT-layout directory (config.json, vocab.txt, model.safetensors).
template <typename Scalar>
std::pair<ExtractionModel<Scalar>, WordPieceTokenizer> make_encoder(const TrainConfig& cfg,
                                                                    const CorpusSplit& train,
                                                                    const Ontology& ontology) {
  if (cfg.encoder == "mini") {
    std::vector<std::string> words = template_words();
    for (const auto& d : train.documents) words.insert(words.end(), d.tokens.begin(), d.tokens.end());
    for (const auto& [type, roles] : ontology.table()) {
      words.push_back(type);
      words.insert(words.end(), roles.begin(), roles.end());
    }
    auto tok = WordPieceTokenizer::build(words, cfg.min_word_count, true);
    EncoderConfig ec;
    ec.checkpoint_id = "mini";
    ec.vocab_size = static_cast<int>(tok.size());
    ec.hidden = cfg.hidden;
    ec.layers = cfg.layers;
    ec.heads = cfg.heads;
    ec.intermediate = cfg.intermediate;
    ec.max_positions = std::max(cfg.max_len, 8);
    ec.dropout = cfg.dropout;
    ec.attention_dropout = cfg.dropout;
    ec.use_segment = cfg.segment_enabled();
    return {ExtractionModel<Scalar>(ec, cfg.seed), std::move(tok)};
  }

  const std::filesystem::path dir(cfg.encoder);
  if (!std::filesystem::is_directory(dir)) {
    throw ConfigError("encoder '" + cfg.encoder +
                      "' is neither 'mini' nor a local checkpoint directory; download the checkpoint "
                      "(config.json, vocab.txt, model.safetensors) and point 'encoder' at it");
  }
  nlohmann::json hf;
  try {
    hf = nlohmann::json::parse(std::ifstream(dir / "config.json"));
  } catch (const std::exception& e) {
    throw ConfigError(dir.string() + "/config.json: " + e.what());
  }
  if (hf.value("model_type", "") != "bert") {
    throw ConfigError("encoder '" + cfg.encoder + "': only BERT-layout checkpoints can be imported (model_type '" +
                      hf.value("model_type", "?") + "')");
  }
  bool lower = true;
  if (std::filesystem::exists(dir / "tokenizer_config.json")) {
    lower = nlohmann::json::parse(std::ifstream(dir / "tokenizer_config.json")).value("do_lower_case", true);
  }
  auto tok = WordPieceTokenizer::load(dir / "vocab.txt", lower);
  EncoderConfig ec;
  ec.checkpoint_id = cfg.encoder;
  ec.vocab_size = static_cast<int>(tok.size());
  ec.hidden = hf.value("hidden_size", 768);
  ec.layers = hf.value("num_hidden_layers", 12);
  ec.heads = hf.value("num_attention_heads", 12);
  ec.intermediate = hf.value("intermediate_size", 3072);
  ec.max_positions = hf.value("max_position_embeddings", 512);
  ec.dropout = hf.value("hidden_dropout_prob", 0.1);
  ec.attention_dropout = hf.value("attention_probs_dropout_prob", 0.1);
  ec.layer_norm_eps = hf.value("layer_norm_eps", 1e-12);
  ec.use_segment = cfg.segment_enabled();
  ec.lowercase = lower;
  if (hf.value("type_vocab_size", 2) != 2 || hf.value("hidden_act", "gelu") != "gelu") {
    throw ConfigError("encoder '" + cfg.encoder + "': expected type_vocab_size 2 and gelu activation");
  }
  ExtractionModel<Scalar> model(ec, cfg.seed);
  auto raw = safetensors::load(dir / "model.safetensors");
  safetensors::TensorMap renamed;
  for (auto& [name, t] : raw) {
    std::string n = name;
    if (n.starts_with("bert.")) n = n.substr(5);
    if (n.ends_with(".gamma")) n = n.substr(0, n.size() - 6) + ".weight";
    if (n.ends_with(".beta")) n = n.substr(0, n.size() - 5) + ".bias";
    renamed.emplace(n, std::move(t));
  }
  model.load_tensors(renamed, {"head.weight", "head.bias"});
  return {std::move(model), std::move(tok)};
}

template <typename Scalar>
class Trainer {
 public:
  using Model = ExtractionModel<Scalar>;

  // Called after every epoch; useful for progress output.
  using EpochCallback = std::function<void(const EpochMetrics&)>;

  Trainer(TrainConfig config, CorpusSplit corpus, std::optional<Ontology> ontology = std::nullopt)
      : config_(std::move(config)), corpus_(std::move(corpus)) {
    config_.validate();
    ontology_ = ontology ? *ontology
                         : (config_.ontology_file.empty() ? Ontology::derive(corpus_)
                                                          : Ontology::load(config_.ontology_file));
    ontology_.validate(corpus_);
    train_ = corpus_.subset(Split::kTrain);
    dev_ = corpus_.subset(Split::kDev);
    if (train_.documents.empty() || dev_.documents.empty()) {
      throw UsageError("training needs nonempty train and dev splits");
    }
  }

  void on_epoch(EpochCallback cb) { callback_ = std::move(cb); }

  TrainReport train() {
    const auto t0 = std::chrono::steady_clock::now();
    auto [model, tok] = make_encoder<Scalar>(config_, train_, ontology_);
    system_.model = std::move(model);
    system_.tokenizer = std::move(tok);
    system_.ontology = ontology_;
    system_.config = config_;
    Model& m = system_.model;
    if (m.config().use_segment != (config_.marking == TriggerMarking::kSegment)) {
      throw ConfigError("segment embeddings require segment marking and vice versa");
    }

    auto instances = build_instances(train_, ontology_, system_.tokenizer, config_.variant, config_.marking,
                                     config_.max_len);
    if (instances.empty()) throw UsageError("training split yields no instances (no triggers)");

    AdamWOptions opts;
    opts.lr = config_.learning_rate;
    opts.weight_decay = config_.weight_decay;
    AdamW<Scalar> optim(m, opts);
    const long batches_per_epoch =
        (static_cast<long>(instances.size()) + config_.batch_size - 1) / config_.batch_size;
    const long total_steps = batches_per_epoch * config_.max_epochs;
    const long warmup = static_cast<long>(std::floor(config_.warmup_ratio * static_cast<double>(total_steps)));

    Rng rng(config_.seed ^ 0x9e3779b97f4a7c15ull);
    EarlyStopping stopper(config_.patience);
    TrainReport report;
    std::vector<std::size_t> order(instances.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::ofstream metrics;
    std::filesystem::path best_dir;
    if (!config_.output_dir.empty()) {
      std::filesystem::create_directories(config_.output_dir);
      metrics.open(std::filesystem::path(config_.output_dir) / "metrics.jsonl");
      best_dir = std::filesystem::path(config_.output_dir) / "checkpoint";
    }
    std::optional<ExtractionSystem<Scalar>> best_in_memory;

    typename Model::Cache cache;
    std::vector<double> grad;
    long step = 0;
    for (int epoch = 1; epoch <= config_.max_epochs; ++epoch) {
      rng.shuffle(order);
      double loss_sum = 0.0;
      double lr = config_.learning_rate;
      for (std::size_t b = 0; b < order.size(); b += static_cast<std::size_t>(config_.batch_size)) {
        const std::size_t e = std::min(order.size(), b + static_cast<std::size_t>(config_.batch_size));
        m.zero_grad();
        for (std::size_t k = b; k < e; ++k) {
          const Instance& inst = instances[order[k]];
          const auto out = m.forward(inst.input, &rng, &cache);
          loss_sum += loss_from_logits(config_.loss, inst.labels.values, out.logits, config_.dice_eps, &grad);
          m.backward(cache, grad);
        }
        const double scale = 1.0 / static_cast<double>(e - b);
        const double norm = grad_norm(m) * scale;
        const double clip = (config_.grad_clip > 0 && norm > config_.grad_clip) ? config_.grad_clip / norm : 1.0;
        lr = learning_rate_at(step, warmup, total_steps);
        optim.step(m, lr, scale * clip);
        ++step;
      }

      EpochMetrics em;
      em.epoch = epoch;
      em.train_loss = loss_sum / static_cast<double>(instances.size());
      em.lr = lr;
      const EvalReport dev_report = evaluate(predict(dev_), dev_);
      em.dev_f1 = dev_report.overall.f1;
      em.dev_p = dev_report.overall.precision;
      em.dev_r = dev_report.overall.recall;
      report.dev_f1.push_back(em.dev_f1);
      report.epochs.push_back(em);
      if (metrics) {
        metrics << nlohmann::json{{"epoch", em.epoch}, {"train_loss", em.train_loss}, {"dev_p", em.dev_p},
                                  {"dev_r", em.dev_r}, {"dev_f1", em.dev_f1}, {"lr", em.lr}}
                       .dump()
                << '\n';
      }
      if (callback_) callback_(em);

      const bool stop = stopper.update(em.dev_f1);
      if (stopper.improved()) {
        report.best_dev_f1 = em.dev_f1;
        report.best_epoch = epoch;
        best_in_memory = system_;
        if (!best_dir.empty()) {
          system_.save(best_dir);
          report.best_checkpoint = best_dir.string();
        }
      }
      if (stop) {
        report.stopped_early = epoch < config_.max_epochs;
        break;
      }
    }
    if (best_in_memory) system_ = std::move(*best_in_memory);
    report.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return report;
  }

  // Predictions for every (event, ontology role) of a split under the run's
  // variant. Ceilings take gold clues from the split itself.
  std::vector<PredictionRecord> predict(const CorpusSplit& split) const {
    return predict_with(system_, split);
  }

  static std::vector<PredictionRecord> predict_with(const ExtractionSystem<Scalar>& sys, const CorpusSplit& split) {
    const auto& cfg = sys.config;
    const bool two_pass = cfg.predicted_clues &&
                          (cfg.variant == PromptVariant::kMRole || cfg.variant == PromptVariant::kMEvent);
    auto run = [&](const std::map<std::string, std::vector<RolePredictions>>* clues) {
      const auto instances =
          build_instances(split, sys.ontology, sys.tokenizer, cfg.variant, cfg.marking, cfg.max_len, clues);
      std::vector<PredictionRecord> preds;
      preds.reserve(instances.size());
      for (const auto& inst : instances) {
        const auto out = sys.model.forward(inst.input);
        PredictionRecord r;
        r.doc_key = split.documents[inst.doc].doc_key;
        r.event_index = inst.event;
        r.role = inst.role;
        r.spans = decode_spans(out.probs, cfg.threshold, inst.input.first_token());
        r.variant = variant_name(cfg.variant);
        r.marking = marking_name(cfg.marking);
        preds.push_back(std::move(r));
      }
      return preds;
    };
    auto preds = run(nullptr);
    if (!two_pass) return preds;
    std::map<std::string, std::vector<RolePredictions>> clues;
    for (const auto& d : split.documents) clues[d.doc_key].resize(split.events_of(d.doc_key).size());
    for (const auto& p : preds) clues[p.doc_key][static_cast<std::size_t>(p.event_index)][p.role] = p.spans;
    return run(&clues);
  }

  const ExtractionSystem<Scalar>& system() const { return system_; }
  const Ontology& ontology() const { return ontology_; }
  const CorpusSplit& train_split() const { return train_; }
  const CorpusSplit& dev_split() const { return dev_; }

 private:
  double learning_rate_at(long step, long warmup, long total) const {
    const double base = config_.learning_rate;
    if (warmup > 0 && step < warmup) return base * static_cast<double>(step + 1) / static_cast<double>(warmup);
    if (config_.schedule == "constant" || total <= warmup) return base;
    const double frac = static_cast<double>(total - step) / static_cast<double>(total - warmup);
    return base * std::max(frac, 0.0);
  }

  TrainConfig config_;
  CorpusSplit corpus_;
  Ontology ontology_;
  CorpusSplit train_, dev_;
  ExtractionSystem<Scalar> system_;
  EpochCallback callback_;
};

}  // namespace eae
