#include <filesystem>

#include <gtest/gtest.h>

#include "eae/synthetic.hpp"
#include "eae/training.hpp"

namespace eae {
namespace {

TrainConfig small_config() {
  TrainConfig c;
  c.hidden = 16;
  c.layers = 1;
  c.heads = 2;
  c.intermediate = 32;
  c.max_epochs = 3;
  c.patience = 3;
  c.batch_size = 4;
  c.max_len = 128;
  return c;
}

CorpusSplit small_corpus() {
  synthetic::Options opts;
  opts.train_docs = 6;
  opts.dev_docs = 3;
  opts.seed = 12;
  return synthetic::generate(opts);
}

TEST(Config, DefaultsValidate) { EXPECT_NO_THROW(TrainConfig{}.validate()); }

TEST(Config, JsonRoundTrip) {
  auto c = small_config();
  c.variant = PromptVariant::kMEventCeiling;
  c.loss = LossKind::kDice;
  const auto back = TrainConfig::from_json(c.to_json());
  EXPECT_EQ(back.to_json(), c.to_json());
}

TEST(Config, UnknownFieldNamed) {
  try {
    TrainConfig::from_json({{"learning_rat", 0.1}});
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("learning_rat"), std::string::npos);
  }
}

TEST(Config, WrongTypeNamed) {
  try {
    TrainConfig::from_json({{"batch_size", "eight"}});
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("batch_size"), std::string::npos);
  }
}

TEST(Config, InvalidValues) {
  EXPECT_THROW(TrainConfig::from_json({{"patience", 0}}), ConfigError);
  EXPECT_THROW(TrainConfig::from_json({{"patience", 30}, {"max_epochs", 5}}), ConfigError);
  EXPECT_THROW(TrainConfig::from_json({{"dice_eps", 0.0}}), ConfigError);
  EXPECT_THROW(TrainConfig::from_json({{"variant", "bogus"}}), ConfigError);
  EXPECT_THROW(TrainConfig::from_json({{"use_segment", true}}), ConfigError);
  EXPECT_THROW(TrainConfig::from_json({{"predicted_clues", true}}), ConfigError);
  EXPECT_NO_THROW(TrainConfig::from_json({{"predicted_clues", true}, {"variant", "mrole"}}));
  EXPECT_THROW(TrainConfig::from_json(nlohmann::json::array()), ConfigError);
}

TEST(Config, MissingFileIsPathError) {
  EXPECT_THROW(TrainConfig::load("/nonexistent/run.json"), PathError);
}

TEST(EarlyStopping, StopsAfterPatienceNonImprovingEpochs) {
  EarlyStopping s(1);
  EXPECT_FALSE(s.update(0.5));
  EXPECT_TRUE(s.improved());
  EXPECT_TRUE(s.update(0.4));
  EXPECT_FALSE(s.improved());
  EXPECT_DOUBLE_EQ(s.best(), 0.5);
}

TEST(EarlyStopping, EqualScoreDoesNotImprove) {
  EarlyStopping s(2);
  EXPECT_FALSE(s.update(0.5));
  EXPECT_FALSE(s.update(0.5));
  EXPECT_TRUE(s.update(0.5));
}

TEST(EarlyStopping, ImprovementResetsCounter) {
  EarlyStopping s(2);
  s.update(0.1);
  EXPECT_FALSE(s.update(0.05));
  EXPECT_FALSE(s.update(0.2));
  EXPECT_FALSE(s.update(0.1));
  EXPECT_TRUE(s.update(0.1));
}

TEST(Instances, OnePerEventRole) {
  const auto corpus = small_corpus();
  const auto train = corpus.subset(Split::kTrain);
  const auto ontology = synthetic::ontology();
  const auto tok = WordPieceTokenizer::build(template_words(), 1, true);
  const auto inst = build_instances(train, ontology, tok, PromptVariant::kRole, TriggerMarking::kMarkers, 256);
  std::size_t expected = 0;
  for (const auto& d : train.documents) {
    for (const auto& e : train.events_of(d.doc_key)) expected += ontology.roles_for(e.trigger.event_type).size();
  }
  EXPECT_EQ(inst.size(), expected);
  for (const auto& i : inst) EXPECT_EQ(i.labels.size(), i.input.retained());
}

TEST(Trainer, SeededRunsAreIdentical) {
  const auto corpus = small_corpus();
  Trainer<float> a(small_config(), corpus), b(small_config(), corpus);
  const auto ra = a.train();
  const auto rb = b.train();
  ASSERT_EQ(ra.dev_f1.size(), 3u);
  EXPECT_EQ(ra.dev_f1, rb.dev_f1);
  EXPECT_EQ(a.predict(a.dev_split()), b.predict(b.dev_split()));
}

TEST(Trainer, EarlyStopsOnFlatDevScore) {
  auto cfg = small_config();
  cfg.max_epochs = 6;
  cfg.patience = 1;
  cfg.learning_rate = 1e-9;  // the model cannot move: dev F1 stays put
  Trainer<float> t(cfg, small_corpus());
  const auto r = t.train();
  EXPECT_EQ(r.dev_f1.size(), 2u);
  EXPECT_TRUE(r.stopped_early);
  EXPECT_EQ(r.best_epoch, 1);
}

TEST(Trainer, NeedsTrainAndDev) {
  synthetic::Options opts;
  opts.train_docs = 3;
  EXPECT_THROW(Trainer<float>(small_config(), synthetic::generate(opts)), UsageError);
}

TEST(Trainer, CheckpointRoundTrip) {
  auto cfg = small_config();
  cfg.max_epochs = 1;
  cfg.patience = 1;
  cfg.output_dir = (std::filesystem::temp_directory_path() / "eae_train_test").string();
  std::filesystem::remove_all(cfg.output_dir);
  Trainer<float> t(cfg, small_corpus());
  const auto r = t.train();
  ASSERT_FALSE(r.best_checkpoint.empty());
  EXPECT_TRUE(std::filesystem::exists(std::filesystem::path(cfg.output_dir) / "metrics.jsonl"));
  const auto sys = ExtractionSystem<float>::load(r.best_checkpoint);
  EXPECT_EQ(Trainer<float>::predict_with(sys, t.dev_split()), t.predict(t.dev_split()));
}

TEST(Trainer, UnknownEncoderIsConfigError) {
  auto cfg = small_config();
  cfg.encoder = "/nonexistent/bert-base";
  Trainer<float> t(cfg, small_corpus());
  EXPECT_THROW(t.train(), ConfigError);
}

TEST(Trainer, PredictionsCoverEveryEventRole) {
  auto cfg = small_config();
  cfg.max_epochs = 1;
  cfg.patience = 1;
  cfg.variant = PromptVariant::kMRole;
  cfg.predicted_clues = true;
  Trainer<float> t(cfg, small_corpus());
  t.train();
  const auto preds = t.predict(t.dev_split());
  std::size_t expected = 0;
  for (const auto& d : t.dev_split().documents) {
    for (const auto& e : t.dev_split().events_of(d.doc_key)) {
      expected += t.ontology().roles_for(e.trigger.event_type).size();
    }
  }
  EXPECT_EQ(preds.size(), expected);
}

}  // namespace
}  // namespace eae
