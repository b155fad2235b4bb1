#pragma once

// Transformer encoder with a per-token binary extraction head.
//
// Layout and parameter names follow BERT checkpoints (post-LN blocks, GELU
// feed-forward, learned positions, two-row token-type embedding), so an F32
// BERT safetensors export can be imported directly. The head reads the first
// piece of every retained document token and emits one logit per token.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "eae/corpus.hpp"
#include "eae/encoding.hpp"
#include "eae/error.hpp"
#include "eae/rng.hpp"
#include "eae/safetensors.hpp"

namespace eae {

inline constexpr double kDefaultThreshold = 0.5;
inline constexpr int kCheckpointFormatVersion = 1;

struct EncoderConfig {
  std::string checkpoint_id = "mini";
  int vocab_size = 0;
  int hidden = 64;
  int layers = 2;
  int heads = 4;
  int intermediate = 128;
  int max_positions = 512;
  double dropout = 0.1;
  double attention_dropout = 0.1;
  double layer_norm_eps = 1e-12;
  double init_range = 0.02;
  bool use_segment = false;
  bool lowercase = true;

  nlohmann::json to_json() const {
    return {{"checkpoint_id", checkpoint_id}, {"vocab_size", vocab_size},
            {"hidden", hidden}, {"layers", layers}, {"heads", heads},
            {"intermediate", intermediate}, {"max_positions", max_positions},
            {"dropout", dropout}, {"attention_dropout", attention_dropout},
            {"layer_norm_eps", layer_norm_eps}, {"init_range", init_range},
            {"use_segment", use_segment}, {"lowercase", lowercase},
            {"representation", "encoder"}};
  }

  static EncoderConfig from_json(const nlohmann::json& j) {
    EncoderConfig c;
    c.checkpoint_id = j.value("checkpoint_id", c.checkpoint_id);
    c.vocab_size = j.value("vocab_size", c.vocab_size);
    c.hidden = j.value("hidden", c.hidden);
    c.layers = j.value("layers", c.layers);
    c.heads = j.value("heads", c.heads);
    c.intermediate = j.value("intermediate", c.intermediate);
    c.max_positions = j.value("max_positions", c.max_positions);
    c.dropout = j.value("dropout", c.dropout);
    c.attention_dropout = j.value("attention_dropout", c.attention_dropout);
    c.layer_norm_eps = j.value("layer_norm_eps", c.layer_norm_eps);
    c.init_range = j.value("init_range", c.init_range);
    c.use_segment = j.value("use_segment", c.use_segment);
    c.lowercase = j.value("lowercase", c.lowercase);
    return c;
  }

  void validate() const {
    if (hidden <= 0 || layers < 0 || heads <= 0 || intermediate <= 0 || vocab_size <= 0) {
      throw ConfigError("encoder dimensions must be positive");
    }
    if (hidden % heads != 0) throw ConfigError("hidden size must be divisible by heads");
    if (dropout < 0 || dropout >= 1 || attention_dropout < 0 || attention_dropout >= 1) {
      throw ConfigError("dropout must lie in [0,1)");
    }
  }
};

struct ExtractionOutput {
  TokenProbVector probs;
  std::vector<double> logits;
};

inline double logistic(double z) {
  if (z >= 0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

// Maximal runs with prob >= threshold, offset into original document indices.
inline std::vector<Span> decode_spans(const TokenProbVector& probs, double threshold = kDefaultThreshold,
                                      int offset = 0) {
  if (!(threshold > 0.0 && threshold < 1.0)) throw UsageError("decode threshold must lie in (0,1)");
  std::vector<Span> spans;
  int run_start = -1;
  const int n = probs.size();
  for (int i = 0; i <= n; ++i) {
    const bool on = i < n && probs.values[static_cast<std::size_t>(i)] >= threshold;
    if (on && run_start < 0) run_start = i;
    if (!on && run_start >= 0) {
      spans.push_back(Span{run_start + offset, i - 1 + offset});
      run_start = -1;
    }
  }
  return spans;
}

template <typename Scalar>
class ExtractionModel {
 public:
  using Mat = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
  using Col = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

  struct Param {
    std::string name;
    Mat value;
    Mat grad;
    bool is_vector = false;  // serialized as a 1-D tensor
  };

  struct LayerCache {
    Mat input, q, k, v, ctx;
    std::vector<Mat> probs, probs_mask;
    Mat attn_mask;
    Mat ln1_xhat, h1;
    Col ln1_rstd;
    Mat ff_pre, ff_act, ff_mask;
    Mat ln2_xhat;
    Col ln2_rstd;
  };

  struct Cache {
    std::vector<int> ids, segment, positions;
    Mat emb_xhat, emb_mask;
    Col emb_rstd;
    std::vector<LayerCache> layers;
    Mat output;
  };

  ExtractionModel() = default;

  // Randomly initialized encoder and head.
  ExtractionModel(const EncoderConfig& config, std::uint64_t seed) : config_(config) {
    config_.validate();
    build();
    Rng rng(seed);
    for (auto& p : params_) {
      if (p.name.ends_with("LayerNorm.weight")) {
        p.value.setOnes();
      } else if (p.is_vector) {
        p.value.setZero();
      } else {
        for (Eigen::Index i = 0; i < p.value.size(); ++i) {
          p.value.data()[i] = static_cast<Scalar>(rng.normal() * config_.init_range);
        }
      }
    }
  }

  const EncoderConfig& config() const { return config_; }
  std::vector<Param>& params() { return params_; }
  const std::vector<Param>& params() const { return params_; }

  std::size_t parameter_count() const {
    std::size_t n = 0;
    for (const auto& p : params_) n += static_cast<std::size_t>(p.value.size());
    return n;
  }

  void zero_grad() {
    for (auto& p : params_) p.grad.setZero();
  }

  void zero_head() {
    params_[head_w_].value.setZero();
    params_[head_b_].value.setZero();
  }

  // Logits and probabilities for every retained document token. With a
  // non-null rng, dropout is active (training mode).
  ExtractionOutput forward(const ModelInput& input, Rng* rng = nullptr, Cache* cache = nullptr) const {
    const int len = input.length();
    if (len > config_.max_positions) {
      throw ModelError("sequence of " + std::to_string(len) + " pieces exceeds encoder limit " +
                       std::to_string(config_.max_positions));
    }
    Cache local;
    Cache& c = cache != nullptr ? *cache : local;
    c.ids = input.ids;
    c.segment.assign(input.segment.size(), 0);
    if (config_.use_segment) c.segment = input.segment;
    c.positions.clear();
    for (const auto& a : input.alignment) c.positions.push_back(a.begin);

    const int hidden = config_.hidden;
    Mat x(len, hidden);
    const Mat& word = params_[word_emb_].value;
    const Mat& pos = params_[pos_emb_].value;
    const Mat& seg = params_[seg_emb_].value;
    for (int i = 0; i < len; ++i) {
      const int id = c.ids[static_cast<std::size_t>(i)];
      if (id < 0 || id >= word.rows()) throw ModelError("piece id " + std::to_string(id) + " outside vocabulary");
      x.row(i) = word.row(id) + pos.row(i) + seg.row(c.segment[static_cast<std::size_t>(i)]);
    }
    Mat h;
    layer_norm(x, params_[emb_ln_g_].value, params_[emb_ln_b_].value, h, c.emb_xhat, c.emb_rstd);
    c.emb_mask = dropout_mask(len, hidden, config_.dropout, rng);
    if (c.emb_mask.size() > 0) h.array() *= c.emb_mask.array();

    c.layers.resize(layers_.size());
    for (std::size_t l = 0; l < layers_.size(); ++l) {
      h = layer_forward(layers_[l], h, rng, c.layers[l]);
    }
    c.output = h;

    const Mat& hw = params_[head_w_].value;
    const Scalar hb = params_[head_b_].value(0, 0);
    ExtractionOutput out;
    out.logits.reserve(c.positions.size());
    out.probs.values.reserve(c.positions.size());
    for (int p : c.positions) {
      const double z = static_cast<double>(h.row(p).dot(hw.row(0)) + hb);
      out.logits.push_back(z);
      out.probs.values.push_back(logistic(z));
    }
    return out;
  }

  // Accumulates parameter gradients for d(loss)/d(logits).
  void backward(const Cache& c, const std::vector<double>& dlogits) {
    const int len = static_cast<int>(c.ids.size());
    const int hidden = config_.hidden;
    Mat dh = Mat::Zero(len, hidden);
    Mat& hw = params_[head_w_].value;
    Mat& dhw = params_[head_w_].grad;
    Scalar& dhb = params_[head_b_].grad(0, 0);
    for (std::size_t j = 0; j < c.positions.size(); ++j) {
      const auto g = static_cast<Scalar>(dlogits[j]);
      const int p = c.positions[j];
      dh.row(p) += g * hw.row(0);
      dhw.row(0) += g * c.output.row(p);
      dhb += g;
    }
    for (std::size_t l = layers_.size(); l-- > 0;) {
      dh = layer_backward(layers_[l], c.layers[l], dh);
    }
    if (c.emb_mask.size() > 0) dh.array() *= c.emb_mask.array();
    Mat dx = layer_norm_backward(dh, c.emb_xhat, c.emb_rstd, params_[emb_ln_g_].value,
                                 params_[emb_ln_g_].grad, params_[emb_ln_b_].grad);
    Mat& dword = params_[word_emb_].grad;
    Mat& dpos = params_[pos_emb_].grad;
    Mat& dseg = params_[seg_emb_].grad;
    for (int i = 0; i < len; ++i) {
      dword.row(c.ids[static_cast<std::size_t>(i)]) += dx.row(i);
      dpos.row(i) += dx.row(i);
      dseg.row(c.segment[static_cast<std::size_t>(i)]) += dx.row(i);
    }
  }

  safetensors::TensorMap to_tensors() const {
    safetensors::TensorMap out;
    for (const auto& p : params_) {
      safetensors::Tensor t;
      if (p.is_vector) {
        t.shape = {static_cast<std::int64_t>(p.value.cols())};
      } else {
        t.shape = {static_cast<std::int64_t>(p.value.rows()), static_cast<std::int64_t>(p.value.cols())};
      }
      t.data.resize(static_cast<std::size_t>(p.value.size()));
      for (Eigen::Index i = 0; i < p.value.size(); ++i) t.data[static_cast<std::size_t>(i)] = static_cast<float>(p.value.data()[i]);
      out.emplace(p.name, std::move(t));
    }
    return out;
  }

  // Copies named tensors into parameters. Missing names are an error unless
  // listed in `optional`; word embeddings may have fewer rows than the model
  // (rows for added tokens keep their initialization).
  void load_tensors(const safetensors::TensorMap& tensors, const std::vector<std::string>& optional = {}) {
    for (auto& p : params_) {
      auto it = tensors.find(p.name);
      if (it == tensors.end()) {
        if (std::find(optional.begin(), optional.end(), p.name) != optional.end()) continue;
        throw ModelError("checkpoint is missing tensor '" + p.name + "'");
      }
      const auto& t = it->second;
      const Eigen::Index rows = p.is_vector ? 1 : (t.shape.size() == 2 ? t.shape[0] : -1);
      const Eigen::Index cols = t.shape.empty() ? -1 : t.shape.back();
      const bool grows = p.name == "embeddings.word_embeddings.weight" && rows <= p.value.rows() &&
                         cols == p.value.cols();
      if (!grows && (rows != p.value.rows() || cols != p.value.cols())) {
        throw ModelError("tensor '" + p.name + "' has unexpected shape");
      }
      for (Eigen::Index i = 0; i < rows * cols; ++i) p.value.data()[i] = static_cast<Scalar>(t.data[static_cast<std::size_t>(i)]);
    }
  }

 private:
  struct LayerIndex {
    int wq, bq, wk, bk, wv, bv, wo, bo, ln1_g, ln1_b, w1, b1, w2, b2, ln2_g, ln2_b;
  };

  int add(const std::string& name, Eigen::Index rows, Eigen::Index cols, bool is_vector = false) {
    Param p;
    p.name = name;
    p.value = Mat::Zero(rows, cols);
    p.grad = Mat::Zero(rows, cols);
    p.is_vector = is_vector;
    params_.push_back(std::move(p));
    return static_cast<int>(params_.size()) - 1;
  }

  void build() {
    const int hd = config_.hidden;
    const int ff = config_.intermediate;
    params_.clear();
    word_emb_ = add("embeddings.word_embeddings.weight", config_.vocab_size, hd);
    pos_emb_ = add("embeddings.position_embeddings.weight", config_.max_positions, hd);
    seg_emb_ = add("embeddings.token_type_embeddings.weight", 2, hd);
    emb_ln_g_ = add("embeddings.LayerNorm.weight", 1, hd, true);
    emb_ln_b_ = add("embeddings.LayerNorm.bias", 1, hd, true);
    layers_.clear();
    for (int l = 0; l < config_.layers; ++l) {
      const std::string pre = "encoder.layer." + std::to_string(l) + ".";
      LayerIndex li{};
      li.wq = add(pre + "attention.self.query.weight", hd, hd);
      li.bq = add(pre + "attention.self.query.bias", 1, hd, true);
      li.wk = add(pre + "attention.self.key.weight", hd, hd);
      li.bk = add(pre + "attention.self.key.bias", 1, hd, true);
      li.wv = add(pre + "attention.self.value.weight", hd, hd);
      li.bv = add(pre + "attention.self.value.bias", 1, hd, true);
      li.wo = add(pre + "attention.output.dense.weight", hd, hd);
      li.bo = add(pre + "attention.output.dense.bias", 1, hd, true);
      li.ln1_g = add(pre + "attention.output.LayerNorm.weight", 1, hd, true);
      li.ln1_b = add(pre + "attention.output.LayerNorm.bias", 1, hd, true);
      li.w1 = add(pre + "intermediate.dense.weight", ff, hd);
      li.b1 = add(pre + "intermediate.dense.bias", 1, ff, true);
      li.w2 = add(pre + "output.dense.weight", hd, ff);
      li.b2 = add(pre + "output.dense.bias", 1, hd, true);
      li.ln2_g = add(pre + "output.LayerNorm.weight", 1, hd, true);
      li.ln2_b = add(pre + "output.LayerNorm.bias", 1, hd, true);
      layers_.push_back(li);
    }
    head_w_ = add("head.weight", 1, hd);
    head_b_ = add("head.bias", 1, 1, true);
  }

  static Mat dropout_mask(Eigen::Index rows, Eigen::Index cols, double p, Rng* rng) {
    if (rng == nullptr || p <= 0.0) return Mat();
    Mat m(rows, cols);
    const auto keep = static_cast<Scalar>(1.0 / (1.0 - p));
    for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = rng->bernoulli(p) ? Scalar(0) : keep;
    return m;
  }

  // y = x W^T + b
  static Mat linear(const Mat& x, const Mat& w, const Mat& b) {
    Mat y = x * w.transpose();
    y.rowwise() += b.row(0);
    return y;
  }

  static Mat linear_backward(const Mat& dy, const Mat& x, const Mat& w, Mat& dw, Mat& db) {
    dw.noalias() += dy.transpose() * x;
    db.row(0) += dy.colwise().sum();
    return dy * w;
  }

  void layer_norm(const Mat& x, const Mat& g, const Mat& b, Mat& y, Mat& xhat, Col& rstd) const {
    const auto eps = static_cast<Scalar>(config_.layer_norm_eps);
    const Col mean = x.rowwise().mean();
    xhat = x.colwise() - mean;
    rstd = (xhat.array().square().rowwise().mean() + eps).rsqrt().matrix();
    xhat = xhat.array().colwise() * rstd.array();
    y = xhat.array().rowwise() * g.row(0).array();
    y.rowwise() += b.row(0);
  }

  static Mat layer_norm_backward(const Mat& dy, const Mat& xhat, const Col& rstd, const Mat& g,
                                 Mat& dg, Mat& db) {
    dg.row(0) += (dy.array() * xhat.array()).matrix().colwise().sum();
    db.row(0) += dy.colwise().sum();
    const Mat dxhat = dy.array().rowwise() * g.row(0).array();
    const Col mean_d = dxhat.rowwise().mean();
    const Col mean_dx = (dxhat.array() * xhat.array()).rowwise().mean();
    Mat dx = dxhat.colwise() - mean_d;
    dx.array() -= xhat.array().colwise() * mean_dx.array();
    dx.array().colwise() *= rstd.array();
    return dx;
  }

  static Scalar gelu(Scalar x) {
    return Scalar(0.5) * x * (Scalar(1) + std::erf(x / std::numbers::sqrt2_v<Scalar>));
  }

  static Scalar gelu_grad(Scalar x) {
    const Scalar cdf = Scalar(0.5) * (Scalar(1) + std::erf(x / std::numbers::sqrt2_v<Scalar>));
    const Scalar pdf = std::exp(Scalar(-0.5) * x * x) * std::numbers::inv_sqrtpi_v<Scalar> /
                       std::numbers::sqrt2_v<Scalar>;
    return cdf + x * pdf;
  }

  Mat layer_forward(const LayerIndex& li, const Mat& h, Rng* rng, LayerCache& c) const {
    const auto& P = params_;
    const int len = static_cast<int>(h.rows());
    const int heads = config_.heads;
    const int dh = config_.hidden / heads;
    const auto scale = static_cast<Scalar>(1.0 / std::sqrt(static_cast<double>(dh)));
    c.input = h;
    c.q = linear(h, P[li.wq].value, P[li.bq].value);
    c.k = linear(h, P[li.wk].value, P[li.bk].value);
    c.v = linear(h, P[li.wv].value, P[li.bv].value);
    c.ctx.resize(len, config_.hidden);
    c.probs.resize(heads);
    c.probs_mask.resize(heads);
    for (int hh = 0; hh < heads; ++hh) {
      const auto qh = c.q.middleCols(hh * dh, dh);
      const auto kh = c.k.middleCols(hh * dh, dh);
      const auto vh = c.v.middleCols(hh * dh, dh);
      Mat s = (qh * kh.transpose()) * scale;
      const Col mx = s.rowwise().maxCoeff();
      s = (s.colwise() - mx).array().exp().matrix();
      const Col sum = s.rowwise().sum();
      s.array().colwise() /= sum.array();
      c.probs[hh] = s;
      c.probs_mask[hh] = dropout_mask(len, len, config_.attention_dropout, rng);
      if (c.probs_mask[hh].size() > 0) {
        c.ctx.middleCols(hh * dh, dh).noalias() = (s.array() * c.probs_mask[hh].array()).matrix() * vh;
      } else {
        c.ctx.middleCols(hh * dh, dh).noalias() = s * vh;
      }
    }
    Mat attn = linear(c.ctx, P[li.wo].value, P[li.bo].value);
    c.attn_mask = dropout_mask(len, config_.hidden, config_.dropout, rng);
    if (c.attn_mask.size() > 0) attn.array() *= c.attn_mask.array();
    layer_norm(h + attn, P[li.ln1_g].value, P[li.ln1_b].value, c.h1, c.ln1_xhat, c.ln1_rstd);

    c.ff_pre = linear(c.h1, P[li.w1].value, P[li.b1].value);
    c.ff_act = c.ff_pre.unaryExpr([](Scalar v) { return gelu(v); });
    Mat ff = linear(c.ff_act, P[li.w2].value, P[li.b2].value);
    c.ff_mask = dropout_mask(len, config_.hidden, config_.dropout, rng);
    if (c.ff_mask.size() > 0) ff.array() *= c.ff_mask.array();
    Mat out;
    layer_norm(c.h1 + ff, P[li.ln2_g].value, P[li.ln2_b].value, out, c.ln2_xhat, c.ln2_rstd);
    return out;
  }

  Mat layer_backward(const LayerIndex& li, const LayerCache& c, const Mat& dout) {
    auto& P = params_;
    const int heads = config_.heads;
    const int dh = config_.hidden / heads;
    const auto scale = static_cast<Scalar>(1.0 / std::sqrt(static_cast<double>(dh)));

    Mat dsum2 = layer_norm_backward(dout, c.ln2_xhat, c.ln2_rstd, P[li.ln2_g].value, P[li.ln2_g].grad,
                                    P[li.ln2_b].grad);
    Mat dff = dsum2;
    if (c.ff_mask.size() > 0) dff.array() *= c.ff_mask.array();
    Mat dact = linear_backward(dff, c.ff_act, P[li.w2].value, P[li.w2].grad, P[li.b2].grad);
    Mat dpre = dact.array() * c.ff_pre.unaryExpr([](Scalar v) { return gelu_grad(v); }).array();
    Mat dh1 = linear_backward(dpre, c.h1, P[li.w1].value, P[li.w1].grad, P[li.b1].grad);
    dh1 += dsum2;

    Mat dsum1 = layer_norm_backward(dh1, c.ln1_xhat, c.ln1_rstd, P[li.ln1_g].value, P[li.ln1_g].grad,
                                    P[li.ln1_b].grad);
    Mat dattn = dsum1;
    if (c.attn_mask.size() > 0) dattn.array() *= c.attn_mask.array();
    Mat dctx = linear_backward(dattn, c.ctx, P[li.wo].value, P[li.wo].grad, P[li.bo].grad);

    const int len = static_cast<int>(c.input.rows());
    Mat dq(len, config_.hidden), dk(len, config_.hidden), dv(len, config_.hidden);
    for (int hh = 0; hh < heads; ++hh) {
      const auto qh = c.q.middleCols(hh * dh, dh);
      const auto kh = c.k.middleCols(hh * dh, dh);
      const auto vh = c.v.middleCols(hh * dh, dh);
      const auto dch = dctx.middleCols(hh * dh, dh);
      const Mat& a = c.probs[hh];
      Mat da = dch * vh.transpose();
      if (c.probs_mask[hh].size() > 0) {
        const Mat ad = a.array() * c.probs_mask[hh].array();
        dv.middleCols(hh * dh, dh).noalias() = ad.transpose() * dch;
        da.array() *= c.probs_mask[hh].array();
      } else {
        dv.middleCols(hh * dh, dh).noalias() = a.transpose() * dch;
      }
      const Col row_dot = (da.array() * a.array()).rowwise().sum();
      Mat ds = a.array() * (da.colwise() - row_dot).array();
      ds *= scale;
      dq.middleCols(hh * dh, dh).noalias() = ds * kh;
      dk.middleCols(hh * dh, dh).noalias() = ds.transpose() * qh;
    }
    Mat dx = dsum1;
    dx += linear_backward(dq, c.input, P[li.wq].value, P[li.wq].grad, P[li.bq].grad);
    dx += linear_backward(dk, c.input, P[li.wk].value, P[li.wk].grad, P[li.bk].grad);
    dx += linear_backward(dv, c.input, P[li.wv].value, P[li.wv].grad, P[li.bv].grad);
    return dx;
  }

  EncoderConfig config_;
  std::vector<Param> params_;
  std::vector<LayerIndex> layers_;
  int word_emb_ = 0, pos_emb_ = 0, seg_emb_ = 0, emb_ln_g_ = 0, emb_ln_b_ = 0;
  int head_w_ = 0, head_b_ = 0;
};

}  // namespace eae
