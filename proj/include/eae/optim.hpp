#pragma once

#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "eae/model.hpp"

namespace eae {

struct AdamWOptions {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  double weight_decay = 0.0;
};

// AdamW over every model parameter. LayerNorm and bias parameters are not decayed.
template <typename Scalar>
class AdamW {
 public:
  using Model = ExtractionModel<Scalar>;
  using Mat = typename Model::Mat;

  AdamW(Model& model, AdamWOptions opts) : opts_(opts) {
    for (const auto& p : model.params()) {
      m_.push_back(Mat::Zero(p.value.rows(), p.value.cols()));
      v_.push_back(Mat::Zero(p.value.rows(), p.value.cols()));
    }
  }

  // Applies grad * grad_scale with the given learning rate.
  void step(Model& model, double lr, double grad_scale = 1.0) {
    ++t_;
    const double bc1 = 1.0 - std::pow(opts_.beta1, static_cast<double>(t_));
    const double bc2 = 1.0 - std::pow(opts_.beta2, static_cast<double>(t_));
    auto& params = model.params();
    for (std::size_t i = 0; i < params.size(); ++i) {
      auto& p = params[i];
      const auto g = (p.grad.array() * static_cast<Scalar>(grad_scale)).eval();
      m_[i].array() = static_cast<Scalar>(opts_.beta1) * m_[i].array() +
                      static_cast<Scalar>(1.0 - opts_.beta1) * g;
      v_[i].array() = static_cast<Scalar>(opts_.beta2) * v_[i].array() +
                      static_cast<Scalar>(1.0 - opts_.beta2) * g.square();
      const auto update = (m_[i].array() / static_cast<Scalar>(bc1)) /
                          ((v_[i].array() / static_cast<Scalar>(bc2)).sqrt() + static_cast<Scalar>(opts_.eps));
      if (opts_.weight_decay > 0.0 && !p.is_vector) {
        p.value.array() *= static_cast<Scalar>(1.0 - lr * opts_.weight_decay);
      }
      p.value.array() -= static_cast<Scalar>(lr) * update;
    }
  }

  long steps() const { return t_; }

 private:
  AdamWOptions opts_;
  std::vector<Mat> m_, v_;
  long t_ = 0;
};

// Global L2 norm of all gradients.
template <typename Scalar>
double grad_norm(const ExtractionModel<Scalar>& model) {
  double s = 0.0;
  for (const auto& p : model.params()) s += static_cast<double>(p.grad.squaredNorm());
  return std::sqrt(s);
}

}  // namespace eae
