#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

#include "vigil/nn/tensor.hpp"

namespace vigil::nn {

template <typename T>
struct AdamConfig {
  T learning_rate = static_cast<T>(1e-5);
  T beta1 = static_cast<T>(0.9);
  T beta2 = static_cast<T>(0.999);
  T epsilon = static_cast<T>(1e-8);
  // Applied as an L2 term added to the gradient (grad += wd * param) before
  // the moment update, so it scales with the learning rate.
  T weight_decay = static_cast<T>(1e-4);
};

// Adam with bias correction. Moment buffers mirror the parameter tensors
// handed to the constructor; step() must see the same tensors in the same
// order.
template <typename T>
class Adam {
 public:
  Adam(const std::vector<Tensor<T>*>& params, AdamConfig<T> config) : config_(config) {
    m_.reserve(params.size());
    v_.reserve(params.size());
    for (const auto* p : params) {
      m_.emplace_back(p->shape());
      v_.emplace_back(p->shape());
    }
  }

  void step(const std::vector<Tensor<T>*>& params, const std::vector<Tensor<T>*>& grads) {
    if (params.size() != m_.size() || grads.size() != m_.size())
      throw ShapeMismatch("adam: parameter list changed size");
    ++step_;
    const T bc1 = T{1} - std::pow(config_.beta1, static_cast<T>(step_));
    const T bc2 = T{1} - std::pow(config_.beta2, static_cast<T>(step_));
    for (std::size_t i = 0; i < params.size(); ++i) {
      Tensor<T>& p = *params[i];
      const Tensor<T>& g = *grads[i];
      if (p.shape() != m_[i].shape() || g.shape() != m_[i].shape())
        throw ShapeMismatch("adam: tensor " + std::to_string(i) + " shape changed");
      T* pd = p.data();
      const T* gd = g.data();
      T* md = m_[i].data();
      T* vd = v_[i].data();
      for (std::size_t j = 0; j < p.size(); ++j) {
        const T grad = gd[j] + config_.weight_decay * pd[j];
        md[j] = config_.beta1 * md[j] + (T{1} - config_.beta1) * grad;
        vd[j] = config_.beta2 * vd[j] + (T{1} - config_.beta2) * grad * grad;
        const T mhat = md[j] / bc1;
        const T vhat = vd[j] / bc2;
        pd[j] -= config_.learning_rate * mhat / (std::sqrt(vhat) + config_.epsilon);
      }
    }
  }

  std::uint64_t steps() const { return step_; }
  const AdamConfig<T>& config() const { return config_; }

 private:
  AdamConfig<T> config_;
  std::vector<Tensor<T>> m_, v_;
  std::uint64_t step_ = 0;
};

}  // namespace vigil::nn
