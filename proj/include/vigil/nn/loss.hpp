#pragma once

#include <cmath>

#include "vigil/nn/tensor.hpp"

namespace vigil::nn {

// Row-wise softmax with max subtraction, rows sum to 1.
template <typename T>
Tensor<T> softmax(const Tensor<T>& logits) {
  if (logits.rank() != 2) throw ShapeMismatch("softmax expects [batch, classes]");
  const std::size_t batch = logits.dim(0), classes = logits.dim(1);
  Tensor<T> out(logits.shape());
  for (std::size_t i = 0; i < batch; ++i) {
    const T* row = &logits(i, 0);
    T* orow = &out(i, 0);
    T maxv = row[0];
    for (std::size_t j = 1; j < classes; ++j) maxv = std::max(maxv, row[j]);
    T sum{0};
    for (std::size_t j = 0; j < classes; ++j) {
      orow[j] = std::exp(row[j] - maxv);
      sum += orow[j];
    }
    for (std::size_t j = 0; j < classes; ++j) orow[j] /= sum;
  }
  return out;
}

template <typename T>
Tensor<T> one_hot(const std::vector<int>& labels, std::size_t classes) {
  Tensor<T> out({labels.size(), classes});
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] < 0 || static_cast<std::size_t>(labels[i]) >= classes)
      throw ShapeMismatch("label out of range");
    out(i, static_cast<std::size_t>(labels[i])) = T{1};
  }
  return out;
}

// Softmax cross-entropy summed over the batch: -sum_ij L_ij log softmax(Y)_ij,
// computed via log-sum-exp for stability.
template <typename T>
T cross_entropy(const Tensor<T>& logits, const Tensor<T>& labels) {
  if (logits.shape() != labels.shape())
    throw ShapeMismatch("cross_entropy: logits " + shape_str(logits.shape()) + " vs labels " +
                        shape_str(labels.shape()));
  const std::size_t batch = logits.dim(0), classes = logits.dim(1);
  T loss{0};
  for (std::size_t i = 0; i < batch; ++i) {
    const T* row = &logits(i, 0);
    const T* lab = &labels(i, 0);
    T maxv = row[0];
    for (std::size_t j = 1; j < classes; ++j) maxv = std::max(maxv, row[j]);
    T sum{0};
    for (std::size_t j = 0; j < classes; ++j) sum += std::exp(row[j] - maxv);
    const T log_z = maxv + std::log(sum);
    for (std::size_t j = 0; j < classes; ++j)
      if (lab[j] != T{0}) loss -= lab[j] * (row[j] - log_z);
  }
  return loss;
}

// Gradient of the summed loss w.r.t. the logits: softmax(Y) - L.
template <typename T>
Tensor<T> cross_entropy_grad(const Tensor<T>& logits, const Tensor<T>& labels) {
  if (logits.shape() != labels.shape())
    throw ShapeMismatch("cross_entropy_grad: shape mismatch");
  Tensor<T> grad = softmax(logits);
  for (std::size_t i = 0; i < grad.size(); ++i) grad[i] -= labels[i];
  return grad;
}

}  // namespace vigil::nn
