#pragma once

#include <cstdint>
#include <string>

#include "vigil/encoding.hpp"
#include "vigil/nn/loss.hpp"
#include "vigil/nn/network.hpp"
#include "vigil/rng.hpp"

namespace vigil {

enum class Arch : std::uint32_t { DenseLstm = 1, Dnn = 2, Lstm = 3, Rnn = 4 };

inline const char* to_string(Arch a) {
  switch (a) {
    case Arch::DenseLstm: return "denselstm";
    case Arch::Dnn: return "dnn";
    case Arch::Lstm: return "lstm";
    case Arch::Rnn: return "rnn";
  }
  return "?";
}

inline Arch arch_from_string(const std::string& s) {
  if (s == "denselstm") return Arch::DenseLstm;
  if (s == "dnn") return Arch::Dnn;
  if (s == "lstm") return Arch::Lstm;
  if (s == "rnn") return Arch::Rnn;
  throw BadConfig("unknown architecture '" + s + "'");
}

template <typename T>
struct Model {
  Arch arch = Arch::DenseLstm;
  std::uint32_t classes = 2;
  std::uint32_t growth = 32;     // dense-block growth rate; 0 for baselines
  double dropout_keep = 0.8;
  nn::Network<T> net;
};

inline constexpr std::size_t kFeatureLen = FeatureVector::kSize;  // 23
inline constexpr std::size_t kDenseLstmStemMaps = 64;
inline constexpr std::size_t kDenseLstmFinalUnits = 512;
inline constexpr std::size_t kBaselineHidden = 128;

// Stem conv (64 maps, k=2, stride 2), a 4-layer dense block, a transition
// (1x1 conv halving channels + avgpool stride 2), an 8-layer dense block, a
// 512-unit LSTM over the remaining 6 steps, flatten, and the class head:
// 23 -> 64@12 -> 192@12 -> 96@6 -> 352@6 -> 512@6 -> 3072 -> C.
template <typename T>
Model<T> build_denselstm(std::uint32_t classes, std::uint32_t growth, double dropout_keep,
                         Rng& rng) {
  if (classes < 2) throw BadConfig("need at least two classes");
  if (growth == 0) throw BadConfig("growth rate must be positive");

  Model<T> model;
  model.arch = Arch::DenseLstm;
  model.classes = classes;
  model.growth = growth;
  model.dropout_keep = dropout_keep;

  auto& net = model.net;
  net.template emplace<nn::Conv1d<T>>(1, kDenseLstmStemMaps, 2, 2, rng);
  const std::size_t block1_out = kDenseLstmStemMaps + 4 * growth;
  net.template emplace<nn::DenseBlock<T>>(kDenseLstmStemMaps, 4, growth, dropout_keep, rng);
  if (block1_out % 2 != 0) throw BadConfig("transition cannot halve odd channel count");
  const std::size_t trans_out = block1_out / 2;
  net.template emplace<nn::Conv1d<T>>(block1_out, trans_out, 1, 1, rng);
  net.template emplace<nn::AvgPool<T>>(2);
  const std::size_t block2_out = trans_out + 8 * growth;
  net.template emplace<nn::DenseBlock<T>>(trans_out, 8, growth, dropout_keep, rng);
  net.template emplace<nn::LstmCell<T>>(block2_out, kDenseLstmFinalUnits, rng);
  net.template emplace<nn::Flatten<T>>();
  const std::size_t flat = 6 * kDenseLstmFinalUnits;
  net.template emplace<nn::Dense<T>>(flat, classes, rng);
  return model;
}

// DNN: three ReLU hidden layers (256, 128, 64). LSTM/RNN: one 128-unit
// recurrent layer over the 23-step sequence, final state into the head.
template <typename T>
Model<T> build_baseline(Arch arch, std::uint32_t classes, Rng& rng) {
  if (classes < 2) throw BadConfig("need at least two classes");
  Model<T> model;
  model.arch = arch;
  model.classes = classes;
  model.growth = 0;
  model.dropout_keep = 1.0;

  auto& net = model.net;
  switch (arch) {
    case Arch::Dnn:
      net.template emplace<nn::Flatten<T>>();
      net.template emplace<nn::Dense<T>>(kFeatureLen, 256, rng);
      net.template emplace<nn::Relu<T>>();
      net.template emplace<nn::Dense<T>>(256, 128, rng);
      net.template emplace<nn::Relu<T>>();
      net.template emplace<nn::Dense<T>>(128, 64, rng);
      net.template emplace<nn::Relu<T>>();
      net.template emplace<nn::Dense<T>>(64, classes, rng);
      break;
    case Arch::Lstm:
      net.template emplace<nn::LstmCell<T>>(1, kBaselineHidden, rng);
      net.template emplace<nn::LastStep<T>>();
      net.template emplace<nn::Dense<T>>(kBaselineHidden, classes, rng);
      break;
    case Arch::Rnn:
      net.template emplace<nn::RnnCell<T>>(1, kBaselineHidden, rng);
      net.template emplace<nn::LastStep<T>>();
      net.template emplace<nn::Dense<T>>(kBaselineHidden, classes, rng);
      break;
    case Arch::DenseLstm:
      throw BadConfig("denselstm is not a baseline");
  }
  return model;
}

template <typename T>
Model<T> build_model(Arch arch, std::uint32_t classes, std::uint32_t growth,
                     double dropout_keep, Rng& rng) {
  if (arch == Arch::DenseLstm) return build_denselstm<T>(classes, growth, dropout_keep, rng);
  return build_baseline<T>(arch, classes, rng);
}

// Feature batch as a [batch, 23, 1] sequence tensor.
template <typename T>
nn::Tensor<T> batch_from_features(const std::vector<FeatureVector>& features) {
  nn::Tensor<T> x({features.size(), kFeatureLen, 1});
  for (std::size_t i = 0; i < features.size(); ++i)
    for (std::size_t b = 0; b < kFeatureLen; ++b)
      x(i, b, 0) = static_cast<T>(features[i].bits[b]);
  return x;
}

template <typename T>
nn::Tensor<T> batch_from_features(const std::vector<FeatureVector>& features,
                                  const std::vector<std::size_t>& indices) {
  nn::Tensor<T> x({indices.size(), kFeatureLen, 1});
  for (std::size_t i = 0; i < indices.size(); ++i)
    for (std::size_t b = 0; b < kFeatureLen; ++b)
      x(i, b, 0) = static_cast<T>(features[indices[i]].bits[b]);
  return x;
}

struct Classification {
  BehaviorLabel label = BehaviorLabel::Normal;
  double confidence = 0.0;  // winning class probability
};

// Argmax of the softmax in inference mode; ties break to the lower class
// index, so equal logits read as Normal.
template <typename T>
Classification classify(Model<T>& model, const FeatureVector& fv) {
  nn::Tensor<T> x = batch_from_features<T>({fv});
  nn::Tensor<T> probs = nn::softmax(model.net.forward(x, /*train=*/false, nullptr));
  std::size_t best = 0;
  for (std::size_t j = 1; j < model.classes; ++j)
    if (probs(0, j) > probs(0, best)) best = j;
  Classification out;
  out.label = best == 1 ? BehaviorLabel::Abnormal : BehaviorLabel::Normal;
  out.confidence = static_cast<double>(probs(0, best));
  return out;
}

}  // namespace vigil
