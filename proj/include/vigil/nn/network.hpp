#pragma once

#include <memory>
#include <vector>

#include "vigil/nn/layers.hpp"

namespace vigil::nn {

// Densely connected block. Inner layer j consumes the channel-wise
// concatenation of the block input and every earlier inner output, runs
// [LSTM cell -> conv k=2 -> ReLU -> dropout], and contributes `growth`
// channels. The block output concatenates the input with all inner outputs,
// so channels grow from C to C + layer_count * growth while the sequence
// length is preserved.
template <typename T>
class DenseBlock : public Layer<T> {
 public:
  DenseBlock(std::size_t in_ch, std::size_t layer_count, std::size_t growth,
             double dropout_keep, Rng& rng)
      : in_ch_(in_ch), layer_count_(layer_count), growth_(growth) {
    if (layer_count == 0 || growth == 0) throw BadConfig("dense block needs layers and growth");
    for (std::size_t i = 0; i < layer_count; ++i) {
      const std::size_t cat_ch = in_ch + i * growth;
      Inner inner;
      inner.lstm = std::make_unique<LstmCell<T>>(cat_ch, growth, rng);
      inner.conv = std::make_unique<Conv1d<T>>(growth, growth, 2, 1, rng);
      inner.relu = std::make_unique<Relu<T>>();
      inner.dropout = std::make_unique<Dropout<T>>(dropout_keep);
      inner_.push_back(std::move(inner));
    }
  }

  DenseBlock(const DenseBlock& other)
      : in_ch_(other.in_ch_), layer_count_(other.layer_count_), growth_(other.growth_) {
    for (const auto& inner : other.inner_) {
      Inner copy;
      copy.lstm.reset(static_cast<LstmCell<T>*>(inner.lstm->clone().release()));
      copy.conv.reset(static_cast<Conv1d<T>*>(inner.conv->clone().release()));
      copy.relu.reset(static_cast<Relu<T>*>(inner.relu->clone().release()));
      copy.dropout.reset(static_cast<Dropout<T>*>(inner.dropout->clone().release()));
      inner_.push_back(std::move(copy));
    }
    xs_ = other.xs_;
  }

  LayerKind kind() const override { return LayerKind::DenseBlock; }
  std::unique_ptr<Layer<T>> clone() const override { return std::make_unique<DenseBlock>(*this); }

  Shape output_shape(const Shape& in) const override {
    this->require(in.size() == 3 && in[2] == in_ch_,
                  "dense block expects [batch, len, " + std::to_string(in_ch_) + "], got " +
                      shape_str(in));
    return {in[0], in[1], in_ch_ + layer_count_ * growth_};
  }

  Tensor<T> forward(const Tensor<T>& x, bool train, Rng* rng) override {
    output_shape(x.shape());
    xs_.clear();
    xs_.push_back(x);
    for (std::size_t i = 0; i < layer_count_; ++i) {
      Tensor<T> cat = concat_channels(xs_);
      Tensor<T> y = inner_[i].lstm->forward(cat, train, rng);
      y = inner_[i].conv->forward(y, train, rng);
      y = inner_[i].relu->forward(y, train, rng);
      y = inner_[i].dropout->forward(y, train, rng);
      xs_.push_back(std::move(y));
    }
    return concat_channels(xs_);
  }

  Tensor<T> backward(const Tensor<T>& dy) override {
    const Shape out = output_shape(xs_[0].shape());
    this->require(dy.shape() == out, "dense block backward shape " + shape_str(dy.shape()));

    // Slice the incoming gradient into one accumulator per concatenated part.
    std::vector<Tensor<T>> dxs;
    dxs.reserve(layer_count_ + 1);
    for (std::size_t j = 0; j <= layer_count_; ++j) dxs.emplace_back(xs_[j].shape());
    split_channels(dy, dxs);

    for (std::size_t i = layer_count_; i-- > 0;) {
      Tensor<T> g = inner_[i].dropout->backward(dxs[i + 1]);
      g = inner_[i].relu->backward(g);
      g = inner_[i].conv->backward(g);
      Tensor<T> dcat = inner_[i].lstm->backward(g);
      // Route the concatenated-input gradient back onto each source.
      accumulate_split(dcat, dxs, i + 1);
    }
    return std::move(dxs[0]);
  }

  void params(std::vector<Tensor<T>*>& out) override {
    for (auto& inner : inner_) {
      inner.lstm->params(out);
      inner.conv->params(out);
    }
  }
  void grads(std::vector<Tensor<T>*>& out) override {
    for (auto& inner : inner_) {
      inner.lstm->grads(out);
      inner.conv->grads(out);
    }
  }

  void units(std::vector<Layer<T>*>& out) override {
    for (auto& inner : inner_) {
      out.push_back(inner.lstm.get());
      out.push_back(inner.conv.get());
      out.push_back(inner.relu.get());
      out.push_back(inner.dropout.get());
    }
  }

  std::size_t layer_count() const { return layer_count_; }
  std::size_t growth() const { return growth_; }
  std::size_t in_channels() const { return in_ch_; }

  // Channel range [begin, end) that inner layer i (0-based) occupies in the
  // block output.
  std::pair<std::size_t, std::size_t> output_slice(std::size_t i) const {
    return {in_ch_ + i * growth_, in_ch_ + (i + 1) * growth_};
  }

  Conv1d<T>& inner_conv(std::size_t i) { return *inner_[i].conv; }

 private:
  struct Inner {
    std::unique_ptr<LstmCell<T>> lstm;
    std::unique_ptr<Conv1d<T>> conv;
    std::unique_ptr<Relu<T>> relu;
    std::unique_ptr<Dropout<T>> dropout;
  };

  static Tensor<T> concat_channels(const std::vector<Tensor<T>>& parts) {
    const std::size_t batch = parts[0].dim(0), len = parts[0].dim(1);
    std::size_t total = 0;
    for (const auto& p : parts) total += p.dim(2);
    Tensor<T> out({batch, len, total});
    for (std::size_t b = 0; b < batch; ++b)
      for (std::size_t t = 0; t < len; ++t) {
        T* dst = &out(b, t, 0);
        for (const auto& p : parts) {
          const std::size_t ch = p.dim(2);
          std::copy(&p(b, t, 0), &p(b, t, 0) + ch, dst);
          dst += ch;
        }
      }
    return out;
  }

  // Copies channel slices of src into the first `parts` tensors (assignment).
  void split_channels(const Tensor<T>& src, std::vector<Tensor<T>>& parts) const {
    const std::size_t batch = src.dim(0), len = src.dim(1);
    for (std::size_t b = 0; b < batch; ++b)
      for (std::size_t t = 0; t < len; ++t) {
        const T* s = &src(b, t, 0);
        for (auto& p : parts) {
          const std::size_t ch = p.dim(2);
          std::copy(s, s + ch, &p(b, t, 0));
          s += ch;
        }
      }
  }

  // Adds channel slices of src onto the first `count` tensors.
  void accumulate_split(const Tensor<T>& src, std::vector<Tensor<T>>& parts,
                        std::size_t count) const {
    const std::size_t batch = src.dim(0), len = src.dim(1);
    for (std::size_t b = 0; b < batch; ++b)
      for (std::size_t t = 0; t < len; ++t) {
        const T* s = &src(b, t, 0);
        for (std::size_t j = 0; j < count; ++j) {
          const std::size_t ch = parts[j].dim(2);
          T* d = &parts[j](b, t, 0);
          for (std::size_t c = 0; c < ch; ++c) d[c] += s[c];
          s += ch;
        }
      }
  }

  std::size_t in_ch_, layer_count_, growth_;
  std::vector<Inner> inner_;
  std::vector<Tensor<T>> xs_;
};

// A plain chain of layers; composites handle their own internal routing.
template <typename T>
class Network {
 public:
  Network() = default;

  Network(const Network& other) { *this = other; }
  Network& operator=(const Network& other) {
    layers_.clear();
    for (const auto& l : other.layers_) layers_.push_back(l->clone());
    return *this;
  }
  Network(Network&&) noexcept = default;
  Network& operator=(Network&&) noexcept = default;

  void add(std::unique_ptr<Layer<T>> layer) { layers_.push_back(std::move(layer)); }

  template <typename L, typename... Args>
  L& emplace(Args&&... args) {
    auto layer = std::make_unique<L>(std::forward<Args>(args)...);
    L& ref = *layer;
    layers_.push_back(std::move(layer));
    return ref;
  }

  Tensor<T> forward(const Tensor<T>& x, bool train = false, Rng* rng = nullptr) {
    Tensor<T> cur = x;
    for (auto& l : layers_) cur = l->forward(cur, train, rng);
    return cur;
  }

  Tensor<T> backward(const Tensor<T>& dlogits) {
    Tensor<T> cur = dlogits;
    for (std::size_t i = layers_.size(); i-- > 0;) cur = layers_[i]->backward(cur);
    return cur;
  }

  std::vector<Tensor<T>*> params() {
    std::vector<Tensor<T>*> out;
    for (auto& l : layers_) l->params(out);
    return out;
  }

  std::vector<Tensor<T>*> grads() {
    std::vector<Tensor<T>*> out;
    for (auto& l : layers_) l->grads(out);
    return out;
  }

  void zero_grad() {
    for (auto& l : layers_) l->zero_grad();
  }

  std::vector<Layer<T>*> units() {
    std::vector<Layer<T>*> out;
    for (auto& l : layers_) l->units(out);
    return out;
  }

  std::size_t depth() const { return layers_.size(); }
  Layer<T>& layer(std::size_t i) { return *layers_[i]; }
  const Layer<T>& layer(std::size_t i) const { return *layers_[i]; }

  // Shapes after each layer for a given input shape, input first.
  std::vector<Shape> shape_chain(const Shape& input) const {
    std::vector<Shape> chain{input};
    for (const auto& l : layers_) chain.push_back(l->output_shape(chain.back()));
    return chain;
  }

  std::size_t param_count() {
    std::size_t n = 0;
    for (auto* p : params()) n += p->size();
    return n;
  }

 private:
  std::vector<std::unique_ptr<Layer<T>>> layers_;
};

}  // namespace vigil::nn
