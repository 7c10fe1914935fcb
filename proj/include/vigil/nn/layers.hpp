#pragma once

#include <cmath>
#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "vigil/errors.hpp"
#include "vigil/nn/tensor.hpp"
#include "vigil/rng.hpp"

namespace vigil::nn {

enum class LayerKind : std::uint32_t {
  Conv1d = 1,
  LstmCell = 2,
  AvgPool = 3,
  Dense = 4,
  Relu = 5,
  Dropout = 6,
  Flatten = 7,
  RnnCell = 8,
  LastStep = 9,
  DenseBlock = 100,
};

inline const char* to_string(LayerKind k) {
  switch (k) {
    case LayerKind::Conv1d: return "conv1d";
    case LayerKind::LstmCell: return "lstm_cell";
    case LayerKind::AvgPool: return "avgpool";
    case LayerKind::Dense: return "dense";
    case LayerKind::Relu: return "relu";
    case LayerKind::Dropout: return "dropout";
    case LayerKind::Flatten: return "flatten";
    case LayerKind::RnnCell: return "rnn_cell";
    case LayerKind::LastStep: return "last_step";
    case LayerKind::DenseBlock: return "dense_block";
  }
  return "?";
}

// Base of all network building blocks. forward() caches whatever backward()
// needs, so a layer instance is single-threaded; clone() the owning network
// for concurrent inference.
template <typename T>
class Layer {
 public:
  virtual ~Layer() = default;

  virtual LayerKind kind() const = 0;
  virtual std::unique_ptr<Layer<T>> clone() const = 0;

  // Output shape for a given input shape; throws ShapeMismatch if the input
  // cannot be consumed.
  virtual Shape output_shape(const Shape& in) const = 0;

  virtual Tensor<T> forward(const Tensor<T>& x, bool train, Rng* rng) = 0;
  virtual Tensor<T> backward(const Tensor<T>& dy) = 0;

  virtual void params(std::vector<Tensor<T>*>& out) {}
  virtual void grads(std::vector<Tensor<T>*>& out) {}

  // Flat list of unit layers in checkpoint order; composites expand themselves.
  virtual void units(std::vector<Layer<T>*>& out) { out.push_back(this); }

  void zero_grad() {
    std::vector<Tensor<T>*> gs;
    grads(gs);
    for (auto* g : gs) g->fill(T{0});
  }

 protected:
  static void require(bool ok, const std::string& what) {
    if (!ok) throw ShapeMismatch(what);
  }
};

namespace detail {

template <typename T>
Tensor<T> uniform_init(Shape shape, double bound, Rng& rng) {
  Tensor<T> t(std::move(shape));
  for (std::size_t i = 0; i < t.size(); ++i)
    t[i] = static_cast<T>(rng.uniform(-bound, bound));
  return t;
}

template <typename T>
inline T sigmoid(T x) {
  return T{1} / (T{1} + std::exp(-x));
}

}  // namespace detail

// 1-D cross-correlation over [batch, len, ch] with "same" padding on the
// right: out_len = ceil(len / stride). Weight layout [kernel, in, out].
template <typename T>
class Conv1d : public Layer<T> {
 public:
  Conv1d(std::size_t in_ch, std::size_t out_ch, std::size_t kernel, std::size_t stride,
         Rng& rng)
      : in_ch_(in_ch), out_ch_(out_ch), kernel_(kernel), stride_(stride) {
    if (in_ch == 0 || out_ch == 0 || kernel == 0 || stride == 0)
      throw BadConfig("conv1d dimensions must be positive");
    const double bound = 1.0 / std::sqrt(static_cast<double>(kernel * in_ch));
    weight_ = detail::uniform_init<T>({kernel, in_ch, out_ch}, bound, rng);
    bias_ = Tensor<T>({out_ch});
    dweight_ = Tensor<T>({kernel, in_ch, out_ch});
    dbias_ = Tensor<T>({out_ch});
  }

  LayerKind kind() const override { return LayerKind::Conv1d; }
  std::unique_ptr<Layer<T>> clone() const override { return std::make_unique<Conv1d>(*this); }

  Shape output_shape(const Shape& in) const override {
    this->require(in.size() == 3 && in[2] == in_ch_,
                  "conv1d expects [batch, len, " + std::to_string(in_ch_) + "], got " +
                      shape_str(in));
    return {in[0], (in[1] + stride_ - 1) / stride_, out_ch_};
  }

  Tensor<T> forward(const Tensor<T>& x, bool, Rng*) override {
    Tensor<T> y(output_shape(x.shape()));
    x_ = x;
    const std::size_t batch = x.dim(0), len = x.dim(1), out_len = y.dim(1);
    for (std::size_t b = 0; b < batch; ++b) {
      for (std::size_t t = 0; t < out_len; ++t) {
        T* yrow = &y(b, t, 0);
        for (std::size_t oc = 0; oc < out_ch_; ++oc) yrow[oc] = bias_[oc];
        for (std::size_t kk = 0; kk < kernel_; ++kk) {
          const std::size_t j = t * stride_ + kk;
          if (j >= len) break;  // implicit zero padding on the right
          const T* xrow = &x(b, j, 0);
          const T* wrow = &weight_[(kk * in_ch_) * out_ch_];
          for (std::size_t ic = 0; ic < in_ch_; ++ic) {
            const T xv = xrow[ic];
            const T* w = wrow + ic * out_ch_;
            for (std::size_t oc = 0; oc < out_ch_; ++oc) yrow[oc] += xv * w[oc];
          }
        }
      }
    }
    return y;
  }

  Tensor<T> backward(const Tensor<T>& dy) override {
    const std::size_t batch = x_.dim(0), len = x_.dim(1), out_len = dy.dim(1);
    this->require(dy.rank() == 3 && dy.dim(0) == batch && dy.dim(2) == out_ch_,
                  "conv1d backward shape " + shape_str(dy.shape()));
    Tensor<T> dx(x_.shape());
    for (std::size_t b = 0; b < batch; ++b) {
      for (std::size_t t = 0; t < out_len; ++t) {
        const T* dyrow = &dy(b, t, 0);
        for (std::size_t oc = 0; oc < out_ch_; ++oc) dbias_[oc] += dyrow[oc];
        for (std::size_t kk = 0; kk < kernel_; ++kk) {
          const std::size_t j = t * stride_ + kk;
          if (j >= len) break;
          const T* xrow = &x_(b, j, 0);
          T* dxrow = &dx(b, j, 0);
          const T* wbase = &weight_[(kk * in_ch_) * out_ch_];
          T* dwbase = &dweight_[(kk * in_ch_) * out_ch_];
          for (std::size_t ic = 0; ic < in_ch_; ++ic) {
            const T xv = xrow[ic];
            const T* w = wbase + ic * out_ch_;
            T* dw = dwbase + ic * out_ch_;
            T acc{0};
            for (std::size_t oc = 0; oc < out_ch_; ++oc) {
              acc += w[oc] * dyrow[oc];
              dw[oc] += xv * dyrow[oc];
            }
            dxrow[ic] += acc;
          }
        }
      }
    }
    return dx;
  }

  void params(std::vector<Tensor<T>*>& out) override {
    out.push_back(&weight_);
    out.push_back(&bias_);
  }
  void grads(std::vector<Tensor<T>*>& out) override {
    out.push_back(&dweight_);
    out.push_back(&dbias_);
  }

  std::size_t in_channels() const { return in_ch_; }
  std::size_t out_channels() const { return out_ch_; }
  std::size_t kernel() const { return kernel_; }
  std::size_t stride() const { return stride_; }

 protected:
  std::size_t in_ch_, out_ch_, kernel_, stride_;
  Tensor<T> weight_, bias_, dweight_, dbias_;
  Tensor<T> x_;
};

// Standard LSTM over the whole sequence, emitting the hidden state at every
// step. Initial hidden and cell states are zero. Gate blocks are ordered
// (input, forget, candidate, output); the forget bias starts at 1.
template <typename T>
class LstmCell : public Layer<T> {
 public:
  LstmCell(std::size_t in_ch, std::size_t hidden, Rng& rng) : in_ch_(in_ch), hidden_(hidden) {
    if (in_ch == 0 || hidden == 0) throw BadConfig("lstm dimensions must be positive");
    w_in_ = detail::uniform_init<T>({in_ch, 4 * hidden}, 1.0 / std::sqrt(double(in_ch)), rng);
    w_rec_ = detail::uniform_init<T>({hidden, 4 * hidden}, 1.0 / std::sqrt(double(hidden)), rng);
    bias_ = Tensor<T>({4 * hidden});
    for (std::size_t h = 0; h < hidden; ++h) bias_[hidden + h] = T{1};
    dw_in_ = Tensor<T>(w_in_.shape());
    dw_rec_ = Tensor<T>(w_rec_.shape());
    dbias_ = Tensor<T>(bias_.shape());
  }

  LayerKind kind() const override { return LayerKind::LstmCell; }
  std::unique_ptr<Layer<T>> clone() const override { return std::make_unique<LstmCell>(*this); }

  Shape output_shape(const Shape& in) const override {
    this->require(in.size() == 3 && in[2] == in_ch_,
                  "lstm expects [batch, len, " + std::to_string(in_ch_) + "], got " +
                      shape_str(in));
    return {in[0], in[1], hidden_};
  }

  Tensor<T> forward(const Tensor<T>& x, bool, Rng*) override {
    output_shape(x.shape());
    const std::size_t batch = x.dim(0), len = x.dim(1);
    const std::size_t H = hidden_, G = 4 * H;

    x_ = x;
    gates_ = Tensor<T>({batch, len, G});
    c_ = Tensor<T>({batch, len, H});
    Tensor<T> out({batch, len, H});

    // Input contribution for every timestep in one product, time-major so
    // each step's slice is contiguous: zx[t*batch + b] = x(b,t) * W + bias.
    std::vector<T> xt_all(len * batch * in_ch_);
    for (std::size_t t = 0; t < len; ++t)
      for (std::size_t b = 0; b < batch; ++b) {
        const T* src = &x(b, t, 0);
        std::copy(src, src + in_ch_, &xt_all[(t * batch + b) * in_ch_]);
      }
    std::vector<T> zx(len * batch * G);
    for (std::size_t r = 0; r < len * batch; ++r)
      std::copy(bias_.data(), bias_.data() + G, &zx[r * G]);
    gemm_acc(xt_all.data(), w_in_.data(), zx.data(), len * batch, in_ch_, G);

    std::vector<T> hprev(batch * H, T{0});
    for (std::size_t t = 0; t < len; ++t) {
      T* z = &zx[t * batch * G];
      gemm_acc(hprev.data(), w_rec_.data(), z, batch, H, G);
      for (std::size_t b = 0; b < batch; ++b) {
        const T* zrow = z + b * G;
        T* grow = &gates_(b, t, 0);
        T* crow = &c_(b, t, 0);
        const T* cprev = t > 0 ? &c_(b, t - 1, 0) : nullptr;
        T* hrow = &out(b, t, 0);
        for (std::size_t h = 0; h < H; ++h) {
          const T gi = detail::sigmoid(zrow[h]);
          const T gf = detail::sigmoid(zrow[H + h]);
          const T gg = std::tanh(zrow[2 * H + h]);
          const T go = detail::sigmoid(zrow[3 * H + h]);
          grow[h] = gi;
          grow[H + h] = gf;
          grow[2 * H + h] = gg;
          grow[3 * H + h] = go;
          const T cv = gf * (cprev ? cprev[h] : T{0}) + gi * gg;
          crow[h] = cv;
          hrow[h] = go * std::tanh(cv);
        }
        std::copy(hrow, hrow + H, &hprev[b * H]);
      }
    }
    h_ = out;
    return out;
  }

  Tensor<T> backward(const Tensor<T>& dy) override {
    const std::size_t batch = x_.dim(0), len = x_.dim(1);
    const std::size_t H = hidden_, G = 4 * H;
    this->require(dy.rank() == 3 && dy.dim(0) == batch && dy.dim(1) == len && dy.dim(2) == H,
                  "lstm backward shape " + shape_str(dy.shape()));

    // Gate gradients for all steps (time-major); the weight gradients then
    // come from two stacked products instead of per-step accumulation.
    std::vector<T> dz_all(len * batch * G);
    std::vector<T> dh_next(batch * H, T{0});
    std::vector<T> dc_next(batch * H, T{0});

    for (std::size_t t = len; t-- > 0;) {
      T* dz = &dz_all[t * batch * G];
      for (std::size_t b = 0; b < batch; ++b) {
        const T* grow = &gates_(b, t, 0);
        const T* crow = &c_(b, t, 0);
        const T* cprev = t > 0 ? &c_(b, t - 1, 0) : nullptr;
        const T* dyrow = &dy(b, t, 0);
        T* dzrow = dz + b * G;
        T* dhn = &dh_next[b * H];
        T* dcn = &dc_next[b * H];
        for (std::size_t h = 0; h < H; ++h) {
          const T gi = grow[h], gf = grow[H + h], gg = grow[2 * H + h], go = grow[3 * H + h];
          const T tc = std::tanh(crow[h]);
          const T dh = dyrow[h] + dhn[h];
          const T dc = dh * go * (T{1} - tc * tc) + dcn[h];
          dzrow[3 * H + h] = dh * tc * go * (T{1} - go);
          dzrow[H + h] = dc * (cprev ? cprev[h] : T{0}) * gf * (T{1} - gf);
          dzrow[h] = dc * gg * gi * (T{1} - gi);
          dzrow[2 * H + h] = dc * gi * (T{1} - gg * gg);
          dcn[h] = dc * gf;
        }
      }
      std::fill(dh_next.begin(), dh_next.end(), T{0});
      gemm_nt_acc(dz, w_rec_.data(), dh_next.data(), batch, G, H);
    }

    std::vector<T> stacked(len * batch * std::max(in_ch_, H));
    for (std::size_t t = 0; t < len; ++t)
      for (std::size_t b = 0; b < batch; ++b) {
        const T* src = &x_(b, t, 0);
        std::copy(src, src + in_ch_, &stacked[(t * batch + b) * in_ch_]);
      }
    gemm_tn_acc(stacked.data(), dz_all.data(), dw_in_.data(), len * batch, in_ch_, G);

    for (std::size_t t = 0; t < len; ++t)
      for (std::size_t b = 0; b < batch; ++b) {
        T* dst = &stacked[(t * batch + b) * H];
        if (t > 0) {
          const T* hp = &h_(b, t - 1, 0);
          std::copy(hp, hp + H, dst);
        } else {
          std::fill(dst, dst + H, T{0});
        }
      }
    gemm_tn_acc(stacked.data(), dz_all.data(), dw_rec_.data(), len * batch, H, G);

    for (std::size_t r = 0; r < len * batch; ++r) {
      const T* dzrow = &dz_all[r * G];
      for (std::size_t g = 0; g < G; ++g) dbias_[g] += dzrow[g];
    }

    std::vector<T> dxt_all(len * batch * in_ch_, T{0});
    gemm_nt_acc(dz_all.data(), w_in_.data(), dxt_all.data(), len * batch, G, in_ch_);
    Tensor<T> dx(x_.shape());
    for (std::size_t t = 0; t < len; ++t)
      for (std::size_t b = 0; b < batch; ++b) {
        const T* src = &dxt_all[(t * batch + b) * in_ch_];
        std::copy(src, src + in_ch_, &dx(b, t, 0));
      }
    return dx;
  }

  void params(std::vector<Tensor<T>*>& out) override {
    out.push_back(&w_in_);
    out.push_back(&w_rec_);
    out.push_back(&bias_);
  }
  void grads(std::vector<Tensor<T>*>& out) override {
    out.push_back(&dw_in_);
    out.push_back(&dw_rec_);
    out.push_back(&dbias_);
  }

  std::size_t hidden() const { return hidden_; }
  std::size_t in_channels() const { return in_ch_; }

 private:
  std::size_t in_ch_, hidden_;
  Tensor<T> w_in_, w_rec_, bias_;
  Tensor<T> dw_in_, dw_rec_, dbias_;
  Tensor<T> x_, gates_, c_, h_;
};

// Vanilla tanh recurrence, hidden state emitted at every step.
template <typename T>
class RnnCell : public Layer<T> {
 public:
  RnnCell(std::size_t in_ch, std::size_t hidden, Rng& rng) : in_ch_(in_ch), hidden_(hidden) {
    if (in_ch == 0 || hidden == 0) throw BadConfig("rnn dimensions must be positive");
    w_in_ = detail::uniform_init<T>({in_ch, hidden}, 1.0 / std::sqrt(double(in_ch)), rng);
    w_rec_ = detail::uniform_init<T>({hidden, hidden}, 1.0 / std::sqrt(double(hidden)), rng);
    bias_ = Tensor<T>({hidden});
    dw_in_ = Tensor<T>(w_in_.shape());
    dw_rec_ = Tensor<T>(w_rec_.shape());
    dbias_ = Tensor<T>(bias_.shape());
  }

  LayerKind kind() const override { return LayerKind::RnnCell; }
  std::unique_ptr<Layer<T>> clone() const override { return std::make_unique<RnnCell>(*this); }

  Shape output_shape(const Shape& in) const override {
    this->require(in.size() == 3 && in[2] == in_ch_,
                  "rnn expects [batch, len, " + std::to_string(in_ch_) + "], got " +
                      shape_str(in));
    return {in[0], in[1], hidden_};
  }

  Tensor<T> forward(const Tensor<T>& x, bool, Rng*) override {
    output_shape(x.shape());
    const std::size_t batch = x.dim(0), len = x.dim(1), H = hidden_;
    x_ = x;
    Tensor<T> out({batch, len, H});
    std::vector<T> xt(batch * in_ch_);
    std::vector<T> hprev(batch * H, T{0});
    std::vector<T> z(batch * H);
    for (std::size_t t = 0; t < len; ++t) {
      for (std::size_t b = 0; b < batch; ++b) {
        const T* src = &x(b, t, 0);
        std::copy(src, src + in_ch_, &xt[b * in_ch_]);
        std::copy(bias_.data(), bias_.data() + H, &z[b * H]);
      }
      gemm_acc(xt.data(), w_in_.data(), z.data(), batch, in_ch_, H);
      gemm_acc(hprev.data(), w_rec_.data(), z.data(), batch, H, H);
      for (std::size_t b = 0; b < batch; ++b) {
        T* hrow = &out(b, t, 0);
        for (std::size_t h = 0; h < H; ++h) hrow[h] = std::tanh(z[b * H + h]);
        std::copy(hrow, hrow + H, &hprev[b * H]);
      }
    }
    h_ = out;
    return out;
  }

  Tensor<T> backward(const Tensor<T>& dy) override {
    const std::size_t batch = x_.dim(0), len = x_.dim(1), H = hidden_;
    this->require(dy.rank() == 3 && dy.dim(0) == batch && dy.dim(1) == len && dy.dim(2) == H,
                  "rnn backward shape " + shape_str(dy.shape()));
    Tensor<T> dx(x_.shape());
    std::vector<T> dh_next(batch * H, T{0});
    std::vector<T> dz(batch * H);
    std::vector<T> xt(batch * in_ch_);
    std::vector<T> hprev(batch * H);
    std::vector<T> dxt(batch * in_ch_);
    for (std::size_t t = len; t-- > 0;) {
      for (std::size_t b = 0; b < batch; ++b) {
        const T* hrow = &h_(b, t, 0);
        const T* dyrow = &dy(b, t, 0);
        T* dzrow = &dz[b * H];
        const T* dhn = &dh_next[b * H];
        for (std::size_t h = 0; h < H; ++h) {
          const T hv = hrow[h];
          dzrow[h] = (dyrow[h] + dhn[h]) * (T{1} - hv * hv);
        }
        const T* src = &x_(b, t, 0);
        std::copy(src, src + in_ch_, &xt[b * in_ch_]);
        if (t > 0) {
          const T* hp = &h_(b, t - 1, 0);
          std::copy(hp, hp + H, &hprev[b * H]);
        } else {
          std::fill(&hprev[b * H], &hprev[b * H] + H, T{0});
        }
        for (std::size_t h = 0; h < H; ++h) dbias_[h] += dzrow[h];
      }
      gemm_tn_acc(xt.data(), dz.data(), dw_in_.data(), batch, in_ch_, H);
      gemm_tn_acc(hprev.data(), dz.data(), dw_rec_.data(), batch, H, H);
      std::fill(dxt.begin(), dxt.end(), T{0});
      gemm_nt_acc(dz.data(), w_in_.data(), dxt.data(), batch, H, in_ch_);
      for (std::size_t b = 0; b < batch; ++b)
        std::copy(&dxt[b * in_ch_], &dxt[b * in_ch_] + in_ch_, &dx(b, t, 0));
      std::fill(dh_next.begin(), dh_next.end(), T{0});
      gemm_nt_acc(dz.data(), w_rec_.data(), dh_next.data(), batch, H, H);
    }
    return dx;
  }

  void params(std::vector<Tensor<T>*>& out) override {
    out.push_back(&w_in_);
    out.push_back(&w_rec_);
    out.push_back(&bias_);
  }
  void grads(std::vector<Tensor<T>*>& out) override {
    out.push_back(&dw_in_);
    out.push_back(&dw_rec_);
    out.push_back(&dbias_);
  }

  std::size_t hidden() const { return hidden_; }
  std::size_t in_channels() const { return in_ch_; }

 private:
  std::size_t in_ch_, hidden_;
  Tensor<T> w_in_, w_rec_, bias_;
  Tensor<T> dw_in_, dw_rec_, dbias_;
  Tensor<T> x_, h_;
};

// Non-overlapping average pool with window == stride; a ragged tail is
// averaged over its actual width.
template <typename T>
class AvgPool : public Layer<T> {
 public:
  explicit AvgPool(std::size_t stride) : stride_(stride) {
    if (stride == 0) throw BadConfig("avgpool stride must be >= 1");
  }

  LayerKind kind() const override { return LayerKind::AvgPool; }
  std::unique_ptr<Layer<T>> clone() const override { return std::make_unique<AvgPool>(*this); }

  Shape output_shape(const Shape& in) const override {
    this->require(in.size() == 3, "avgpool expects [batch, len, ch], got " + shape_str(in));
    return {in[0], (in[1] + stride_ - 1) / stride_, in[2]};
  }

  Tensor<T> forward(const Tensor<T>& x, bool, Rng*) override {
    Tensor<T> y(output_shape(x.shape()));
    in_shape_ = x.shape();
    const std::size_t batch = x.dim(0), len = x.dim(1), ch = x.dim(2), out_len = y.dim(1);
    for (std::size_t b = 0; b < batch; ++b)
      for (std::size_t t = 0; t < out_len; ++t) {
        const std::size_t start = t * stride_;
        const std::size_t width = std::min(stride_, len - start);
        T* yrow = &y(b, t, 0);
        for (std::size_t j = start; j < start + width; ++j) {
          const T* xrow = &x(b, j, 0);
          for (std::size_t c = 0; c < ch; ++c) yrow[c] += xrow[c];
        }
        const T inv = T{1} / static_cast<T>(width);
        for (std::size_t c = 0; c < ch; ++c) yrow[c] *= inv;
      }
    return y;
  }

  Tensor<T> backward(const Tensor<T>& dy) override {
    Tensor<T> dx(in_shape_);
    const std::size_t batch = in_shape_[0], len = in_shape_[1], ch = in_shape_[2];
    const std::size_t out_len = dy.dim(1);
    for (std::size_t b = 0; b < batch; ++b)
      for (std::size_t t = 0; t < out_len; ++t) {
        const std::size_t start = t * stride_;
        const std::size_t width = std::min(stride_, len - start);
        const T inv = T{1} / static_cast<T>(width);
        const T* dyrow = &dy(b, t, 0);
        for (std::size_t j = start; j < start + width; ++j) {
          T* dxrow = &dx(b, j, 0);
          for (std::size_t c = 0; c < ch; ++c) dxrow[c] += dyrow[c] * inv;
        }
      }
    return dx;
  }

  std::size_t stride() const { return stride_; }

 private:
  std::size_t stride_;
  Shape in_shape_;
};

template <typename T>
class Dense : public Layer<T> {
 public:
  Dense(std::size_t in, std::size_t out, Rng& rng) : in_(in), out_(out) {
    if (in == 0 || out == 0) throw BadConfig("dense dimensions must be positive");
    weight_ = detail::uniform_init<T>({in, out}, 1.0 / std::sqrt(double(in)), rng);
    bias_ = Tensor<T>({out});
    dweight_ = Tensor<T>(weight_.shape());
    dbias_ = Tensor<T>(bias_.shape());
  }

  LayerKind kind() const override { return LayerKind::Dense; }
  std::unique_ptr<Layer<T>> clone() const override { return std::make_unique<Dense>(*this); }

  Shape output_shape(const Shape& in) const override {
    this->require(in.size() == 2 && in[1] == in_,
                  "dense expects [batch, " + std::to_string(in_) + "], got " + shape_str(in));
    return {in[0], out_};
  }

  Tensor<T> forward(const Tensor<T>& x, bool, Rng*) override {
    Tensor<T> y(output_shape(x.shape()));
    x_ = x;
    const std::size_t batch = x.dim(0);
    for (std::size_t b = 0; b < batch; ++b)
      std::copy(bias_.data(), bias_.data() + out_, &y(b, 0));
    gemm_acc(x.data(), weight_.data(), y.data(), batch, in_, out_);
    return y;
  }

  Tensor<T> backward(const Tensor<T>& dy) override {
    const std::size_t batch = x_.dim(0);
    this->require(dy.rank() == 2 && dy.dim(0) == batch && dy.dim(1) == out_,
                  "dense backward shape " + shape_str(dy.shape()));
    Tensor<T> dx(x_.shape());
    gemm_nt_acc(dy.data(), weight_.data(), dx.data(), batch, out_, in_);
    gemm_tn_acc(x_.data(), dy.data(), dweight_.data(), batch, in_, out_);
    for (std::size_t b = 0; b < batch; ++b) {
      const T* dyrow = &dy(b, 0);
      for (std::size_t o = 0; o < out_; ++o) dbias_[o] += dyrow[o];
    }
    return dx;
  }

  void params(std::vector<Tensor<T>*>& out) override {
    out.push_back(&weight_);
    out.push_back(&bias_);
  }
  void grads(std::vector<Tensor<T>*>& out) override {
    out.push_back(&dweight_);
    out.push_back(&dbias_);
  }

 private:
  std::size_t in_, out_;
  Tensor<T> weight_, bias_, dweight_, dbias_;
  Tensor<T> x_;
};

template <typename T>
class Relu : public Layer<T> {
 public:
  LayerKind kind() const override { return LayerKind::Relu; }
  std::unique_ptr<Layer<T>> clone() const override { return std::make_unique<Relu>(*this); }

  Shape output_shape(const Shape& in) const override { return in; }

  Tensor<T> forward(const Tensor<T>& x, bool, Rng*) override {
    x_ = x;
    Tensor<T> y(x.shape());
    for (std::size_t i = 0; i < x.size(); ++i) y[i] = x[i] > T{0} ? x[i] : T{0};
    return y;
  }

  Tensor<T> backward(const Tensor<T>& dy) override {
    this->require(dy.shape() == x_.shape(), "relu backward shape " + shape_str(dy.shape()));
    Tensor<T> dx(x_.shape());
    for (std::size_t i = 0; i < dx.size(); ++i) dx[i] = x_[i] > T{0} ? dy[i] : T{0};
    return dx;
  }

 private:
  Tensor<T> x_;
};

// Inverted dropout: in training the kept activations are scaled by 1/keep so
// the expected output equals the input; in inference it is the identity.
template <typename T>
class Dropout : public Layer<T> {
 public:
  explicit Dropout(double keep) : keep_(keep) {
    if (!(keep > 0.0 && keep <= 1.0)) throw BadConfig("dropout keep probability must be in (0,1]");
  }

  LayerKind kind() const override { return LayerKind::Dropout; }
  std::unique_ptr<Layer<T>> clone() const override { return std::make_unique<Dropout>(*this); }

  Shape output_shape(const Shape& in) const override { return in; }

  Tensor<T> forward(const Tensor<T>& x, bool train, Rng* rng) override {
    if (!train || keep_ >= 1.0) {
      trained_ = false;
      return x;
    }
    if (rng == nullptr) throw BadConfig("dropout needs an rng in training mode");
    trained_ = true;
    mask_.assign(x.size(), T{0});
    Tensor<T> y(x.shape());
    const T scale = T{1} / static_cast<T>(keep_);
    for (std::size_t i = 0; i < x.size(); ++i) {
      if (rng->bernoulli(keep_)) {
        mask_[i] = scale;
        y[i] = x[i] * scale;
      }
    }
    return y;
  }

  Tensor<T> backward(const Tensor<T>& dy) override {
    if (!trained_) return dy;
    Tensor<T> dx(dy.shape());
    for (std::size_t i = 0; i < dx.size(); ++i) dx[i] = dy[i] * mask_[i];
    return dx;
  }

  double keep() const { return keep_; }

 private:
  double keep_;
  bool trained_ = false;
  std::vector<T> mask_;
};

template <typename T>
class Flatten : public Layer<T> {
 public:
  LayerKind kind() const override { return LayerKind::Flatten; }
  std::unique_ptr<Layer<T>> clone() const override { return std::make_unique<Flatten>(*this); }

  Shape output_shape(const Shape& in) const override {
    this->require(in.size() >= 2, "flatten expects rank >= 2, got " + shape_str(in));
    std::size_t rest = 1;
    for (std::size_t i = 1; i < in.size(); ++i) rest *= in[i];
    return {in[0], rest};
  }

  Tensor<T> forward(const Tensor<T>& x, bool, Rng*) override {
    in_shape_ = x.shape();
    return Tensor<T>(output_shape(in_shape_), std::vector<T>(x.data(), x.data() + x.size()));
  }

  Tensor<T> backward(const Tensor<T>& dy) override {
    return Tensor<T>(in_shape_, std::vector<T>(dy.data(), dy.data() + dy.size()));
  }

 private:
  Shape in_shape_;
};

// Keeps only the final timestep: [batch, len, ch] -> [batch, ch].
template <typename T>
class LastStep : public Layer<T> {
 public:
  LayerKind kind() const override { return LayerKind::LastStep; }
  std::unique_ptr<Layer<T>> clone() const override { return std::make_unique<LastStep>(*this); }

  Shape output_shape(const Shape& in) const override {
    this->require(in.size() == 3 && in[1] > 0,
                  "last_step expects [batch, len, ch], got " + shape_str(in));
    return {in[0], in[2]};
  }

  Tensor<T> forward(const Tensor<T>& x, bool, Rng*) override {
    in_shape_ = x.shape();
    Tensor<T> y(output_shape(in_shape_));
    const std::size_t batch = x.dim(0), len = x.dim(1), ch = x.dim(2);
    for (std::size_t b = 0; b < batch; ++b)
      std::copy(&x(b, len - 1, 0), &x(b, len - 1, 0) + ch, &y(b, 0));
    return y;
  }

  Tensor<T> backward(const Tensor<T>& dy) override {
    Tensor<T> dx(in_shape_);
    const std::size_t batch = in_shape_[0], len = in_shape_[1], ch = in_shape_[2];
    for (std::size_t b = 0; b < batch; ++b)
      std::copy(&dy(b, 0), &dy(b, 0) + ch, &dx(b, len - 1, 0));
    return dx;
  }

 private:
  Shape in_shape_;
};

}  // namespace vigil::nn
