#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <vector>

#include "vigil/nn/loss.hpp"
#include "vigil/nn/network.hpp"
#include "vigil/rng.hpp"

namespace vigil::nn {

struct GradCheckResult {
  double max_rel_err = 0.0;
  std::size_t checked = 0;
};

// Compares analytic gradients of the summed cross-entropy against central
// finite differences. Checks a seeded random subsample of up to
// `per_kind` parameters for every layer kind that owns parameters (all of
// them when a kind has fewer). Dropout must be inactive, i.e. the pass runs
// in inference mode; intended for T = double.
template <typename T>
GradCheckResult grad_check(Network<T>& net, const Tensor<T>& input, const Tensor<T>& labels,
                           T epsilon, std::uint64_t seed = 0, std::size_t per_kind = 200) {
  net.zero_grad();
  Tensor<T> logits = net.forward(input, /*train=*/false, nullptr);
  net.backward(cross_entropy_grad(logits, labels));

  // Pair every parameter tensor with its gradient and owning layer kind.
  struct Slot {
    Tensor<T>* param;
    Tensor<T>* grad;
    LayerKind kind;
  };
  std::vector<Slot> slots;
  for (Layer<T>* unit : net.units()) {
    std::vector<Tensor<T>*> ps, gs;
    unit->params(ps);
    unit->grads(gs);
    for (std::size_t i = 0; i < ps.size(); ++i)
      slots.push_back(Slot{ps[i], gs[i], unit->kind()});
  }

  for (const Slot& s : slots)
    if (!s.grad->all_finite()) throw NonFiniteGradient(std::string(to_string(s.kind)));

  // Global index space per kind: (slot index, element index).
  std::map<LayerKind, std::vector<std::pair<std::size_t, std::size_t>>> by_kind;
  for (std::size_t si = 0; si < slots.size(); ++si)
    for (std::size_t j = 0; j < slots[si].param->size(); ++j)
      by_kind[slots[si].kind].emplace_back(si, j);

  Rng rng(seed);
  GradCheckResult result;
  auto loss_at = [&]() { return cross_entropy(net.forward(input, false, nullptr), labels); };

  for (auto& [kind, entries] : by_kind) {
    std::vector<std::pair<std::size_t, std::size_t>> picked;
    if (entries.size() <= per_kind) {
      picked = entries;
    } else {
      rng.shuffle(entries);
      picked.assign(entries.begin(), entries.begin() + per_kind);
    }
    for (auto [si, j] : picked) {
      Tensor<T>& p = *slots[si].param;
      const T saved = p[j];
      p[j] = saved + epsilon;
      const T loss_hi = loss_at();
      p[j] = saved - epsilon;
      const T loss_lo = loss_at();
      p[j] = saved;

      const double numeric = (static_cast<double>(loss_hi) - static_cast<double>(loss_lo)) /
                             (2.0 * static_cast<double>(epsilon));
      const double analytic = static_cast<double>((*slots[si].grad)[j]);
      const double denom =
          std::max({std::abs(analytic), std::abs(numeric), 1e-12});
      result.max_rel_err = std::max(result.max_rel_err, std::abs(analytic - numeric) / denom);
      ++result.checked;
    }
  }
  return result;
}

}  // namespace vigil::nn
