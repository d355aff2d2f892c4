#ifndef MLSA_ADAM_HPP
#define MLSA_ADAM_HPP

#include <cmath>
#include <cstdint>

#include "mlsa/tensor.hpp"

namespace mlsa {

/// Bias-corrected Adam. Moments are kept per parameter in registration
/// order; a fresh state starts at step 0 with zero moments.
template <typename T>
struct AdamState {
  T lr = T(1e-3);
  T beta1 = T(0.9);
  T beta2 = T(0.999);
  T epsilon = T(1e-8);
  long step = 0;

  std::vector<Tensor<T>> m;
  std::vector<Tensor<T>> v;

  static AdamState init(const ParamSet<T>& params, T lr = T(1e-3)) {
    AdamState st;
    st.lr = lr;
    for (const auto& t : params.tensors) {
      st.m.push_back(Tensor<T>::zeros(t.shape));
      st.v.push_back(Tensor<T>::zeros(t.shape));
    }
    return st;
  }
};

template <typename T>
void adam_step(ParamSet<T>& params, const ParamSet<T>& grads, AdamState<T>& st) {
  if (params.size() != grads.size() || params.size() != st.m.size())
    throw Error("adam_step: parameter/gradient/state size mismatch");
  st.step += 1;
  T bc1 = T(1) - std::pow(st.beta1, static_cast<T>(st.step));
  T bc2 = T(1) - std::pow(st.beta2, static_cast<T>(st.step));
  for (std::size_t p = 0; p < params.size(); ++p) {
    Tensor<T>& w = params.tensors[p];
    const Tensor<T>& g = grads.tensors[p];
    if (!w.same_shape(g))
      throw Error("adam_step: shape mismatch for '" + params.names[p] + "': " +
                  shape_str(w) + " vs " + shape_str(g));
    Tensor<T>& m = st.m[p];
    Tensor<T>& v = st.v[p];
    for (std::size_t i = 0; i < w.numel(); ++i) {
      T gi = g.data[i];
      m.data[i] = st.beta1 * m.data[i] + (T(1) - st.beta1) * gi;
      v.data[i] = st.beta2 * v.data[i] + (T(1) - st.beta2) * gi * gi;
      T mhat = m.data[i] / bc1;
      T vhat = v.data[i] / bc2;
      w.data[i] -= st.lr * mhat / (std::sqrt(vhat) + st.epsilon);
    }
  }
}

} // namespace mlsa

#endif
