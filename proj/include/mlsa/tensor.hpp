#ifndef MLSA_TENSOR_HPP
#define MLSA_TENSOR_HPP

#include <cmath>
#include <cstddef>
#include <numeric>
#include <string>
#include <vector>

#include "mlsa/errors.hpp"

namespace mlsa {

/// Dense row-major tensor. Rank 1 and 2 cover everything this engine needs.
template <typename T>
struct Tensor {
  std::vector<std::size_t> shape;
  std::vector<T> data;

  Tensor() = default;
  Tensor(std::vector<std::size_t> s, std::vector<T> d)
      : shape(std::move(s)), data(std::move(d)) {}

  static Tensor zeros(std::vector<std::size_t> s) {
    std::size_t n = 1;
    for (std::size_t d : s) n *= d;
    return Tensor(std::move(s), std::vector<T>(n, T(0)));
  }

  static Tensor scalar(T v) { return Tensor({1}, {v}); }

  std::size_t numel() const { return data.size(); }
  bool is_scalar() const { return data.size() == 1; }

  std::size_t rows() const { return shape.empty() ? 0 : shape[0]; }
  std::size_t cols() const { return shape.size() < 2 ? 1 : shape[1]; }

  T& at(std::size_t r, std::size_t c) { return data[r * cols() + c]; }
  T at(std::size_t r, std::size_t c) const { return data[r * cols() + c]; }

  bool same_shape(const Tensor& o) const { return shape == o.shape; }
};

template <typename T>
std::string shape_str(const Tensor<T>& t) {
  std::string s = "(";
  for (std::size_t i = 0; i < t.shape.size(); ++i) {
    if (i) s += ",";
    s += std::to_string(t.shape[i]);
  }
  return s + ")";
}

template <typename T>
void check_finite(const Tensor<T>& t, const char* op) {
  for (T v : t.data)
    if (!std::isfinite(static_cast<double>(v)))
      throw Error(std::string(op) + ": non-finite value produced");
}

template <typename To, typename From>
Tensor<To> cast_tensor(const Tensor<From>& t) {
  Tensor<To> out;
  out.shape = t.shape;
  out.data.reserve(t.data.size());
  for (From v : t.data) out.data.push_back(static_cast<To>(v));
  return out;
}

/// Named parameter collection with a stable iteration order. The order is
/// the registration order and doubles as the serialization directory order
/// and the optimizer update order.
template <typename T>
struct ParamSet {
  std::vector<std::string> names;
  std::vector<Tensor<T>> tensors;

  std::size_t size() const { return tensors.size(); }

  void add(std::string name, Tensor<T> t) {
    names.push_back(std::move(name));
    tensors.push_back(std::move(t));
  }

  int index_of(const std::string& name) const {
    for (std::size_t i = 0; i < names.size(); ++i)
      if (names[i] == name) return static_cast<int>(i);
    return -1;
  }

  Tensor<T>& operator[](const std::string& name) {
    int i = index_of(name);
    if (i < 0) throw Error("unknown parameter: " + name);
    return tensors[static_cast<std::size_t>(i)];
  }
  const Tensor<T>& operator[](const std::string& name) const {
    int i = index_of(name);
    if (i < 0) throw Error("unknown parameter: " + name);
    return tensors[static_cast<std::size_t>(i)];
  }

  /// Zero-filled clone with the same names and shapes.
  ParamSet zeros_like() const {
    ParamSet out;
    out.names = names;
    for (const auto& t : tensors) out.tensors.push_back(Tensor<T>::zeros(t.shape));
    return out;
  }

  template <typename To>
  ParamSet<To> cast() const {
    ParamSet<To> out;
    out.names = names;
    for (const auto& t : tensors) out.tensors.push_back(cast_tensor<To>(t));
    return out;
  }
};

} // namespace mlsa

#endif
