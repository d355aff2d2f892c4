#ifndef MLSA_GRAPH_HPP
#define MLSA_GRAPH_HPP

#include <algorithm>
#include <cstdint>
#include <functional>
#include <limits>
#include <memory>
#include <string>
#include <vector>

#include "mlsa/rng.hpp"
#include "mlsa/tensor.hpp"

namespace mlsa {

namespace detail {

// C(m,n) (+)= A(m,k) * B(k,n)
template <typename T>
void gemm_nn(const T* a, const T* b, T* c, std::size_t m, std::size_t n,
             std::size_t k, bool accumulate) {
  if (!accumulate)
    for (std::size_t i = 0; i < m * n; ++i) c[i] = T(0);
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t t = 0; t < k; ++t) {
      T av = a[i * k + t];
      if (av == T(0)) continue;
      const T* brow = b + t * n;
      T* crow = c + i * n;
      for (std::size_t j = 0; j < n; ++j) crow[j] += av * brow[j];
    }
}

// C(m,n) (+)= A(m,k) * B(n,k)^T
template <typename T>
void gemm_nt(const T* a, const T* b, T* c, std::size_t m, std::size_t n,
             std::size_t k, bool accumulate) {
  for (std::size_t i = 0; i < m; ++i) {
    const T* arow = a + i * k;
    for (std::size_t j = 0; j < n; ++j) {
      const T* brow = b + j * k;
      T acc = T(0);
      for (std::size_t t = 0; t < k; ++t) acc += arow[t] * brow[t];
      if (accumulate)
        c[i * n + j] += acc;
      else
        c[i * n + j] = acc;
    }
  }
}

// C(k1,k2) (+)= A(m,k1)^T * B(m,k2)
template <typename T>
void gemm_tn(const T* a, const T* b, T* c, std::size_t k1, std::size_t k2,
             std::size_t m, bool accumulate) {
  if (!accumulate)
    for (std::size_t i = 0; i < k1 * k2; ++i) c[i] = T(0);
  for (std::size_t t = 0; t < m; ++t) {
    const T* arow = a + t * k1;
    const T* brow = b + t * k2;
    for (std::size_t i = 0; i < k1; ++i) {
      T av = arow[i];
      if (av == T(0)) continue;
      T* crow = c + i * k2;
      for (std::size_t j = 0; j < k2; ++j) crow[j] += av * brow[j];
    }
  }
}

} // namespace detail

/// Row-wise softmax, numerically stabilized. Forward-only helper.
template <typename T>
Tensor<T> softmax_rows(const Tensor<T>& logits) {
  Tensor<T> out = logits;
  std::size_t rows = logits.rows(), cols = logits.cols();
  for (std::size_t i = 0; i < rows; ++i) {
    T mx = out.at(i, 0);
    for (std::size_t j = 1; j < cols; ++j) mx = std::max(mx, out.at(i, j));
    T sum = T(0);
    for (std::size_t j = 0; j < cols; ++j) {
      out.at(i, j) = std::exp(out.at(i, j) - mx);
      sum += out.at(i, j);
    }
    for (std::size_t j = 0; j < cols; ++j) out.at(i, j) /= sum;
  }
  return out;
}

/// Reverse-mode autodiff tape. One graph records one forward pass; nodes are
/// created in topological order and replayed in reverse by backward().
/// Gradients accumulate across all uses of a node, so weights shared across
/// time steps collect contributions from every step. All reductions run in
/// a fixed order regardless of thread count (graphs are never shared).
template <typename T>
class Graph {
public:
  using Id = int;

  Id constant(Tensor<T> v) { return push(std::move(v), false); }
  Id param(Tensor<T> v) { return push(std::move(v), true); }

  const Tensor<T>& val(Id id) const { return node(id).value; }
  const Tensor<T>& grad(Id id) const {
    const Node& n = node(id);
    if (!n.needs_grad) throw Error("node has no gradient");
    return n.grad;
  }
  std::size_t size() const { return nodes_.size(); }

  // --- forward ops -------------------------------------------------------

  Id matmul(Id a, Id b) {
    const Tensor<T>& A = val(a);
    const Tensor<T>& B = val(b);
    if (A.shape.size() != 2 || B.shape.size() != 2 || A.shape[1] != B.shape[0])
      throw Error("matmul: incompatible shapes " + shape_str(A) + " x " +
                  shape_str(B));
    std::size_t m = A.shape[0], k = A.shape[1], n = B.shape[1];
    Tensor<T> out = Tensor<T>::zeros({m, n});
    detail::gemm_nn(A.data.data(), B.data.data(), out.data.data(), m, n, k, false);
    check_finite(out, "matmul");
    return push_op(std::move(out), {a, b}, [a, b, m, k, n](Graph& g, const Node& o) {
      if (g.node(a).needs_grad)
        detail::gemm_nt(o.grad.data.data(), g.node(b).value.data.data(),
                        g.node(a).grad.data.data(), m, k, n, true);
      if (g.node(b).needs_grad)
        detail::gemm_tn(g.node(a).value.data.data(), o.grad.data.data(),
                        g.node(b).grad.data.data(), k, n, m, true);
    });
  }

  /// A(m,k) * B(n,k)^T -> (m,n). The natural orientation for x * W^T with
  /// weights stored (out, in).
  Id matmul_nt(Id a, Id b) {
    const Tensor<T>& A = val(a);
    const Tensor<T>& B = val(b);
    if (A.shape.size() != 2 || B.shape.size() != 2 || A.shape[1] != B.shape[1])
      throw Error("matmul_nt: incompatible shapes " + shape_str(A) + " x " +
                  shape_str(B) + "^T");
    std::size_t m = A.shape[0], k = A.shape[1], n = B.shape[0];
    Tensor<T> out = Tensor<T>::zeros({m, n});
    detail::gemm_nt(A.data.data(), B.data.data(), out.data.data(), m, n, k, false);
    check_finite(out, "matmul_nt");
    return push_op(std::move(out), {a, b}, [a, b, m, k, n](Graph& g, const Node& o) {
      if (g.node(a).needs_grad)
        detail::gemm_nn(o.grad.data.data(), g.node(b).value.data.data(),
                        g.node(a).grad.data.data(), m, k, n, true);
      if (g.node(b).needs_grad)
        detail::gemm_tn(o.grad.data.data(), g.node(a).value.data.data(),
                        g.node(b).grad.data.data(), n, k, m, true);
    });
  }

  /// Elementwise sum; b may also be a rank-1 row vector broadcast over the
  /// rows of a (bias addition).
  Id add(Id a, Id b) {
    const Tensor<T>& A = val(a);
    const Tensor<T>& B = val(b);
    if (A.same_shape(B)) {
      Tensor<T> out = A;
      for (std::size_t i = 0; i < out.numel(); ++i) out.data[i] += B.data[i];
      check_finite(out, "add");
      return push_op(std::move(out), {a, b}, [a, b](Graph& g, const Node& o) {
        g.accumulate(a, o.grad);
        g.accumulate(b, o.grad);
      });
    }
    if (A.shape.size() == 2 && B.shape.size() == 1 && B.shape[0] == A.shape[1]) {
      Tensor<T> out = A;
      std::size_t rows = A.shape[0], cols = A.shape[1];
      for (std::size_t i = 0; i < rows; ++i)
        for (std::size_t j = 0; j < cols; ++j) out.at(i, j) += B.data[j];
      check_finite(out, "add");
      return push_op(std::move(out), {a, b},
                     [a, b, rows, cols](Graph& g, const Node& o) {
                       g.accumulate(a, o.grad);
                       if (g.node(b).needs_grad) {
                         Tensor<T>& gb = g.node(b).grad;
                         for (std::size_t i = 0; i < rows; ++i)
                           for (std::size_t j = 0; j < cols; ++j)
                             gb.data[j] += o.grad.at(i, j);
                       }
                     });
    }
    throw Error("add: incompatible shapes " + shape_str(A) + " + " + shape_str(B));
  }

  Id sub(Id a, Id b) {
    const Tensor<T>& A = val(a);
    const Tensor<T>& B = val(b);
    if (!A.same_shape(B))
      throw Error("sub: incompatible shapes " + shape_str(A) + " - " + shape_str(B));
    Tensor<T> out = A;
    for (std::size_t i = 0; i < out.numel(); ++i) out.data[i] -= B.data[i];
    check_finite(out, "sub");
    return push_op(std::move(out), {a, b}, [a, b](Graph& g, const Node& o) {
      g.accumulate(a, o.grad);
      if (g.node(b).needs_grad) {
        Tensor<T>& gb = g.node(b).grad;
        for (std::size_t i = 0; i < gb.numel(); ++i) gb.data[i] -= o.grad.data[i];
      }
    });
  }

  Id mul(Id a, Id b) {
    const Tensor<T>& A = val(a);
    const Tensor<T>& B = val(b);
    if (!A.same_shape(B))
      throw Error("mul: incompatible shapes " + shape_str(A) + " * " + shape_str(B));
    Tensor<T> out = A;
    for (std::size_t i = 0; i < out.numel(); ++i) out.data[i] *= B.data[i];
    check_finite(out, "mul");
    return push_op(std::move(out), {a, b}, [a, b](Graph& g, const Node& o) {
      if (g.node(a).needs_grad) {
        Tensor<T>& ga = g.node(a).grad;
        const Tensor<T>& bv = g.node(b).value;
        for (std::size_t i = 0; i < ga.numel(); ++i)
          ga.data[i] += o.grad.data[i] * bv.data[i];
      }
      if (g.node(b).needs_grad) {
        Tensor<T>& gb = g.node(b).grad;
        const Tensor<T>& av = g.node(a).value;
        for (std::size_t i = 0; i < gb.numel(); ++i)
          gb.data[i] += o.grad.data[i] * av.data[i];
      }
    });
  }

  Id tanh_of(Id a) {
    Tensor<T> out = val(a);
    for (T& v : out.data) v = std::tanh(v);
    check_finite(out, "tanh");
    return push_op(std::move(out), {a}, [a](Graph& g, const Node& o) {
      if (!g.node(a).needs_grad) return;
      Tensor<T>& ga = g.node(a).grad;
      for (std::size_t i = 0; i < ga.numel(); ++i) {
        T y = o.value.data[i];
        ga.data[i] += o.grad.data[i] * (T(1) - y * y);
      }
    });
  }

  Id sigmoid_of(Id a) {
    Tensor<T> out = val(a);
    for (T& v : out.data) {
      if (v >= T(0)) {
        v = T(1) / (T(1) + std::exp(-v));
      } else {
        T e = std::exp(v);
        v = e / (T(1) + e);
      }
    }
    check_finite(out, "sigmoid");
    return push_op(std::move(out), {a}, [a](Graph& g, const Node& o) {
      if (!g.node(a).needs_grad) return;
      Tensor<T>& ga = g.node(a).grad;
      for (std::size_t i = 0; i < ga.numel(); ++i) {
        T y = o.value.data[i];
        ga.data[i] += o.grad.data[i] * y * (T(1) - y);
      }
    });
  }

  /// Concatenation along axis 1 for two (m, *) tensors.
  Id concat_cols(Id a, Id b) {
    const Tensor<T>& A = val(a);
    const Tensor<T>& B = val(b);
    if (A.shape.size() != 2 || B.shape.size() != 2 || A.shape[0] != B.shape[0])
      throw Error("concat: incompatible shapes " + shape_str(A) + " | " +
                  shape_str(B));
    std::size_t m = A.shape[0], ca = A.shape[1], cb = B.shape[1];
    Tensor<T> out = Tensor<T>::zeros({m, ca + cb});
    for (std::size_t i = 0; i < m; ++i) {
      for (std::size_t j = 0; j < ca; ++j) out.at(i, j) = A.at(i, j);
      for (std::size_t j = 0; j < cb; ++j) out.at(i, ca + j) = B.at(i, j);
    }
    return push_op(std::move(out), {a, b}, [a, b, m, ca, cb](Graph& g, const Node& o) {
      if (g.node(a).needs_grad) {
        Tensor<T>& ga = g.node(a).grad;
        for (std::size_t i = 0; i < m; ++i)
          for (std::size_t j = 0; j < ca; ++j) ga.at(i, j) += o.grad.at(i, j);
      }
      if (g.node(b).needs_grad) {
        Tensor<T>& gb = g.node(b).grad;
        for (std::size_t i = 0; i < m; ++i)
          for (std::size_t j = 0; j < cb; ++j) gb.at(i, j) += o.grad.at(i, ca + j);
      }
    });
  }

  /// Inverted dropout: each element is zeroed with probability p, survivors
  /// scale by 1/(1-p); eval mode is the identity (the input id is returned).
  Id dropout(Id a, double p, bool train_mode, Rng& rng) {
    if (p < 0.0 || p >= 1.0)
      throw Error("dropout: p must be in [0,1), got " + std::to_string(p));
    if (!train_mode || p == 0.0) return a;
    const Tensor<T>& A = val(a);
    Tensor<T> out = A;
    auto mask = std::make_shared<std::vector<std::uint8_t>>(A.numel());
    T scale = T(1) / static_cast<T>(1.0 - p);
    for (std::size_t i = 0; i < A.numel(); ++i) {
      bool keep = rng.next_unit() >= p;
      (*mask)[i] = keep ? 1 : 0;
      out.data[i] = keep ? A.data[i] * scale : T(0);
    }
    check_finite(out, "dropout");
    return push_op(std::move(out), {a}, [a, mask, scale](Graph& g, const Node& o) {
      if (!g.node(a).needs_grad) return;
      Tensor<T>& ga = g.node(a).grad;
      for (std::size_t i = 0; i < ga.numel(); ++i)
        if ((*mask)[i]) ga.data[i] += o.grad.data[i] * scale;
    });
  }

  /// Gathers rows of a frozen table: out(i, :) = table(ids[i], :).
  /// The table receives no gradient.
  Id embedding_lookup(const Tensor<T>& table, const std::vector<int>& ids) {
    if (table.shape.size() != 2) throw Error("embedding_lookup: table must be 2-D");
    std::size_t dim = table.shape[1];
    Tensor<T> out = Tensor<T>::zeros({ids.size(), dim});
    for (std::size_t i = 0; i < ids.size(); ++i) {
      int id = ids[i];
      if (id < 0 || static_cast<std::size_t>(id) >= table.shape[0])
        throw Error("embedding_lookup: index " + std::to_string(id) +
                    " out of range for table " + shape_str(table));
      for (std::size_t j = 0; j < dim; ++j)
        out.at(i, j) = table.at(static_cast<std::size_t>(id), j);
    }
    return constant(std::move(out));
  }

  /// Row-wise select: out(i,:) = mask[i] ? when_true(i,:) : when_false(i,:).
  Id masked_select(const std::vector<std::uint8_t>& mask, Id when_true,
                   Id when_false) {
    const Tensor<T>& A = val(when_true);
    const Tensor<T>& B = val(when_false);
    if (!A.same_shape(B) || A.shape.size() != 2 || A.shape[0] != mask.size())
      throw Error("masked_select: incompatible shapes " + shape_str(A) + " / " +
                  shape_str(B) + " with mask size " + std::to_string(mask.size()));
    std::size_t m = A.shape[0], n = A.shape[1];
    Tensor<T> out = Tensor<T>::zeros({m, n});
    for (std::size_t i = 0; i < m; ++i)
      for (std::size_t j = 0; j < n; ++j)
        out.at(i, j) = mask[i] ? A.at(i, j) : B.at(i, j);
    auto mk = std::make_shared<std::vector<std::uint8_t>>(mask);
    return push_op(std::move(out), {when_true, when_false},
                   [when_true, when_false, mk, m, n](Graph& g, const Node& o) {
                     for (std::size_t i = 0; i < m; ++i) {
                       Id tgt = (*mk)[i] ? when_true : when_false;
                       if (!g.node(tgt).needs_grad) continue;
                       Tensor<T>& gt = g.node(tgt).grad;
                       for (std::size_t j = 0; j < n; ++j)
                         gt.at(i, j) += o.grad.at(i, j);
                     }
                   });
  }

  /// Mean cross-entropy of row-wise softmax against integer class labels.
  Id softmax_cross_entropy(Id logits, const std::vector<int>& labels) {
    const Tensor<T>& L = val(logits);
    if (L.shape.size() != 2 || L.shape[0] != labels.size())
      throw Error("softmax_cross_entropy: logits " + shape_str(L) + " vs " +
                  std::to_string(labels.size()) + " labels");
    std::size_t b = L.shape[0], c = L.shape[1];
    for (int lab : labels)
      if (lab < 0 || static_cast<std::size_t>(lab) >= c)
        throw Error("softmax_cross_entropy: label out of range");
    auto probs = std::make_shared<Tensor<T>>(softmax_rows(L));
    auto labs = std::make_shared<std::vector<int>>(labels);
    T loss = T(0);
    for (std::size_t i = 0; i < b; ++i)
      loss -= std::log(std::max(probs->at(i, static_cast<std::size_t>(labels[i])),
                                std::numeric_limits<T>::min()));
    loss /= static_cast<T>(b);
    Tensor<T> out = Tensor<T>::scalar(loss);
    check_finite(out, "softmax_cross_entropy");
    return push_op(std::move(out), {logits},
                   [logits, probs, labs, b, c](Graph& g, const Node& o) {
                     if (!g.node(logits).needs_grad) return;
                     T up = o.grad.data[0] / static_cast<T>(b);
                     Tensor<T>& gl = g.node(logits).grad;
                     for (std::size_t i = 0; i < b; ++i)
                       for (std::size_t j = 0; j < c; ++j) {
                         T ind = (static_cast<std::size_t>((*labs)[i]) == j) ? T(1)
                                                                             : T(0);
                         gl.at(i, j) += up * (probs->at(i, j) - ind);
                       }
                   });
  }

  /// Sum of all elements (scalar).
  Id sum_all(Id a) {
    const Tensor<T>& A = val(a);
    T s = T(0);
    for (T v : A.data) s += v;
    Tensor<T> out = Tensor<T>::scalar(s);
    check_finite(out, "sum");
    return push_op(std::move(out), {a}, [a](Graph& g, const Node& o) {
      if (!g.node(a).needs_grad) return;
      Tensor<T>& ga = g.node(a).grad;
      for (std::size_t i = 0; i < ga.numel(); ++i) ga.data[i] += o.grad.data[0];
    });
  }

  // --- backward ----------------------------------------------------------

  void backward(Id loss) {
    if (nodes_.empty() || loss < 0 || static_cast<std::size_t>(loss) >= nodes_.size())
      throw Error("backward before forward: no recorded graph for this loss");
    if (!node(loss).value.is_scalar())
      throw Error("backward: loss must be scalar, got " +
                  shape_str(node(loss).value));
    if (backward_done_) throw Error("backward already run on this graph");
    backward_done_ = true;
    if (!node(loss).needs_grad) return; // loss independent of every parameter
    node(loss).grad.data[0] = T(1);
    for (Id id = loss; id >= 0; --id) {
      Node& n = node(id);
      if (n.backprop && n.needs_grad) n.backprop(*this, n);
    }
  }

  bool backward_done() const { return backward_done_; }

private:
  struct Node {
    Tensor<T> value;
    Tensor<T> grad;
    bool needs_grad = false;
    std::function<void(Graph&, const Node&)> backprop;
  };

  Node& node(Id id) { return nodes_[static_cast<std::size_t>(id)]; }
  const Node& node(Id id) const { return nodes_[static_cast<std::size_t>(id)]; }

  void accumulate(Id id, const Tensor<T>& g) {
    Node& n = node(id);
    if (!n.needs_grad) return;
    for (std::size_t i = 0; i < n.grad.numel(); ++i) n.grad.data[i] += g.data[i];
  }

  Id push(Tensor<T> v, bool needs_grad) {
    Node n;
    n.value = std::move(v);
    n.needs_grad = needs_grad;
    if (needs_grad) n.grad = Tensor<T>::zeros(n.value.shape);
    nodes_.push_back(std::move(n));
    return static_cast<Id>(nodes_.size() - 1);
  }

  Id push_op(Tensor<T> v, std::initializer_list<Id> inputs,
             std::function<void(Graph&, const Node&)> back) {
    bool needs = false;
    for (Id i : inputs) needs = needs || node(i).needs_grad;
    Id id = push(std::move(v), needs);
    if (needs) node(id).backprop = std::move(back);
    return id;
  }

  std::vector<Node> nodes_;
  bool backward_done_ = false;
};

} // namespace mlsa

#endif
