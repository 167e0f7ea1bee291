#include "reverbkit/autodiff.hpp"

#include <cmath>
#include <stdexcept>
#include <unordered_set>

namespace reverbkit::ad {

namespace {

TensorPtr make_node(std::size_t rows, std::size_t cols, std::vector<TensorPtr> parents) {
  auto t = std::make_shared<Tensor>(rows, cols);
  for (const TensorPtr& p : parents) {
    if (p->requires_grad) {
      t->requires_grad = true;
      break;
    }
  }
  t->parents = std::move(parents);
  return t;
}

void require_same_shape(const TensorPtr& a, const TensorPtr& b, const char* who) {
  if (a->rows != b->rows || a->cols != b->cols) {
    throw std::invalid_argument(std::string(who) + ": shape mismatch");
  }
}

}  // namespace

Matrix Tensor::to_matrix() const {
  Matrix m(rows, cols);
  m.data = value;
  return m;
}

TensorPtr constant(const Matrix& m) {
  auto t = std::make_shared<Tensor>(m.rows, m.cols);
  t->value = m.data;
  return t;
}

TensorPtr constant_row(const std::vector<double>& v) {
  auto t = std::make_shared<Tensor>(1, v.size());
  t->value = v;
  return t;
}

TensorPtr param(const Matrix& m) {
  TensorPtr t = constant(m);
  t->requires_grad = true;
  t->ensure_grad();
  return t;
}

TensorPtr matmul(const TensorPtr& a, const TensorPtr& b) {
  if (a->cols != b->rows) throw std::invalid_argument("matmul: inner dimensions differ");
  TensorPtr out = make_node(a->rows, b->cols, {a, b});
  const std::size_t n = a->rows, k = a->cols, m = b->cols;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t p = 0; p < k; ++p) {
      const double av = a->value[i * k + p];
      if (av == 0.0) continue;
      const double* brow = &b->value[p * m];
      double* orow = &out->value[i * m];
      for (std::size_t j = 0; j < m; ++j) orow[j] += av * brow[j];
    }
  }
  // Capturing the owning pointer here would make each node keep itself alive
  // (node -> closure -> node), leaking every graph, so all backprop closures
  // hold a raw self pointer instead; the closure cannot outlive its tensor.
  out->backprop = [self = out.get(), a, b, n, k, m] {
    if (a->requires_grad) {
      a->ensure_grad();
      for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < m; ++j) {
          const double g = self->grad[i * m + j];
          if (g == 0.0) continue;
          const double* brow = &b->value[0];
          for (std::size_t p = 0; p < k; ++p) a->grad[i * k + p] += g * brow[p * m + j];
        }
      }
    }
    if (b->requires_grad) {
      b->ensure_grad();
      for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t p = 0; p < k; ++p) {
          const double av = a->value[i * k + p];
          if (av == 0.0) continue;
          const double* grow = &self->grad[i * m];
          double* bgrad = &b->grad[p * m];
          for (std::size_t j = 0; j < m; ++j) bgrad[j] += av * grow[j];
        }
      }
    }
  };
  return out;
}

TensorPtr add(const TensorPtr& a, const TensorPtr& b) {
  require_same_shape(a, b, "add");
  TensorPtr out = make_node(a->rows, a->cols, {a, b});
  for (std::size_t i = 0; i < out->size(); ++i) out->value[i] = a->value[i] + b->value[i];
  out->backprop = [self = out.get(), a, b] {
    if (a->requires_grad) {
      a->ensure_grad();
      for (std::size_t i = 0; i < self->size(); ++i) a->grad[i] += self->grad[i];
    }
    if (b->requires_grad) {
      b->ensure_grad();
      for (std::size_t i = 0; i < self->size(); ++i) b->grad[i] += self->grad[i];
    }
  };
  return out;
}

TensorPtr sub(const TensorPtr& a, const TensorPtr& b) {
  require_same_shape(a, b, "sub");
  TensorPtr out = make_node(a->rows, a->cols, {a, b});
  for (std::size_t i = 0; i < out->size(); ++i) out->value[i] = a->value[i] - b->value[i];
  out->backprop = [self = out.get(), a, b] {
    if (a->requires_grad) {
      a->ensure_grad();
      for (std::size_t i = 0; i < self->size(); ++i) a->grad[i] += self->grad[i];
    }
    if (b->requires_grad) {
      b->ensure_grad();
      for (std::size_t i = 0; i < self->size(); ++i) b->grad[i] -= self->grad[i];
    }
  };
  return out;
}

TensorPtr add_row_bias(const TensorPtr& m, const TensorPtr& b) {
  if (b->rows != 1 || b->cols != m->cols) {
    throw std::invalid_argument("add_row_bias: bias must be 1 x cols");
  }
  TensorPtr out = make_node(m->rows, m->cols, {m, b});
  for (std::size_t r = 0; r < m->rows; ++r) {
    for (std::size_t c = 0; c < m->cols; ++c) {
      out->value[r * m->cols + c] = m->value[r * m->cols + c] + b->value[c];
    }
  }
  out->backprop = [self = out.get(), m, b] {
    if (m->requires_grad) {
      m->ensure_grad();
      for (std::size_t i = 0; i < self->size(); ++i) m->grad[i] += self->grad[i];
    }
    if (b->requires_grad) {
      b->ensure_grad();
      for (std::size_t r = 0; r < self->rows; ++r) {
        for (std::size_t c = 0; c < self->cols; ++c) b->grad[c] += self->grad[r * self->cols + c];
      }
    }
  };
  return out;
}

TensorPtr tanh_of(const TensorPtr& a) {
  TensorPtr out = make_node(a->rows, a->cols, {a});
  for (std::size_t i = 0; i < out->size(); ++i) out->value[i] = std::tanh(a->value[i]);
  out->backprop = [self = out.get(), a] {
    if (!a->requires_grad) return;
    a->ensure_grad();
    for (std::size_t i = 0; i < self->size(); ++i) {
      a->grad[i] += self->grad[i] * (1.0 - self->value[i] * self->value[i]);
    }
  };
  return out;
}

TensorPtr affine_const(const TensorPtr& a, double scale_k, double shift) {
  TensorPtr out = make_node(a->rows, a->cols, {a});
  for (std::size_t i = 0; i < out->size(); ++i) out->value[i] = scale_k * a->value[i] + shift;
  out->backprop = [self = out.get(), a, scale_k] {
    if (!a->requires_grad) return;
    a->ensure_grad();
    for (std::size_t i = 0; i < self->size(); ++i) a->grad[i] += scale_k * self->grad[i];
  };
  return out;
}

TensorPtr scale(const TensorPtr& a, double k) { return affine_const(a, k, 0.0); }

TensorPtr depthwise_conv_rows(const TensorPtr& m, const TensorPtr& kernel) {
  if (kernel->cols != m->cols) {
    throw std::invalid_argument("depthwise_conv_rows: kernel channels must match input");
  }
  if (kernel->rows % 2 == 0) {
    throw std::invalid_argument("depthwise_conv_rows: kernel length must be odd");
  }
  const std::size_t T = m->rows, C = m->cols, K = kernel->rows;
  const std::ptrdiff_t half = static_cast<std::ptrdiff_t>(K / 2);
  TensorPtr out = make_node(T, C, {m, kernel});
  for (std::size_t t = 0; t < T; ++t) {
    for (std::size_t k = 0; k < K; ++k) {
      const std::ptrdiff_t src = static_cast<std::ptrdiff_t>(t) +
                                 static_cast<std::ptrdiff_t>(k) - half;
      if (src < 0 || src >= static_cast<std::ptrdiff_t>(T)) continue;
      const double* mrow = &m->value[static_cast<std::size_t>(src) * C];
      const double* krow = &kernel->value[k * C];
      double* orow = &out->value[t * C];
      for (std::size_t c = 0; c < C; ++c) orow[c] += krow[c] * mrow[c];
    }
  }
  out->backprop = [self = out.get(), m, kernel, T, C, K, half] {
    for (std::size_t t = 0; t < T; ++t) {
      for (std::size_t k = 0; k < K; ++k) {
        const std::ptrdiff_t src = static_cast<std::ptrdiff_t>(t) +
                                   static_cast<std::ptrdiff_t>(k) - half;
        if (src < 0 || src >= static_cast<std::ptrdiff_t>(T)) continue;
        const double* grow = &self->grad[t * C];
        if (m->requires_grad) {
          m->ensure_grad();
          const double* krow = &kernel->value[k * C];
          double* mg = &m->grad[static_cast<std::size_t>(src) * C];
          for (std::size_t c = 0; c < C; ++c) mg[c] += krow[c] * grow[c];
        }
        if (kernel->requires_grad) {
          kernel->ensure_grad();
          const double* mrow = &m->value[static_cast<std::size_t>(src) * C];
          double* kg = &kernel->grad[k * C];
          for (std::size_t c = 0; c < C; ++c) kg[c] += mrow[c] * grow[c];
        }
      }
    }
  };
  return out;
}

TensorPtr mean_rows(const TensorPtr& m, const std::vector<std::uint8_t>* mask) {
  if (mask && mask->size() != m->rows) {
    throw std::invalid_argument("mean_rows: mask length must equal rows");
  }
  std::vector<std::uint8_t> included(m->rows, 1);
  if (mask) included = *mask;
  std::size_t count = 0;
  for (std::uint8_t f : included) count += f ? 1 : 0;
  if (count == 0) throw std::invalid_argument("mean_rows: mask excludes every row");

  TensorPtr out = make_node(1, m->cols, {m});
  const double inv = 1.0 / static_cast<double>(count);
  for (std::size_t r = 0; r < m->rows; ++r) {
    if (!included[r]) continue;
    for (std::size_t c = 0; c < m->cols; ++c) out->value[c] += m->value[r * m->cols + c] * inv;
  }
  out->backprop = [self = out.get(), m, included = std::move(included), inv] {
    if (!m->requires_grad) return;
    m->ensure_grad();
    for (std::size_t r = 0; r < m->rows; ++r) {
      if (!included[r]) continue;
      for (std::size_t c = 0; c < m->cols; ++c) m->grad[r * m->cols + c] += self->grad[c] * inv;
    }
  };
  return out;
}

TensorPtr broadcast_rows(const TensorPtr& row, std::size_t rows) {
  if (row->rows != 1) throw std::invalid_argument("broadcast_rows: input must be 1 x C");
  TensorPtr out = make_node(rows, row->cols, {row});
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < row->cols; ++c) out->value[r * row->cols + c] = row->value[c];
  }
  out->backprop = [self = out.get(), row] {
    if (!row->requires_grad) return;
    row->ensure_grad();
    for (std::size_t r = 0; r < self->rows; ++r) {
      for (std::size_t c = 0; c < self->cols; ++c) row->grad[c] += self->grad[r * self->cols + c];
    }
  };
  return out;
}

TensorPtr concat_cols(const TensorPtr& a, const TensorPtr& b) {
  if (a->rows != b->rows) throw std::invalid_argument("concat_cols: row counts differ");
  const std::size_t ca = a->cols, cb = b->cols;
  TensorPtr out = make_node(a->rows, ca + cb, {a, b});
  for (std::size_t r = 0; r < a->rows; ++r) {
    for (std::size_t c = 0; c < ca; ++c) out->value[r * (ca + cb) + c] = a->value[r * ca + c];
    for (std::size_t c = 0; c < cb; ++c) out->value[r * (ca + cb) + ca + c] = b->value[r * cb + c];
  }
  out->backprop = [self = out.get(), a, b, ca, cb] {
    if (a->requires_grad) {
      a->ensure_grad();
      for (std::size_t r = 0; r < a->rows; ++r) {
        for (std::size_t c = 0; c < ca; ++c) a->grad[r * ca + c] += self->grad[r * (ca + cb) + c];
      }
    }
    if (b->requires_grad) {
      b->ensure_grad();
      for (std::size_t r = 0; r < b->rows; ++r) {
        for (std::size_t c = 0; c < cb; ++c) {
          b->grad[r * cb + c] += self->grad[r * (ca + cb) + ca + c];
        }
      }
    }
  };
  return out;
}

TensorPtr sum_abs(const TensorPtr& a) {
  TensorPtr out = make_node(1, 1, {a});
  double s = 0.0;
  for (double v : a->value) s += std::abs(v);
  out->value[0] = s;
  out->backprop = [self = out.get(), a] {
    if (!a->requires_grad) return;
    a->ensure_grad();
    const double g = self->grad[0];
    for (std::size_t i = 0; i < a->size(); ++i) {
      if (a->value[i] > 0.0) {
        a->grad[i] += g;
      } else if (a->value[i] < 0.0) {
        a->grad[i] -= g;
      }
    }
  };
  return out;
}

TensorPtr sum_sq(const TensorPtr& a) {
  TensorPtr out = make_node(1, 1, {a});
  double s = 0.0;
  for (double v : a->value) s += v * v;
  out->value[0] = s;
  out->backprop = [self = out.get(), a] {
    if (!a->requires_grad) return;
    a->ensure_grad();
    const double g = self->grad[0];
    for (std::size_t i = 0; i < a->size(); ++i) a->grad[i] += 2.0 * a->value[i] * g;
  };
  return out;
}

void backward(const TensorPtr& root) {
  if (root->size() != 1) throw std::invalid_argument("backward: root must be a scalar");

  // Iterative post-order DFS over parents, then replay in reverse.
  std::vector<Tensor*> order;
  std::unordered_set<Tensor*> visited;
  struct Frame {
    Tensor* node;
    std::size_t next_parent;
  };
  std::vector<Frame> stack;
  if (visited.insert(root.get()).second) stack.push_back({root.get(), 0});
  while (!stack.empty()) {
    Frame& top = stack.back();
    if (top.next_parent < top.node->parents.size()) {
      Tensor* parent = top.node->parents[top.next_parent++].get();
      if (visited.insert(parent).second) stack.push_back({parent, 0});
    } else {
      order.push_back(top.node);
      stack.pop_back();
    }
  }

  for (Tensor* t : order) {
    if (t != root.get()) t->ensure_grad();
  }
  root->ensure_grad();
  root->grad[0] = 1.0;
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    if ((*it)->backprop) (*it)->backprop();
  }
}

}  // namespace reverbkit::ad
