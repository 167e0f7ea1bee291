// autodiff.hpp -- minimal reverse-mode automatic differentiation on dense
// matrices. Graphs are built per forward pass (define-by-run); backward()
// walks the graph once in reverse topological order and accumulates into
// each node's grad buffer. Everything is double precision.
#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <memory>
#include <vector>

#include "reverbkit/common.hpp"

namespace reverbkit::ad {

struct Tensor;
using TensorPtr = std::shared_ptr<Tensor>;

struct Tensor {
  std::size_t rows = 0, cols = 0;
  std::vector<double> value;
  std::vector<double> grad;  // sized on demand, accumulated with +=
  bool requires_grad = false;

  std::vector<TensorPtr> parents;
  std::function<void()> backprop;  // adds this node's grad into its parents'

  Tensor(std::size_t r, std::size_t c) : rows(r), cols(c), value(r * c, 0.0) {}

  std::size_t size() const { return value.size(); }
  double& v(std::size_t r, std::size_t c) { return value[r * cols + c]; }
  double v(std::size_t r, std::size_t c) const { return value[r * cols + c]; }
  void ensure_grad() {
    if (grad.size() != value.size()) grad.assign(value.size(), 0.0);
  }
  void zero_grad() { grad.assign(value.size(), 0.0); }
  Matrix to_matrix() const;
};

TensorPtr constant(const Matrix& m);
TensorPtr constant_row(const std::vector<double>& v);
TensorPtr param(const Matrix& m);  // leaf with requires_grad

// All ops validate shapes and throw std::invalid_argument on mismatch.
TensorPtr matmul(const TensorPtr& a, const TensorPtr& b);
TensorPtr add(const TensorPtr& a, const TensorPtr& b);            // same shape
TensorPtr sub(const TensorPtr& a, const TensorPtr& b);            // same shape
TensorPtr add_row_bias(const TensorPtr& m, const TensorPtr& b);   // b is 1 x C
TensorPtr tanh_of(const TensorPtr& a);
TensorPtr affine_const(const TensorPtr& a, double scale, double shift);
TensorPtr scale(const TensorPtr& a, double k);

// Per-column (channel) convolution along rows (time), zero-padded to the
// same length. kernel is K x C with K odd.
TensorPtr depthwise_conv_rows(const TensorPtr& m, const TensorPtr& kernel);

// Mean over rows -> 1 x C. An optional mask selects which rows participate
// (nonzero = included); at least one row must be included.
TensorPtr mean_rows(const TensorPtr& m, const std::vector<std::uint8_t>* mask = nullptr);

TensorPtr broadcast_rows(const TensorPtr& row, std::size_t rows);  // 1 x C -> R x C
TensorPtr concat_cols(const TensorPtr& a, const TensorPtr& b);     // same rows

TensorPtr sum_abs(const TensorPtr& a);  // 1 x 1
TensorPtr sum_sq(const TensorPtr& a);   // 1 x 1

// Seeds root->grad with 1 and propagates to every reachable node. The root
// must be a scalar (1 x 1). Parameter grads accumulate across calls until
// explicitly zeroed.
void backward(const TensorPtr& root);

}  // namespace reverbkit::ad
