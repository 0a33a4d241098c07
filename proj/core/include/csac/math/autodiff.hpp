#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

#include "csac/math/tensor.hpp"

namespace csac::math {

class Tape;

/// Handle to a node recorded on a Tape.
struct Var {
  Tape* tape = nullptr;
  std::size_t id = 0;
};

/// Reverse-mode tape. Every op appends one node; `backward` walks the nodes in
/// reverse, accumulates gradients into the parameters that were registered with
/// `parameter()`, and clears the tape.
///
/// A tape is single-owner. Create one per thread of control.
class Tape {
 public:
  using BackwardFn = std::function<void(Tape&, std::span<const double> out_grad)>;

  Var constant(RealTensor value);
  /// Leaf bound to `param`; `param` must outlive the next backward/clear.
  Var parameter(RealTensor& param);

  const RealTensor& value(Var v) const;
  const RealTensor& value(std::size_t id) const { return nodes_[id].value; }
  bool requires_grad(std::size_t id) const { return nodes_[id].requires_grad; }

  std::size_t size() const noexcept { return nodes_.size(); }
  bool empty() const noexcept { return nodes_.empty(); }

  /// Accumulates d(loss)/d(param) into every registered parameter's grad, then
  /// clears the tape. Throws StateError when `loss` is not a recorded scalar.
  void backward(Var loss);
  void clear() noexcept { nodes_.clear(); }

  // Used by op implementations.
  Var record(RealTensor value, bool requires_grad, BackwardFn fn);
  std::span<double> grad_of(std::size_t id);

 private:
  struct Node {
    RealTensor value;
    std::vector<double> grad;
    BackwardFn backward;
    RealTensor* param = nullptr;
    bool requires_grad = false;
  };
  std::vector<Node> nodes_;
};

namespace ad {

Var matmul(Var x, Var w);                // (b x i) * (i x o)
Var add_bias(Var x, Var bias);           // (b x o) + (1 x o) broadcast over rows
Var add(Var a, Var b);
Var sub(Var a, Var b);
Var mul(Var a, Var b);                   // elementwise
Var neg(Var a);
Var scale(Var a, double c);
Var add_scalar(Var a, double c);
Var mul_scalar(Var a, Var s);            // s is 1x1, broadcast
Var gelu(Var a);
Var relu(Var a);
Var tanh(Var a);
Var exp(Var a);
Var log(Var a);
Var square(Var a);
Var clamp(Var a, double lo, double hi);  // zero gradient outside [lo, hi]
Var minimum(Var a, Var b);               // gradient goes to the smaller operand (ties -> a)
Var sum(Var a);                          // -> 1x1
Var mean(Var a);                         // -> 1x1
Var row_sum(Var a);                      // (b x n) -> (b x 1)
Var concat_cols(Var a, Var b);
Var slice_cols(Var a, std::size_t begin, std::size_t end);
Var detach(Var a);

}  // namespace ad

// Scalar helpers shared with the non-recording paths.
double gelu_value(double x) noexcept;
double gelu_derivative(double x) noexcept;

}  // namespace csac::math
