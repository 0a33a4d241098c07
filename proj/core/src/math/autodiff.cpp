#include "csac/math/autodiff.hpp"

#include <Eigen/Core>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "csac/errors.hpp"

namespace csac::math {

namespace {

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using ConstMap = Eigen::Map<const RowMatrix>;
using MutMap = Eigen::Map<RowMatrix>;

RealTensor as_matrix(std::size_t rows, std::size_t cols, double fill = 0.0) {
  return RealTensor({rows, cols}, fill);
}

void require_same(const RealTensor& a, const RealTensor& b, const char* op) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw DimensionError(std::string(op) + ": operand shapes (" + std::to_string(a.rows()) + "x" +
                         std::to_string(a.cols()) + ") and (" + std::to_string(b.rows()) + "x" +
                         std::to_string(b.cols()) + ") differ");
  }
}

Tape& tape_of(Var a) {
  if (a.tape == nullptr) throw StateError("Var is not bound to a tape");
  return *a.tape;
}

Tape& tape_of(Var a, Var b) {
  if (a.tape != b.tape) throw StateError("operands recorded on different tapes");
  return tape_of(a);
}

// Elementwise unary op: y = f(x), dy/dx = df(x).
template <typename F, typename DF>
Var unary(Var a, F f, DF df) {
  Tape& t = tape_of(a);
  const RealTensor& x = t.value(a);
  RealTensor y = as_matrix(x.rows(), x.cols());
  for (std::size_t i = 0; i < x.size(); ++i) y[i] = f(x[i]);
  const std::size_t ia = a.id;
  return t.record(std::move(y), t.requires_grad(ia), [ia, df](Tape& tp, std::span<const double> g) {
    const RealTensor& xv = tp.value(ia);
    auto ga = tp.grad_of(ia);
    for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i] * df(xv[i]);
  });
}

}  // namespace

double gelu_value(double x) noexcept {
  return 0.5 * x * std::erfc(-x / std::numbers::sqrt2);
}

double gelu_derivative(double x) noexcept {
  const double cdf = 0.5 * std::erfc(-x / std::numbers::sqrt2);
  const double pdf = std::exp(-0.5 * x * x) / std::sqrt(2.0 * std::numbers::pi);
  return cdf + x * pdf;
}

Var Tape::constant(RealTensor value) {
  RealTensor m = value.rank() == 2 ? std::move(value)
                                   : RealTensor({value.rows(), value.cols()},
                                                std::vector<double>(value.values().begin(),
                                                                    value.values().end()));
  return record(std::move(m), false, nullptr);
}

Var Tape::parameter(RealTensor& param) {
  RealTensor m({param.rows(), param.cols()},
               std::vector<double>(param.values().begin(), param.values().end()));
  Var v = record(std::move(m), true, nullptr);
  nodes_[v.id].param = &param;
  return v;
}

const RealTensor& Tape::value(Var v) const {
  if (v.tape != this || v.id >= nodes_.size()) throw StateError("Var does not belong to this tape");
  return nodes_[v.id].value;
}

Var Tape::record(RealTensor value, bool requires_grad, BackwardFn fn) {
  nodes_.push_back(Node{std::move(value), {}, std::move(fn), nullptr, requires_grad});
  return Var{this, nodes_.size() - 1};
}

std::span<double> Tape::grad_of(std::size_t id) {
  auto& n = nodes_[id];
  if (n.grad.size() != n.value.size()) n.grad.assign(n.value.size(), 0.0);
  return n.grad;
}

void Tape::backward(Var loss) {
  if (nodes_.empty()) throw StateError("backward called without a recorded graph");
  if (loss.tape != this || loss.id >= nodes_.size()) {
    throw StateError("backward: loss is not recorded on this tape");
  }
  if (nodes_[loss.id].value.size() != 1) throw StateError("backward: loss must be a scalar");

  grad_of(loss.id)[0] = 1.0;
  for (std::size_t i = loss.id + 1; i-- > 0;) {
    Node& n = nodes_[i];
    if (!n.requires_grad || n.grad.empty()) continue;
    if (n.param != nullptr) {
      auto pg = n.param->grad();
      for (std::size_t k = 0; k < pg.size(); ++k) pg[k] += n.grad[k];
    } else if (n.backward) {
      // Move the gradient out so that the callback may grow other nodes' grads freely.
      std::vector<double> g = std::move(n.grad);
      n.backward(*this, g);
    }
  }
  nodes_.clear();
}

namespace ad {

Var matmul(Var x, Var w) {
  Tape& t = tape_of(x, w);
  const RealTensor& xv = t.value(x);
  const RealTensor& wv = t.value(w);
  if (xv.cols() != wv.rows()) {
    throw DimensionError("matmul: inner dimensions " + std::to_string(xv.cols()) + " and " +
                         std::to_string(wv.rows()) + " differ");
  }
  RealTensor y = as_matrix(xv.rows(), wv.cols());
  MutMap(y.data(), y.rows(), y.cols()).noalias() =
      ConstMap(xv.data(), xv.rows(), xv.cols()) * ConstMap(wv.data(), wv.rows(), wv.cols());
  const auto ix = x.id, iw = w.id;
  const bool rg = t.requires_grad(ix) || t.requires_grad(iw);
  return t.record(std::move(y), rg, [ix, iw](Tape& tp, std::span<const double> g) {
    const RealTensor& xv = tp.value(ix);
    const RealTensor& wv = tp.value(iw);
    ConstMap gm(g.data(), xv.rows(), wv.cols());
    if (tp.requires_grad(ix)) {
      MutMap(tp.grad_of(ix).data(), xv.rows(), xv.cols()).noalias() +=
          gm * ConstMap(wv.data(), wv.rows(), wv.cols()).transpose();
    }
    if (tp.requires_grad(iw)) {
      MutMap(tp.grad_of(iw).data(), wv.rows(), wv.cols()).noalias() +=
          ConstMap(xv.data(), xv.rows(), xv.cols()).transpose() * gm;
    }
  });
}

Var add_bias(Var x, Var bias) {
  Tape& t = tape_of(x, bias);
  const RealTensor& xv = t.value(x);
  const RealTensor& bv = t.value(bias);
  if (bv.rows() != 1 || bv.cols() != xv.cols()) throw DimensionError("add_bias: bias width mismatch");
  RealTensor y = as_matrix(xv.rows(), xv.cols());
  const std::size_t c = xv.cols();
  for (std::size_t r = 0; r < xv.rows(); ++r) {
    for (std::size_t j = 0; j < c; ++j) y[r * c + j] = xv[r * c + j] + bv[j];
  }
  const auto ix = x.id, ib = bias.id;
  const bool rg = t.requires_grad(ix) || t.requires_grad(ib);
  return t.record(std::move(y), rg, [ix, ib, c](Tape& tp, std::span<const double> g) {
    if (tp.requires_grad(ix)) {
      auto gx = tp.grad_of(ix);
      for (std::size_t i = 0; i < g.size(); ++i) gx[i] += g[i];
    }
    if (tp.requires_grad(ib)) {
      auto gb = tp.grad_of(ib);
      for (std::size_t i = 0; i < g.size(); ++i) gb[i % c] += g[i];
    }
  });
}

namespace {

template <typename F, typename DA, typename DB>
Var binary(Var a, Var b, const char* name, F f, DA da, DB db) {
  Tape& t = tape_of(a, b);
  const RealTensor& av = t.value(a);
  const RealTensor& bv = t.value(b);
  require_same(av, bv, name);
  RealTensor y = as_matrix(av.rows(), av.cols());
  for (std::size_t i = 0; i < av.size(); ++i) y[i] = f(av[i], bv[i]);
  const auto ia = a.id, ib = b.id;
  const bool rg = t.requires_grad(ia) || t.requires_grad(ib);
  return t.record(std::move(y), rg, [ia, ib, da, db](Tape& tp, std::span<const double> g) {
    const RealTensor& av = tp.value(ia);
    const RealTensor& bv = tp.value(ib);
    if (tp.requires_grad(ia)) {
      auto ga = tp.grad_of(ia);
      for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i] * da(av[i], bv[i]);
    }
    if (tp.requires_grad(ib)) {
      auto gb = tp.grad_of(ib);
      for (std::size_t i = 0; i < g.size(); ++i) gb[i] += g[i] * db(av[i], bv[i]);
    }
  });
}

}  // namespace

Var add(Var a, Var b) {
  return binary(
      a, b, "add", [](double x, double y) { return x + y; }, [](double, double) { return 1.0; },
      [](double, double) { return 1.0; });
}

Var sub(Var a, Var b) {
  return binary(
      a, b, "sub", [](double x, double y) { return x - y; }, [](double, double) { return 1.0; },
      [](double, double) { return -1.0; });
}

Var mul(Var a, Var b) {
  return binary(
      a, b, "mul", [](double x, double y) { return x * y; }, [](double, double y) { return y; },
      [](double x, double) { return x; });
}

Var minimum(Var a, Var b) {
  return binary(
      a, b, "minimum", [](double x, double y) { return std::min(x, y); },
      [](double x, double y) { return x <= y ? 1.0 : 0.0; },
      [](double x, double y) { return x <= y ? 0.0 : 1.0; });
}

Var neg(Var a) {
  return unary(a, [](double x) { return -x; }, [](double) { return -1.0; });
}

Var scale(Var a, double c) {
  return unary(a, [c](double x) { return c * x; }, [c](double) { return c; });
}

Var add_scalar(Var a, double c) {
  return unary(a, [c](double x) { return x + c; }, [](double) { return 1.0; });
}

Var mul_scalar(Var a, Var s) {
  Tape& t = tape_of(a, s);
  const RealTensor& av = t.value(a);
  const RealTensor& sv = t.value(s);
  if (sv.size() != 1) throw DimensionError("mul_scalar: second operand must be 1x1");
  RealTensor y = as_matrix(av.rows(), av.cols());
  const double k = sv[0];
  for (std::size_t i = 0; i < av.size(); ++i) y[i] = av[i] * k;
  const auto ia = a.id, is = s.id;
  const bool rg = t.requires_grad(ia) || t.requires_grad(is);
  return t.record(std::move(y), rg, [ia, is](Tape& tp, std::span<const double> g) {
    const RealTensor& av = tp.value(ia);
    const double k = tp.value(is)[0];
    if (tp.requires_grad(ia)) {
      auto ga = tp.grad_of(ia);
      for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i] * k;
    }
    if (tp.requires_grad(is)) {
      double acc = 0.0;
      for (std::size_t i = 0; i < g.size(); ++i) acc += g[i] * av[i];
      tp.grad_of(is)[0] += acc;
    }
  });
}

Var gelu(Var a) { return unary(a, gelu_value, gelu_derivative); }

Var relu(Var a) {
  return unary(
      a, [](double x) { return x > 0.0 ? x : 0.0; }, [](double x) { return x > 0.0 ? 1.0 : 0.0; });
}

Var tanh(Var a) {
  return unary(
      a, [](double x) { return std::tanh(x); },
      [](double x) {
        const double th = std::tanh(x);
        return 1.0 - th * th;
      });
}

Var exp(Var a) {
  return unary(a, [](double x) { return std::exp(x); }, [](double x) { return std::exp(x); });
}

Var log(Var a) {
  return unary(a, [](double x) { return std::log(x); }, [](double x) { return 1.0 / x; });
}

Var square(Var a) {
  return unary(a, [](double x) { return x * x; }, [](double x) { return 2.0 * x; });
}

Var clamp(Var a, double lo, double hi) {
  return unary(
      a, [lo, hi](double x) { return std::clamp(x, lo, hi); },
      [lo, hi](double x) { return (x >= lo && x <= hi) ? 1.0 : 0.0; });
}

Var sum(Var a) {
  Tape& t = tape_of(a);
  const RealTensor& av = t.value(a);
  double s = 0.0;
  for (double v : av.values()) s += v;
  const auto ia = a.id;
  return t.record(as_matrix(1, 1, s), t.requires_grad(ia), [ia](Tape& tp, std::span<const double> g) {
    for (auto& x : tp.grad_of(ia)) x += g[0];
  });
}

Var mean(Var a) {
  const double n = static_cast<double>(tape_of(a).value(a).size());
  return scale(sum(a), 1.0 / n);
}

Var row_sum(Var a) {
  Tape& t = tape_of(a);
  const RealTensor& av = t.value(a);
  const std::size_t r = av.rows(), c = av.cols();
  RealTensor y = as_matrix(r, 1);
  for (std::size_t i = 0; i < r; ++i) {
    double s = 0.0;
    for (std::size_t j = 0; j < c; ++j) s += av[i * c + j];
    y[i] = s;
  }
  const auto ia = a.id;
  return t.record(std::move(y), t.requires_grad(ia), [ia, c](Tape& tp, std::span<const double> g) {
    auto ga = tp.grad_of(ia);
    for (std::size_t i = 0; i < ga.size(); ++i) ga[i] += g[i / c];
  });
}

Var concat_cols(Var a, Var b) {
  Tape& t = tape_of(a, b);
  const RealTensor& av = t.value(a);
  const RealTensor& bv = t.value(b);
  if (av.rows() != bv.rows()) throw DimensionError("concat_cols: row counts differ");
  const std::size_t r = av.rows(), ca = av.cols(), cb = bv.cols();
  RealTensor y = as_matrix(r, ca + cb);
  for (std::size_t i = 0; i < r; ++i) {
    std::copy_n(av.data() + i * ca, ca, y.data() + i * (ca + cb));
    std::copy_n(bv.data() + i * cb, cb, y.data() + i * (ca + cb) + ca);
  }
  const auto ia = a.id, ib = b.id;
  const bool rg = t.requires_grad(ia) || t.requires_grad(ib);
  return t.record(std::move(y), rg, [ia, ib, r, ca, cb](Tape& tp, std::span<const double> g) {
    if (tp.requires_grad(ia)) {
      auto ga = tp.grad_of(ia);
      for (std::size_t i = 0; i < r; ++i)
        for (std::size_t j = 0; j < ca; ++j) ga[i * ca + j] += g[i * (ca + cb) + j];
    }
    if (tp.requires_grad(ib)) {
      auto gb = tp.grad_of(ib);
      for (std::size_t i = 0; i < r; ++i)
        for (std::size_t j = 0; j < cb; ++j) gb[i * cb + j] += g[i * (ca + cb) + ca + j];
    }
  });
}

Var slice_cols(Var a, std::size_t begin, std::size_t end) {
  Tape& t = tape_of(a);
  const RealTensor& av = t.value(a);
  if (begin >= end || end > av.cols()) throw DimensionError("slice_cols: invalid column range");
  const std::size_t r = av.rows(), c = av.cols(), w = end - begin;
  RealTensor y = as_matrix(r, w);
  for (std::size_t i = 0; i < r; ++i) std::copy_n(av.data() + i * c + begin, w, y.data() + i * w);
  const auto ia = a.id;
  return t.record(std::move(y), t.requires_grad(ia),
                  [ia, r, c, w, begin](Tape& tp, std::span<const double> g) {
                    auto ga = tp.grad_of(ia);
                    for (std::size_t i = 0; i < r; ++i)
                      for (std::size_t j = 0; j < w; ++j) ga[i * c + begin + j] += g[i * w + j];
                  });
}

Var detach(Var a) {
  Tape& t = tape_of(a);
  return t.constant(t.value(a));
}

}  // namespace ad
}  // namespace csac::math
