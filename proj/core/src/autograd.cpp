// core/src/autograd.cpp

// Copyright 2026  fac contributors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// THIS CODE IS PROVIDED *AS IS* BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
// KIND, EITHER EXPRESS OR IMPLIED, INCLUDING WITHOUT LIMITATION ANY IMPLIED
// WARRANTIES OR CONDITIONS OF TITLE, FITNESS FOR A PARTICULAR PURPOSE,
// MERCHANTABLITY OR NON-INFRINGEMENT.
// See the Apache 2 License for the specific language governing permissions and
// limitations under the License.

#include "fac/autograd.hpp"

#include <cmath>
#include <limits>

#include "fac/error.hpp"

namespace fac::nn {

const Matrix &Var::value() const { return graph_->value(*this); }

Var Graph::constant(Matrix value) {
  nodes_.push_back(Node{std::move(value), Matrix(), nullptr, nullptr, false});
  return Var(this, static_cast<int>(nodes_.size() - 1));
}

Var Graph::input(Matrix value) {
  nodes_.push_back(Node{std::move(value), Matrix(), nullptr, nullptr, record_});
  return Var(this, static_cast<int>(nodes_.size() - 1));
}

Var Graph::param(Parameter &p) {
  nodes_.push_back(Node{p.value, Matrix(), nullptr, &p, record_});
  return Var(this, static_cast<int>(nodes_.size() - 1));
}

Var Graph::push(Matrix value, std::initializer_list<Var> parents,
                BackwardFn fn) {
  return push(std::move(value), std::vector<Var>(parents), std::move(fn));
}

Var Graph::push(Matrix value, const std::vector<Var> &parents,
                BackwardFn fn) {
  bool needs = false;
  if (record_)
    for (const Var &p : parents) needs = needs || needs_grad(p);
  nodes_.push_back(
      Node{std::move(value), Matrix(), needs ? std::move(fn) : nullptr,
           nullptr, needs});
  return Var(this, static_cast<int>(nodes_.size() - 1));
}

void Graph::accumulate(Var v, const Matrix &g) {
  Node &n = nodes_[idx(v)];
  if (!n.needs_grad) return;
  if (n.grad.size() == 0)
    n.grad = g;
  else
    n.grad += g;
}

Matrix Graph::grad(Var v) const {
  const Node &n = nodes_[idx(v)];
  if (n.grad.size() == 0) return Matrix::Zero(n.value.rows(), n.value.cols());
  return n.grad;
}

void Graph::backward(Var loss) {
  if (!record_) throw StateError("backward on a graph without gradients");
  if (loss.graph_ != this) throw StateError("loss belongs to another graph");
  if (value(loss).rows() != 1 || value(loss).cols() != 1)
    throw ShapeError("backward needs a scalar loss");
  accumulate(loss, Matrix::Ones(1, 1));
  for (size_t i = idx(loss) + 1; i-- > 0;) {
    Node &n = nodes_[i];
    if (!n.needs_grad || n.grad.size() == 0) continue;
    if (n.param) {
      if (n.param->grad.rows() != n.grad.rows() ||
          n.param->grad.cols() != n.grad.cols())
        n.param->grad = n.grad;
      else
        n.param->grad += n.grad;
    }
    if (n.backward) {
      const Matrix g = n.grad;
      n.backward(*this, g);
    }
  }
}

namespace {

void check_same_graph(Var a, Var b) {
  if (a.graph() != b.graph() || a.graph() == nullptr)
    throw StateError("operands belong to different graphs");
}

void check_same_shape(Var a, Var b, const char *op) {
  if (a.rows() != b.rows() || a.cols() != b.cols())
    throw ShapeError(std::string(op) + ": shape mismatch " +
                     std::to_string(a.rows()) + "x" + std::to_string(a.cols()) +
                     " vs " + std::to_string(b.rows()) + "x" +
                     std::to_string(b.cols()));
}

}  // namespace

Var matmul(Var a, Var b) {
  check_same_graph(a, b);
  if (a.cols() != b.rows())
    throw ShapeError("matmul: " + std::to_string(a.rows()) + "x" +
                     std::to_string(a.cols()) + " * " +
                     std::to_string(b.rows()) + "x" + std::to_string(b.cols()));
  Graph &g = *a.graph();
  Matrix out = a.value() * b.value();
  return g.push(std::move(out), {a, b}, [a, b](Graph &g, const Matrix &go) {
    if (g.needs_grad(a)) g.accumulate(a, go * g.value(b).transpose());
    if (g.needs_grad(b)) g.accumulate(b, g.value(a).transpose() * go);
  });
}

Var transpose(Var a) {
  Graph &g = *a.graph();
  return g.push(a.value().transpose(), {a},
                [a](Graph &g, const Matrix &go) {
                  g.accumulate(a, go.transpose());
                });
}

Var add(Var a, Var b) {
  check_same_graph(a, b);
  check_same_shape(a, b, "add");
  Graph &g = *a.graph();
  return g.push(a.value() + b.value(), {a, b},
                [a, b](Graph &g, const Matrix &go) {
                  g.accumulate(a, go);
                  g.accumulate(b, go);
                });
}

Var sub(Var a, Var b) {
  check_same_graph(a, b);
  check_same_shape(a, b, "sub");
  Graph &g = *a.graph();
  return g.push(a.value() - b.value(), {a, b},
                [a, b](Graph &g, const Matrix &go) {
                  g.accumulate(a, go);
                  g.accumulate(b, -go);
                });
}

Var mul(Var a, Var b) {
  check_same_graph(a, b);
  check_same_shape(a, b, "mul");
  Graph &g = *a.graph();
  return g.push(a.value().cwiseProduct(b.value()), {a, b},
                [a, b](Graph &g, const Matrix &go) {
                  if (g.needs_grad(a))
                    g.accumulate(a, go.cwiseProduct(g.value(b)));
                  if (g.needs_grad(b))
                    g.accumulate(b, go.cwiseProduct(g.value(a)));
                });
}

Var scale(Var a, double s) {
  Graph &g = *a.graph();
  return g.push(a.value() * s, {a}, [a, s](Graph &g, const Matrix &go) {
    g.accumulate(a, go * s);
  });
}

Var add_row(Var a, Var row) {
  check_same_graph(a, row);
  if (row.rows() != 1 || row.cols() != a.cols())
    throw ShapeError("add_row: bias must be 1x" + std::to_string(a.cols()));
  Graph &g = *a.graph();
  Matrix out = a.value();
  out.rowwise() += row.value().row(0);
  return g.push(std::move(out), {a, row},
                [a, row](Graph &g, const Matrix &go) {
                  g.accumulate(a, go);
                  if (g.needs_grad(row)) g.accumulate(row, go.colwise().sum());
                });
}

Var linear(Var x, Var weight, Var bias) {
  return add_row(matmul(x, weight), bias);
}

Var sigmoid(Var a) {
  Graph &g = *a.graph();
  Matrix y = (1.0 / (1.0 + (-a.value().array()).exp())).matrix();
  Matrix yc = y;
  return g.push(std::move(y), {a}, [a, yc](Graph &g, const Matrix &go) {
    g.accumulate(a, (go.array() * yc.array() * (1.0 - yc.array())).matrix());
  });
}

Var tanh(Var a) {
  Graph &g = *a.graph();
  Matrix y = a.value().array().tanh().matrix();
  Matrix yc = y;
  return g.push(std::move(y), {a}, [a, yc](Graph &g, const Matrix &go) {
    g.accumulate(a, (go.array() * (1.0 - yc.array().square())).matrix());
  });
}

Var relu(Var a) {
  Graph &g = *a.graph();
  Matrix y = a.value().cwiseMax(0.0);
  return g.push(std::move(y), {a}, [a](Graph &g, const Matrix &go) {
    g.accumulate(a, (g.value(a).array() > 0.0).select(go, 0.0).matrix());
  });
}

Var mask_mul(Var a, const Matrix &mask) {
  if (mask.rows() != a.rows() || mask.cols() != a.cols())
    throw ShapeError("mask_mul: mask shape mismatch");
  Graph &g = *a.graph();
  return g.push(a.value().cwiseProduct(mask), {a},
                [a, mask](Graph &g, const Matrix &go) {
                  g.accumulate(a, go.cwiseProduct(mask));
                });
}

Var concat_cols(const std::vector<Var> &parts) {
  if (parts.empty()) throw ShapeError("concat_cols: no inputs");
  Graph &g = *parts.front().graph();
  const Index rows = parts.front().rows();
  Index cols = 0;
  for (const Var &p : parts) {
    check_same_graph(parts.front(), p);
    if (p.rows() != rows) throw ShapeError("concat_cols: row mismatch");
    cols += p.cols();
  }
  Matrix out(rows, cols);
  Index c = 0;
  for (const Var &p : parts) {
    out.middleCols(c, p.cols()) = p.value();
    c += p.cols();
  }
  return g.push(std::move(out), parts,
                [parts](Graph &g, const Matrix &go) {
                  Index c = 0;
                  for (const Var &p : parts) {
                    g.accumulate(p, go.middleCols(c, p.cols()));
                    c += p.cols();
                  }
                });
}

Var concat_rows(const std::vector<Var> &parts) {
  if (parts.empty()) throw ShapeError("concat_rows: no inputs");
  Graph &g = *parts.front().graph();
  const Index cols = parts.front().cols();
  Index rows = 0;
  for (const Var &p : parts) {
    check_same_graph(parts.front(), p);
    if (p.cols() != cols) throw ShapeError("concat_rows: column mismatch");
    rows += p.rows();
  }
  Matrix out(rows, cols);
  Index r = 0;
  for (const Var &p : parts) {
    out.middleRows(r, p.rows()) = p.value();
    r += p.rows();
  }
  return g.push(std::move(out), parts,
                [parts](Graph &g, const Matrix &go) {
                  Index r = 0;
                  for (const Var &p : parts) {
                    g.accumulate(p, go.middleRows(r, p.rows()));
                    r += p.rows();
                  }
                });
}

Var slice_rows(Var a, Index start, Index count) {
  if (start < 0 || count < 0 || start + count > a.rows())
    throw ShapeError("slice_rows out of range");
  Graph &g = *a.graph();
  return g.push(a.value().middleRows(start, count), {a},
                [a, start, count](Graph &g, const Matrix &go) {
                  Matrix full = Matrix::Zero(g.value(a).rows(), g.value(a).cols());
                  full.middleRows(start, count) = go;
                  g.accumulate(a, full);
                });
}

Var slice_cols(Var a, Index start, Index count) {
  if (start < 0 || count < 0 || start + count > a.cols())
    throw ShapeError("slice_cols out of range");
  Graph &g = *a.graph();
  return g.push(a.value().middleCols(start, count), {a},
                [a, start, count](Graph &g, const Matrix &go) {
                  Matrix full = Matrix::Zero(g.value(a).rows(), g.value(a).cols());
                  full.middleCols(start, count) = go;
                  g.accumulate(a, full);
                });
}

Var repeat_rows(Var a, Index factor) {
  if (factor < 1) throw ValidationError("repeat factor must be >= 1");
  Graph &g = *a.graph();
  const Matrix &v = a.value();
  Matrix out(v.rows() * factor, v.cols());
  for (Index t = 0; t < v.rows(); ++t)
    for (Index k = 0; k < factor; ++k) out.row(t * factor + k) = v.row(t);
  return g.push(std::move(out), {a}, [a, factor](Graph &g, const Matrix &go) {
    Matrix ga = Matrix::Zero(go.rows() / factor, go.cols());
    for (Index t = 0; t < ga.rows(); ++t)
      for (Index k = 0; k < factor; ++k) ga.row(t) += go.row(t * factor + k);
    g.accumulate(a, ga);
  });
}

Var broadcast_rows(Var row, Index rows) {
  if (row.rows() != 1) throw ShapeError("broadcast_rows expects a 1xC row");
  Graph &g = *row.graph();
  Matrix out = row.value().replicate(rows, 1);
  return g.push(std::move(out), {row}, [row](Graph &g, const Matrix &go) {
    g.accumulate(row, go.colwise().sum());
  });
}

Var mean_rows(Var a) {
  if (a.rows() == 0) throw ShapeError("mean_rows of an empty sequence");
  Graph &g = *a.graph();
  const double n = static_cast<double>(a.rows());
  return g.push(a.value().colwise().mean(), {a},
                [a, n](Graph &g, const Matrix &go) {
                  g.accumulate(a, go.replicate(g.value(a).rows(), 1) / n);
                });
}

Var frame_stack(Var a, Index kernel) {
  if (kernel < 1 || kernel % 2 == 0)
    throw ValidationError("frame_stack kernel must be odd and positive");
  Graph &g = *a.graph();
  const Matrix &v = a.value();
  const Index T = v.rows(), C = v.cols(), half = kernel / 2;
  Matrix out = Matrix::Zero(T, kernel * C);
  for (Index t = 0; t < T; ++t)
    for (Index k = 0; k < kernel; ++k) {
      const Index s = t + k - half;
      if (s >= 0 && s < T) out.block(t, k * C, 1, C) = v.row(s);
    }
  return g.push(std::move(out), {a},
                [a, kernel, half, T, C](Graph &g, const Matrix &go) {
                  Matrix ga = Matrix::Zero(T, C);
                  for (Index t = 0; t < T; ++t)
                    for (Index k = 0; k < kernel; ++k) {
                      const Index s = t + k - half;
                      if (s >= 0 && s < T) ga.row(s) += go.block(t, k * C, 1, C);
                    }
                  g.accumulate(a, ga);
                });
}

Matrix softmax(const Matrix &logits) {
  Matrix out(logits.rows(), logits.cols());
  for (Index t = 0; t < logits.rows(); ++t) {
    const double m = logits.row(t).maxCoeff();
    out.row(t) = (logits.row(t).array() - m).exp().matrix();
    out.row(t) /= out.row(t).sum();
  }
  return out;
}

Var softmax_rows(Var a, bool causal) {
  Graph &g = *a.graph();
  Matrix y;
  if (!causal) {
    y = softmax(a.value());
  } else {
    const Matrix &v = a.value();
    y = Matrix::Zero(v.rows(), v.cols());
    for (Index i = 0; i < v.rows(); ++i) {
      const Index n = std::min<Index>(i + 1, v.cols());
      const double m = v.row(i).head(n).maxCoeff();
      y.row(i).head(n) = (v.row(i).head(n).array() - m).exp().matrix();
      y.row(i).head(n) /= y.row(i).head(n).sum();
    }
  }
  Matrix yc = y;
  return g.push(std::move(y), {a}, [a, yc](Graph &g, const Matrix &go) {
    // dx = y * (go - sum(go * y))
    const Eigen::VectorXd dots = go.cwiseProduct(yc).rowwise().sum();
    Matrix ga = yc.cwiseProduct(go - dots.replicate(1, go.cols()));
    g.accumulate(a, ga);
  });
}

Var layer_norm(Var a, Var gain, Var bias, double eps) {
  check_same_graph(a, gain);
  check_same_graph(a, bias);
  if (gain.rows() != 1 || gain.cols() != a.cols() || bias.rows() != 1 ||
      bias.cols() != a.cols())
    throw ShapeError("layer_norm: gain/bias must be 1xC");
  Graph &g = *a.graph();
  const Matrix &x = a.value();
  const Index T = x.rows(), C = x.cols();
  Matrix xhat(T, C);
  Eigen::VectorXd inv_std(T);
  for (Index t = 0; t < T; ++t) {
    const double mean = x.row(t).mean();
    const double var = (x.row(t).array() - mean).square().mean();
    inv_std(t) = 1.0 / std::sqrt(var + eps);
    xhat.row(t) = (x.row(t).array() - mean) * inv_std(t);
  }
  Matrix y = xhat;
  y.array().rowwise() *= gain.value().row(0).array();
  y.rowwise() += bias.value().row(0);
  return g.push(std::move(y), {a, gain, bias},
                [a, gain, bias, xhat, inv_std](Graph &g, const Matrix &go) {
                  const Index C = xhat.cols();
                  if (g.needs_grad(gain))
                    g.accumulate(gain, go.cwiseProduct(xhat).colwise().sum());
                  if (g.needs_grad(bias)) g.accumulate(bias, go.colwise().sum());
                  if (!g.needs_grad(a)) return;
                  Matrix dxhat = go;
                  dxhat.array().rowwise() *= g.value(gain).row(0).array();
                  Matrix dx(xhat.rows(), C);
                  for (Index t = 0; t < xhat.rows(); ++t) {
                    const double s1 = dxhat.row(t).sum();
                    const double s2 = dxhat.row(t).dot(xhat.row(t));
                    dx.row(t) = (inv_std(t) / C) *
                                (C * dxhat.row(t).array() - s1 -
                                 xhat.row(t).array() * s2)
                                    .matrix();
                  }
                  g.accumulate(a, dx);
                });
}

Var lstm(Var xproj, Var w_hh, bool reverse) {
  check_same_graph(xproj, w_hh);
  const Index H = w_hh.rows();
  if (w_hh.cols() != 4 * H || xproj.cols() != 4 * H)
    throw ShapeError("lstm: expected xproj Tx4H and w_hh Hx4H with H=" +
                     std::to_string(H));
  Graph &g = *xproj.graph();
  const Index T = xproj.rows();
  const Matrix &xp = xproj.value();
  const Matrix &W = w_hh.value();

  // Caches indexed by input-frame position.
  Matrix gates(T, 4 * H);  // post-activation i, f, g, o
  Matrix cells(T, H);
  Matrix hidden(T, H);
  RowVector h = RowVector::Zero(H), c = RowVector::Zero(H);
  for (Index step = 0; step < T; ++step) {
    const Index t = reverse ? T - 1 - step : step;
    RowVector a = xp.row(t) + h * W;
    auto sig = [](auto v) { return (1.0 / (1.0 + (-v).exp())).matrix(); };
    RowVector i = sig(a.segment(0, H).array());
    RowVector f = sig(a.segment(H, H).array());
    RowVector gg = a.segment(2 * H, H).array().tanh().matrix();
    RowVector o = sig(a.segment(3 * H, H).array());
    c = f.cwiseProduct(c) + i.cwiseProduct(gg);
    h = o.cwiseProduct(c.array().tanh().matrix());
    gates.row(t) << i, f, gg, o;
    cells.row(t) = c;
    hidden.row(t) = h;
  }
  Matrix out = hidden;
  return g.push(
      std::move(out), {xproj, w_hh},
      [xproj, w_hh, gates, cells, hidden, reverse, T, H](Graph &g,
                                                         const Matrix &go) {
        const Matrix &W = g.value(w_hh);
        Matrix dxp = Matrix::Zero(T, 4 * H);
        Matrix dW = Matrix::Zero(H, 4 * H);
        RowVector dh_next = RowVector::Zero(H), dc_next = RowVector::Zero(H);
        for (Index step = T; step-- > 0;) {
          const Index t = reverse ? T - 1 - step : step;
          const bool has_prev = step > 0;
          const Index tp = reverse ? t + 1 : t - 1;
          const auto i = gates.row(t).segment(0, H).array();
          const auto f = gates.row(t).segment(H, H).array();
          const auto gg = gates.row(t).segment(2 * H, H).array();
          const auto o = gates.row(t).segment(3 * H, H).array();
          const Eigen::ArrayXXd tc = cells.row(t).array().tanh();
          const RowVector dh = go.row(t) + dh_next;
          const Eigen::ArrayXXd dc =
              dh.array() * o * (1.0 - tc.square()) + dc_next.array();
          const Eigen::ArrayXXd c_prev =
              has_prev ? Eigen::ArrayXXd(cells.row(tp).array())
                       : Eigen::ArrayXXd::Zero(1, H);
          RowVector da(4 * H);
          da.segment(0, H) = (dc * gg * i * (1.0 - i)).matrix();
          da.segment(H, H) = (dc * c_prev * f * (1.0 - f)).matrix();
          da.segment(2 * H, H) = (dc * i * (1.0 - gg.square())).matrix();
          da.segment(3 * H, H) = (dh.array() * tc * o * (1.0 - o)).matrix();
          dxp.row(t) = da;
          if (has_prev) dW.noalias() += hidden.row(tp).transpose() * da;
          dh_next = da * W.transpose();
          dc_next = (dc * f).matrix();
        }
        g.accumulate(xproj, dxp);
        if (g.needs_grad(w_hh)) g.accumulate(w_hh, dW);
      });
}

Var sum_all(Var a) {
  Graph &g = *a.graph();
  Matrix out(1, 1);
  out(0, 0) = a.value().sum();
  return g.push(std::move(out), {a}, [a](Graph &g, const Matrix &go) {
    g.accumulate(a, Matrix::Constant(g.value(a).rows(), g.value(a).cols(),
                                     go(0, 0)));
  });
}

Var mean_all(Var a) {
  const auto n = static_cast<double>(a.value().size());
  if (n == 0) throw ShapeError("mean_all of an empty matrix");
  return scale(sum_all(a), 1.0 / n);
}

Var l1_loss(Var a, const Matrix &target) {
  if (target.rows() != a.rows() || target.cols() != a.cols())
    throw ShapeError("l1_loss: target shape mismatch");
  if (a.value().size() == 0) throw ShapeError("l1_loss of an empty matrix");
  Graph &g = *a.graph();
  const Matrix diff = a.value() - target;
  const auto n = static_cast<double>(diff.size());
  Matrix out(1, 1);
  out(0, 0) = diff.cwiseAbs().sum() / n;
  return g.push(std::move(out), {a}, [a, diff, n](Graph &g, const Matrix &go) {
    Matrix sign = diff.unaryExpr([](double d) {
      return d > 0.0 ? 1.0 : (d < 0.0 ? -1.0 : 0.0);
    });
    g.accumulate(a, sign * (go(0, 0) / n));
  });
}

Var softmax_cross_entropy(Var logits, const Matrix &target) {
  if (target.rows() != logits.rows() || target.cols() != logits.cols())
    throw ShapeError("softmax_cross_entropy: target shape mismatch");
  if (logits.rows() == 0) throw ShapeError("cross entropy of zero frames");
  Graph &g = *logits.graph();
  const Matrix &z = logits.value();
  const auto T = static_cast<double>(z.rows());
  Matrix probs(z.rows(), z.cols());
  double total = 0.0;
  for (Index t = 0; t < z.rows(); ++t) {
    const double m = z.row(t).maxCoeff();
    const double lse = m + std::log((z.row(t).array() - m).exp().sum());
    const RowVector logp = (z.row(t).array() - lse).matrix();
    probs.row(t) = logp.array().exp().matrix();
    total -= target.row(t).dot(logp);
  }
  Matrix out(1, 1);
  out(0, 0) = total / T;
  return g.push(std::move(out), {logits},
                [logits, probs, target, T](Graph &g, const Matrix &go) {
                  const Eigen::VectorXd mass = target.rowwise().sum();
                  Matrix ga = probs.array().colwise() * mass.array();
                  ga -= target;
                  g.accumulate(logits, ga * (go(0, 0) / T));
                });
}

Var bce_with_logits(Var logits, const Matrix &target) {
  if (target.rows() != logits.rows() || target.cols() != logits.cols())
    throw ShapeError("bce_with_logits: target shape mismatch");
  if (logits.value().size() == 0) throw ShapeError("bce of an empty matrix");
  Graph &g = *logits.graph();
  const Matrix &z = logits.value();
  const auto n = static_cast<double>(z.size());
  const Eigen::ArrayXXd za = z.array();
  const double total =
      (za.max(0.0) - za * target.array() + (1.0 + (-za.abs()).exp()).log())
          .sum();
  Matrix out(1, 1);
  out(0, 0) = total / n;
  return g.push(std::move(out), {logits},
                [logits, target, n](Graph &g, const Matrix &go) {
                  const Eigen::ArrayXXd s =
                      1.0 / (1.0 + (-g.value(logits).array()).exp());
                  g.accumulate(logits,
                               ((s - target.array()) * (go(0, 0) / n)).matrix());
                });
}

}  // namespace fac::nn
