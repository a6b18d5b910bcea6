// core/include/fac/autograd.hpp

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

#ifndef FAC_AUTOGRAD_HPP_
#define FAC_AUTOGRAD_HPP_

// Tape-based reverse-mode differentiation over dense f64 matrices. A Graph
// records one forward pass; backward() walks the tape in reverse and adds
// parameter gradients into Parameter::grad. Rows are time frames.

#include <functional>
#include <initializer_list>
#include <vector>

#include "fac/parameters.hpp"

namespace fac::nn {

class Graph;

/// Handle to a node of a Graph. Cheap to copy; valid while the graph lives.
class Var {
 public:
  Var() = default;
  const Matrix &value() const;
  Index rows() const { return value().rows(); }
  Index cols() const { return value().cols(); }
  Graph *graph() const { return graph_; }
  int id() const { return id_; }

 private:
  friend class Graph;
  Var(Graph *g, int id) : graph_(g), id_(id) {}
  Graph *graph_ = nullptr;
  int id_ = -1;
};

class Graph {
 public:
  /// With record_gradients == false no backward closures are kept.
  explicit Graph(bool record_gradients = true) : record_(record_gradients) {}
  Graph(const Graph &) = delete;
  Graph &operator=(const Graph &) = delete;

  Var constant(Matrix value);
  /// Leaf bound to a parameter; its gradient flows into p.grad.
  Var param(Parameter &p);
  /// Leaf whose gradient is kept on the node (readable via grad()).
  Var input(Matrix value);

  /// Seeds d(loss)/d(loss) = 1 for a 1x1 node and propagates.
  void backward(Var loss);

  const Matrix &value(Var v) const { return nodes_[idx(v)].value; }
  /// Gradient accumulated on a node after backward(); zero if untouched.
  Matrix grad(Var v) const;
  bool records() const { return record_; }
  size_t size() const { return nodes_.size(); }

  // Used by op implementations.
  using BackwardFn = std::function<void(Graph &, const Matrix &grad_out)>;
  Var push(Matrix value, std::initializer_list<Var> parents, BackwardFn fn);
  Var push(Matrix value, const std::vector<Var> &parents, BackwardFn fn);
  void accumulate(Var v, const Matrix &g);
  bool needs_grad(Var v) const { return nodes_[idx(v)].needs_grad; }

 private:
  struct Node {
    Matrix value;
    Matrix grad;
    BackwardFn backward;
    Parameter *param = nullptr;
    bool needs_grad = false;
  };
  size_t idx(Var v) const { return static_cast<size_t>(v.id_); }

  std::vector<Node> nodes_;
  bool record_;
};

// --- elementwise and linear algebra ---------------------------------------
Var matmul(Var a, Var b);
Var transpose(Var a);
Var add(Var a, Var b);
Var sub(Var a, Var b);
Var mul(Var a, Var b);  // elementwise
Var scale(Var a, double s);
/// a (T x C) + row (1 x C) broadcast over rows.
Var add_row(Var a, Var row);
/// x W + b with W (in x out), b (1 x out).
Var linear(Var x, Var weight, Var bias);
Var sigmoid(Var a);
Var tanh(Var a);
Var relu(Var a);
/// Elementwise product with a fixed mask (dropout with pre-scaled mask).
Var mask_mul(Var a, const Matrix &mask);

// --- shape ----------------------------------------------------------------
Var concat_cols(const std::vector<Var> &parts);
Var concat_rows(const std::vector<Var> &parts);
Var slice_rows(Var a, Index start, Index count);
Var slice_cols(Var a, Index start, Index count);
/// Each row repeated `factor` times consecutively.
Var repeat_rows(Var a, Index factor);
/// 1 x C row tiled to `rows` rows.
Var broadcast_rows(Var row, Index rows);
/// 1 x C mean over rows.
Var mean_rows(Var a);
/// Time-context stacking for 1-D convolution with zero "same" padding:
/// row t of the result is [x(t-k/2) ... x(t+k/2)], width kernel*C. kernel odd.
Var frame_stack(Var a, Index kernel);

// --- normalisation and attention ------------------------------------------
/// Row-wise softmax. With causal == true entry (i, j) for j > i is masked.
Var softmax_rows(Var a, bool causal = false);
/// Row-wise layer normalisation with gain/bias rows (1 x C).
Var layer_norm(Var a, Var gain, Var bias, double eps = 1e-5);

// --- recurrent -------------------------------------------------------------
/// Single-direction LSTM over pre-projected inputs. xproj is T x 4H holding
/// x W_ih + b for gates in order (input, forget, cell, output); w_hh is
/// H x 4H. Returns T x H hidden states, zero initial state. With reverse ==
/// true the sequence is processed from the last frame, and row t of the
/// output is still the state aligned with input frame t.
Var lstm(Var xproj, Var w_hh, bool reverse);

// --- reductions / losses (1 x 1 results) -----------------------------------
Var sum_all(Var a);
Var mean_all(Var a);
/// mean |a - target| over all entries.
Var l1_loss(Var a, const Matrix &target);
/// Mean over rows of H(target_row, softmax(logits_row)), natural log.
Var softmax_cross_entropy(Var logits, const Matrix &target);
/// Mean binary cross entropy of sigmoid(logits) against 0/1 targets.
Var bce_with_logits(Var logits, const Matrix &target);

/// Numerically stable row-wise softmax of a plain matrix.
Matrix softmax(const Matrix &logits);

}  // namespace fac::nn

#endif  // FAC_AUTOGRAD_HPP_
