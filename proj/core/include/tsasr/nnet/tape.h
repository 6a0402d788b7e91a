// tsasr/core/include/tsasr/nnet/tape.h

// Copyright 2026  The tsasr Authors

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

#ifndef TSASR_NNET_TAPE_H_
#define TSASR_NNET_TAPE_H_

#include <functional>
#include <memory>
#include <string>
#include <unordered_map>
#include <vector>

#include <Eigen/Core>

namespace tsasr::nnet {

using Matrix = Eigen::MatrixXd;

// A named trainable array. Frames are columns throughout the library, so a
// sequence of T d-dimensional vectors is a d x T matrix.
struct Parameter {
  std::string name;
  Matrix value;
  bool requires_grad = true;
};

// Owns parameters in insertion order. Copies are deep.
class ParameterSet {
 public:
  ParameterSet() = default;
  ParameterSet(const ParameterSet &other);
  ParameterSet &operator=(const ParameterSet &other);
  ParameterSet(ParameterSet &&) noexcept = default;
  ParameterSet &operator=(ParameterSet &&) noexcept = default;

  // Throws ValidationError on a duplicate name.
  Parameter &Add(const std::string &name, Matrix value);

  Parameter &Get(const std::string &name);
  const Parameter &Get(const std::string &name) const;
  bool Contains(const std::string &name) const;

  std::size_t size() const { return params_.size(); }
  Parameter &operator[](std::size_t i) { return *params_[i]; }
  const Parameter &operator[](std::size_t i) const { return *params_[i]; }

  std::size_t NumValues() const;
  void SetRequiresGrad(bool value);

 private:
  std::vector<std::unique_ptr<Parameter>> params_;
  std::unordered_map<std::string, std::size_t> index_;
};

class Tape;

// Handle to a node on a Tape. Cheap to copy; valid while the tape lives.
class Var {
 public:
  Var() = default;

  const Matrix &value() const;
  Eigen::Index rows() const { return value().rows(); }
  Eigen::Index cols() const { return value().cols(); }
  double scalar() const;  // value of a 1 x 1 node

  Tape *tape() const { return tape_; }
  int id() const { return id_; }
  bool valid() const { return tape_ != nullptr; }

 private:
  friend class Tape;
  Var(Tape *tape, int id) : tape_(tape), id_(id) {}

  Tape *tape_ = nullptr;
  int id_ = -1;
};

// Records a computation for reverse-mode differentiation. Every recorded
// value is checked for NaN/Inf and the offending op is named in the
// NumericError. Single-threaded; use one tape per thread.
class Tape {
 public:
  using BackwardFn = std::function<void(Tape &, int node)>;

  Tape() = default;
  // With record_gradients false every node is a constant (inference).
  explicit Tape(bool record_gradients) : record_gradients_(record_gradients) {}
  Tape(const Tape &) = delete;
  Tape &operator=(const Tape &) = delete;

  Var Constant(Matrix value);
  // Leaf for a parameter; repeated calls return the same node.
  Var Param(const Parameter &param);

  // For op implementations. `inputs` determine whether the node needs a
  // gradient; `backward` is only invoked when it does.
  Var Record(const char *op, Matrix value, std::initializer_list<Var> inputs,
             BackwardFn backward);

  void Backward(Var loss);

  bool NeedsGrad(Var v) const { return nodes_[v.id()].needs_grad; }
  bool NeedsGrad(int node) const { return nodes_[node].needs_grad; }
  const Matrix &Value(int node) const { return nodes_[node].value; }
  // Gradient accumulator, zero-initialized on first access.
  Matrix &GradRef(int node);
  const Matrix &GradOf(int node) const { return nodes_[node].grad; }

  // Gradient of a parameter after Backward, or nullptr when the parameter
  // did not take part or does not require a gradient.
  const Matrix *Grad(const Parameter &param) const;
  const Matrix *Grad(Var v) const;

  std::size_t size() const { return nodes_.size(); }

 private:
  struct Node {
    const char *op = "";
    Matrix value;
    Matrix grad;
    bool needs_grad = false;
    bool has_grad = false;
    BackwardFn backward;
  };

  bool record_gradients_ = true;
  std::vector<Node> nodes_;
  std::unordered_map<const Parameter *, int> param_nodes_;
};

// Per-parameter gradients aligned with a ParameterSet; zero where a
// parameter received no gradient.
std::vector<Matrix> CollectGradients(const Tape &tape,
                                     const ParameterSet &params);

}  // namespace tsasr::nnet

#endif  // TSASR_NNET_TAPE_H_
