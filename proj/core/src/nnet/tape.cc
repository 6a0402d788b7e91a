// tsasr/core/src/nnet/tape.cc

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

#include "tsasr/nnet/tape.h"

#include <string>

#include "tsasr/error.h"

namespace tsasr::nnet {

ParameterSet::ParameterSet(const ParameterSet &other) { *this = other; }

ParameterSet &ParameterSet::operator=(const ParameterSet &other) {
  if (this == &other) return *this;
  params_.clear();
  params_.reserve(other.params_.size());
  for (const auto &p : other.params_) {
    params_.push_back(std::make_unique<Parameter>(*p));
  }
  index_ = other.index_;
  return *this;
}

Parameter &ParameterSet::Add(const std::string &name, Matrix value) {
  if (index_.count(name)) {
    throw ValidationError("duplicate parameter name '" + name + "'");
  }
  index_.emplace(name, params_.size());
  params_.push_back(
      std::make_unique<Parameter>(Parameter{name, std::move(value), true}));
  return *params_.back();
}

Parameter &ParameterSet::Get(const std::string &name) {
  auto it = index_.find(name);
  if (it == index_.end()) {
    throw ValidationError("no parameter named '" + name + "'");
  }
  return *params_[it->second];
}

const Parameter &ParameterSet::Get(const std::string &name) const {
  return const_cast<ParameterSet *>(this)->Get(name);
}

bool ParameterSet::Contains(const std::string &name) const {
  return index_.count(name) > 0;
}

std::size_t ParameterSet::NumValues() const {
  std::size_t n = 0;
  for (const auto &p : params_) n += static_cast<std::size_t>(p->value.size());
  return n;
}

void ParameterSet::SetRequiresGrad(bool value) {
  for (auto &p : params_) p->requires_grad = value;
}

const Matrix &Var::value() const { return tape_->Value(id_); }

double Var::scalar() const {
  const Matrix &v = value();
  if (v.rows() != 1 || v.cols() != 1) {
    throw ValidationError("scalar() on a " + std::to_string(v.rows()) + "x" +
                          std::to_string(v.cols()) + " value");
  }
  return v(0, 0);
}

Var Tape::Constant(Matrix value) {
  return Record("constant", std::move(value), {}, nullptr);
}

Var Tape::Param(const Parameter &param) {
  auto it = param_nodes_.find(&param);
  if (it != param_nodes_.end()) return Var(this, it->second);
  Var v = Record(param.name.c_str(), param.value, {}, nullptr);
  nodes_[v.id()].needs_grad = record_gradients_ && param.requires_grad;
  param_nodes_.emplace(&param, v.id());
  return v;
}

Var Tape::Record(const char *op, Matrix value, std::initializer_list<Var> inputs,
                 BackwardFn backward) {
  if (!value.allFinite()) {
    throw NumericError(std::string("non-finite value produced by op '") + op +
                       "'");
  }
  Node node;
  node.op = op;
  node.value = std::move(value);
  for (const Var &in : inputs) {
    if (in.tape() != this) {
      throw ValidationError(std::string("op '") + op +
                            "' mixes values from different tapes");
    }
    node.needs_grad = node.needs_grad || nodes_[in.id()].needs_grad;
  }
  if (node.needs_grad) node.backward = std::move(backward);
  nodes_.push_back(std::move(node));
  return Var(this, static_cast<int>(nodes_.size()) - 1);
}

Matrix &Tape::GradRef(int node) {
  Node &n = nodes_[node];
  if (!n.has_grad) {
    n.grad = Matrix::Zero(n.value.rows(), n.value.cols());
    n.has_grad = true;
  }
  return n.grad;
}

void Tape::Backward(Var loss) {
  if (loss.tape() != this) throw ValidationError("backward: foreign value");
  const Matrix &v = nodes_[loss.id()].value;
  if (v.rows() != 1 || v.cols() != 1) {
    throw ValidationError("backward: loss must be scalar, got " +
                          std::to_string(v.rows()) + "x" +
                          std::to_string(v.cols()));
  }
  if (!nodes_[loss.id()].needs_grad) return;
  GradRef(loss.id())(0, 0) += 1.0;
  for (int i = loss.id(); i >= 0; --i) {
    Node &n = nodes_[i];
    if (!n.has_grad || !n.backward) continue;
    n.backward(*this, i);
    if (!n.grad.allFinite()) {
      throw NumericError(std::string("non-finite gradient at op '") + n.op +
                         "'");
    }
  }
}

const Matrix *Tape::Grad(const Parameter &param) const {
  auto it = param_nodes_.find(&param);
  if (it == param_nodes_.end()) return nullptr;
  const Node &n = nodes_[it->second];
  if (!n.needs_grad || !n.has_grad) return nullptr;
  return &n.grad;
}

const Matrix *Tape::Grad(Var v) const {
  const Node &n = nodes_[v.id()];
  return n.has_grad ? &n.grad : nullptr;
}

std::vector<Matrix> CollectGradients(const Tape &tape,
                                     const ParameterSet &params) {
  std::vector<Matrix> grads;
  grads.reserve(params.size());
  for (std::size_t i = 0; i < params.size(); ++i) {
    const Parameter &p = params[i];
    const Matrix *g = tape.Grad(p);
    grads.push_back(g ? *g : Matrix::Zero(p.value.rows(), p.value.cols()));
  }
  return grads;
}

}  // namespace tsasr::nnet
