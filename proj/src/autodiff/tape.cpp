#include "pinnlab/autodiff/tape.hpp"

#include <stdexcept>

namespace pinnlab::ad {

void Tape::backward(std::span<double> adjoint) const {
  if (adjoint.size() != nodes_.size()) {
    throw std::invalid_argument("Tape::backward: adjoint size does not match tape");
  }
  for (std::size_t i = nodes_.size(); i-- > 0;) {
    const TapeNode& n = nodes_[i];
    const double a = adjoint[i];
    if (a == 0.0) continue;
    for (std::uint8_t k = 0; k < n.arity; ++k) adjoint[n.parents[k]] += a * n.partials[k];
  }
}

std::vector<double> Tape::adjoints(std::span<const std::pair<Var, double>> seeds) const {
  std::vector<double> adj(nodes_.size(), 0.0);
  for (const auto& [v, s] : seeds) {
    if (v.is_constant()) continue;
    adj[v.index()] += s;
  }
  backward(adj);
  return adj;
}

std::vector<double> Tape::replay(std::span<const double> input_values) const {
  if (input_values.size() != inputs_.size()) {
    throw std::invalid_argument("Tape::replay: wrong number of inputs");
  }
  std::vector<double> v(nodes_.size(), 0.0);
  std::size_t next_input = 0;
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    const TapeNode& n = nodes_[i];
    const double x = n.arity > 0 ? v[n.parents[0]] : 0.0;
    const double y = n.arity > 1 ? v[n.parents[1]] : 0.0;
    switch (n.op) {
      case OpKind::Input: v[i] = input_values[next_input++]; break;
      case OpKind::Add: v[i] = x + y; break;
      case OpKind::Sub: v[i] = x - y; break;
      case OpKind::Mul: v[i] = x * y; break;
      case OpKind::Div: v[i] = x / y; break;
      case OpKind::AddConst: v[i] = x + n.constant; break;
      case OpKind::MulConst: v[i] = x * n.constant; break;
      case OpKind::DivConst: v[i] = x / n.constant; break;
      case OpKind::RSubConst: v[i] = n.constant - x; break;
      case OpKind::RDivConst: v[i] = n.constant / x; break;
      case OpKind::Neg: v[i] = -x; break;
      case OpKind::Tanh: v[i] = std::tanh(x); break;
      case OpKind::Sin: v[i] = std::sin(x); break;
      case OpKind::Cos: v[i] = std::cos(x); break;
      case OpKind::Exp: v[i] = std::exp(x); break;
      case OpKind::Sqrt: v[i] = std::sqrt(x); break;
      case OpKind::Cosh: v[i] = std::cosh(x); break;
      case OpKind::Sinh: v[i] = std::sinh(x); break;
    }
  }
  return v;
}

}  // namespace pinnlab::ad
