#pragma once

#include <cassert>
#include <cmath>
#include <cstdint>
#include <span>
#include <utility>
#include <vector>

namespace pinnlab::ad {

enum class OpKind : std::uint8_t {
  Input,
  Add,
  Sub,
  Mul,
  Div,
  AddConst,
  MulConst,
  DivConst,
  RSubConst,
  RDivConst,
  Neg,
  Tanh,
  Sin,
  Cos,
  Exp,
  Sqrt,
  Cosh,
  Sinh,
};

/// One recorded scalar operation. Parents always precede the node itself.
struct TapeNode {
  OpKind op{OpKind::Input};
  std::uint8_t arity{0};
  std::uint32_t parents[2]{0, 0};
  double partials[2]{0.0, 0.0};
  double constant{0.0};
  double value{0.0};
};

class Var;

/// Append-only record of scalar operations for reverse-mode differentiation.
/// Not thread-safe; use one tape per thread.
class Tape {
 public:
  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  Var input(double value);

  std::size_t size() const noexcept { return nodes_.size(); }
  const TapeNode& node(std::size_t i) const { return nodes_[i]; }
  void clear() noexcept {
    nodes_.clear();
    inputs_.clear();
  }
  void reserve(std::size_t n) { nodes_.reserve(n); }

  /// Reverse sweep. `adjoint` must have size() entries and holds the seeds on
  /// entry and the accumulated adjoints on exit.
  void backward(std::span<double> adjoint) const;

  /// Adjoints of every node for seeds placed on the given outputs.
  std::vector<double> adjoints(std::span<const std::pair<Var, double>> seeds) const;

  /// Recompute every node value from new input values (in input order).
  std::vector<double> replay(std::span<const double> input_values) const;

  std::span<const std::uint32_t> inputs() const noexcept { return inputs_; }

  std::uint32_t push(OpKind op, double value, std::uint8_t arity, std::uint32_t p0, double d0,
                     std::uint32_t p1 = 0, double d1 = 0.0, double constant = 0.0) {
    TapeNode n;
    n.op = op;
    n.arity = arity;
    n.parents[0] = p0;
    n.parents[1] = p1;
    n.partials[0] = d0;
    n.partials[1] = d1;
    n.constant = constant;
    n.value = value;
    nodes_.push_back(n);
    return static_cast<std::uint32_t>(nodes_.size() - 1);
  }

 private:
  std::vector<TapeNode> nodes_;
  std::vector<std::uint32_t> inputs_;
};

/// Scalar that records itself on a tape. A Var without a tape is a constant and
/// records nothing.
class Var {
 public:
  Var() = default;
  Var(double constant) : value_(constant) {}  // NOLINT(google-explicit-constructor)
  Var(Tape* tape, std::uint32_t index, double value) : tape_(tape), index_(index), value_(value) {}

  double value() const noexcept { return value_; }
  bool is_constant() const noexcept { return tape_ == nullptr; }
  Tape* tape() const noexcept { return tape_; }
  std::uint32_t index() const noexcept { return index_; }

  Var& operator+=(const Var& o) { return *this = *this + o; }
  Var& operator-=(const Var& o) { return *this = *this - o; }
  Var& operator*=(const Var& o) { return *this = *this * o; }
  Var& operator/=(const Var& o) { return *this = *this / o; }

  friend Var operator+(const Var& a, const Var& b);
  friend Var operator-(const Var& a, const Var& b);
  friend Var operator*(const Var& a, const Var& b);
  friend Var operator/(const Var& a, const Var& b);
  friend Var operator-(const Var& a);

 private:
  Tape* tape_{nullptr};
  std::uint32_t index_{0};
  double value_{0.0};
};

inline Var Tape::input(double value) {
  const auto idx = push(OpKind::Input, value, 0, 0, 0.0);
  inputs_.push_back(idx);
  return Var(this, idx, value);
}

namespace detail {

inline Var unary(const Var& a, OpKind op, double value, double partial, double constant = 0.0) {
  if (a.is_constant()) return Var(value);
  const auto idx = a.tape()->push(op, value, 1, a.index(), partial, 0, 0.0, constant);
  return Var(a.tape(), idx, value);
}

inline Var binary(const Var& a, const Var& b, OpKind op, double value, double da, double db) {
  assert(a.tape() == b.tape());
  const auto idx = a.tape()->push(op, value, 2, a.index(), da, b.index(), db);
  return Var(a.tape(), idx, value);
}

}  // namespace detail

inline Var operator+(const Var& a, const Var& b) {
  const double v = a.value() + b.value();
  if (a.is_constant() && b.is_constant()) return Var(v);
  if (b.is_constant()) return detail::unary(a, OpKind::AddConst, v, 1.0, b.value());
  if (a.is_constant()) return detail::unary(b, OpKind::AddConst, v, 1.0, a.value());
  return detail::binary(a, b, OpKind::Add, v, 1.0, 1.0);
}

inline Var operator-(const Var& a, const Var& b) {
  const double v = a.value() - b.value();
  if (a.is_constant() && b.is_constant()) return Var(v);
  if (b.is_constant()) return detail::unary(a, OpKind::AddConst, v, 1.0, -b.value());
  if (a.is_constant()) return detail::unary(b, OpKind::RSubConst, v, -1.0, a.value());
  return detail::binary(a, b, OpKind::Sub, v, 1.0, -1.0);
}

inline Var operator*(const Var& a, const Var& b) {
  const double v = a.value() * b.value();
  if (a.is_constant() && b.is_constant()) return Var(v);
  if (b.is_constant()) return detail::unary(a, OpKind::MulConst, v, b.value(), b.value());
  if (a.is_constant()) return detail::unary(b, OpKind::MulConst, v, a.value(), a.value());
  return detail::binary(a, b, OpKind::Mul, v, b.value(), a.value());
}

inline Var operator/(const Var& a, const Var& b) {
  const double v = a.value() / b.value();
  if (a.is_constant() && b.is_constant()) return Var(v);
  if (b.is_constant()) return detail::unary(a, OpKind::DivConst, v, 1.0 / b.value(), b.value());
  if (a.is_constant()) {
    return detail::unary(b, OpKind::RDivConst, v, -v / b.value(), a.value());
  }
  return detail::binary(a, b, OpKind::Div, v, 1.0 / b.value(), -v / b.value());
}

inline Var operator-(const Var& a) { return detail::unary(a, OpKind::Neg, -a.value(), -1.0); }

inline Var tanh(const Var& a) {
  const double t = std::tanh(a.value());
  return detail::unary(a, OpKind::Tanh, t, 1.0 - t * t);
}
inline Var sin(const Var& a) {
  return detail::unary(a, OpKind::Sin, std::sin(a.value()), std::cos(a.value()));
}
inline Var cos(const Var& a) {
  return detail::unary(a, OpKind::Cos, std::cos(a.value()), -std::sin(a.value()));
}
inline Var exp(const Var& a) {
  const double e = std::exp(a.value());
  return detail::unary(a, OpKind::Exp, e, e);
}
inline Var sqrt(const Var& a) {
  const double s = std::sqrt(a.value());
  return detail::unary(a, OpKind::Sqrt, s, 0.5 / s);
}
inline Var cosh(const Var& a) {
  return detail::unary(a, OpKind::Cosh, std::cosh(a.value()), std::sinh(a.value()));
}
inline Var sinh(const Var& a) {
  return detail::unary(a, OpKind::Sinh, std::sinh(a.value()), std::cosh(a.value()));
}

inline double value_of(double x) { return x; }
inline double value_of(const Var& x) { return x.value(); }

}  // namespace pinnlab::ad
