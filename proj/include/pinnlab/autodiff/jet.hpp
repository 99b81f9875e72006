#pragma once

#include <array>
#include <cmath>
#include <stdexcept>

#include "pinnlab/autodiff/tape.hpp"
#include "pinnlab/errors.hpp"

namespace pinnlab::ad {

inline constexpr int kMaxDim = 3;
inline constexpr int kMaxOrder = 3;

/// Value of a scalar field plus its input derivatives up to `order` (<= 3) at
/// one point. Derivative tensors are stored in full and kept exactly symmetric:
/// only sorted index tuples are computed, the rest are mirrored.
template <class S>
class JetT {
 public:
  JetT() = default;
  JetT(int dim, int order) : dim_(dim), order_(order) {
    if (dim < 1 || dim > kMaxDim) throw ShapeError("jet dimension must be in [1, 3]");
    if (order < 0 || order > kMaxOrder) throw InvalidArgument("jet order must be in {0,1,2,3}");
    value_ = S(0.0);
    for (auto& g : grad_) g = S(0.0);
    for (auto& row : hess_)
      for (auto& h : row) h = S(0.0);
    for (auto& m : third_)
      for (auto& row : m)
        for (auto& t : row) t = S(0.0);
  }

  static JetT constant(S v, int dim, int order) {
    JetT j(dim, order);
    j.value_ = v;
    return j;
  }

  /// The coordinate function x_axis evaluated at v.
  static JetT variable(S v, int axis, int dim, int order) {
    JetT j(dim, order);
    j.value_ = v;
    if (order >= 1) j.grad_[axis] = S(1.0);
    return j;
  }

  int dim() const noexcept { return dim_; }
  int order() const noexcept { return order_; }

  S& value() noexcept { return value_; }
  const S& value() const noexcept { return value_; }
  S& d(int i) noexcept { return grad_[i]; }
  const S& d(int i) const noexcept { return grad_[i]; }
  S& d(int i, int j) noexcept { return hess_[i][j]; }
  const S& d(int i, int j) const noexcept { return hess_[i][j]; }
  S& d(int i, int j, int k) noexcept { return third_[i][j][k]; }
  const S& d(int i, int j, int k) const noexcept { return third_[i][j][k]; }

  /// Assign a second derivative to every index permutation.
  void set2(int i, int j, const S& v) {
    hess_[i][j] = v;
    hess_[j][i] = v;
  }
  /// Assign a third derivative to every index permutation.
  void set3(int i, int j, int k, const S& v) {
    third_[i][j][k] = v;
    third_[i][k][j] = v;
    third_[j][i][k] = v;
    third_[j][k][i] = v;
    third_[k][i][j] = v;
    third_[k][j][i] = v;
  }

 private:
  int dim_{1};
  int order_{0};
  S value_{};
  std::array<S, kMaxDim> grad_{};
  std::array<std::array<S, kMaxDim>, kMaxDim> hess_{};
  std::array<std::array<std::array<S, kMaxDim>, kMaxDim>, kMaxDim> third_{};
};

using Jet = JetT<double>;

namespace detail {

template <class S>
void check_compatible(const JetT<S>& a, const JetT<S>& b) {
  if (a.dim() != b.dim()) throw ShapeError("jet dimension mismatch");
}

}  // namespace detail

/// acc += w * a, slot by slot.
template <class S>
void axpy(JetT<S>& acc, const S& w, const JetT<S>& a) {
  const int n = acc.dim();
  const int order = acc.order() < a.order() ? acc.order() : a.order();
  acc.value() = acc.value() + w * a.value();
  if (order >= 1)
    for (int i = 0; i < n; ++i) acc.d(i) = acc.d(i) + w * a.d(i);
  if (order >= 2)
    for (int i = 0; i < n; ++i)
      for (int j = i; j < n; ++j) acc.set2(i, j, acc.d(i, j) + w * a.d(i, j));
  if (order >= 3)
    for (int i = 0; i < n; ++i)
      for (int j = i; j < n; ++j)
        for (int k = j; k < n; ++k) acc.set3(i, j, k, acc.d(i, j, k) + w * a.d(i, j, k));
}

/// Chain rule for an outer scalar function with derivatives f0..f3 at z.value().
template <class S>
JetT<S> compose(const JetT<S>& z, const S& f0, const S& f1, const S& f2, const S& f3) {
  const int n = z.dim();
  const int order = z.order();
  JetT<S> r(n, order);
  r.value() = f0;
  if (order >= 1)
    for (int i = 0; i < n; ++i) r.d(i) = f1 * z.d(i);
  if (order >= 2)
    for (int i = 0; i < n; ++i)
      for (int j = i; j < n; ++j) r.set2(i, j, f2 * z.d(i) * z.d(j) + f1 * z.d(i, j));
  if (order >= 3)
    for (int i = 0; i < n; ++i)
      for (int j = i; j < n; ++j)
        for (int k = j; k < n; ++k) {
          const S mixed = z.d(i, j) * z.d(k) + z.d(i, k) * z.d(j) + z.d(j, k) * z.d(i);
          r.set3(i, j, k, f3 * z.d(i) * z.d(j) * z.d(k) + f2 * mixed + f1 * z.d(i, j, k));
        }
  return r;
}

template <class S>
JetT<S> operator+(const JetT<S>& a, const JetT<S>& b) {
  detail::check_compatible(a, b);
  JetT<S> r = a.order() <= b.order() ? a : b;
  const JetT<S>& o = a.order() <= b.order() ? b : a;
  const S one(1.0);
  axpy(r, one, o);
  return r;
}

template <class S>
JetT<S> operator*(const S& c, const JetT<S>& a) {
  JetT<S> r(a.dim(), a.order());
  axpy(r, c, a);
  return r;
}

template <class S>
JetT<S> operator*(const JetT<S>& a, const S& c) {
  return c * a;
}

template <class S>
JetT<S> operator-(const JetT<S>& a) {
  return S(-1.0) * a;
}

template <class S>
JetT<S> operator-(const JetT<S>& a, const JetT<S>& b) {
  return a + S(-1.0) * b;
}

template <class S>
JetT<S> operator+(const JetT<S>& a, const S& c) {
  JetT<S> r = a;
  r.value() = r.value() + c;
  return r;
}

template <class S>
JetT<S> operator+(const S& c, const JetT<S>& a) {
  return a + c;
}

template <class S>
JetT<S> operator-(const JetT<S>& a, const S& c) {
  return a + S(-1.0) * c;
}

template <class S>
JetT<S> operator-(const S& c, const JetT<S>& a) {
  return (-a) + c;
}

/// Leibniz rule.
template <class S>
JetT<S> operator*(const JetT<S>& f, const JetT<S>& g) {
  detail::check_compatible(f, g);
  const int n = f.dim();
  const int order = f.order() < g.order() ? f.order() : g.order();
  JetT<S> r(n, order);
  r.value() = f.value() * g.value();
  if (order >= 1)
    for (int i = 0; i < n; ++i) r.d(i) = f.d(i) * g.value() + f.value() * g.d(i);
  if (order >= 2)
    for (int i = 0; i < n; ++i)
      for (int j = i; j < n; ++j)
        r.set2(i, j,
               f.d(i, j) * g.value() + f.d(i) * g.d(j) + f.d(j) * g.d(i) + f.value() * g.d(i, j));
  if (order >= 3)
    for (int i = 0; i < n; ++i)
      for (int j = i; j < n; ++j)
        for (int k = j; k < n; ++k) {
          const S v = f.d(i, j, k) * g.value() + f.d(i, j) * g.d(k) + f.d(i, k) * g.d(j) +
                      f.d(j, k) * g.d(i) + f.d(i) * g.d(j, k) + f.d(j) * g.d(i, k) +
                      f.d(k) * g.d(i, j) + f.value() * g.d(i, j, k);
          r.set3(i, j, k, v);
        }
  return r;
}

template <class S>
JetT<S> tanh(const JetT<S>& z) {
  using std::tanh;
  const S t = tanh(z.value());
  const S s1 = S(1.0) - t * t;
  const S s2 = S(-2.0) * t * s1;
  const S s3 = s1 * (S(6.0) * t * t - S(2.0));
  return compose(z, t, s1, s2, s3);
}

template <class S>
JetT<S> sin(const JetT<S>& z) {
  using std::cos;
  using std::sin;
  const S s = sin(z.value());
  const S c = cos(z.value());
  return compose(z, s, c, -s, -c);
}

template <class S>
JetT<S> cos(const JetT<S>& z) {
  using std::cos;
  using std::sin;
  const S s = sin(z.value());
  const S c = cos(z.value());
  return compose(z, c, -s, -c, s);
}

template <class S>
JetT<S> exp(const JetT<S>& z) {
  using std::exp;
  const S e = exp(z.value());
  return compose(z, e, e, e, e);
}

template <class S>
JetT<S> cosh(const JetT<S>& z) {
  using std::cosh;
  using std::sinh;
  const S c = cosh(z.value());
  const S s = sinh(z.value());
  return compose(z, c, s, c, s);
}

template <class S>
JetT<S> sqrt(const JetT<S>& z) {
  using std::sqrt;
  const S r = sqrt(z.value());
  const S d1 = S(0.5) / r;
  const S d2 = S(-0.5) * d1 / z.value();
  const S d3 = S(-1.5) * d2 / z.value();
  return compose(z, r, d1, d2, d3);
}

template <class S>
JetT<S> reciprocal(const JetT<S>& z) {
  const S r = S(1.0) / z.value();
  const S r2 = r * r;
  return compose(z, r, -r2, S(2.0) * r2 * r, S(-6.0) * r2 * r2);
}

template <class S>
JetT<S> operator/(const JetT<S>& a, const JetT<S>& b) {
  return a * reciprocal(b);
}

}  // namespace pinnlab::ad
