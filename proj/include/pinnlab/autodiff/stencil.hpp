#pragma once

#include <array>
#include <cstdint>
#include <initializer_list>
#include <span>
#include <vector>

namespace pinnlab::ad {

/// A partial derivative d^|idx| / dx_idx[0] ... dx_idx[order-1] with sorted
/// indices. Order 0 is the value itself.
struct Component {
  int order{0};
  std::array<int, 3> idx{0, 0, 0};
  friend bool operator==(const Component&, const Component&) = default;
};

/// One Faa di Bruno term of d_alpha tanh(z): tanh^(k)(z) times the product of
/// the listed pre-activation components.
struct ChainTerm {
  int derivative{1};
  int num_factors{1};
  std::array<int, 3> factors{0, 0, 0};
};

/// Downward-closed set of derivative components propagated by the batched
/// kernel. Component 0 is always the value.
class Stencil {
 public:
  Stencil() : Stencil(1, {}) {}
  /// Closure of the requested multi-indices (each a list of input axes).
  Stencil(int dim, std::initializer_list<std::initializer_list<int>> wanted);
  Stencil(int dim, const std::vector<std::vector<int>>& wanted);

  /// Every component up to `order`.
  static Stencil full(int dim, int order);

  int dim() const noexcept { return dim_; }
  int size() const noexcept { return static_cast<int>(components_.size()); }
  int max_order() const noexcept { return max_order_; }
  const Component& component(int c) const { return components_.at(static_cast<std::size_t>(c)); }
  std::span<const Component> components() const noexcept { return components_; }

  /// Index of the component with the given (unsorted) axes, or -1.
  int find(std::span<const int> axes) const;
  int find(std::initializer_list<int> axes) const {
    return find(std::span<const int>(axes.begin(), axes.size()));
  }

  std::span<const ChainTerm> terms(int c) const {
    return chain_.at(static_cast<std::size_t>(c));
  }

 private:
  void build(const std::vector<std::vector<int>>& wanted);

  int dim_{1};
  int max_order_{0};
  std::vector<Component> components_;
  std::vector<std::vector<ChainTerm>> chain_;
};

}  // namespace pinnlab::ad
