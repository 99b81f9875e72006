#include "pinnlab/autodiff/stencil.hpp"

#include <algorithm>
#include <set>

#include "pinnlab/autodiff/jet.hpp"
#include "pinnlab/errors.hpp"

namespace pinnlab::ad {
namespace {

// Set partitions of {0..r-1} for r <= 3, as lists of blocks of positions.
using Block = std::vector<int>;
using Partition = std::vector<Block>;

const std::vector<Partition>& partitions(int r) {
  static const std::vector<Partition> p1 = {{{0}}};
  static const std::vector<Partition> p2 = {{{0, 1}}, {{0}, {1}}};
  static const std::vector<Partition> p3 = {
      {{0, 1, 2}}, {{0, 1}, {2}}, {{0, 2}, {1}}, {{1, 2}, {0}}, {{0}, {1}, {2}}};
  switch (r) {
    case 1: return p1;
    case 2: return p2;
    default: return p3;
  }
}

}  // namespace

Stencil::Stencil(int dim, std::initializer_list<std::initializer_list<int>> wanted) : dim_(dim) {
  std::vector<std::vector<int>> w;
  for (const auto& l : wanted) w.emplace_back(l);
  build(w);
}

Stencil::Stencil(int dim, const std::vector<std::vector<int>>& wanted) : dim_(dim) { build(wanted); }

Stencil Stencil::full(int dim, int order) {
  std::vector<std::vector<int>> w;
  if (order >= 1)
    for (int i = 0; i < dim; ++i) w.push_back({i});
  if (order >= 2)
    for (int i = 0; i < dim; ++i)
      for (int j = i; j < dim; ++j) w.push_back({i, j});
  if (order >= 3)
    for (int i = 0; i < dim; ++i)
      for (int j = i; j < dim; ++j)
        for (int k = j; k < dim; ++k) w.push_back({i, j, k});
  return Stencil(dim, w);
}

void Stencil::build(const std::vector<std::vector<int>>& wanted) {
  if (dim_ < 1 || dim_ > kMaxDim) throw ShapeError("stencil dimension must be in [1, 3]");
  std::set<std::vector<int>> closed;
  closed.insert(std::vector<int>{});
  for (auto axes : wanted) {
    if (axes.size() > static_cast<std::size_t>(kMaxOrder)) {
      throw InvalidArgument("derivative order above 3 requested");
    }
    for (int a : axes) {
      if (a < 0 || a >= dim_) throw ShapeError("derivative axis out of range");
    }
    std::sort(axes.begin(), axes.end());
    // Every sub-multiset is needed by the chain rule.
    const std::size_t r = axes.size();
    for (unsigned mask = 0; mask < (1u << r); ++mask) {
      std::vector<int> sub;
      for (std::size_t b = 0; b < r; ++b)
        if (mask & (1u << b)) sub.push_back(axes[b]);
      closed.insert(sub);
    }
  }
  std::vector<std::vector<int>> ordered(closed.begin(), closed.end());
  std::stable_sort(ordered.begin(), ordered.end(),
                   [](const auto& a, const auto& b) { return a.size() < b.size(); });
  components_.clear();
  max_order_ = 0;
  for (const auto& axes : ordered) {
    Component c;
    c.order = static_cast<int>(axes.size());
    for (std::size_t i = 0; i < axes.size(); ++i) c.idx[i] = axes[i];
    components_.push_back(c);
    max_order_ = std::max(max_order_, c.order);
  }
  chain_.assign(components_.size(), {});
  for (std::size_t c = 1; c < components_.size(); ++c) {
    const Component& comp = components_[c];
    for (const Partition& part : partitions(comp.order)) {
      ChainTerm t;
      t.derivative = static_cast<int>(part.size());
      t.num_factors = static_cast<int>(part.size());
      for (std::size_t b = 0; b < part.size(); ++b) {
        std::vector<int> sub;
        for (int pos : part[b]) sub.push_back(comp.idx[static_cast<std::size_t>(pos)]);
        t.factors[b] = find(sub);
      }
      chain_[c].push_back(t);
    }
  }
}

int Stencil::find(std::span<const int> axes) const {
  std::vector<int> sorted(axes.begin(), axes.end());
  std::sort(sorted.begin(), sorted.end());
  for (std::size_t c = 0; c < components_.size(); ++c) {
    const Component& comp = components_[c];
    if (comp.order != static_cast<int>(sorted.size())) continue;
    if (std::equal(sorted.begin(), sorted.end(), comp.idx.begin())) return static_cast<int>(c);
  }
  return -1;
}

}  // namespace pinnlab::ad
