#pragma once

#include "pinnlab/refsol.hpp"

namespace pinnlab::refsol::detail {

/// Rebuild axes and points of a cached tensor grid from its case and size.
void rebuild_axes(ReferenceGrid& g, std::size_t count);

}  // namespace pinnlab::refsol::detail
