#pragma once

#include "ddlyap/system.hpp"

#include <cstdint>
#include <optional>
#include <vector>

namespace ddlyap::detail {

/// Integer tick representation of rational delays: h_j = ticks[j] / scale.
struct TickDelays {
  std::int64_t scale;
  std::vector<std::int64_t> ticks;
};

std::optional<TickDelays> tick_delays(const DelaySystem& sys);

/// Lookup tolerance for lattice instants: 1e-9 H, tightened below the tick
/// spacing for rational systems.
double lattice_tolerance(const DelaySystem& sys);

}  // namespace ddlyap::detail
