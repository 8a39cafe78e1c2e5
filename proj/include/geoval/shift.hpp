#pragma once

#include <string>

#include "geoval/simulate.hpp"

namespace geoval::shift {

using sim::ShiftSpec;

/// Overlap configuration of the source and target 3-sigma circles.
enum class ShiftConfig { inside, partial, outside };

/// inside if 2*delta <= 1 - tau; outside if 2*delta >= 1 + tau; partial
/// otherwise. Boundary ties resolve to inside first.
ShiftConfig classify(const ShiftSpec& shift);

/// Closed-form divergence surrogate: delta^2 + tau^2 - ln(tau^4) - 1.
double kl(const ShiftSpec& shift);

/// Jaccard distance between the 3-sigma circles (radii 3 and 3*tau,
/// centers 6*delta apart). Inside and outside configurations use the
/// analytic areas; partial uses the circle-lens formula.
double jaccard(const ShiftSpec& shift);

/// Novelty factor in [0, 1]: fraction of the target circle outside the
/// source minus the fraction inside, affinely mapped to [0, 1].
double novelty(const ShiftSpec& shift);

std::string to_string(ShiftConfig config);

}  // namespace geoval::shift
