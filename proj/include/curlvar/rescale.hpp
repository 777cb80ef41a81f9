#pragma once

#include <array>

#include "curlvar/field.hpp"

namespace curlvar {

// T_{s,y} u (x) = s^{1/2} u(s x + y), with x and y measured from the box
// center. Samples of u are interpolated trilinearly on their own staggered
// lattice; points that land outside the box read as zero. The result has the
// same grid and location as u. Throws DomainError for s <= 0.
VectorField rescale(const VectorField& u, double s, const std::array<double, 3>& y);

// u transferred to another grid over the same box by trilinear interpolation
// of each component on its own lattice (points outside read as zero). The
// result keeps the location; edge results have the boundary condition applied.
VectorField resample(const VectorField& u, const GridSpec& target);

// Node potential transferred the same way, zero on the target boundary.
ScalarField resample(const ScalarField& xi, const GridSpec& target);

}  // namespace curlvar
