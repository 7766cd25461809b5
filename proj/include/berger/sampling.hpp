#pragma once

#include <cstdint>
#include <random>

#include "berger/curvature_model.hpp"

namespace berger {

using Rng = std::mt19937_64;

/// Independent standard normal components; 2n of them.
FrameVector random_gaussian(Rng& rng, int n);

/// Uniform on the unit sphere of dimension 2n - 1.
FrameVector random_unit(Rng& rng, int n);

double random_uniform(Rng& rng, double lo, double hi);

} // namespace berger
