#pragma once

#include <string>

#include "rnego/grid.hpp"

namespace rnego {

/// Binary value-function container, little-endian:
///   magic "RNVF0001", u32 ndim, per dim {f64 lower, f64 upper, u32 count,
///   u32 periodic}, f64 tau, then count-product f32 values in row-major order.
/// Values are stored as f32; round-trip error is bounded by float precision.
/// A JSON sidecar (path + ".json") mirrors the header for inspection.
void save_value_function(const ValueFunction& vf, const std::string& path);

ValueFunction load_value_function(const std::string& path);

}  // namespace rnego
