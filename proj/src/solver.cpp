#include "rnego/solver.hpp"

#include <cmath>
#include <stdexcept>

namespace rnego {

void TargetSpec::validate() const {
    if (!(r_coll > 0.0) || !std::isfinite(r_coll)) {
        throw std::invalid_argument("target: collision radius must be positive");
    }
}

void NumericsConfig::validate(std::size_t ndim) const {
    if (!(cfl_number > 0.0) || cfl_number > 1.0) {
        throw std::invalid_argument("numerics: cfl number must lie in (0, 1]");
    }
    if (time_order != 1 && time_order != 2) {
        throw std::invalid_argument("numerics: time order must be 1 or 2");
    }
    if (!(tau <= 0.0) || !std::isfinite(tau)) {
        throw std::invalid_argument("numerics: horizon tau must be nonpositive and finite");
    }
    if (alpha_override && alpha_override->size() != ndim) {
        throw std::invalid_argument("numerics: dissipation override dimension mismatch");
    }
}

ValueFunction initial_level_set(const Grid& grid, const TargetSpec& target) {
    target.validate();
    if (grid.ndim() < 2) {
        throw std::invalid_argument("initial_level_set: need at least two position dims");
    }
    std::vector<double> values(grid.size());
    std::vector<std::size_t> idx(grid.ndim(), 0);
    const auto& ax = grid.axis(0);
    const auto& ay = grid.axis(1);
    for (std::size_t flat = 0; flat < grid.size(); ++flat) {
        const double x = ax[idx[0]];
        const double y = ay[idx[1]];
        values[flat] = std::sqrt(x * x + y * y) - target.r_coll;
        for (std::size_t d = grid.ndim(); d-- > 0;) {
            if (++idx[d] < grid.count(d)) {
                break;
            }
            idx[d] = 0;
        }
    }
    return ValueFunction(grid, 0.0, std::move(values));
}

bool membership(const ValueFunction& vf, std::span<const double> state, OutOfBounds policy) {
    return interpolate(vf, state, policy) < 0.0;
}

}  // namespace rnego
