#include "rnego/grid.hpp"

#include <cmath>
#include <cstdint>
#include <stdexcept>

namespace rnego {

void GridSpec::validate() const {
    if (dims.empty()) {
        throw std::invalid_argument("grid: need at least one dimension");
    }
    for (std::size_t d = 0; d < dims.size(); ++d) {
        const auto& gd = dims[d];
        const std::string tag = "grid dim " + std::to_string(d);
        if (!std::isfinite(gd.lower) || !std::isfinite(gd.upper)) {
            throw std::invalid_argument(tag + ": bounds must be finite");
        }
        if (!(gd.lower < gd.upper)) {
            throw std::invalid_argument(tag + ": lower must be < upper");
        }
        if (gd.count < 3) {
            throw std::invalid_argument(tag + ": need at least 3 nodes");
        }
    }
}

Grid::Grid(GridSpec spec) : spec_(std::move(spec)) {
    spec_.validate();
    const std::size_t n = spec_.dims.size();
    spacing_.resize(n);
    stride_.resize(n);
    coords_.resize(n);
    size_ = 1;
    for (std::size_t d = 0; d < n; ++d) {
        const auto& gd = spec_.dims[d];
        const double range = gd.upper - gd.lower;
        const std::size_t denom = gd.periodic ? gd.count : gd.count - 1;
        spacing_[d] = range / static_cast<double>(denom);
        coords_[d].resize(gd.count);
        for (std::size_t i = 0; i < gd.count; ++i) {
            coords_[d][i] = gd.lower + static_cast<double>(i) * spacing_[d];
        }
        size_ *= gd.count;
    }
    // Row-major: last dimension has stride 1.
    std::size_t s = 1;
    for (std::size_t d = n; d-- > 0;) {
        stride_[d] = s;
        s *= spec_.dims[d].count;
    }
}

std::size_t Grid::flatten(std::span<const std::size_t> idx) const {
    std::size_t flat = 0;
    for (std::size_t d = 0; d < idx.size(); ++d) {
        flat += idx[d] * stride_[d];
    }
    return flat;
}

void Grid::unflatten(std::size_t flat, std::span<std::size_t> idx) const {
    for (std::size_t d = 0; d < idx.size(); ++d) {
        idx[d] = (flat / stride_[d]) % spec_.dims[d].count;
    }
}

void Grid::node_coords(std::span<const std::size_t> idx, std::span<double> out) const {
    for (std::size_t d = 0; d < idx.size(); ++d) {
        out[d] = coords_[d][idx[d]];
    }
}

double Grid::wrap(std::size_t dim, double x) const {
    if (!spec_.dims[dim].periodic) {
        return x;
    }
    const double lo = spec_.dims[dim].lower;
    const double span = spec_.dims[dim].upper - lo;
    double y = std::fmod(x - lo, span);
    if (y < 0.0) {
        y += span;
    }
    // fmod can land exactly on span after the add when x-lo is a tiny negative.
    if (y >= span) {
        y = 0.0;
    }
    return lo + y;
}

bool Grid::same_spec(const Grid& other) const {
    if (spec_.dims.size() != other.spec_.dims.size()) {
        return false;
    }
    for (std::size_t d = 0; d < spec_.dims.size(); ++d) {
        const auto& a = spec_.dims[d];
        const auto& b = other.spec_.dims[d];
        if (a.lower != b.lower || a.upper != b.upper || a.count != b.count ||
            a.periodic != b.periodic) {
            return false;
        }
    }
    return true;
}

ValueFunction::ValueFunction(Grid g, double tau_label, std::vector<double> vals)
    : grid(std::move(g)), tau(tau_label), values(std::move(vals)) {
    if (values.size() != grid.size()) {
        throw std::invalid_argument("value function: data size does not match grid");
    }
}

double interpolate(const ValueFunction& vf, std::span<const double> state,
                   OutOfBounds policy, bool* clamped) {
    const Grid& g = vf.grid;
    const std::size_t n = g.ndim();
    if (state.size() != n) {
        throw std::invalid_argument("interpolate: state dimension mismatch");
    }
    if (clamped != nullptr) {
        *clamped = false;
    }

    // Per-dimension cell index and fractional offset in [0,1].
    std::size_t lo_idx[8];
    std::size_t hi_idx[8];
    double frac[8];
    if (n > 8) {
        throw std::invalid_argument("interpolate: more than 8 dimensions unsupported");
    }

    for (std::size_t d = 0; d < n; ++d) {
        const double h = g.spacing(d);
        const std::size_t cnt = g.count(d);
        double x = state[d];
        if (g.periodic(d)) {
            x = g.wrap(d, x);
            const double t = (x - g.lower(d)) / h;
            std::size_t i = static_cast<std::size_t>(t);
            if (i >= cnt) {
                i = cnt - 1;  // guards rounding at the seam
            }
            lo_idx[d] = i;
            hi_idx[d] = (i + 1) % cnt;
            frac[d] = t - static_cast<double>(i);
        } else {
            if (x < g.lower(d) || x > g.upper(d)) {
                if (policy == OutOfBounds::error) {
                    throw std::out_of_range("interpolate: state outside grid dim " +
                                            std::to_string(d));
                }
                x = std::min(std::max(x, g.lower(d)), g.upper(d));
                if (clamped != nullptr) {
                    *clamped = true;
                }
            }
            double t = (x - g.lower(d)) / h;
            std::size_t i = static_cast<std::size_t>(t);
            if (i >= cnt - 1) {
                i = cnt - 2;  // top node belongs to the last cell
            }
            lo_idx[d] = i;
            hi_idx[d] = i + 1;
            frac[d] = t - static_cast<double>(i);
            if (frac[d] < 0.0) {
                frac[d] = 0.0;
            } else if (frac[d] > 1.0) {
                frac[d] = 1.0;
            }
        }
    }

    // Accumulate over the 2^n cell corners.
    double acc = 0.0;
    const std::size_t corners = std::size_t{1} << n;
    for (std::size_t c = 0; c < corners; ++c) {
        double w = 1.0;
        std::size_t flat = 0;
        for (std::size_t d = 0; d < n; ++d) {
            const bool hi = ((c >> d) & 1u) != 0;
            w *= hi ? frac[d] : (1.0 - frac[d]);
            flat += (hi ? hi_idx[d] : lo_idx[d]) * g.stride(d);
        }
        acc += w * vf.values[flat];
    }
    return acc;
}

OneSidedSlopes one_sided_derivatives(const ValueFunction& vf,
                                     std::span<const std::size_t> idx, std::size_t dim) {
    const Grid& g = vf.grid;
    const std::size_t cnt = g.count(dim);
    const std::size_t i = idx[dim];
    const std::size_t flat = g.flatten(idx);
    const std::size_t str = g.stride(dim);
    const double h = g.spacing(dim);
    const double v0 = vf.values[flat];

    OneSidedSlopes s;
    if (g.periodic(dim)) {
        const std::size_t prev = (i == 0) ? cnt - 1 : i - 1;
        const std::size_t next = (i + 1 == cnt) ? 0 : i + 1;
        const std::size_t flat_prev = flat + (prev - i) * str;
        const std::size_t flat_next = flat + (next - i) * str;
        s.left = (v0 - vf.values[flat_prev]) / h;
        s.right = (vf.values[flat_next] - v0) / h;
        return s;
    }
    if (i > 0) {
        s.left = (v0 - vf.values[flat - str]) / h;
    }
    if (i + 1 < cnt) {
        s.right = (vf.values[flat + str] - v0) / h;
    }
    // Boundary: repeat the interior slope so linear fields stay exact.
    if (i == 0) {
        s.left = s.right;
    }
    if (i + 1 == cnt) {
        s.right = s.left;
    }
    return s;
}

}  // namespace rnego
