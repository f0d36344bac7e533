#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace rnego {

/// One axis of a rectangular grid. Periodic axes cover [lower, upper) with
/// spacing (upper-lower)/count; non-periodic axes include both endpoints with
/// spacing (upper-lower)/(count-1).
struct GridDim {
    double lower = 0.0;
    double upper = 1.0;
    std::size_t count = 3;
    bool periodic = false;

    bool operator==(const GridDim&) const = default;
};

struct GridSpec {
    std::vector<GridDim> dims;

    /// Throws std::invalid_argument naming the offending dimension.
    void validate() const;

    bool operator==(const GridSpec&) const = default;
};

/// Dense rectangular grid with row-major node order (last dimension fastest).
/// Immutable after construction; safe for concurrent reads.
class Grid {
  public:
    explicit Grid(GridSpec spec);

    std::size_t ndim() const { return spec_.dims.size(); }
    std::size_t size() const { return size_; }

    double lower(std::size_t dim) const { return spec_.dims[dim].lower; }
    double upper(std::size_t dim) const { return spec_.dims[dim].upper; }
    std::size_t count(std::size_t dim) const { return spec_.dims[dim].count; }
    bool periodic(std::size_t dim) const { return spec_.dims[dim].periodic; }
    double spacing(std::size_t dim) const { return spacing_[dim]; }
    std::size_t stride(std::size_t dim) const { return stride_[dim]; }
    const GridSpec& spec() const { return spec_; }

    /// Coordinate of node i along dim: lower + i * spacing.
    double coord(std::size_t dim, std::size_t i) const { return coords_[dim][i]; }
    const std::vector<double>& axis(std::size_t dim) const { return coords_[dim]; }

    std::size_t flatten(std::span<const std::size_t> idx) const;
    void unflatten(std::size_t flat, std::span<std::size_t> idx) const;
    void node_coords(std::span<const std::size_t> idx, std::span<double> out) const;

    /// Wraps x into [lower, lower + span) for a periodic dim; identity otherwise.
    double wrap(std::size_t dim, double x) const;

    bool operator==(const Grid& other) const { return same_spec(other); }
    bool same_spec(const Grid& other) const;

  private:
    GridSpec spec_;
    std::vector<double> spacing_;
    std::vector<std::size_t> stride_;
    std::vector<std::vector<double>> coords_;
    std::size_t size_ = 0;
};

/// Gridded scalar field V(s, tau). values are row-major over grid nodes.
struct ValueFunction {
    Grid grid;
    double tau = 0.0;  // nonpositive time label, seconds
    std::vector<double> values;

    ValueFunction(Grid g, double tau_label, std::vector<double> vals);

    double at(std::size_t flat) const { return values[flat]; }
    double at(std::span<const std::size_t> idx) const { return values[grid.flatten(idx)]; }
};

enum class OutOfBounds { error, clamp };

/// Multilinear interpolation. Exact at nodes; result bounded by the min/max of
/// the 2^n enclosing node values. Periodic dims wrap; non-periodic queries
/// outside the bounds follow `policy` (error throws, clamp snaps to the face
/// and sets *clamped when given).
double interpolate(const ValueFunction& vf, std::span<const double> state,
                   OutOfBounds policy = OutOfBounds::error, bool* clamped = nullptr);

struct OneSidedSlopes {
    double left = 0.0;
    double right = 0.0;
};

/// First-order one-sided differences along `dim` at a node. Non-periodic
/// boundaries repeat the interior slope (linear extrapolation); periodic
/// dims wrap.
OneSidedSlopes one_sided_derivatives(const ValueFunction& vf,
                                     std::span<const std::size_t> idx, std::size_t dim);

}  // namespace rnego
