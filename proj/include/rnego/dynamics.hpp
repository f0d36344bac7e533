#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <vector>

#include "rnego/grid.hpp"

namespace rnego {

/// Wraps an angle into [-pi, pi).
double wrap_angle(double a);

/// Relative state between the human-driven car and the robot car, expressed
/// in the robot's body frame: planar offset, heading offset, and both speeds.
struct RelativeState {
    double x = 0.0;      // m
    double y = 0.0;      // m
    double psi = 0.0;    // rad
    double v_r = 0.0;    // m/s, robot speed
    double v_h = 0.0;    // m/s, human speed

    std::array<double, 5> to_array() const { return {x, y, psi, v_r, v_h}; }
    static RelativeState from_array(const std::array<double, 5>& a) {
        return {a[0], a[1], a[2], a[3], a[4]};
    }
};

struct RobotControl {
    double a_r = 0.0;      // m/s^2
    double delta_f = 0.0;  // rad, front steering angle
};

struct HumanControl {
    double a_h = 0.0;      // m/s^2
    double omega_h = 0.0;  // rad/s
};

struct VehicleParams {
    double l_f = 1.5;  // m, front axle length
    double l_r = 1.5;  // m, rear axle length

    bool operator==(const VehicleParams&) const = default;
};

struct Interval {
    double min = 0.0;
    double max = 0.0;

    double mid() const { return 0.5 * (min + max); }
    double abs_max() const { return std::max(std::abs(min), std::abs(max)); }
    bool contains(const Interval& other) const {
        return min <= other.min && other.max <= max;
    }
    bool operator==(const Interval&) const = default;
};

/// Robot control set U and human disturbance set D for the pursuit game.
struct ControlBounds {
    Interval robot_accel{-6.0, 3.0};
    Interval robot_steer{-0.5, 0.5};
    Interval human_accel{-6.0, 4.0};   // D_a
    Interval human_omega{-1.0, 1.0};   // D_omega

    void validate() const;
    bool operator==(const ControlBounds&) const = default;
};

/// Rear-axle slip angle of the bicycle model:
/// beta = atan((l_r / (l_r + l_f)) * tan(delta_f)). Odd in delta_f.
/// Throws for |delta_f| >= pi/2.
double slip_angle(double delta_f, const VehicleParams& params);

/// Time derivative of the relative state for given controls.
std::array<double, 5> relative_dynamics(const RelativeState& state, const RobotControl& u_r,
                                        const HumanControl& u_h, const VehicleParams& params);

struct ExtremalResult {
    double hamiltonian = 0.0;
    RobotControl u_star;
    HumanControl d_star;
};

/// Exact min over human controls of the max over robot controls of
/// costate . f(state, u, d). The accel and turn-rate channels are linear,
/// so they bang-bang on the costate sign (ties take the interval midpoint);
/// the steering channel maximizes C_c cos(beta) + C_s sin(beta) over the slip
/// interval in closed form. Control and disturbance channels are additively
/// separable, so the min-max order does not matter.
ExtremalResult extremal_hamiltonian(const RelativeState& state,
                                    const std::array<double, 5>& costate,
                                    const ControlBounds& bounds, const VehicleParams& params);

/// Solver-facing wrapper: same Hamiltonian with per-heading-node trig tables
/// so grid sweeps never call trig functions. Immutable after prepare().
class RelativeDynamicsModel {
  public:
    static constexpr std::size_t kDim = 5;
    static constexpr std::size_t kHeadingDim = 2;

    RelativeDynamicsModel(VehicleParams params, ControlBounds bounds);

    /// Caches cos/sin of every heading node. Must be called once before
    /// hamiltonian(); the grid's heading axis must match later queries.
    void prepare(const Grid& grid);

    /// costate . f at a grid node, extremized over both players.
    /// x = node coordinates, idx = node indices (heading table lookup).
    double hamiltonian(const double* x, const std::size_t* idx, const double* p) const;

    /// Per-dimension bounds on |f_i| over the grid extent and the control
    /// sets, used as Lax-Friedrichs dissipation coefficients.
    std::array<double, 5> alpha(const Grid& grid) const;

    const VehicleParams& params() const { return params_; }
    const ControlBounds& bounds() const { return bounds_; }

  private:
    VehicleParams params_;
    ControlBounds bounds_;
    double beta_lo_ = 0.0;
    double beta_hi_ = 0.0;
    double cos_blo_ = 1.0, sin_blo_ = 0.0;
    double cos_bhi_ = 1.0, sin_bhi_ = 0.0;
    double tan_blo_ = 0.0, tan_bhi_ = 0.0;
    std::vector<double> cos_psi_;
    std::vector<double> sin_psi_;
};

}  // namespace rnego
