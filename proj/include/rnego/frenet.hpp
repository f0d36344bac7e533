#pragma once

#include <array>
#include <cstddef>
#include <vector>

#include "rnego/dynamics.hpp"

namespace rnego {

struct PathPolyline {
    std::vector<std::array<double, 2>> points;  // m

    /// At least two points, consecutive spacing above 1e-6 m.
    void validate() const;
    bool operator==(const PathPolyline&) const = default;
};

/// Path-attached frame: per-sample arc length, unit tangent (central
/// differences), and signed curvature (tangent-angle rate over arc length,
/// endpoints copied from their neighbors). Positive curvature turns left.
struct FrenetFrame {
    std::vector<std::array<double, 2>> points;
    std::vector<double> s;
    std::vector<std::array<double, 2>> tangent;
    std::vector<double> curvature;

    double length() const { return s.back(); }
    /// Linear interpolation of curvature at station (clamped to the table).
    double curvature_at(double station) const;
};

struct TrajectorySample {
    double t = 0.0;    // s
    double x = 0.0;    // m
    double y = 0.0;    // m
    double psi = 0.0;  // rad
    double v = 0.0;    // m/s

    bool operator==(const TrajectorySample&) const = default;
};

struct PredictedTrajectory {
    std::vector<TrajectorySample> samples;

    /// Strictly increasing timestamps, nonnegative speeds, >= 2 samples
    /// where differentiation is required.
    void validate() const;
    bool operator==(const PredictedTrajectory&) const = default;
};

struct PredictionErrorModel {
    double sigma_a = 0.5;       // m/s^2
    double sigma_omega = 0.05;  // rad/s
    double k = 2.0;             // margin multiplier

    void validate() const;
    bool operator==(const PredictionErrorModel&) const = default;
};

struct FrenetPose {
    double s = 0.0;     // station, m
    double d = 0.0;     // lateral offset, + left of path
    double dpsi = 0.0;  // heading error, rad
};

struct HumanBounds {
    Interval accel;  // D_a
    Interval omega;  // D_omega
};

FrenetFrame build_frame(const PathPolyline& path);

/// Nearest-point projection onto the polyline, segment-wise closed form.
/// Distance ties resolve to the smaller station. Poses farther than
/// `corridor` from the path are rejected (the prediction no longer applies).
FrenetPose project_pose(const FrenetFrame& frame, double x, double y, double psi,
                        double corridor = 10.0);

/// Inverse of the on-path part of project_pose: station + lateral offset to
/// a Cartesian point, using the containing segment's direction.
std::array<double, 2> frenet_to_cartesian(const FrenetFrame& frame, double station,
                                          double lateral);

/// Heading of the segment containing `station`.
double tangent_angle_at(const FrenetFrame& frame, double station);

/// First-layer control bounds from the predicted trajectory: acceleration
/// range by finite differences of speed widened by k sigma_a, and a turn-rate
/// band of k sigma_omega widened by the curvature-induced heading rate
/// max |kappa| v along the prediction.
HumanBounds estimate_bounds(const PredictedTrajectory& traj, const FrenetFrame& frame,
                            const PredictionErrorModel& err, double corridor = 10.0);

}  // namespace rnego
