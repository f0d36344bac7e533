#include <array>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "doctest.h"
#include "rnego/frenet.hpp"
#include "rnego/rng.hpp"

using namespace rnego;

namespace {

constexpr double kPi = 3.141592653589793238462643383279502884;

PathPolyline straight_path(double length, std::size_t n) {
    PathPolyline p;
    for (std::size_t i = 0; i < n; ++i) {
        const double x = length * static_cast<double>(i) / static_cast<double>(n - 1);
        p.points.push_back({x, 0.0});
    }
    return p;
}

// Counterclockwise circle starting at angle 0, one sample per degree.
PathPolyline circle_path(double radius, double degrees) {
    PathPolyline p;
    const int n = static_cast<int>(degrees) + 1;
    for (int i = 0; i < n; ++i) {
        const double th = kPi / 180.0 * static_cast<double>(i);
        p.points.push_back({radius * std::cos(th), radius * std::sin(th)});
    }
    return p;
}

}  // namespace

TEST_CASE("path validation") {
    PathPolyline p;
    CHECK_THROWS_AS(p.validate(), std::invalid_argument);
    p.points = {{0.0, 0.0}};
    CHECK_THROWS_AS(p.validate(), std::invalid_argument);
    p.points = {{0.0, 0.0}, {0.0, 0.0}};
    CHECK_THROWS_AS(p.validate(), std::invalid_argument);
    p.points = {{0.0, 0.0}, {1.0, 0.0}};
    CHECK_NOTHROW(p.validate());
}

TEST_CASE("straight path has zero curvature and unit tangents") {
    auto f = build_frame(straight_path(20.0, 11));
    for (std::size_t i = 0; i < f.points.size(); ++i) {
        CHECK(f.curvature[i] == 0.0);
        const double norm = std::hypot(f.tangent[i][0], f.tangent[i][1]);
        CHECK(norm == doctest::Approx(1.0).epsilon(1e-9));
        CHECK(f.tangent[i][0] == doctest::Approx(1.0));
    }
    CHECK(f.length() == doctest::Approx(20.0));
}

TEST_CASE("circle curvature") {
    auto f = build_frame(circle_path(10.0, 90.0));
    for (std::size_t i = 0; i < f.curvature.size(); ++i) {
        CHECK(f.curvature[i] == doctest::Approx(0.1).epsilon(1e-2));
        CHECK(std::abs(f.curvature[i] - 0.1) <= 1e-3);
    }
}

TEST_CASE("two point path produces a constant tangent frame") {
    PathPolyline p;
    p.points = {{0.0, 0.0}, {3.0, 4.0}};
    auto f = build_frame(p);
    CHECK(f.length() == doctest::Approx(5.0));
    CHECK(f.tangent[0][0] == doctest::Approx(0.6));
    CHECK(f.tangent[0][1] == doctest::Approx(0.8));
    CHECK(f.tangent[1][0] == doctest::Approx(0.6));
    CHECK(f.curvature[0] == 0.0);
    CHECK(f.curvature[1] == 0.0);
}

TEST_CASE("projection of on-path aligned poses") {
    auto f = build_frame(straight_path(20.0, 5));
    auto fp = project_pose(f, 7.5, 0.0, 0.0);
    CHECK(fp.s == doctest::Approx(7.5).epsilon(1e-12));
    CHECK(fp.d == doctest::Approx(0.0));
    CHECK(fp.dpsi == doctest::Approx(0.0));
}

TEST_CASE("left offset signs positive") {
    auto f = build_frame(straight_path(20.0, 5));
    auto fp = project_pose(f, 5.0, 2.0, 0.1);
    CHECK(fp.d == doctest::Approx(2.0));
    CHECK(fp.dpsi == doctest::Approx(0.1));
    auto fn = project_pose(f, 5.0, -3.0, 0.0);
    CHECK(fn.d == doctest::Approx(-3.0));
}

TEST_CASE("corridor enforcement") {
    auto f = build_frame(straight_path(20.0, 5));
    CHECK_THROWS_AS(project_pose(f, 5.0, 11.0, 0.0), std::domain_error);
    CHECK_NOTHROW(project_pose(f, 5.0, 9.9, 0.0));
}

TEST_CASE("projection matches dense nearest point search") {
    auto f = build_frame(circle_path(10.0, 120.0));
    Rng rng(51);
    for (int trial = 0; trial < 50; ++trial) {
        const double th = rng.uniform(0.1, 2.0);
        const double r = 10.0 + rng.uniform(-3.0, 3.0);
        const double x = r * std::cos(th);
        const double y = r * std::sin(th);
        auto fp = project_pose(f, x, y, 0.0);

        // Dense scan over every segment.
        double best = std::numeric_limits<double>::infinity();
        double best_station = 0.0;
        const int steps = 4096;
        for (std::size_t i = 0; i + 1 < f.points.size(); ++i) {
            for (int k = 0; k <= steps; ++k) {
                const double t = static_cast<double>(k) / steps;
                const double qx = f.points[i][0] + t * (f.points[i + 1][0] - f.points[i][0]);
                const double qy = f.points[i][1] + t * (f.points[i + 1][1] - f.points[i][1]);
                const double d = std::hypot(x - qx, y - qy);
                if (d < best) {
                    best = d;
                    best_station = f.s[i] + t * (f.s[i + 1] - f.s[i]);
                }
            }
        }
        CHECK(std::abs(std::abs(fp.d) - best) <= 1e-6);
        CHECK(std::abs(fp.s - best_station) <= 1e-3);
    }
}

TEST_CASE("frenet round trip on the path") {
    auto f = build_frame(circle_path(10.0, 90.0));
    Rng rng(53);
    for (int trial = 0; trial < 40; ++trial) {
        const double station = rng.uniform(0.0, f.length());
        auto pt = frenet_to_cartesian(f, station, 0.0);
        const double psi = tangent_angle_at(f, station);
        auto fp = project_pose(f, pt[0], pt[1], psi);
        CHECK(std::abs(fp.s - station) <= 1e-6);
        CHECK(std::abs(fp.d) <= 1e-6);
        CHECK(std::abs(fp.dpsi) <= 1e-9);
    }
}

TEST_CASE("lateral reconstruction") {
    auto f = build_frame(straight_path(10.0, 3));
    auto pt = frenet_to_cartesian(f, 4.0, 2.5);
    CHECK(pt[0] == doctest::Approx(4.0));
    CHECK(pt[1] == doctest::Approx(2.5));
}

TEST_CASE("bounds from constant acceleration samples") {
    auto f = build_frame(straight_path(40.0, 5));
    PredictedTrajectory traj;
    traj.samples = {{0.0, 0.0, 0.0, 0.0, 10.0},
                    {0.5, 5.1, 0.0, 0.0, 10.5},
                    {1.0, 10.4, 0.0, 0.0, 11.0}};
    PredictionErrorModel err{0.5, 0.05, 0.0};
    auto b = estimate_bounds(traj, f, err);
    CHECK(b.accel.min == doctest::Approx(1.0));
    CHECK(b.accel.max == doctest::Approx(1.0));
}

TEST_CASE("constant speed straight prediction gives zero bounds") {
    auto f = build_frame(straight_path(40.0, 5));
    PredictedTrajectory traj;
    for (int i = 0; i < 5; ++i) {
        traj.samples.push_back({0.5 * i, 4.0 * i, 0.0, 0.0, 8.0});
    }
    PredictionErrorModel err{0.5, 0.05, 0.0};
    auto b = estimate_bounds(traj, f, err);
    CHECK(b.accel.min == doctest::Approx(0.0));
    CHECK(b.accel.max == doctest::Approx(0.0));
    CHECK(b.omega.min == doctest::Approx(0.0));
    CHECK(b.omega.max == doctest::Approx(0.0));
}

TEST_CASE("bounds match an independent finite difference oracle") {
    auto f = build_frame(straight_path(60.0, 7));
    Rng rng(57);
    PredictedTrajectory traj;
    double x = 0.0;
    double v = 9.0;
    for (int i = 0; i < 12; ++i) {
        traj.samples.push_back({0.25 * i, x, rng.uniform(-0.5, 0.5), 0.0, v});
        x += v * 0.25;
        v = std::max(0.0, v + rng.uniform(-1.5, 1.0));
    }
    PredictionErrorModel err{0.7, 0.03, 2.0};
    auto b = estimate_bounds(traj, f, err);

    double lo = std::numeric_limits<double>::infinity();
    double hi = -lo;
    for (std::size_t i = 1; i < traj.samples.size(); ++i) {
        const double a = (traj.samples[i].v - traj.samples[i - 1].v) /
                         (traj.samples[i].t - traj.samples[i - 1].t);
        lo = std::min(lo, a);
        hi = std::max(hi, a);
    }
    CHECK(b.accel.min == doctest::Approx(lo - 1.4).epsilon(1e-9));
    CHECK(b.accel.max == doctest::Approx(hi + 1.4).epsilon(1e-9));
    CHECK(b.omega.max == doctest::Approx(0.06).epsilon(1e-9));
    CHECK(b.omega.min == doctest::Approx(-0.06).epsilon(1e-9));

    // The raw sample accelerations always sit inside D_a.
    for (std::size_t i = 1; i < traj.samples.size(); ++i) {
        const double a = (traj.samples[i].v - traj.samples[i - 1].v) /
                         (traj.samples[i].t - traj.samples[i - 1].t);
        CHECK(a >= b.accel.min);
        CHECK(a <= b.accel.max);
    }
}

TEST_CASE("curvature widens the turn rate bound") {
    auto f = build_frame(circle_path(10.0, 90.0));
    PredictedTrajectory traj;
    for (int i = 0; i < 6; ++i) {
        const double th = 0.1 * i;
        traj.samples.push_back(
            {0.5 * i, 10.0 * std::cos(th), 10.0 * std::sin(th), th + kPi / 2.0, 5.0});
    }
    PredictionErrorModel err{0.5, 0.05, 2.0};
    auto b = estimate_bounds(traj, f, err);
    // max |kappa| v = 0.1 * 5 plus the 2 sigma_omega margin.
    CHECK(b.omega.max == doctest::Approx(0.5 + 0.1).epsilon(2e-2));
    CHECK(b.omega.min == doctest::Approx(-b.omega.max));
}

TEST_CASE("margins grow with k") {
    auto f = build_frame(straight_path(40.0, 5));
    PredictedTrajectory traj;
    double v = 10.0;
    double x = 0.0;
    for (int i = 0; i < 8; ++i) {
        traj.samples.push_back({0.25 * i, x, 0.0, 0.0, v});
        x += v * 0.25;
        v = std::max(0.0, v - 0.4);
    }
    PredictionErrorModel err{0.5, 0.05, 0.0};
    Interval prev_a{0, 0}, prev_w{0, 0};
    bool first = true;
    for (double k : {0.0, 0.5, 1.0, 2.0, 4.0}) {
        err.k = k;
        auto b = estimate_bounds(traj, f, err);
        if (!first) {
            CHECK(b.accel.contains(prev_a));
            CHECK(b.omega.contains(prev_w));
        }
        prev_a = b.accel;
        prev_w = b.omega;
        first = false;
    }
}

TEST_CASE("degenerate predictions are rejected") {
    auto f = build_frame(straight_path(40.0, 5));
    PredictedTrajectory traj;
    traj.samples = {{0.0, 0.0, 0.0, 0.0, 5.0}};
    PredictionErrorModel err;
    CHECK_THROWS_AS(estimate_bounds(traj, f, err), std::invalid_argument);
    traj.samples = {{0.0, 0.0, 0.0, 0.0, 5.0}, {0.0, 1.0, 0.0, 0.0, 5.0}};
    CHECK_THROWS_AS(estimate_bounds(traj, f, err), std::invalid_argument);
    traj.samples = {{0.0, 0.0, 0.0, 0.0, 5.0}, {0.5, 1.0, 0.0, 0.0, -1.0}};
    CHECK_THROWS_AS(estimate_bounds(traj, f, err), std::invalid_argument);
}
