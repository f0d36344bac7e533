#include "rnego/frenet.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace rnego {

namespace {

double hyp(double dx, double dy) { return std::sqrt(dx * dx + dy * dy); }

}  // namespace

void PathPolyline::validate() const {
    if (points.size() < 2) {
        throw std::invalid_argument("path: need at least two points");
    }
    for (std::size_t i = 1; i < points.size(); ++i) {
        const double d = hyp(points[i][0] - points[i - 1][0], points[i][1] - points[i - 1][1]);
        if (!(d > 1e-6)) {
            throw std::invalid_argument("path: consecutive points too close at index " +
                                        std::to_string(i));
        }
    }
}

void PredictedTrajectory::validate() const {
    if (samples.size() < 2) {
        throw std::invalid_argument("prediction: need at least two samples");
    }
    for (std::size_t i = 0; i < samples.size(); ++i) {
        if (samples[i].v < 0.0) {
            throw std::invalid_argument("prediction: negative speed");
        }
        if (i > 0 && !(samples[i].t > samples[i - 1].t)) {
            throw std::invalid_argument("prediction: timestamps must strictly increase");
        }
    }
}

void PredictionErrorModel::validate() const {
    if (sigma_a < 0.0 || sigma_omega < 0.0 || k < 0.0) {
        throw std::invalid_argument("prediction error model: sigmas and k must be >= 0");
    }
}

double FrenetFrame::curvature_at(double station) const {
    if (station <= s.front()) {
        return curvature.front();
    }
    if (station >= s.back()) {
        return curvature.back();
    }
    const auto it = std::upper_bound(s.begin(), s.end(), station);
    const std::size_t hi = static_cast<std::size_t>(it - s.begin());
    const std::size_t lo = hi - 1;
    const double w = (station - s[lo]) / (s[hi] - s[lo]);
    return curvature[lo] + w * (curvature[hi] - curvature[lo]);
}

FrenetFrame build_frame(const PathPolyline& path) {
    path.validate();
    const auto& p = path.points;
    const std::size_t n = p.size();

    FrenetFrame f;
    f.points = p;
    f.s.resize(n);
    f.tangent.resize(n);
    f.curvature.assign(n, 0.0);

    f.s[0] = 0.0;
    for (std::size_t i = 1; i < n; ++i) {
        f.s[i] = f.s[i - 1] + hyp(p[i][0] - p[i - 1][0], p[i][1] - p[i - 1][1]);
    }

    auto unit = [](double dx, double dy) -> std::array<double, 2> {
        const double m = hyp(dx, dy);
        return {dx / m, dy / m};
    };
    f.tangent[0] = unit(p[1][0] - p[0][0], p[1][1] - p[0][1]);
    f.tangent[n - 1] = unit(p[n - 1][0] - p[n - 2][0], p[n - 1][1] - p[n - 2][1]);
    for (std::size_t i = 1; i + 1 < n; ++i) {
        f.tangent[i] = unit(p[i + 1][0] - p[i - 1][0], p[i + 1][1] - p[i - 1][1]);
    }

    if (n >= 3) {
        // Differencing sticks to central-difference tangents where possible;
        // the one-sided endpoint tangents would bias the first and last
        // interior curvatures by half a sample.
        for (std::size_t i = 1; i + 1 < n; ++i) {
            std::size_t lo = (i >= 2) ? i - 1 : i;
            std::size_t hi = (i + 2 < n) ? i + 1 : i;
            if (lo == hi) {
                lo = i - 1;
                hi = i + 1;
            }
            const double th_lo = std::atan2(f.tangent[lo][1], f.tangent[lo][0]);
            const double th_hi = std::atan2(f.tangent[hi][1], f.tangent[hi][0]);
            f.curvature[i] = wrap_angle(th_hi - th_lo) / (f.s[hi] - f.s[lo]);
        }
        f.curvature[0] = f.curvature[1];
        f.curvature[n - 1] = f.curvature[n - 2];
    }
    return f;
}

FrenetPose project_pose(const FrenetFrame& frame, double x, double y, double psi,
                        double corridor) {
    const auto& p = frame.points;
    double best_d2 = std::numeric_limits<double>::infinity();
    double best_station = 0.0;
    std::size_t best_seg = 0;

    for (std::size_t i = 0; i + 1 < p.size(); ++i) {
        const double ex = p[i + 1][0] - p[i][0];
        const double ey = p[i + 1][1] - p[i][1];
        const double len2 = ex * ex + ey * ey;
        double t = ((x - p[i][0]) * ex + (y - p[i][1]) * ey) / len2;
        t = std::clamp(t, 0.0, 1.0);
        const double qx = p[i][0] + t * ex;
        const double qy = p[i][1] + t * ey;
        const double d2 = (x - qx) * (x - qx) + (y - qy) * (y - qy);
        // Strict improvement only: equal distances keep the smaller station.
        if (d2 < best_d2) {
            best_d2 = d2;
            best_station = frame.s[i] + t * std::sqrt(len2);
            best_seg = i;
        }
    }

    if (std::sqrt(best_d2) > corridor) {
        throw std::domain_error("project_pose: pose outside the path corridor");
    }

    const double ex = p[best_seg + 1][0] - p[best_seg][0];
    const double ey = p[best_seg + 1][1] - p[best_seg][1];
    const double len = hyp(ex, ey);
    const double tx = ex / len;
    const double ty = ey / len;
    // Left normal signs the lateral offset.
    const double nx = -ty;
    const double ny = tx;

    FrenetPose out;
    out.s = best_station;
    const double rel_t = (best_station - frame.s[best_seg]);
    const double qx = p[best_seg][0] + rel_t * tx;
    const double qy = p[best_seg][1] + rel_t * ty;
    // Magnitude is the true nearest distance (the projection may have clamped
    // to a vertex); the winning segment's left normal provides the sign.
    const double side = (x - qx) * nx + (y - qy) * ny;
    const double dist = std::sqrt(best_d2);
    out.d = (side >= 0.0) ? dist : -dist;
    out.dpsi = wrap_angle(psi - std::atan2(ty, tx));
    return out;
}

namespace {

std::size_t segment_of(const FrenetFrame& frame, double station) {
    if (station <= frame.s.front()) {
        return 0;
    }
    if (station >= frame.s.back()) {
        return frame.s.size() - 2;
    }
    const auto it = std::upper_bound(frame.s.begin(), frame.s.end(), station);
    return static_cast<std::size_t>(it - frame.s.begin()) - 1;
}

}  // namespace

std::array<double, 2> frenet_to_cartesian(const FrenetFrame& frame, double station,
                                          double lateral) {
    const std::size_t i = segment_of(frame, station);
    const auto& p = frame.points;
    const double ex = p[i + 1][0] - p[i][0];
    const double ey = p[i + 1][1] - p[i][1];
    const double len = hyp(ex, ey);
    const double tx = ex / len;
    const double ty = ey / len;
    const double along = station - frame.s[i];
    return {p[i][0] + along * tx - lateral * ty, p[i][1] + along * ty + lateral * tx};
}

double tangent_angle_at(const FrenetFrame& frame, double station) {
    const std::size_t i = segment_of(frame, station);
    const auto& p = frame.points;
    return std::atan2(p[i + 1][1] - p[i][1], p[i + 1][0] - p[i][0]);
}

HumanBounds estimate_bounds(const PredictedTrajectory& traj, const FrenetFrame& frame,
                            const PredictionErrorModel& err, double corridor) {
    traj.validate();
    err.validate();

    double a_min = std::numeric_limits<double>::infinity();
    double a_max = -std::numeric_limits<double>::infinity();
    const auto& ss = traj.samples;
    for (std::size_t i = 0; i + 1 < ss.size(); ++i) {
        const double a = (ss[i + 1].v - ss[i].v) / (ss[i + 1].t - ss[i].t);
        a_min = std::min(a_min, a);
        a_max = std::max(a_max, a);
    }

    double omega_path_max = 0.0;
    for (const auto& smp : ss) {
        const FrenetPose fp = project_pose(frame, smp.x, smp.y, smp.psi, corridor);
        omega_path_max = std::max(omega_path_max, std::abs(frame.curvature_at(fp.s)) * smp.v);
    }

    HumanBounds out;
    out.accel = {a_min - err.k * err.sigma_a, a_max + err.k * err.sigma_a};
    const double w = err.k * err.sigma_omega + omega_path_max;
    out.omega = {-w, w};
    return out;
}

}  // namespace rnego
