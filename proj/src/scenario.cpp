#include "rnego/scenario.hpp"

#include <cmath>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "rnego/frenet.hpp"
#include "rnego/game.hpp"
#include "rnego/rng.hpp"

namespace rnego {

namespace {

bool known_id(const std::string& id) {
    return id == "merge-yield" || id == "merge-contest" || id == "head-on" ||
           id == "car-follow";
}

bool known_role(const std::string& role) {
    return role == "follower" || role == "leader" || role == "adversarial" ||
           role == "replay";
}

PathPolyline line_path(double x0, double x1, double y) {
    return PathPolyline{{{x0, y}, {x1, y}}};
}

/// On-ramp that blends into the main lane at the origin.
PathPolyline ramp_path() {
    return PathPolyline{{{-160.0, -6.0},
                         {-40.0, -6.0},
                         {-25.0, -4.5},
                         {-12.0, -2.2},
                         {-4.0, -0.6},
                         {0.0, 0.0},
                         {40.0, 0.0},
                         {400.0, 0.0}}};
}

struct ScenarioGeometry {
    PathPolyline robot_path;
    PathPolyline human_path;
    double robot_start = 0.0;  // station
    double human_start = 0.0;
};

ScenarioGeometry build_geometry(const ScenarioTemplate& tpl) {
    ScenarioGeometry g;
    if (tpl.id == "merge-yield" || tpl.id == "merge-contest") {
        g.robot_path = line_path(-160.0, 400.0, 0.0);
        g.human_path = ramp_path();
        // Both cars start initial_gap meters of arc length before the merge
        // point at the origin.
        FrenetFrame ramp = build_frame(g.human_path);
        const double merge_station = ramp.s[5];
        g.robot_start = 160.0 - tpl.initial_gap;
        g.human_start = merge_station - tpl.initial_gap;
        if (g.robot_start < 5.0 || g.human_start < 5.0) {
            throw std::invalid_argument("scenario: initial_gap " +
                                        std::to_string(tpl.initial_gap) +
                                        " exceeds the approach length of template " + tpl.id);
        }
    } else if (tpl.id == "head-on") {
        g.robot_path = line_path(-50.0, 450.0, 0.0);
        g.human_path = line_path(tpl.initial_gap + 50.0, tpl.initial_gap - 450.0, 0.0);
        g.robot_start = 50.0;
        g.human_start = 50.0;
    } else {  // car-follow
        g.robot_path = line_path(-50.0, 450.0, 0.0);
        g.human_path = line_path(-50.0, 450.0, 0.0);
        g.robot_start = 50.0;
        g.human_start = 50.0 + tpl.initial_gap;
    }
    return g;
}

VehiclePose pose_at(const FrenetFrame& frame, double station, double speed) {
    const auto xy = frenet_to_cartesian(frame, station, 0.0);
    return VehiclePose{xy[0], xy[1], tangent_angle_at(frame, station), speed};
}

PredictedTrajectory constant_speed_prediction(const FrenetFrame& frame, double station,
                                              double speed, double t, double horizon,
                                              double step) {
    PredictedTrajectory traj;
    const auto n = static_cast<std::size_t>(std::llround(horizon / step));
    traj.samples.reserve(n + 1);
    for (std::size_t j = 0; j <= n; ++j) {
        const double tau = static_cast<double>(j) * step;
        const double s = station + speed * tau;
        const auto xy = frenet_to_cartesian(frame, s, 0.0);
        traj.samples.push_back(
            TrajectorySample{t + tau, xy[0], xy[1], tangent_angle_at(frame, s), speed});
    }
    return traj;
}

std::size_t draw_index(const std::vector<double>& probs, Rng& rng) {
    const double u = rng.uniform();
    double cum = 0.0;
    for (std::size_t i = 0; i < probs.size(); ++i) {
        cum += probs[i];
        if (u < cum) return i;
    }
    return probs.size() - 1;
}

}  // namespace

void ScenarioTemplate::validate() const {
    if (!known_id(id)) throw std::invalid_argument("scenario: unknown template id " + id);
    if (!known_role(role)) throw std::invalid_argument("scenario: unknown role " + role);
    auto finite_nonneg = [](double v, const char* name) {
        if (!std::isfinite(v) || v < 0.0) {
            throw std::invalid_argument(std::string("scenario: ") + name +
                                        " must be finite and nonnegative");
        }
    };
    finite_nonneg(robot_speed, "robot_speed");
    finite_nonneg(human_speed, "human_speed");
    finite_nonneg(duration, "duration");
    if (!std::isfinite(initial_gap) || initial_gap <= 0.0) {
        throw std::invalid_argument("scenario: initial_gap must be positive");
    }
    if (!std::isfinite(human_top_speed) || human_top_speed <= 0.0) {
        throw std::invalid_argument("scenario: human_top_speed must be positive");
    }
    if (human_speed > human_top_speed) {
        throw std::invalid_argument("scenario: human_speed exceeds human_top_speed");
    }
}

InteractionLog synth_scenario(const ScenarioTemplate& tpl, const RunConfig& cfg) {
    tpl.validate();
    cfg.validate();

    const ScenarioGeometry geo = build_geometry(tpl);
    const FrenetFrame robot_frame = build_frame(geo.robot_path);
    const FrenetFrame human_frame = build_frame(geo.human_path);
    const double horizon = cfg.library.horizon;
    const double dt = cfg.sensor_period;

    InteractionLog log;
    log.sensor_period = cfg.sensor_period;
    log.verification_period = cfg.verification_period;
    log.role_tag = tpl.role;
    log.plan.path = geo.robot_path;
    // The robot's nominal plan holds speed; the accel profile covers the log
    // plus one horizon so trailing fit windows never run dry.
    for (double t = 0.0; t <= tpl.duration + horizon + 0.5; t += 0.5) {
        log.plan.accel.emplace_back(t, 0.0);
    }

    const bool game_role = tpl.role == "follower" || tpl.role == "leader";
    ControllerLibrary lib;
    if (game_role) lib = sample_library(cfg.library);
    const AccelController plan_ctrl{0.0, 0.0, 0.0, horizon};
    const GameGeometry game_geo{&robot_frame, &human_frame};
    Rng rng(tpl.seed);

    double s_r = geo.robot_start;
    double s_h = geo.human_start;
    double v_h = tpl.human_speed;
    AccelController current{0.0, 0.0, 0.0, horizon};
    double next_draw_t = 0.0;
    double draw_t = 0.0;

    const auto n_steps = static_cast<std::size_t>(std::floor(tpl.duration / dt + 1e-9));
    log.records.reserve(n_steps + 1);
    for (std::size_t k = 0; k <= n_steps; ++k) {
        const double t = static_cast<double>(k) * dt;
        if (game_role && t >= next_draw_t - 1e-9) {
            GameState gs;
            gs.robot = AgentState{s_r, tpl.robot_speed};
            gs.human = AgentState{s_h, v_h};
            gs.t = t;
            gs.dt = cfg.game_dt;
            const std::vector<double> probs =
                tpl.role == "follower"
                    ? follower_distribution(gs, plan_ctrl, lib, cfg.rewards, game_geo)
                    : leader_distribution(gs, lib, cfg.rewards, game_geo);
            current = lib.controllers[draw_index(probs, rng)];
            draw_t = t;
            next_draw_t += horizon;
        }

        LogRecord rec;
        rec.t = t;
        rec.robot = pose_at(robot_frame, s_r, tpl.robot_speed);
        rec.human = pose_at(human_frame, s_h, v_h);
        rec.predicted_path = geo.human_path;
        rec.prediction = constant_speed_prediction(human_frame, s_h, v_h, t, horizon,
                                                   cfg.verification_period);
        log.records.push_back(std::move(rec));

        double a = 0.0;
        if (tpl.role == "adversarial") {
            a = v_h < tpl.human_top_speed ? cfg.bounds.human_accel.max : 0.0;
        } else if (game_role) {
            a = current.at(t - draw_t);
        }
        const double v_next =
            std::min(tpl.human_top_speed, std::max(0.0, v_h + a * dt));
        s_h += 0.5 * (v_h + v_next) * dt;
        v_h = v_next;
        s_r += tpl.robot_speed * dt;
    }

    log.validate();
    return log;
}

}  // namespace rnego
