#include "rnego/game.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include "rnego/rng.hpp"

namespace rnego {

namespace {

std::size_t stage_count(double horizon, double dt) {
    if (!(horizon > 0.0) || !(dt > 0.0)) {
        throw std::invalid_argument("game: horizon and dt must be positive");
    }
    const double ratio = horizon / dt;
    const auto n = static_cast<std::size_t>(std::llround(ratio));
    if (n == 0 || std::abs(static_cast<double>(n) * dt - horizon) > 1e-9 * std::max(1.0, horizon)) {
        throw std::invalid_argument("game: dt must divide the horizon");
    }
    return n;
}

/// Numerically stable softplus.
double softplus(double z) {
    if (z > 0.0) {
        return z + std::log1p(std::exp(-z));
    }
    return std::log1p(std::exp(z));
}

/// Closeness feature: 0 far away, ramps up once inside the activation
/// distance and keeps growing toward the collision distance.
double proximity_feature(double dist, const RewardConfig& cfg) {
    const double z =
        4.0 * (cfg.activation_dist - dist) / (cfg.activation_dist - cfg.collision_dist);
    return softplus(z);
}

double pair_distance(const std::array<double, 2>& a, const std::array<double, 2>& b) {
    const double dx = a[0] - b[0];
    const double dy = a[1] - b[1];
    return std::sqrt(dx * dx + dy * dy);
}

/// One agent's stage states and the proximity-independent part of its reward.
/// All distributions and the pairwise rollout share this exact accumulation
/// order so factored evaluation reproduces the naive one bit for bit.
struct AgentRollout {
    std::vector<std::array<double, 2>> pos;  // n_stages + 1 points
    double own = 0.0;  // progress, speed deviation and effort terms summed over stages
};

AgentRollout roll_agent(const AgentState& start, const AccelController& pi,
                        const FrenetFrame& path, const RewardWeights& w, double dt,
                        std::size_t n_stages) {
    AgentRollout out;
    out.pos.reserve(n_stages + 1);
    double s = start.station;
    double v = start.speed;
    for (std::size_t n = 0; n <= n_stages; ++n) {
        const double tau = static_cast<double>(n) * dt;
        const double a = pi.at(tau);
        out.own += w.progress * v - w.speed_dev * std::abs(v - w.target_speed) -
                   w.effort * std::abs(a);
        out.pos.push_back(frenet_to_cartesian(path, s, 0.0));
        if (n < n_stages) {
            const double v_next = std::max(0.0, v + a * dt);
            s += 0.5 * (v + v_next) * dt;
            v = v_next;
        }
    }
    return out;
}

double proximity_sum(const AgentRollout& a, const AgentRollout& b, const RewardConfig& cfg) {
    double acc = 0.0;
    for (std::size_t n = 0; n < a.pos.size(); ++n) {
        acc += proximity_feature(pair_distance(a.pos[n], b.pos[n]), cfg);
    }
    return acc;
}

void validate_geometry(const GameGeometry& geo) {
    if (geo.robot_path == nullptr || geo.human_path == nullptr) {
        throw std::invalid_argument("game: both paths must be set");
    }
}

void require_nonempty(const ControllerLibrary& lib) {
    if (lib.controllers.empty()) {
        throw std::invalid_argument("game: controller library is empty");
    }
}

}  // namespace

Interval AccelController::range() const {
    const double a0 = at(0.0);
    const double a1 = at(horizon);
    Interval r{std::min(a0, a1), std::max(a0, a1)};
    if (c2 != 0.0) {
        const double vertex = -c1 / (2.0 * c2);
        if (vertex > 0.0 && vertex < horizon) {
            const double av = at(vertex);
            r.min = std::min(r.min, av);
            r.max = std::max(r.max, av);
        }
    }
    return r;
}

void LibraryConfig::validate() const {
    if (n < 3) {
        throw std::invalid_argument("library: need room for the three constant controllers");
    }
    for (const Interval* r : {&c0_range, &c1_range, &c2_range, &clamp}) {
        if (!std::isfinite(r->min) || !std::isfinite(r->max) || r->min > r->max) {
            throw std::invalid_argument("library: malformed coefficient range");
        }
    }
    if (!(clamp.min <= 0.0 && 0.0 <= clamp.max)) {
        throw std::invalid_argument("library: clamp must contain zero");
    }
    if (!(horizon > 0.0)) {
        throw std::invalid_argument("library: horizon must be positive");
    }
}

ControllerLibrary sample_library(const LibraryConfig& cfg) {
    cfg.validate();
    ControllerLibrary lib;
    lib.clamp = cfg.clamp;
    lib.horizon = cfg.horizon;
    lib.seed = cfg.seed;
    lib.controllers.reserve(cfg.n);
    lib.controllers.push_back({0.0, 0.0, 0.0, cfg.horizon});
    lib.controllers.push_back({cfg.clamp.min, 0.0, 0.0, cfg.horizon});
    lib.controllers.push_back({cfg.clamp.max, 0.0, 0.0, cfg.horizon});

    Rng rng(cfg.seed);
    const std::size_t max_attempts = 1000 * cfg.n;
    std::size_t attempts = 0;
    while (lib.controllers.size() < cfg.n) {
        if (++attempts > max_attempts) {
            throw std::runtime_error("library: rejection sampling failed to fill " +
                                     std::to_string(cfg.n) + " controllers");
        }
        AccelController cand{rng.uniform(cfg.c0_range.min, cfg.c0_range.max),
                             rng.uniform(cfg.c1_range.min, cfg.c1_range.max),
                             rng.uniform(cfg.c2_range.min, cfg.c2_range.max), cfg.horizon};
        if (cfg.clamp.contains(cand.range())) {
            lib.controllers.push_back(cand);
        }
    }
    return lib;
}

void RewardConfig::validate() const {
    if (!(activation_dist > collision_dist) || !(collision_dist >= 0.0)) {
        throw std::invalid_argument("reward: need activation_dist > collision_dist >= 0");
    }
    if (!(beta >= 0.0) || !std::isfinite(beta)) {
        throw std::invalid_argument("reward: beta must be finite and nonnegative");
    }
    if (!(belief_floor > 0.0) || !(belief_floor < 0.5)) {
        throw std::invalid_argument("reward: belief_floor must lie in (0, 0.5)");
    }
}

std::pair<double, double> rollout_q_both(const GameState& state, const AccelController& pi_h,
                                         const AccelController& pi_r, const RewardConfig& cfg,
                                         const GameGeometry& geo) {
    validate_geometry(geo);
    cfg.validate();
    if (std::abs(pi_h.horizon - pi_r.horizon) > 1e-9) {
        throw std::invalid_argument("game: controller horizons differ");
    }
    const std::size_t n_stages = stage_count(pi_h.horizon, state.dt);
    const AgentRollout h = roll_agent(state.human, pi_h, *geo.human_path, cfg.human, state.dt,
                                      n_stages);
    const AgentRollout r = roll_agent(state.robot, pi_r, *geo.robot_path, cfg.robot, state.dt,
                                      n_stages);
    const double prox = proximity_sum(h, r, cfg);
    return {h.own - cfg.human.proximity * prox, r.own - cfg.robot.proximity * prox};
}

double rollout_q(const GameState& state, const AccelController& pi_h,
                 const AccelController& pi_r, const RewardConfig& cfg, const GameGeometry& geo,
                 Agent who) {
    const auto [q_h, q_r] = rollout_q_both(state, pi_h, pi_r, cfg, geo);
    return who == Agent::human ? q_h : q_r;
}

std::vector<double> boltzmann(const std::vector<double>& q, double beta) {
    if (q.empty()) {
        return {};
    }
    const double m = *std::max_element(q.begin(), q.end());
    if (!std::isfinite(m)) {
        throw std::invalid_argument("boltzmann: non-finite score");
    }
    std::vector<double> p(q.size());
    double sum = 0.0;
    for (std::size_t i = 0; i < q.size(); ++i) {
        p[i] = std::exp(beta * (q[i] - m));
        sum += p[i];
    }
    for (double& v : p) {
        v /= sum;
    }
    return p;
}

std::vector<double> follower_distribution(const GameState& state,
                                          const AccelController& pi_r_plan,
                                          const ControllerLibrary& lib,
                                          const RewardConfig& cfg, const GameGeometry& geo) {
    validate_geometry(geo);
    cfg.validate();
    require_nonempty(lib);
    const std::size_t n_stages = stage_count(lib.horizon, state.dt);
    if (std::abs(pi_r_plan.horizon - lib.horizon) > 1e-9) {
        throw std::invalid_argument("game: plan horizon differs from library horizon");
    }
    const AgentRollout plan = roll_agent(state.robot, pi_r_plan, *geo.robot_path, cfg.robot,
                                         state.dt, n_stages);
    std::vector<double> q(lib.size());
    for (std::size_t i = 0; i < lib.size(); ++i) {
        const AgentRollout h = roll_agent(state.human, lib.controllers[i], *geo.human_path,
                                          cfg.human, state.dt, n_stages);
        q[i] = h.own - cfg.human.proximity * proximity_sum(h, plan, cfg);
    }
    return boltzmann(q, cfg.beta);
}

std::vector<double> leader_distribution(const GameState& state, const ControllerLibrary& lib,
                                        const RewardConfig& cfg, const GameGeometry& geo) {
    validate_geometry(geo);
    cfg.validate();
    require_nonempty(lib);
    const std::size_t n_stages = stage_count(lib.horizon, state.dt);
    const std::size_t n = lib.size();
    std::vector<AgentRollout> human(n), robot(n);
    for (std::size_t i = 0; i < n; ++i) {
        human[i] = roll_agent(state.human, lib.controllers[i], *geo.human_path, cfg.human,
                              state.dt, n_stages);
        robot[i] = roll_agent(state.robot, lib.controllers[i], *geo.robot_path, cfg.robot,
                              state.dt, n_stages);
    }
    std::vector<double> q(n);
    for (std::size_t i = 0; i < n; ++i) {
        double best_q_r = -std::numeric_limits<double>::infinity();
        double q_h_at_best = 0.0;
        for (std::size_t j = 0; j < n; ++j) {
            const double prox = proximity_sum(human[i], robot[j], cfg);
            const double q_r = robot[j].own - cfg.robot.proximity * prox;
            if (q_r > best_q_r) {
                best_q_r = q_r;
                q_h_at_best = human[i].own - cfg.human.proximity * prox;
            }
        }
        q[i] = q_h_at_best;
    }
    return boltzmann(q, cfg.beta);
}

void ObservedControls::validate() const {
    if (samples.empty()) {
        throw std::invalid_argument("observation: no samples");
    }
    if (!(window > 0.0)) {
        throw std::invalid_argument("observation: window must be positive");
    }
    const double t0 = window_end - window;
    for (std::size_t i = 0; i < samples.size(); ++i) {
        if (samples[i].first < t0 - 1e-9 || samples[i].first > window_end + 1e-9) {
            throw std::invalid_argument("observation: sample outside the trailing window");
        }
        if (i > 0 && !(samples[i].first > samples[i - 1].first)) {
            throw std::invalid_argument("observation: timestamps must strictly increase");
        }
    }
}

std::size_t best_match(const ObservedControls& xi, const ControllerLibrary& lib) {
    xi.validate();
    require_nonempty(lib);
    const double t0 = xi.window_end - xi.window;
    std::size_t best = 0;
    double best_d = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < lib.size(); ++i) {
        double d = 0.0;
        for (const auto& [t, a] : xi.samples) {
            const double e = lib.controllers[i].at(t - t0) - a;
            d += e * e;
        }
        if (d < best_d) {
            best_d = d;
            best = i;
        }
    }
    return best;
}

double observation_likelihood(const ObservedControls& xi, Role role, const GameState& state,
                              const AccelController& pi_r_plan, const ControllerLibrary& lib,
                              const RewardConfig& cfg, const GameGeometry& geo) {
    const std::size_t idx = best_match(xi, lib);
    const std::vector<double> dist =
        role == Role::follower ? follower_distribution(state, pi_r_plan, lib, cfg, geo)
                               : leader_distribution(state, lib, cfg, geo);
    return dist[idx];
}

BeliefUpdateResult bayes_belief(const RoleBelief& prior, double z_follower, double z_leader,
                                double floor) {
    const double u_f = z_follower * prior.follower;
    const double u_l = z_leader * prior.leader;
    const double total = u_f + u_l;
    if (!(total > 0.0)) {
        return {prior, true};
    }
    const double f = std::max(u_f / total, floor);
    const double l = std::max(u_l / total, floor);
    const double norm = f + l;
    return {{f / norm, l / norm}, false};
}

BeliefUpdateResult belief_update(const RoleBelief& prior, const ObservedControls& xi,
                                 const GameState& state, const AccelController& pi_r_plan,
                                 const ControllerLibrary& lib, const RewardConfig& cfg,
                                 const GameGeometry& geo) {
    const double z_f =
        observation_likelihood(xi, Role::follower, state, pi_r_plan, lib, cfg, geo);
    const double z_l = observation_likelihood(xi, Role::leader, state, pi_r_plan, lib, cfg, geo);
    return bayes_belief(prior, z_f, z_l, cfg.belief_floor);
}

AccelController fit_plan_controller(const std::vector<std::pair<double, double>>& samples,
                                    double horizon) {
    if (!(horizon > 0.0)) {
        throw std::invalid_argument("fit: horizon must be positive");
    }
    AccelController out{0.0, 0.0, 0.0, horizon};
    if (samples.empty()) {
        return out;
    }
    double mean = 0.0;
    for (const auto& [tau, a] : samples) {
        (void)tau;
        mean += a;
    }
    mean /= static_cast<double>(samples.size());
    out.c0 = mean;
    if (samples.size() < 3) {
        return out;
    }

    // Normal equations for the quadratic fit, solved with partial pivoting.
    double s[5] = {0, 0, 0, 0, 0};
    double b[3] = {0, 0, 0};
    for (const auto& [tau, a] : samples) {
        double tp = 1.0;
        for (int k = 0; k < 5; ++k) {
            s[k] += tp;
            if (k < 3) {
                b[k] += a * tp;
            }
            tp *= tau;
        }
    }
    double m[3][4] = {{s[0], s[1], s[2], b[0]}, {s[1], s[2], s[3], b[1]}, {s[2], s[3], s[4], b[2]}};
    double scale = 0.0;
    for (auto& row : m) {
        for (int c = 0; c < 3; ++c) {
            scale = std::max(scale, std::abs(row[c]));
        }
    }
    for (int col = 0; col < 3; ++col) {
        int piv = col;
        for (int r = col + 1; r < 3; ++r) {
            if (std::abs(m[r][col]) > std::abs(m[piv][col])) {
                piv = r;
            }
        }
        if (std::abs(m[piv][col]) < 1e-12 * std::max(1.0, scale)) {
            return out;  // degenerate sample layout, keep the constant fit
        }
        std::swap(m[col], m[piv]);
        for (int r = col + 1; r < 3; ++r) {
            const double factor = m[r][col] / m[col][col];
            for (int c = col; c < 4; ++c) {
                m[r][c] -= factor * m[col][c];
            }
        }
    }
    double coef[3];
    for (int r = 2; r >= 0; --r) {
        double acc = m[r][3];
        for (int c = r + 1; c < 3; ++c) {
            acc -= m[r][c] * coef[c];
        }
        coef[r] = acc / m[r][r];
    }
    out.c0 = coef[0];
    out.c1 = coef[1];
    out.c2 = coef[2];
    return out;
}

}  // namespace rnego
