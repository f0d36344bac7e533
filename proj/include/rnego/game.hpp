#pragma once

#include <cstddef>
#include <cstdint>
#include <utility>
#include <vector>

#include "rnego/dynamics.hpp"
#include "rnego/frenet.hpp"

namespace rnego {

/// Quadratic acceleration profile a(tau) = c0 + c1 tau + c2 tau^2 over a
/// fixed planning horizon.
struct AccelController {
    double c0 = 0.0;
    double c1 = 0.0;
    double c2 = 0.0;
    double horizon = 2.0;  // T, seconds

    double at(double tau) const { return c0 + tau * (c1 + tau * c2); }

    /// Exact range of a(tau) on [0, horizon]: endpoints plus the vertex when
    /// it falls inside.
    Interval range() const;
};

struct ControllerLibrary {
    std::vector<AccelController> controllers;
    Interval clamp{-6.0, 4.0};  // physical acceleration clamp
    double horizon = 2.0;
    std::uint64_t seed = 0;

    std::size_t size() const { return controllers.size(); }
};

struct LibraryConfig {
    std::size_t n = 200;
    Interval c0_range{-4.0, 3.0};
    Interval c1_range{-2.0, 2.0};
    Interval c2_range{-1.0, 1.0};
    Interval clamp{-6.0, 4.0};
    double horizon = 2.0;
    std::uint64_t seed = 2024;

    void validate() const;
    bool operator==(const LibraryConfig&) const = default;
};

/// Rejection-samples coefficient triples until n controllers fit the clamp
/// over the whole horizon. Indices 0..2 are always the constant controllers
/// a = 0, a = clamp.min, a = clamp.max. Deterministic per seed.
ControllerLibrary sample_library(const LibraryConfig& cfg);

struct AgentState {
    double station = 0.0;  // m along own path
    double speed = 0.0;    // m/s
};

struct GameState {
    AgentState robot;
    AgentState human;
    double t = 0.0;
    double dt = 0.1;  // stage length
};

struct GameGeometry {
    const FrenetFrame* robot_path = nullptr;
    const FrenetFrame* human_path = nullptr;
};

struct RewardWeights {
    double progress = 0.5;      // per m/s of speed
    double speed_dev = 0.1;     // per m/s of deviation from target
    double effort = 0.2;        // per m/s^2 of |a|
    double proximity = 5.0;     // weight on the closeness feature
    double target_speed = 8.0;  // m/s

    bool operator==(const RewardWeights&) const = default;
};

struct RewardConfig {
    RewardWeights human;
    RewardWeights robot;
    double activation_dist = 12.0;  // proximity feature turns on below this
    double collision_dist = 3.0;    // and saturates toward this
    double beta = 1.0;              // rationality
    double belief_floor = 1e-3;

    void validate() const;
    bool operator==(const RewardConfig&) const = default;
};

enum class Agent { robot, human };
enum class Role { follower, leader };

/// Cumulative reward of Eq.-style stage summation: reward evaluated at each
/// of the horizon/dt + 1 stage states with the stage controls, no discount;
/// speeds integrate trapezoidally and clamp at zero. Returns (Q_human,
/// Q_robot) from one rollout.
std::pair<double, double> rollout_q_both(const GameState& state, const AccelController& pi_h,
                                         const AccelController& pi_r, const RewardConfig& cfg,
                                         const GameGeometry& geo);

double rollout_q(const GameState& state, const AccelController& pi_h,
                 const AccelController& pi_r, const RewardConfig& cfg, const GameGeometry& geo,
                 Agent who);

/// Boltzmann distribution p_i proportional to exp(beta q_i), computed with a
/// max shift so large magnitudes cannot overflow.
std::vector<double> boltzmann(const std::vector<double>& q, double beta);

/// Follower model: the human responds to the robot's current plan.
std::vector<double> follower_distribution(const GameState& state,
                                          const AccelController& pi_r_plan,
                                          const ControllerLibrary& lib,
                                          const RewardConfig& cfg, const GameGeometry& geo);

/// Leader model: the human assumes the robot best-responds (argmax of the
/// robot's Q, ties to the lowest index) to each candidate human controller.
std::vector<double> leader_distribution(const GameState& state, const ControllerLibrary& lib,
                                        const RewardConfig& cfg, const GameGeometry& geo);

/// Human acceleration samples observed over the trailing window.
struct ObservedControls {
    std::vector<std::pair<double, double>> samples;  // (timestamp, acceleration)
    double window_end = 0.0;                         // current time
    double window = 2.0;                             // T

    void validate() const;
};

/// Controller whose profile, evaluated at the observation offsets within the
/// window, has the smallest sum of squared differences. Ties take the lowest
/// index.
std::size_t best_match(const ObservedControls& xi, const ControllerLibrary& lib);

struct RoleBelief {
    double follower = 0.5;
    double leader = 0.5;

    bool operator==(const RoleBelief&) const = default;
};

/// Probability mass the role-conditional distribution assigns to the
/// best-matching controller.
double observation_likelihood(const ObservedControls& xi, Role role, const GameState& state,
                              const AccelController& pi_r_plan, const ControllerLibrary& lib,
                              const RewardConfig& cfg, const GameGeometry& geo);

struct BeliefUpdateResult {
    RoleBelief belief;
    bool degenerate = false;  // both likelihoods vanished; prior kept
};

/// Bayes update with both likelihoods, then floor-and-renormalize so neither
/// role's mass can lock at zero.
BeliefUpdateResult bayes_belief(const RoleBelief& prior, double z_follower, double z_leader,
                                double floor);

/// Computes both role likelihoods from the observation and applies
/// bayes_belief.
BeliefUpdateResult belief_update(const RoleBelief& prior, const ObservedControls& xi,
                                 const GameState& state, const AccelController& pi_r_plan,
                                 const ControllerLibrary& lib, const RewardConfig& cfg,
                                 const GameGeometry& geo);

/// Least-squares quadratic fit of acceleration samples (tau, a) over [0, T];
/// falls back to the constant mean when underdetermined and to zero when
/// empty.
AccelController fit_plan_controller(const std::vector<std::pair<double, double>>& samples,
                                    double horizon);

}  // namespace rnego
