#pragma once

#include <array>
#include <cstddef>
#include <limits>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "rnego/bank.hpp"
#include "rnego/config.hpp"
#include "rnego/dynamics.hpp"
#include "rnego/game.hpp"
#include "rnego/grid.hpp"
#include "rnego/log.hpp"

namespace rnego {

/// Which tube answers the membership query: the full human control bound,
/// the bounds estimated from the current prediction, or the belief-weighted
/// union of bank entries.
enum class Mode { full, prediction, negotiation };

std::string mode_name(Mode m);
Mode mode_from_name(const std::string& name);

/// Human state expressed in the robot's body frame: offset rotated by the
/// robot heading, heading difference wrapped to [-pi, pi), both speeds kept.
RelativeState relative_state(const VehiclePose& robot, const VehiclePose& human);

struct SafetyDecision {
    double t = 0.0;
    Mode mode = Mode::full;
    bool breach = false;
    /// Union tube value at the relative state. +inf when the relative
    /// position lies beyond the grid extent (outside any tube by
    /// construction), -inf when a speed falls outside the grid and the query
    /// is treated as a conservative breach.
    double value = 0.0;
    bool out_of_domain = false;
    /// Override in force at this step, present from the first breach on.
    std::optional<RobotControl> override_control;
};

/// Membership check for one verification step against a single tube.
/// Relative positions beyond the grid extent are safe by construction (no
/// flag); a speed outside the grid makes the query unanswerable and counts
/// as a conservative breach with the out-of-domain flag set.
SafetyDecision verify_step(const VehiclePose& robot, const VehiclePose& human,
                           const ValueFunction& tube, double t, Mode mode);

/// Same check against the union of a bank selection.
SafetyDecision verify_step(const VehiclePose& robot, const VehiclePose& human,
                           const BrtBank& bank, const Selection& sel, double t, Mode mode);

/// Safety controller from the tube gradient: interpolated central-difference
/// costate fed to the extremal Hamiltonian's maximizing side. Gradient norms
/// below 1e-9 fall back to maximum braking with zero steering.
RobotControl safety_control(const ValueFunction& vf, const RelativeState& state,
                            const ControlBounds& bounds, const VehicleParams& params);

/// Minimum over records of the constant-velocity time to collision: earliest
/// nonnegative root of |relative position + t * relative velocity| = radius.
/// Records already inside the radius contribute zero; geometries that never
/// close to the radius contribute +inf.
double min_ttc(const InteractionLog& log, double radius);

/// Memoized tube solves keyed by lattice-quantized human bounds. Estimates
/// are clamped to the physical bounds and snapped outward to the config
/// lattices, so nearby predictions share one solve and the solved bound
/// always covers the clamped estimate.
class SolveCache {
  public:
    SolveCache(const RunConfig& cfg, NumericsConfig numerics);

    const ValueFunction& tube_for(const HumanBounds& estimate);

    std::size_t size() const { return cache_.size(); }

  private:
    GridSpec grid_;
    TargetSpec target_;
    VehicleParams params_;
    ControlBounds base_bounds_;
    double accel_step_;
    double omega_step_;
    NumericsConfig numerics_;
    std::map<std::array<long, 4>, std::unique_ptr<ValueFunction>> cache_;
};

/// Tubes each mode queries. Only the resources for the requested modes need
/// to be present.
struct ModeResources {
    const ValueFunction* full_tube = nullptr;
    SolveCache* prediction_cache = nullptr;
    const BrtBank* bank = nullptr;
    const ControllerLibrary* library = nullptr;
};

struct BreachEvent {
    double t = 0.0;
    double rel_speed = 0.0;     // |relative velocity|, m/s
    double rel_distance = 0.0;  // center-to-center, m
    double value = 0.0;
};

struct ModeReport {
    Mode mode = Mode::full;
    std::vector<SafetyDecision> decisions;  // one per verification step
    std::optional<BreachEvent> first_breach;
    std::size_t breach_steps = 0;
    double wall_ms = 0.0;  // excluded from the canonical serialization
};

struct BeliefSample {
    double t = 0.0;
    RoleBelief belief;
};

struct SelectionSample {
    double t = 0.0;
    double cumulative_prob = 0.0;
    std::vector<std::array<long, 2>> buckets;  // included accel buckets, lattice indices
};

struct ReplayReport {
    double min_ttc = std::numeric_limits<double>::infinity();
    bool dangerous = false;  // min_ttc below 2 s
    std::vector<ModeReport> modes;
    std::vector<BeliefSample> belief_trace;        // negotiation runs only
    std::vector<SelectionSample> selection_trace;  // negotiation runs only
};

/// Replays the log once per requested mode over a shared verification-step
/// schedule. Negotiation updates the role belief at sensor rate and reselects
/// the union at verification rate. From the first breach on, the robot
/// integrates bicycle kinematics under the recomputed safety override while
/// the human keeps replaying the log.
ReplayReport run_replay(const InteractionLog& log, const ModeResources& res,
                        const RunConfig& cfg, const std::vector<Mode>& modes);

/// Role-belief walk over a log at sensor rate: one sample per record once a
/// full trailing observation window exists. run_replay's negotiation mode
/// consumes exactly this trace.
std::vector<BeliefSample> infer_beliefs(const InteractionLog& log,
                                        const ControllerLibrary& lib,
                                        const RunConfig& cfg);

/// Canonical serialization is byte-stable for identical inputs; wall-clock
/// timings only appear when explicitly requested.
std::string serialize_report(const ReplayReport& report, bool include_timings = false);

struct ModeSummary {
    Mode mode = Mode::full;
    std::size_t interactions = 0;
    std::size_t breached = 0;  // interactions with at least one breach step
    double mean_rel_speed = 0.0;
    double mean_rel_distance = 0.0;
    double mean_min_ttc = 0.0;  // over breached interactions
};

struct SuiteSummary {
    std::vector<ModeSummary> modes;
    /// Breach counts weakly decrease from full to prediction to negotiation
    /// among the modes present.
    bool ordering_ok = true;
};

SuiteSummary compare_modes(const std::vector<ReplayReport>& reports);

std::string serialize_summary(const SuiteSummary& summary);

}  // namespace rnego
