#pragma once

#include <array>
#include <cstddef>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "rnego/dynamics.hpp"
#include "rnego/game.hpp"
#include "rnego/grid.hpp"
#include "rnego/solver.hpp"

namespace rnego {

/// Human acceleration interval snapped outward to a fixed lattice. Stored as
/// integer lattice indices so equal buckets compare and deduplicate exactly.
struct BoundBucket {
    long lo_idx = 0;
    long hi_idx = 0;
    double step = 0.5;  // lattice spacing, m/s^2

    Interval interval() const {
        return {static_cast<double>(lo_idx) * step, static_cast<double>(hi_idx) * step};
    }
    bool operator==(const BoundBucket&) const = default;
};

/// Smallest lattice-aligned interval covering the controller's closed-form
/// acceleration range over its horizon. Values within 1e-9 lattice units of a
/// lattice point snap to it instead of widening a whole step.
BoundBucket bucket_of(const AccelController& pi, double step);

struct BankEntry {
    BoundBucket bucket;
    ValueFunction vf;  // solved with this bucket as the human accel bound
};

struct BankBuildConfig {
    GridSpec grid;
    TargetSpec target;
    NumericsConfig numerics;
    VehicleParams params;
    /// Robot bounds and the human turn-rate bound shared by every entry; the
    /// human accel interval here is the full physical range and only feeds
    /// the shared dissipation envelope.
    ControlBounds base_bounds;
    double lattice_step = 0.5;
};

/// Offline set of tubes, one per distinct bucket in a controller library.
/// Every entry is solved with one shared dissipation vector and time-step
/// sequence, so values of nested buckets are pointwise ordered with no
/// scheme-induced crossings.
struct BrtBank {
    std::vector<BankEntry> entries;  // first-appearance order over the library
    double lattice_step = 0.5;
    Interval omega{-1.0, 1.0};
    ControlBounds base_bounds;
    VehicleParams params;
    NumericsConfig numerics;  // dissipation override filled in by the build

    std::size_t entry_for(const AccelController& pi) const;

  private:
    friend BrtBank build_bank(const ControllerLibrary&, const BankBuildConfig&,
                              const ProgressFn&);
    friend BrtBank load_bank(const std::string&);
    std::map<std::pair<long, long>, std::size_t> by_bucket_;
};

BrtBank build_bank(const ControllerLibrary& lib, const BankBuildConfig& cfg,
                   const ProgressFn& progress = nullptr);

/// Belief-weighted mixture of the two role-conditional controller
/// distributions.
std::vector<double> expected_probs(const RoleBelief& belief,
                                   const std::vector<double>& p_follower,
                                   const std::vector<double>& p_leader);

/// Outcome of the probability-sorted selection walk, without the node-array
/// union. Enough to answer membership queries; the replay loop uses this
/// directly.
struct Selection {
    std::vector<std::size_t> included_entries;      // unique, first-inclusion order
    std::vector<std::size_t> included_controllers;  // visit order, most probable first
    double cumulative_prob = 0.0;
};

Selection select_included(const BrtBank& bank, const ControllerLibrary& lib,
                          const std::vector<double>& probs, double delta);

/// Min over the selection's entries of their interpolated values.
double selection_value(const BrtBank& bank, const Selection& sel,
                       const std::array<double, 5>& state);

/// Union of bank entries covering the most probable controllers up to
/// cumulative confidence delta.
struct CompositeBRT {
    std::vector<std::size_t> included_entries;      // unique, first-inclusion order
    std::vector<std::size_t> included_controllers;  // visit order, most probable first
    double cumulative_prob = 0.0;
    ValueFunction union_vf;  // node values: elementwise min over included entries
};

/// Visits controllers by descending probability (ties toward the lower
/// index), accumulating probability per controller while unioning each
/// controller's entry at most once, and stops once the running total reaches
/// delta.
CompositeBRT select_brt(const BrtBank& bank, const ControllerLibrary& lib,
                        const std::vector<double>& probs, double delta);

/// Value of the union at an off-node state: the min over included entries of
/// their interpolated values. Interpolating each entry before taking the min
/// keeps membership identical to "inside at least one included tube".
double composite_value(const BrtBank& bank, const CompositeBRT& composite,
                       const std::array<double, 5>& state);

bool composite_contains(const BrtBank& bank, const CompositeBRT& composite,
                        const std::array<double, 5>& state);

/// Writes one value-function file per entry plus an index manifest into dir.
void save_bank(const BrtBank& bank, const std::string& dir);

BrtBank load_bank(const std::string& dir);

}  // namespace rnego
