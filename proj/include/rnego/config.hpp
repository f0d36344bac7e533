#pragma once

#include <string>

#include "rnego/dynamics.hpp"
#include "rnego/frenet.hpp"
#include "rnego/game.hpp"
#include "rnego/grid.hpp"
#include "rnego/solver.hpp"

namespace rnego {

/// Default discretization of the relative state: positions to +/-20 m,
/// heading periodic, speeds to 15 m/s.
GridSpec default_relative_grid();

/// Everything a run needs: offline solve setup, online game and selection
/// parameters, and replay rates.
struct RunConfig {
    GridSpec grid = default_relative_grid();
    TargetSpec target;
    NumericsConfig numerics;
    VehicleParams params;
    ControlBounds bounds;  // robot control set and the full human bound
    PredictionErrorModel error_model;
    LibraryConfig library;
    RewardConfig rewards;
    double game_dt = 0.1;             // stage length for rollouts, s
    double delta = 0.9;               // selection confidence
    double lattice_step = 0.5;        // accel bucket lattice, m/s^2
    double omega_lattice_step = 0.1;  // turn-rate quantization for cached solves, rad/s
    double sensor_period = 0.04;      // 25 Hz
    double verification_period = 0.1; // 10 Hz
    RoleBelief prior;
    double corridor = 10.0;  // max lateral offset for path projection, m

    void validate() const;
    bool operator==(const RunConfig&) const = default;
};

std::string serialize_config(const RunConfig& cfg);
RunConfig parse_config(const std::string& text);

void save_config(const RunConfig& cfg, const std::string& path);
RunConfig load_config(const std::string& path);

/// Stable 64-bit content hash of the canonical serialization, hex-encoded.
std::string config_digest(const RunConfig& cfg);

}  // namespace rnego
