#pragma once

#include <cstdint>
#include <string>

#include "rnego/config.hpp"
#include "rnego/log.hpp"

namespace rnego {

/// Recipe for a synthetic two-car interaction. The id picks the road
/// geometry, the role picks how the human's accelerations are generated:
/// follower and leader draw from the corresponding game distribution,
/// adversarial floors the accelerator toward the robot, replay holds the
/// nominal speed.
struct ScenarioTemplate {
    std::string id = "head-on";   // merge-yield | merge-contest | head-on | car-follow
    std::string role = "replay";  // follower | leader | adversarial | replay
    double robot_speed = 8.0;     // m/s
    double human_speed = 8.0;     // m/s
    double initial_gap = 40.0;    // m, template-specific reference distance
    double duration = 8.0;        // s of logged interaction
    double human_top_speed = 14.5;  // m/s, generation clamp
    std::uint64_t seed = 1;

    void validate() const;
};

/// Generates a kinematically consistent log at the config's sensor rate with
/// embedded constant-speed predictions along the template's human path.
/// Deterministic per seed.
InteractionLog synth_scenario(const ScenarioTemplate& tpl, const RunConfig& cfg);

}  // namespace rnego
