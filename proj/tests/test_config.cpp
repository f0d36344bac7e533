#include <cstdio>
#include <stdexcept>
#include <string>

#include "doctest.h"
#include "rnego/config.hpp"

using namespace rnego;

namespace {

RunConfig off_default_config() {
    RunConfig cfg;
    cfg.grid.dims = {{-15.0, 15.0, 31, false},
                     {-12.0, 12.0, 25, false},
                     {-3.141592653589793, 3.141592653589793, 17, true},
                     {0.0, 12.0, 13, false},
                     {0.0, 12.0, 13, false}};
    cfg.target.r_coll = 3.25;
    cfg.numerics.cfl_number = 0.5;
    cfg.numerics.time_order = 1;
    cfg.numerics.tau = -0.75;
    cfg.numerics.checkpoint_stride = 4;
    cfg.numerics.alpha_override = {{9.0, 9.0, 2.0, 6.5, 6.5}};
    cfg.params.l_f = 1.1;
    cfg.params.l_r = 1.7;
    cfg.bounds.robot_accel = {-5.0, 2.5};
    cfg.bounds.robot_steer = {-0.4, 0.4};
    cfg.bounds.human_accel = {-5.5, 3.5};
    cfg.bounds.human_omega = {-0.8, 0.8};
    cfg.error_model.sigma_a = 0.25;
    cfg.error_model.sigma_omega = 0.02;
    cfg.error_model.k = 3.0;
    cfg.library.n = 24;
    cfg.library.c0_range = {-3.0, 2.0};
    cfg.library.c1_range = {-1.0, 1.0};
    cfg.library.c2_range = {-0.5, 0.5};
    cfg.library.clamp = {-5.5, 3.5};
    cfg.library.horizon = 2.0;
    cfg.library.seed = 77;
    cfg.rewards.human.progress = 0.6;
    cfg.rewards.human.target_speed = 9.0;
    cfg.rewards.robot.effort = 0.3;
    cfg.rewards.activation_dist = 10.0;
    cfg.rewards.collision_dist = 2.5;
    cfg.rewards.beta = 5.0;
    cfg.rewards.belief_floor = 5e-3;
    cfg.game_dt = 0.2;
    cfg.delta = 0.8;
    cfg.lattice_step = 0.25;
    cfg.omega_lattice_step = 0.05;
    cfg.sensor_period = 0.05;
    cfg.verification_period = 0.2;
    cfg.prior = {0.3, 0.7};
    cfg.corridor = 8.0;
    return cfg;
}

}  // namespace

TEST_CASE("default config validates and survives a serialization round trip") {
    RunConfig cfg;
    CHECK_NOTHROW(cfg.validate());
    const RunConfig back = parse_config(serialize_config(cfg));
    REQUIRE(back == cfg);
    CHECK_FALSE(back.numerics.alpha_override.has_value());
}

TEST_CASE("round trip preserves every field including the artificial dissipation override") {
    const RunConfig cfg = off_default_config();
    CHECK_NOTHROW(cfg.validate());
    const RunConfig back = parse_config(serialize_config(cfg));
    REQUIRE(back == cfg);
    REQUIRE(back.numerics.alpha_override.has_value());
    CHECK(back.numerics.alpha_override == cfg.numerics.alpha_override);
    // Serialization itself is stable.
    CHECK(serialize_config(back) == serialize_config(cfg));
}

TEST_CASE("config digest is stable and sensitive to field changes") {
    const RunConfig cfg;
    const std::string d1 = config_digest(cfg);
    CHECK(config_digest(cfg) == d1);
    CHECK(config_digest(off_default_config()) != d1);
    RunConfig tweaked;
    tweaked.delta = 0.85;
    CHECK(config_digest(tweaked) != d1);
}

TEST_CASE("config file save and load round trip") {
    const std::string path = "config_roundtrip_test.json";
    const RunConfig cfg = off_default_config();
    save_config(cfg, path);
    CHECK(load_config(path) == cfg);
    std::remove(path.c_str());
    CHECK_THROWS_AS(load_config(path), std::runtime_error);
}

TEST_CASE("config validation rejects inconsistent settings") {
    auto expect_reject = [](auto mutate) {
        RunConfig cfg;
        mutate(cfg);
        CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
    };
    expect_reject([](RunConfig& c) { c.delta = 1.5; });
    expect_reject([](RunConfig& c) { c.delta = -0.1; });
    expect_reject([](RunConfig& c) { c.sensor_period = 0.2; });  // above verification
    expect_reject([](RunConfig& c) { c.sensor_period = 0.0; });
    expect_reject([](RunConfig& c) { c.prior = {0.6, 0.6}; });
    expect_reject([](RunConfig& c) { c.game_dt = 0.3; });                // does not divide horizon
    expect_reject([](RunConfig& c) { c.corridor = 0.0; });
    expect_reject([](RunConfig& c) { c.grid.dims.pop_back(); });
    expect_reject([](RunConfig& c) { c.lattice_step = 0.0; });
}

namespace {

std::string thrown_message(const std::string& text) {
    try {
        parse_config(text);
    } catch (const std::invalid_argument& e) {
        return e.what();
    }
    return "";
}

}  // namespace

TEST_CASE("config parse failures carry a config prefix") {
    CHECK(thrown_message("not json").find("config: not valid JSON") != std::string::npos);

    std::string text = serialize_config(RunConfig{});
    const auto pos = text.find("\"delta\"");
    REQUIRE(pos != std::string::npos);
    text.replace(pos, 7, "\"felta\"");
    CHECK(thrown_message(text).rfind("config:", 0) == 0);

    std::string versioned = serialize_config(RunConfig{});
    const auto vpos = versioned.find("\"version\": 1");
    REQUIRE(vpos != std::string::npos);
    versioned.replace(vpos, 12, "\"version\": 9");
    CHECK(thrown_message(versioned).find("unsupported version") != std::string::npos);
}
