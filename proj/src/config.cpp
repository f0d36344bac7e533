#include "rnego/config.hpp"

#include <cmath>
#include <cstdint>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

namespace rnego {

namespace {

using nlohmann::json;

constexpr double kPi = 3.141592653589793238462643383279502884;

json interval_json(const Interval& iv) { return json{{"min", iv.min}, {"max", iv.max}}; }

Interval interval_from(const json& j) {
    return {j.at("min").get<double>(), j.at("max").get<double>()};
}

json weights_json(const RewardWeights& w) {
    return json{{"progress", w.progress},
                {"speed_dev", w.speed_dev},
                {"effort", w.effort},
                {"proximity", w.proximity},
                {"target_speed", w.target_speed}};
}

RewardWeights weights_from(const json& j) {
    return {j.at("progress").get<double>(), j.at("speed_dev").get<double>(),
            j.at("effort").get<double>(), j.at("proximity").get<double>(),
            j.at("target_speed").get<double>()};
}

std::uint64_t fnv1a64(const std::string& data) {
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : data) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

}  // namespace

GridSpec default_relative_grid() {
    GridSpec spec;
    spec.dims = {{-20.0, 20.0, 41, false},
                 {-20.0, 20.0, 41, false},
                 {-kPi, kPi, 25, true},
                 {0.0, 15.0, 21, false},
                 {0.0, 15.0, 21, false}};
    return spec;
}

void RunConfig::validate() const {
    grid.validate();
    if (grid.dims.size() != 5) {
        throw std::invalid_argument("config: grid must have the five relative-state dims");
    }
    target.validate();
    numerics.validate(grid.dims.size());
    bounds.validate();
    error_model.validate();
    library.validate();
    rewards.validate();
    if (!(game_dt > 0.0)) {
        throw std::invalid_argument("config: game_dt must be positive");
    }
    const double stages = library.horizon / game_dt;
    if (std::abs(stages - std::round(stages)) > 1e-9 * std::max(1.0, library.horizon)) {
        throw std::invalid_argument("config: game_dt must divide the planning horizon");
    }
    if (!(delta >= 0.0 && delta <= 1.0)) {
        throw std::invalid_argument("config: delta must lie in [0, 1]");
    }
    if (!(lattice_step > 0.0) || !(omega_lattice_step > 0.0)) {
        throw std::invalid_argument("config: quantization steps must be positive");
    }
    if (!(sensor_period > 0.0) || !(verification_period > 0.0) ||
        sensor_period > verification_period + 1e-12) {
        throw std::invalid_argument(
            "config: need 0 < sensor_period <= verification_period");
    }
    if (prior.follower < 0.0 || prior.leader < 0.0 ||
        std::abs(prior.follower + prior.leader - 1.0) > 1e-9) {
        throw std::invalid_argument("config: prior must be a normalized role belief");
    }
    if (!(corridor > 0.0)) {
        throw std::invalid_argument("config: corridor must be positive");
    }
}

std::string serialize_config(const RunConfig& cfg) {
    json j;
    j["version"] = 1;
    json dims = json::array();
    for (const auto& d : cfg.grid.dims) {
        dims.push_back({{"lower", d.lower},
                        {"upper", d.upper},
                        {"count", d.count},
                        {"periodic", d.periodic}});
    }
    j["grid"] = {{"dims", dims}};
    j["target"] = {{"r_coll", cfg.target.r_coll}};
    json num;
    num["cfl_number"] = cfg.numerics.cfl_number;
    num["time_order"] = cfg.numerics.time_order;
    num["tau"] = cfg.numerics.tau;
    num["checkpoint_stride"] = cfg.numerics.checkpoint_stride;
    if (cfg.numerics.alpha_override) {
        num["alpha_override"] = *cfg.numerics.alpha_override;
    }
    j["numerics"] = num;
    j["params"] = {{"l_f", cfg.params.l_f}, {"l_r", cfg.params.l_r}};
    j["bounds"] = {{"robot_accel", interval_json(cfg.bounds.robot_accel)},
                   {"robot_steer", interval_json(cfg.bounds.robot_steer)},
                   {"human_accel", interval_json(cfg.bounds.human_accel)},
                   {"human_omega", interval_json(cfg.bounds.human_omega)}};
    j["error_model"] = {{"sigma_a", cfg.error_model.sigma_a},
                        {"sigma_omega", cfg.error_model.sigma_omega},
                        {"k", cfg.error_model.k}};
    j["library"] = {{"n", cfg.library.n},
                    {"c0_range", interval_json(cfg.library.c0_range)},
                    {"c1_range", interval_json(cfg.library.c1_range)},
                    {"c2_range", interval_json(cfg.library.c2_range)},
                    {"clamp", interval_json(cfg.library.clamp)},
                    {"horizon", cfg.library.horizon},
                    {"seed", cfg.library.seed}};
    j["rewards"] = {{"human", weights_json(cfg.rewards.human)},
                    {"robot", weights_json(cfg.rewards.robot)},
                    {"activation_dist", cfg.rewards.activation_dist},
                    {"collision_dist", cfg.rewards.collision_dist},
                    {"beta", cfg.rewards.beta},
                    {"belief_floor", cfg.rewards.belief_floor}};
    j["game_dt"] = cfg.game_dt;
    j["delta"] = cfg.delta;
    j["lattice_step"] = cfg.lattice_step;
    j["omega_lattice_step"] = cfg.omega_lattice_step;
    j["sensor_period"] = cfg.sensor_period;
    j["verification_period"] = cfg.verification_period;
    j["prior"] = {{"follower", cfg.prior.follower}, {"leader", cfg.prior.leader}};
    j["corridor"] = cfg.corridor;
    return j.dump(2) + "\n";
}

RunConfig parse_config(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw std::invalid_argument(std::string("config: not valid JSON: ") + e.what());
    }
    try {
        if (j.at("version").get<int>() != 1) {
            throw std::invalid_argument("config: unsupported version");
        }
        RunConfig cfg;
        cfg.grid.dims.clear();
        for (const auto& d : j.at("grid").at("dims")) {
            cfg.grid.dims.push_back({d.at("lower").get<double>(), d.at("upper").get<double>(),
                                     d.at("count").get<std::size_t>(),
                                     d.at("periodic").get<bool>()});
        }
        cfg.target.r_coll = j.at("target").at("r_coll").get<double>();
        const auto& num = j.at("numerics");
        cfg.numerics.cfl_number = num.at("cfl_number").get<double>();
        cfg.numerics.time_order = num.at("time_order").get<int>();
        cfg.numerics.tau = num.at("tau").get<double>();
        cfg.numerics.checkpoint_stride = num.at("checkpoint_stride").get<std::size_t>();
        if (num.contains("alpha_override")) {
            cfg.numerics.alpha_override = num.at("alpha_override").get<std::vector<double>>();
        }
        cfg.params.l_f = j.at("params").at("l_f").get<double>();
        cfg.params.l_r = j.at("params").at("l_r").get<double>();
        const auto& b = j.at("bounds");
        cfg.bounds.robot_accel = interval_from(b.at("robot_accel"));
        cfg.bounds.robot_steer = interval_from(b.at("robot_steer"));
        cfg.bounds.human_accel = interval_from(b.at("human_accel"));
        cfg.bounds.human_omega = interval_from(b.at("human_omega"));
        const auto& e = j.at("error_model");
        cfg.error_model.sigma_a = e.at("sigma_a").get<double>();
        cfg.error_model.sigma_omega = e.at("sigma_omega").get<double>();
        cfg.error_model.k = e.at("k").get<double>();
        const auto& lib = j.at("library");
        cfg.library.n = lib.at("n").get<std::size_t>();
        cfg.library.c0_range = interval_from(lib.at("c0_range"));
        cfg.library.c1_range = interval_from(lib.at("c1_range"));
        cfg.library.c2_range = interval_from(lib.at("c2_range"));
        cfg.library.clamp = interval_from(lib.at("clamp"));
        cfg.library.horizon = lib.at("horizon").get<double>();
        cfg.library.seed = lib.at("seed").get<std::uint64_t>();
        const auto& r = j.at("rewards");
        cfg.rewards.human = weights_from(r.at("human"));
        cfg.rewards.robot = weights_from(r.at("robot"));
        cfg.rewards.activation_dist = r.at("activation_dist").get<double>();
        cfg.rewards.collision_dist = r.at("collision_dist").get<double>();
        cfg.rewards.beta = r.at("beta").get<double>();
        cfg.rewards.belief_floor = r.at("belief_floor").get<double>();
        cfg.game_dt = j.at("game_dt").get<double>();
        cfg.delta = j.at("delta").get<double>();
        cfg.lattice_step = j.at("lattice_step").get<double>();
        cfg.omega_lattice_step = j.at("omega_lattice_step").get<double>();
        cfg.sensor_period = j.at("sensor_period").get<double>();
        cfg.verification_period = j.at("verification_period").get<double>();
        cfg.prior.follower = j.at("prior").at("follower").get<double>();
        cfg.prior.leader = j.at("prior").at("leader").get<double>();
        cfg.corridor = j.at("corridor").get<double>();
        return cfg;
    } catch (const json::exception& err) {
        throw std::invalid_argument(std::string("config: ") + err.what());
    }
}

void save_config(const RunConfig& cfg, const std::string& path) {
    std::ofstream out(path);
    if (!out) {
        throw std::runtime_error("config: cannot write " + path);
    }
    out << serialize_config(cfg);
}

RunConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw std::runtime_error("config: cannot read " + path);
    }
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_config(buf.str());
}

std::string config_digest(const RunConfig& cfg) {
    std::ostringstream hex;
    hex << std::hex << fnv1a64(serialize_config(cfg));
    return hex.str();
}

}  // namespace rnego
