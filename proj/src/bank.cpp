#include "rnego/bank.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <limits>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "json.hpp"
#include "rnego/vf_io.hpp"

namespace rnego {

namespace {

using nlohmann::json;

constexpr double kLatticeEps = 1e-9;  // in lattice units

std::uint64_t fnv1a64(const std::string& data) {
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : data) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

/// Stable digest of everything that determines an entry's solve, so a loaded
/// bank can detect manifests edited out from under their value files.
std::string entry_digest(const BrtBank& bank, const BoundBucket& bucket) {
    std::ostringstream os;
    os.precision(17);
    os << bucket.lo_idx << '|' << bucket.hi_idx << '|' << bank.lattice_step << '|'
       << bank.omega.min << '|' << bank.omega.max << '|' << bank.base_bounds.robot_accel.min
       << '|' << bank.base_bounds.robot_accel.max << '|' << bank.base_bounds.robot_steer.min
       << '|' << bank.base_bounds.robot_steer.max << '|' << bank.params.l_f << '|'
       << bank.params.l_r << '|' << bank.numerics.cfl_number << '|' << bank.numerics.time_order
       << '|' << bank.numerics.tau;
    if (bank.numerics.alpha_override) {
        for (double a : *bank.numerics.alpha_override) {
            os << '|' << a;
        }
    }
    std::ostringstream hex;
    hex << std::hex << fnv1a64(os.str());
    return hex.str();
}

json interval_json(const Interval& iv) { return json{{"min", iv.min}, {"max", iv.max}}; }

Interval interval_from(const json& j) {
    return {j.at("min").get<double>(), j.at("max").get<double>()};
}

}  // namespace

BoundBucket bucket_of(const AccelController& pi, double step) {
    if (!(step > 0.0) || !std::isfinite(step)) {
        throw std::invalid_argument("bucket_of: lattice step must be positive");
    }
    const Interval r = pi.range();
    BoundBucket b;
    b.step = step;
    b.lo_idx = static_cast<long>(std::floor(r.min / step + kLatticeEps));
    b.hi_idx = static_cast<long>(std::ceil(r.max / step - kLatticeEps));
    if (b.hi_idx < b.lo_idx) {
        b.hi_idx = b.lo_idx;
    }
    return b;
}

std::size_t BrtBank::entry_for(const AccelController& pi) const {
    const BoundBucket b = bucket_of(pi, lattice_step);
    const auto it = by_bucket_.find({b.lo_idx, b.hi_idx});
    if (it == by_bucket_.end()) {
        throw std::invalid_argument("bank: controller bucket [" +
                                    std::to_string(b.interval().min) + ", " +
                                    std::to_string(b.interval().max) + "] has no entry");
    }
    return it->second;
}

BrtBank build_bank(const ControllerLibrary& lib, const BankBuildConfig& cfg,
                   const ProgressFn& progress) {
    if (lib.controllers.empty()) {
        throw std::invalid_argument("bank: controller library is empty");
    }
    if (!(cfg.lattice_step > 0.0) || !std::isfinite(cfg.lattice_step)) {
        throw std::invalid_argument("bank: lattice step must be positive");
    }
    cfg.grid.validate();
    cfg.target.validate();
    cfg.base_bounds.validate();
    const Grid grid(cfg.grid);
    if (grid.ndim() != RelativeDynamicsModel::kDim) {
        throw std::invalid_argument("bank: grid must cover the five relative-state dims");
    }
    NumericsConfig num = cfg.numerics;
    num.validate(grid.ndim());

    BrtBank bank;
    bank.lattice_step = cfg.lattice_step;
    bank.omega = cfg.base_bounds.human_omega;
    bank.base_bounds = cfg.base_bounds;
    bank.params = cfg.params;

    std::vector<BoundBucket> unique;
    for (const auto& pi : lib.controllers) {
        const BoundBucket b = bucket_of(pi, cfg.lattice_step);
        const std::pair<long, long> key{b.lo_idx, b.hi_idx};
        if (bank.by_bucket_.emplace(key, unique.size()).second) {
            unique.push_back(b);
        }
    }

    if (!num.alpha_override) {
        // One dissipation envelope wide enough for every entry and for the
        // full physical bound, so direct solves stay comparable to the bank.
        Interval env = cfg.base_bounds.human_accel;
        for (const auto& b : unique) {
            env.min = std::min(env.min, b.interval().min);
            env.max = std::max(env.max, b.interval().max);
        }
        ControlBounds eb = cfg.base_bounds;
        eb.human_accel = env;
        const RelativeDynamicsModel envelope(cfg.params, eb);
        const auto a = envelope.alpha(grid);
        num.alpha_override = std::vector<double>(a.begin(), a.end());
    }
    bank.numerics = num;

    const ValueFunction terminal = initial_level_set(grid, cfg.target);
    bank.entries.reserve(unique.size());
    for (const auto& bucket : unique) {
        ControlBounds bb = cfg.base_bounds;
        bb.human_accel = bucket.interval();
        RelativeDynamicsModel model(cfg.params, bb);
        model.prepare(grid);
        try {
            SolveOutput out = solve_brt(model, grid, terminal.values, num, {}, progress);
            bank.entries.push_back({bucket, std::move(out.vf)});
        } catch (const SolveError& err) {
            throw SolveError("bank entry [" + std::to_string(bucket.interval().min) + ", " +
                                 std::to_string(bucket.interval().max) + "]: " + err.what(),
                             err.step(), err.node());
        }
    }
    return bank;
}

std::vector<double> expected_probs(const RoleBelief& belief,
                                   const std::vector<double>& p_follower,
                                   const std::vector<double>& p_leader) {
    if (p_follower.size() != p_leader.size()) {
        throw std::invalid_argument("expected_probs: distribution lengths differ");
    }
    if (belief.follower < 0.0 || belief.leader < 0.0 ||
        std::abs(belief.follower + belief.leader - 1.0) > 1e-9) {
        throw std::invalid_argument("expected_probs: belief is not normalized");
    }
    std::vector<double> out(p_follower.size());
    for (std::size_t i = 0; i < out.size(); ++i) {
        out[i] = belief.follower * p_follower[i] + belief.leader * p_leader[i];
    }
    return out;
}

Selection select_included(const BrtBank& bank, const ControllerLibrary& lib,
                          const std::vector<double>& probs, double delta) {
    if (bank.entries.empty()) {
        throw std::invalid_argument("select_brt: bank is empty");
    }
    if (probs.size() != lib.size()) {
        throw std::invalid_argument("select_brt: one probability per controller required");
    }
    if (!(delta >= 0.0 && delta <= 1.0)) {
        throw std::invalid_argument("select_brt: delta must lie in [0, 1]");
    }
    double sum = 0.0;
    for (double p : probs) {
        if (!(p >= 0.0)) {
            throw std::invalid_argument("select_brt: negative probability");
        }
        sum += p;
    }
    if (std::abs(sum - 1.0) > 1e-9) {
        throw std::invalid_argument("select_brt: probabilities must sum to one");
    }

    std::vector<std::size_t> order(probs.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        if (probs[a] != probs[b]) {
            return probs[a] > probs[b];
        }
        return a < b;
    });

    std::vector<char> included(bank.entries.size(), 0);
    Selection sel;
    double cumulative = 0.0;
    for (const std::size_t i : order) {
        cumulative += probs[i];
        const std::size_t e = bank.entry_for(lib.controllers[i]);
        if (!included[e]) {
            included[e] = 1;
            sel.included_entries.push_back(e);
        }
        sel.included_controllers.push_back(i);
        // slack absorbs sums such as 0.6 + 0.3 landing one ulp below 0.9
        if (cumulative >= delta - 1e-12) {
            break;
        }
    }
    sel.cumulative_prob = std::min(cumulative, 1.0);
    return sel;
}

double selection_value(const BrtBank& bank, const Selection& sel,
                       const std::array<double, 5>& state) {
    if (sel.included_entries.empty()) {
        throw std::logic_error("selection: no included entries");
    }
    double best = std::numeric_limits<double>::infinity();
    for (const std::size_t e : sel.included_entries) {
        best = std::min(best, interpolate(bank.entries[e].vf, state));
    }
    return best;
}

CompositeBRT select_brt(const BrtBank& bank, const ControllerLibrary& lib,
                        const std::vector<double>& probs, double delta) {
    Selection sel = select_included(bank, lib, probs, delta);
    std::vector<double> union_values;
    for (const std::size_t e : sel.included_entries) {
        const auto& vals = bank.entries[e].vf.values;
        if (union_values.empty()) {
            union_values = vals;
        } else {
            for (std::size_t k = 0; k < vals.size(); ++k) {
                union_values[k] = std::min(union_values[k], vals[k]);
            }
        }
    }
    const ValueFunction& head = bank.entries[sel.included_entries.front()].vf;
    return CompositeBRT{std::move(sel.included_entries), std::move(sel.included_controllers),
                        sel.cumulative_prob,
                        ValueFunction(head.grid, head.tau, std::move(union_values))};
}

double composite_value(const BrtBank& bank, const CompositeBRT& composite,
                       const std::array<double, 5>& state) {
    if (composite.included_entries.empty()) {
        throw std::logic_error("composite: no included entries");
    }
    double best = std::numeric_limits<double>::infinity();
    for (const std::size_t e : composite.included_entries) {
        best = std::min(best, interpolate(bank.entries[e].vf, state));
    }
    return best;
}

bool composite_contains(const BrtBank& bank, const CompositeBRT& composite,
                        const std::array<double, 5>& state) {
    return composite_value(bank, composite, state) < 0.0;
}

void save_bank(const BrtBank& bank, const std::string& dir) {
    namespace fs = std::filesystem;
    fs::create_directories(dir);
    json index;
    index["version"] = 1;
    index["lattice_step"] = bank.lattice_step;
    index["omega"] = interval_json(bank.omega);
    index["base_bounds"] = {{"robot_accel", interval_json(bank.base_bounds.robot_accel)},
                            {"robot_steer", interval_json(bank.base_bounds.robot_steer)},
                            {"human_accel", interval_json(bank.base_bounds.human_accel)},
                            {"human_omega", interval_json(bank.base_bounds.human_omega)}};
    index["params"] = {{"l_f", bank.params.l_f}, {"l_r", bank.params.l_r}};
    json num;
    num["cfl_number"] = bank.numerics.cfl_number;
    num["time_order"] = bank.numerics.time_order;
    num["tau"] = bank.numerics.tau;
    if (bank.numerics.alpha_override) {
        num["alpha_override"] = *bank.numerics.alpha_override;
    }
    index["numerics"] = num;
    json entries = json::array();
    for (std::size_t i = 0; i < bank.entries.size(); ++i) {
        const auto& e = bank.entries[i];
        const std::string file = "entry_" + std::to_string(i) + ".vf";
        save_value_function(e.vf, (fs::path(dir) / file).string());
        entries.push_back({{"lo_idx", e.bucket.lo_idx},
                           {"hi_idx", e.bucket.hi_idx},
                           {"file", file},
                           {"digest", entry_digest(bank, e.bucket)}});
    }
    index["entries"] = entries;
    std::ofstream out(fs::path(dir) / "index.json");
    if (!out) {
        throw std::runtime_error("bank: cannot write index in " + dir);
    }
    out << index.dump(2) << '\n';
}

BrtBank load_bank(const std::string& dir) {
    namespace fs = std::filesystem;
    std::ifstream in(fs::path(dir) / "index.json");
    if (!in) {
        throw std::runtime_error("bank: missing index in " + dir);
    }
    json index = json::parse(in);
    if (index.at("version").get<int>() != 1) {
        throw std::runtime_error("bank: unsupported index version");
    }
    BrtBank bank;
    bank.lattice_step = index.at("lattice_step").get<double>();
    bank.omega = interval_from(index.at("omega"));
    const auto& bb = index.at("base_bounds");
    bank.base_bounds.robot_accel = interval_from(bb.at("robot_accel"));
    bank.base_bounds.robot_steer = interval_from(bb.at("robot_steer"));
    bank.base_bounds.human_accel = interval_from(bb.at("human_accel"));
    bank.base_bounds.human_omega = interval_from(bb.at("human_omega"));
    bank.params.l_f = index.at("params").at("l_f").get<double>();
    bank.params.l_r = index.at("params").at("l_r").get<double>();
    const auto& num = index.at("numerics");
    bank.numerics.cfl_number = num.at("cfl_number").get<double>();
    bank.numerics.time_order = num.at("time_order").get<int>();
    bank.numerics.tau = num.at("tau").get<double>();
    if (num.contains("alpha_override")) {
        bank.numerics.alpha_override = num.at("alpha_override").get<std::vector<double>>();
    }
    for (const auto& je : index.at("entries")) {
        BoundBucket bucket;
        bucket.lo_idx = je.at("lo_idx").get<long>();
        bucket.hi_idx = je.at("hi_idx").get<long>();
        bucket.step = bank.lattice_step;
        if (je.at("digest").get<std::string>() != entry_digest(bank, bucket)) {
            throw std::runtime_error("bank: entry digest mismatch in " + dir);
        }
        ValueFunction vf = load_value_function((fs::path(dir) / je.at("file").get<std::string>()).string());
        if (!bank.entries.empty() && !vf.grid.same_spec(bank.entries.front().vf.grid)) {
            throw std::runtime_error("bank: entries disagree on the grid");
        }
        const std::pair<long, long> key{bucket.lo_idx, bucket.hi_idx};
        if (!bank.by_bucket_.emplace(key, bank.entries.size()).second) {
            throw std::runtime_error("bank: duplicate bucket in index");
        }
        bank.entries.push_back({bucket, std::move(vf)});
    }
    if (bank.entries.empty()) {
        throw std::runtime_error("bank: index lists no entries");
    }
    return bank;
}

}  // namespace rnego
