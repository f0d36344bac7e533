#include "rnego/monitor.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <functional>
#include <stdexcept>
#include <utility>

#include "json.hpp"
#include "rnego/frenet.hpp"
#include "rnego/solver.hpp"

namespace rnego {

namespace {

using nlohmann::json;

constexpr double kInf = std::numeric_limits<double>::infinity();

Interval clamp_interval(const Interval& iv, const Interval& physical) {
    return {std::clamp(iv.min, physical.min, physical.max),
            std::clamp(iv.max, physical.min, physical.max)};
}

/// Outward lattice snap, with the same near-lattice guard the bank uses so
/// jitter at a lattice point cannot widen the interval by a whole step.
std::array<long, 2> quantize_outward(const Interval& iv, double step) {
    const double eps = 1e-9;
    long lo = static_cast<long>(std::floor(iv.min / step + eps));
    long hi = static_cast<long>(std::ceil(iv.max / step - eps));
    if (hi < lo) {
        hi = lo;
    }
    return {lo, hi};
}

VehiclePose step_bicycle(VehiclePose p, const RobotControl& u, const VehicleParams& params,
                         double dt) {
    const double beta = slip_angle(u.delta_f, params);
    p.x += dt * p.v * std::cos(p.psi + beta);
    p.y += dt * p.v * std::sin(p.psi + beta);
    p.psi = wrap_angle(p.psi + dt * (p.v / params.l_r) * std::sin(beta));
    p.v = std::max(0.0, p.v + dt * u.a_r);
    return p;
}

double pair_distance(const VehiclePose& a, const VehiclePose& b) {
    return std::hypot(b.x - a.x, b.y - a.y);
}

double relative_speed(const VehiclePose& robot, const VehiclePose& human) {
    const double wx = human.v * std::cos(human.psi) - robot.v * std::cos(robot.psi);
    const double wy = human.v * std::sin(human.psi) - robot.v * std::sin(robot.psi);
    return std::hypot(wx, wy);
}

/// Domain policy shared by all modes: a relative position beyond the grid
/// extent lies outside any tube (safe, no flag); a speed outside the grid
/// leaves the query unanswerable and counts as a conservative breach.
SafetyDecision classify(double t, Mode mode, const Grid& grid, const RelativeState& rel,
                        const std::function<double(const std::array<double, 5>&)>& value_of) {
    SafetyDecision dec;
    dec.t = t;
    dec.mode = mode;
    const std::array<double, 5> s = rel.to_array();
    for (std::size_t d : {std::size_t{0}, std::size_t{1}}) {
        if (!grid.periodic(d) && (s[d] < grid.lower(d) || s[d] > grid.upper(d))) {
            dec.value = kInf;
            return dec;
        }
    }
    for (std::size_t d : {std::size_t{3}, std::size_t{4}}) {
        if (!grid.periodic(d) && (s[d] < grid.lower(d) || s[d] > grid.upper(d))) {
            dec.value = -kInf;
            dec.breach = true;
            dec.out_of_domain = true;
            return dec;
        }
    }
    dec.value = value_of(s);
    dec.breach = dec.value < 0.0;
    return dec;
}

json finite_or_null(double v) { return std::isfinite(v) ? json(v) : json(); }

json decision_json(const SafetyDecision& d) {
    json j;
    j["t"] = d.t;
    j["breach"] = d.breach;
    j["value"] = finite_or_null(d.value);
    j["out_of_domain"] = d.out_of_domain;
    if (d.override_control) {
        j["override"] = {{"a_r", d.override_control->a_r},
                         {"delta_f", d.override_control->delta_f}};
    } else {
        j["override"] = nullptr;
    }
    return j;
}

}  // namespace

std::string mode_name(Mode m) {
    switch (m) {
        case Mode::full: return "full";
        case Mode::prediction: return "prediction";
        case Mode::negotiation: return "negotiation";
    }
    throw std::logic_error("mode_name: unknown mode");
}

Mode mode_from_name(const std::string& name) {
    if (name == "full") return Mode::full;
    if (name == "prediction") return Mode::prediction;
    if (name == "negotiation") return Mode::negotiation;
    throw std::invalid_argument("unknown mode: " + name);
}

RelativeState relative_state(const VehiclePose& robot, const VehiclePose& human) {
    const double dx = human.x - robot.x;
    const double dy = human.y - robot.y;
    const double c = std::cos(robot.psi);
    const double s = std::sin(robot.psi);
    RelativeState rel;
    rel.x = c * dx + s * dy;
    rel.y = -s * dx + c * dy;
    rel.psi = wrap_angle(human.psi - robot.psi);
    rel.v_r = robot.v;
    rel.v_h = human.v;
    return rel;
}

SafetyDecision verify_step(const VehiclePose& robot, const VehiclePose& human,
                           const ValueFunction& tube, double t, Mode mode) {
    const RelativeState rel = relative_state(robot, human);
    return classify(t, mode, tube.grid, rel,
                    [&](const std::array<double, 5>& s) { return interpolate(tube, s); });
}

SafetyDecision verify_step(const VehiclePose& robot, const VehiclePose& human,
                           const BrtBank& bank, const Selection& sel, double t, Mode mode) {
    const RelativeState rel = relative_state(robot, human);
    return classify(t, mode, bank.entries.front().vf.grid, rel,
                    [&](const std::array<double, 5>& s) {
                        return selection_value(bank, sel, s);
                    });
}

RobotControl safety_control(const ValueFunction& vf, const RelativeState& state,
                            const ControlBounds& bounds, const VehicleParams& params) {
    const Grid& grid = vf.grid;
    const std::array<double, 5> x = state.to_array();
    std::array<double, 5> costate{};
    double norm2 = 0.0;
    for (std::size_t d = 0; d < 5; ++d) {
        const double h = grid.spacing(d);
        std::array<double, 5> xp = x;
        std::array<double, 5> xm = x;
        double denom;
        if (grid.periodic(d)) {
            xp[d] = x[d] + h;
            xm[d] = x[d] - h;
            denom = 2.0 * h;
        } else {
            xp[d] = std::min(x[d] + h, grid.upper(d));
            xm[d] = std::max(x[d] - h, grid.lower(d));
            denom = xp[d] - xm[d];
        }
        const double vp = interpolate(vf, xp);
        const double vm = interpolate(vf, xm);
        costate[d] = denom > 0.0 ? (vp - vm) / denom : 0.0;
        norm2 += costate[d] * costate[d];
    }
    if (std::sqrt(norm2) < 1e-9) {
        return RobotControl{bounds.robot_accel.min, 0.0};
    }
    return extremal_hamiltonian(state, costate, bounds, params).u_star;
}

double min_ttc(const InteractionLog& log, double radius) {
    log.validate();
    double best = kInf;
    for (const auto& rec : log.records) {
        const double rx = rec.human.x - rec.robot.x;
        const double ry = rec.human.y - rec.robot.y;
        const double c = rx * rx + ry * ry - radius * radius;
        if (c <= 0.0) {
            return 0.0;
        }
        const double wx =
            rec.human.v * std::cos(rec.human.psi) - rec.robot.v * std::cos(rec.robot.psi);
        const double wy =
            rec.human.v * std::sin(rec.human.psi) - rec.robot.v * std::sin(rec.robot.psi);
        const double a = wx * wx + wy * wy;
        if (a == 0.0) {
            continue;
        }
        const double b = 2.0 * (rx * wx + ry * wy);
        const double disc = b * b - 4.0 * a * c;
        if (disc < 0.0) {
            continue;
        }
        // c > 0 makes both roots share a sign; the earlier root is the entry
        // time when they are positive, otherwise the pair is receding.
        const double t_enter = (-b - std::sqrt(disc)) / (2.0 * a);
        if (t_enter >= 0.0) {
            best = std::min(best, t_enter);
        }
    }
    return best;
}

SolveCache::SolveCache(const RunConfig& cfg, NumericsConfig numerics)
    : grid_(cfg.grid),
      target_(cfg.target),
      params_(cfg.params),
      base_bounds_(cfg.bounds),
      accel_step_(cfg.lattice_step),
      omega_step_(cfg.omega_lattice_step),
      numerics_(std::move(numerics)) {
    grid_.validate();
    target_.validate();
    base_bounds_.validate();
    numerics_.validate(grid_.dims.size());
    if (!(accel_step_ > 0.0) || !(omega_step_ > 0.0)) {
        throw std::invalid_argument("solve cache: lattice steps must be positive");
    }
}

const ValueFunction& SolveCache::tube_for(const HumanBounds& estimate) {
    const Interval accel = clamp_interval(estimate.accel, base_bounds_.human_accel);
    const Interval omega = clamp_interval(estimate.omega, base_bounds_.human_omega);
    const auto qa = quantize_outward(accel, accel_step_);
    const auto qw = quantize_outward(omega, omega_step_);
    const std::array<long, 4> key{qa[0], qa[1], qw[0], qw[1]};
    auto it = cache_.find(key);
    if (it != cache_.end()) {
        return *it->second;
    }

    ControlBounds bounds = base_bounds_;
    bounds.human_accel = {
        std::max(static_cast<double>(qa[0]) * accel_step_, base_bounds_.human_accel.min),
        std::min(static_cast<double>(qa[1]) * accel_step_, base_bounds_.human_accel.max)};
    bounds.human_omega = {
        std::max(static_cast<double>(qw[0]) * omega_step_, base_bounds_.human_omega.min),
        std::min(static_cast<double>(qw[1]) * omega_step_, base_bounds_.human_omega.max)};
    const Grid grid(grid_);
    RelativeDynamicsModel model(params_, bounds);
    model.prepare(grid);
    SolveOutput out = solve_brt(model, grid, target_, numerics_);
    auto stored = std::make_unique<ValueFunction>(std::move(out.vf));
    const ValueFunction& ref = *stored;
    cache_.emplace(key, std::move(stored));
    return ref;
}

namespace {

/// Precomputed negotiation inputs: path frames, per-record stations, and
/// finite-difference human accelerations.
struct NegotiationContext {
    FrenetFrame robot_frame;
    FrenetFrame human_frame;
    std::vector<double> robot_station;
    std::vector<double> human_station;
    std::vector<double> human_accel;  // index 0 unused
};

NegotiationContext build_negotiation_context(const InteractionLog& log,
                                             const RunConfig& cfg) {
    NegotiationContext ctx;
    ctx.robot_frame = build_frame(log.plan.path);
    ctx.human_frame = build_frame(log.records.front().predicted_path);
    const std::size_t n = log.records.size();
    ctx.robot_station.resize(n);
    ctx.human_station.resize(n);
    ctx.human_accel.assign(n, 0.0);
    for (std::size_t k = 0; k < n; ++k) {
        const auto& rec = log.records[k];
        ctx.robot_station[k] =
            project_pose(ctx.robot_frame, rec.robot.x, rec.robot.y, rec.robot.psi,
                         cfg.corridor)
                .s;
        ctx.human_station[k] =
            project_pose(ctx.human_frame, rec.human.x, rec.human.y, rec.human.psi,
                         cfg.corridor)
                .s;
        if (k > 0) {
            const double dt = rec.t - log.records[k - 1].t;
            ctx.human_accel[k] = (rec.human.v - log.records[k - 1].human.v) / dt;
        }
    }
    return ctx;
}

AccelController plan_controller_at(const RobotPlan& plan, double t0, double horizon) {
    std::vector<std::pair<double, double>> samples;
    for (const auto& [t, a] : plan.accel) {
        if (t >= t0 - 1e-9 && t <= t0 + horizon + 1e-9) {
            samples.emplace_back(t - t0, a);
        }
    }
    return fit_plan_controller(samples, horizon);
}

}  // namespace

std::vector<BeliefSample> infer_beliefs(const InteractionLog& log,
                                        const ControllerLibrary& lib,
                                        const RunConfig& cfg) {
    log.validate();
    cfg.validate();
    const NegotiationContext ctx = build_negotiation_context(log, cfg);
    const GameGeometry geo{&ctx.robot_frame, &ctx.human_frame};
    const double horizon = lib.horizon;
    const double t0 = log.records.front().t;

    std::vector<BeliefSample> trace;
    RoleBelief belief = cfg.prior;
    std::size_t win_start = 0;
    for (std::size_t k = 0; k < log.records.size(); ++k) {
        const LogRecord& rec = log.records[k];
        if (rec.t - horizon < t0 - 1e-9) {
            continue;
        }
        while (win_start + 1 < log.records.size() &&
               log.records[win_start + 1].t <= rec.t - horizon + 1e-9) {
            ++win_start;
        }
        ObservedControls xi;
        xi.window_end = rec.t;
        xi.window = horizon;
        for (std::size_t j = win_start + 1; j <= k; ++j) {
            xi.samples.emplace_back(log.records[j].t, ctx.human_accel[j]);
        }
        GameState ws;
        ws.robot = {ctx.robot_station[win_start], log.records[win_start].robot.v};
        ws.human = {ctx.human_station[win_start], log.records[win_start].human.v};
        ws.t = log.records[win_start].t;
        ws.dt = cfg.game_dt;
        const AccelController plan0 =
            plan_controller_at(log.plan, log.records[win_start].t, horizon);
        belief = belief_update(belief, xi, ws, plan0, lib, cfg.rewards, geo).belief;
        trace.push_back({rec.t, belief});
    }
    return trace;
}

ReplayReport run_replay(const InteractionLog& log, const ModeResources& res,
                        const RunConfig& cfg, const std::vector<Mode>& modes) {
    log.validate();
    cfg.validate();

    ReplayReport report;
    report.min_ttc = min_ttc(log, cfg.target.r_coll);
    report.dangerous = report.min_ttc < 2.0;
    if (modes.empty()) {
        return report;
    }

    const std::size_t n = log.records.size();
    // Shared verification schedule: the first record, then the first record
    // at or past each verification-period multiple.
    std::vector<char> is_ver(n, 0);
    is_ver[0] = 1;
    double next_due = log.records.front().t + cfg.verification_period;
    for (std::size_t k = 1; k < n; ++k) {
        if (log.records[k].t >= next_due - 1e-9) {
            is_ver[k] = 1;
            while (next_due <= log.records[k].t + 1e-9) {
                next_due += cfg.verification_period;
            }
        }
    }

    const bool wants_negotiation =
        std::find(modes.begin(), modes.end(), Mode::negotiation) != modes.end();
    NegotiationContext ctx;
    if (wants_negotiation) {
        if (res.bank == nullptr || res.library == nullptr) {
            throw std::invalid_argument("run_replay: negotiation mode needs a bank and library");
        }
        ctx = build_negotiation_context(log, cfg);
        report.belief_trace = infer_beliefs(log, *res.library, cfg);
    }

    const double horizon = cfg.library.horizon;

    for (const Mode mode : modes) {
        if (mode == Mode::full && res.full_tube == nullptr) {
            throw std::invalid_argument("run_replay: full mode needs the full-bound tube");
        }
        if (mode == Mode::prediction && res.prediction_cache == nullptr) {
            throw std::invalid_argument("run_replay: prediction mode needs a solve cache");
        }
        const auto t_begin = std::chrono::steady_clock::now();
        ModeReport mrep;
        mrep.mode = mode;

        RoleBelief belief = cfg.prior;
        std::size_t belief_next = 0;
        bool overridden = false;
        VehiclePose sim_robot;
        RobotControl held{cfg.bounds.robot_accel.min, 0.0};
        const GameGeometry geo{&ctx.robot_frame, &ctx.human_frame};

        for (std::size_t k = 0; k < n; ++k) {
            const LogRecord& rec = log.records[k];
            const VehiclePose robot_now = overridden ? sim_robot : rec.robot;

            // Belief updates happen at sensor rate on log poses; consume the
            // precomputed trace up to the current record.
            while (belief_next < report.belief_trace.size() &&
                   report.belief_trace[belief_next].t <= rec.t + 1e-12) {
                belief = report.belief_trace[belief_next].belief;
                ++belief_next;
            }

            if (is_ver[k]) {
                const RelativeState rel = relative_state(robot_now, rec.human);
                SafetyDecision dec;
                const ValueFunction* grad_vf = nullptr;
                if (mode == Mode::full) {
                    dec = verify_step(robot_now, rec.human, *res.full_tube, rec.t, mode);
                    grad_vf = res.full_tube;
                } else if (mode == Mode::prediction) {
                    const FrenetFrame frame = build_frame(rec.predicted_path);
                    const HumanBounds hb =
                        estimate_bounds(rec.prediction, frame, cfg.error_model, cfg.corridor);
                    const ValueFunction& vf = res.prediction_cache->tube_for(hb);
                    dec = verify_step(robot_now, rec.human, vf, rec.t, mode);
                    grad_vf = &vf;
                } else {
                    GameState gs;
                    gs.robot = {ctx.robot_station[k], rec.robot.v};
                    gs.human = {ctx.human_station[k], rec.human.v};
                    gs.t = rec.t;
                    gs.dt = cfg.game_dt;
                    const AccelController plan_now =
                        plan_controller_at(log.plan, rec.t, horizon);
                    const std::vector<double> p_f =
                        follower_distribution(gs, plan_now, *res.library, cfg.rewards, geo);
                    const std::vector<double> p_l =
                        leader_distribution(gs, *res.library, cfg.rewards, geo);
                    const std::vector<double> probs = expected_probs(belief, p_f, p_l);
                    const Selection sel =
                        select_included(*res.bank, *res.library, probs, cfg.delta);
                    SelectionSample sample;
                    sample.t = rec.t;
                    sample.cumulative_prob = sel.cumulative_prob;
                    for (const std::size_t e : sel.included_entries) {
                        const BoundBucket& b = res.bank->entries[e].bucket;
                        sample.buckets.push_back({b.lo_idx, b.hi_idx});
                    }
                    report.selection_trace.push_back(std::move(sample));
                    const BrtBank& bank = *res.bank;
                    dec = verify_step(robot_now, rec.human, bank, sel, rec.t, mode);
                    if (!dec.out_of_domain && std::isfinite(dec.value)) {
                        // Gradient of the active entry, the one attaining the min.
                        double best = kInf;
                        for (const std::size_t e : sel.included_entries) {
                            const double v = interpolate(bank.entries[e].vf, rel.to_array());
                            if (v < best) {
                                best = v;
                                grad_vf = &bank.entries[e].vf;
                            }
                        }
                    }
                }

                if (dec.breach) {
                    if (!overridden) {
                        overridden = true;
                        sim_robot = robot_now;
                        mrep.first_breach =
                            BreachEvent{rec.t, relative_speed(robot_now, rec.human),
                                        pair_distance(robot_now, rec.human), dec.value};
                    }
                    ++mrep.breach_steps;
                }
                if (overridden) {
                    if (dec.out_of_domain) {
                        held = RobotControl{cfg.bounds.robot_accel.min, 0.0};
                    } else if (std::isfinite(dec.value) && grad_vf != nullptr) {
                        held = safety_control(*grad_vf, rel, cfg.bounds, cfg.params);
                    }
                    // Beyond the grid extent the previous control stays in force.
                    dec.override_control = held;
                }
                mrep.decisions.push_back(dec);
            }

            if (overridden && k + 1 < n) {
                const double dt = log.records[k + 1].t - rec.t;
                sim_robot = step_bicycle(sim_robot, held, cfg.params, dt);
            }
        }

        mrep.wall_ms = std::chrono::duration<double, std::milli>(
                           std::chrono::steady_clock::now() - t_begin)
                           .count();
        report.modes.push_back(std::move(mrep));
    }
    return report;
}

std::string serialize_report(const ReplayReport& report, bool include_timings) {
    json j;
    j["schema"] = "replay-report";
    j["version"] = 1;
    j["min_ttc"] = finite_or_null(report.min_ttc);
    j["dangerous"] = report.dangerous;
    json modes = json::array();
    for (const auto& m : report.modes) {
        json jm;
        jm["mode"] = mode_name(m.mode);
        jm["breach_steps"] = m.breach_steps;
        if (m.first_breach) {
            jm["first_breach"] = {{"t", m.first_breach->t},
                                  {"rel_speed", m.first_breach->rel_speed},
                                  {"rel_distance", m.first_breach->rel_distance},
                                  {"value", finite_or_null(m.first_breach->value)}};
        } else {
            jm["first_breach"] = nullptr;
        }
        json decs = json::array();
        for (const auto& d : m.decisions) {
            decs.push_back(decision_json(d));
        }
        jm["decisions"] = std::move(decs);
        if (include_timings) {
            jm["wall_ms"] = m.wall_ms;
        }
        modes.push_back(std::move(jm));
    }
    j["modes"] = std::move(modes);
    json beliefs = json::array();
    for (const auto& b : report.belief_trace) {
        beliefs.push_back(
            {{"t", b.t}, {"follower", b.belief.follower}, {"leader", b.belief.leader}});
    }
    j["belief_trace"] = std::move(beliefs);
    json selections = json::array();
    for (const auto& s : report.selection_trace) {
        json buckets = json::array();
        for (const auto& b : s.buckets) {
            buckets.push_back({b[0], b[1]});
        }
        selections.push_back({{"t", s.t},
                              {"cumulative_prob", s.cumulative_prob},
                              {"buckets", std::move(buckets)}});
    }
    j["selection_trace"] = std::move(selections);
    return j.dump(2) + "\n";
}

SuiteSummary compare_modes(const std::vector<ReplayReport>& reports) {
    if (reports.empty()) {
        throw std::invalid_argument("compare_modes: need at least one report");
    }
    struct Acc {
        std::size_t interactions = 0;
        std::size_t breached = 0;
        double speed_sum = 0.0;
        double dist_sum = 0.0;
        double ttc_sum = 0.0;
        std::size_t finite_ttc = 0;
    };
    std::map<Mode, Acc> acc;
    for (const auto& report : reports) {
        for (const auto& m : report.modes) {
            Acc& a = acc[m.mode];
            ++a.interactions;
            if (m.breach_steps > 0) {
                ++a.breached;
                if (m.first_breach) {
                    a.speed_sum += m.first_breach->rel_speed;
                    a.dist_sum += m.first_breach->rel_distance;
                }
                if (std::isfinite(report.min_ttc)) {
                    a.ttc_sum += report.min_ttc;
                    ++a.finite_ttc;
                }
            }
        }
    }

    SuiteSummary summary;
    std::vector<std::size_t> chain;
    for (const Mode mode : {Mode::full, Mode::prediction, Mode::negotiation}) {
        auto it = acc.find(mode);
        if (it == acc.end()) {
            continue;
        }
        const Acc& a = it->second;
        ModeSummary ms;
        ms.mode = mode;
        ms.interactions = a.interactions;
        ms.breached = a.breached;
        const double nan = std::numeric_limits<double>::quiet_NaN();
        ms.mean_rel_speed = a.breached > 0 ? a.speed_sum / static_cast<double>(a.breached) : nan;
        ms.mean_rel_distance =
            a.breached > 0 ? a.dist_sum / static_cast<double>(a.breached) : nan;
        ms.mean_min_ttc =
            a.finite_ttc > 0 ? a.ttc_sum / static_cast<double>(a.finite_ttc) : nan;
        summary.modes.push_back(ms);
        chain.push_back(a.breached);
    }
    for (std::size_t i = 1; i < chain.size(); ++i) {
        if (chain[i] > chain[i - 1]) {
            summary.ordering_ok = false;
        }
    }
    return summary;
}

std::string serialize_summary(const SuiteSummary& summary) {
    json j;
    j["schema"] = "mode-summary";
    j["version"] = 1;
    j["ordering_ok"] = summary.ordering_ok;
    json modes = json::array();
    for (const auto& m : summary.modes) {
        modes.push_back({{"mode", mode_name(m.mode)},
                         {"interactions", m.interactions},
                         {"breached", m.breached},
                         {"mean_rel_speed", finite_or_null(m.mean_rel_speed)},
                         {"mean_rel_distance", finite_or_null(m.mean_rel_distance)},
                         {"mean_min_ttc", finite_or_null(m.mean_min_ttc)}});
    }
    j["modes"] = std::move(modes);
    return j.dump(2) + "\n";
}

}  // namespace rnego
