#include "rnego/cli.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <limits>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "rnego/bank.hpp"
#include "rnego/config.hpp"
#include "rnego/log.hpp"
#include "rnego/monitor.hpp"
#include "rnego/scenario.hpp"
#include "rnego/solver.hpp"
#include "rnego/vf_io.hpp"

namespace rnego {

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

constexpr const char* kToolVersion = "0.1.0";

std::string default_out_dir() {
    const char* env = std::getenv("RNEGO_OUT_DIR");
    return (env != nullptr && *env != '\0') ? env : ".";
}

RunConfig config_from(const std::string& path) {
    RunConfig cfg = path.empty() ? RunConfig{} : load_config(path);
    cfg.validate();
    return cfg;
}

/// Dissipation pinned to the full-bound requirement so that every solve in
/// one run shares a scheme and stays pointwise comparable.
NumericsConfig pinned_numerics(const RunConfig& cfg) {
    NumericsConfig num = cfg.numerics;
    if (!num.alpha_override) {
        const Grid grid(cfg.grid);
        RelativeDynamicsModel model(cfg.params, cfg.bounds);
        model.prepare(grid);
        const std::array<double, 5> a = model.alpha(grid);
        num.alpha_override = std::vector<double>(a.begin(), a.end());
    }
    return num;
}

BankBuildConfig bank_build_config(const RunConfig& cfg) {
    return {cfg.grid, cfg.target, cfg.numerics, cfg.params, cfg.bounds, cfg.lattice_step};
}

json versions_json() {
    return {{"tool", kToolVersion},    {"config", 1},  {"log", 1},
            {"report", 1},             {"summary", 1}, {"bank", 1},
            {"value_function", "RNVF0001"}};
}

void write_manifest(const fs::path& dir, const std::string& command, const RunConfig& cfg,
                    json details) {
    json m;
    m["schema"] = "run-manifest";
    m["version"] = 1;
    m["command"] = command;
    m["config_digest"] = config_digest(cfg);
    m["versions"] = versions_json();
    m["details"] = std::move(details);
    fs::create_directories(dir);
    std::ofstream os(dir / "manifest.json", std::ios::trunc);
    if (!os) {
        throw std::runtime_error("cannot write manifest in " + dir.string());
    }
    os << m.dump(2) << "\n";
}

std::vector<Mode> parse_modes(const std::string& csv) {
    std::vector<Mode> modes;
    std::stringstream ss(csv);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (!item.empty()) {
            modes.push_back(mode_from_name(item));
        }
    }
    if (modes.empty()) {
        throw std::invalid_argument("no modes requested");
    }
    return modes;
}

json mode_names_json(const std::vector<Mode>& modes) {
    json names = json::array();
    for (const Mode m : modes) {
        names.push_back(mode_name(m));
    }
    return names;
}

std::string indexed_name(const char* stem, std::size_t i, const char* ext) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%s_%03zu%s", stem, i, ext);
    return buf;
}

/// Everything a replay needs, assembled once per command. The bank's shared
/// dissipation wins when a bank is present so loaded and freshly solved
/// tubes stay on one scheme.
struct RunAssets {
    ControllerLibrary lib;
    std::optional<BrtBank> bank;
    NumericsConfig numerics;
    std::optional<ValueFunction> full;
    std::optional<SolveCache> cache;

    ModeResources resources() {
        return {full ? &*full : nullptr, cache ? &*cache : nullptr,
                bank ? &*bank : nullptr, &lib};
    }
};

RunAssets prepare_assets(const RunConfig& cfg, const std::vector<Mode>& modes,
                         const std::string& bank_dir, const std::string& full_path) {
    const auto wants = [&](Mode m) {
        return std::find(modes.begin(), modes.end(), m) != modes.end();
    };
    RunAssets a;
    a.lib = sample_library(cfg.library);
    if (wants(Mode::negotiation)) {
        if (!bank_dir.empty()) {
            a.bank = load_bank(bank_dir);
        } else {
            std::cerr << "no bank directory given, building the bank in memory\n";
            a.bank = build_bank(a.lib, bank_build_config(cfg));
        }
    }
    a.numerics = a.bank ? a.bank->numerics : pinned_numerics(cfg);
    if (wants(Mode::full)) {
        if (!full_path.empty()) {
            a.full = load_value_function(full_path);
        } else {
            const Grid grid(cfg.grid);
            RelativeDynamicsModel model(cfg.params, cfg.bounds);
            model.prepare(grid);
            a.full = solve_brt(model, grid, cfg.target, a.numerics).vf;
        }
    }
    if (wants(Mode::prediction)) {
        a.cache.emplace(cfg, a.numerics);
    }
    return a;
}

void print_report_lines(const ReplayReport& report) {
    std::cout << "min_ttc " << report.min_ttc << (report.dangerous ? "  dangerous" : "")
              << "\n";
    for (const auto& m : report.modes) {
        std::cout << mode_name(m.mode) << ": " << m.decisions.size() << " checks, "
                  << m.breach_steps << " breach steps";
        if (m.first_breach) {
            std::cout << ", first breach at t=" << m.first_breach->t;
        }
        std::cout << "\n";
    }
}

struct SolveOpts {
    std::string config_path;
    std::string out = default_out_dir();
    bool bank_only = false;
    bool full_only = false;
};

void run_solve(const SolveOpts& o) {
    const RunConfig cfg = config_from(o.config_path);
    const fs::path out(o.out);
    fs::create_directories(out);
    json outputs = json::array();

    const ControllerLibrary lib = sample_library(cfg.library);
    std::optional<BrtBank> bank;
    if (!o.full_only) {
        std::cerr << "building bank over " << lib.size() << " controllers\n";
        bank = build_bank(lib, bank_build_config(cfg));
        save_bank(*bank, (out / "bank").string());
        outputs.push_back("bank");
        std::cout << "bank: " << bank->entries.size() << " entries\n";
    }
    if (!o.bank_only) {
        const NumericsConfig num = bank ? bank->numerics : pinned_numerics(cfg);
        const Grid grid(cfg.grid);
        RelativeDynamicsModel model(cfg.params, cfg.bounds);
        model.prepare(grid);
        std::cerr << "solving full-bound tube on " << grid.size() << " nodes\n";
        const SolveOutput solved = solve_brt(model, grid, cfg.target, num);
        save_value_function(solved.vf, (out / "full.vf").string());
        outputs.push_back("full.vf");
        std::cout << "full tube: " << grid.size() << " nodes, " << solved.steps
                  << " steps\n";
    }
    write_manifest(out, "solve", cfg,
                   {{"library_seed", cfg.library.seed},
                    {"library_size", lib.size()},
                    {"bank_entries", bank ? json(bank->entries.size()) : json(nullptr)},
                    {"outputs", std::move(outputs)}});
}

struct ReplayOpts {
    std::string config_path;
    std::string log_path;
    std::string modes_csv = "full,prediction,negotiation";
    std::string bank_dir;
    std::string full_path;
    std::string out = default_out_dir();
    bool timings = false;
};

void run_replay_cmd(const ReplayOpts& o) {
    const RunConfig cfg = config_from(o.config_path);
    const InteractionLog log = load_log(o.log_path);
    const std::vector<Mode> modes = parse_modes(o.modes_csv);
    RunAssets assets = prepare_assets(cfg, modes, o.bank_dir, o.full_path);

    const ReplayReport report = run_replay(log, assets.resources(), cfg, modes);
    const fs::path out(o.out);
    fs::create_directories(out);
    std::ofstream os(out / "report.json", std::ios::trunc);
    os << serialize_report(report, o.timings);
    if (!os) {
        throw std::runtime_error("cannot write report in " + out.string());
    }
    write_manifest(out, "replay", cfg,
                   {{"log", o.log_path},
                    {"modes", mode_names_json(modes)},
                    {"bank", o.bank_dir.empty() ? json("built") : json(o.bank_dir)},
                    {"timings", o.timings},
                    {"outputs", json::array({"report.json"})}});
    print_report_lines(report);
}

struct ScenarioOpts {
    ScenarioTemplate tpl;
    std::size_t n = 1;
};

void add_scenario_options(CLI::App* sub, ScenarioOpts& o) {
    sub->add_option("--template", o.tpl.id,
                    "merge-yield | merge-contest | head-on | car-follow")
        ->capture_default_str();
    sub->add_option("--role", o.tpl.role, "follower | leader | adversarial | replay")
        ->capture_default_str();
    sub->add_option("--robot-speed", o.tpl.robot_speed, "robot speed, m/s")
        ->capture_default_str();
    sub->add_option("--human-speed", o.tpl.human_speed, "human nominal speed, m/s")
        ->capture_default_str();
    sub->add_option("--top-speed", o.tpl.human_top_speed, "human speed clamp, m/s")
        ->capture_default_str();
    sub->add_option("--gap", o.tpl.initial_gap, "initial separation, m")
        ->capture_default_str();
    sub->add_option("--duration", o.tpl.duration, "log length, s")->capture_default_str();
    sub->add_option("--seed", o.tpl.seed, "base seed; scenario i uses seed+i")
        ->capture_default_str();
    sub->add_option("--n", o.n, "number of scenarios")->capture_default_str();
}

json scenario_details(const ScenarioOpts& o) {
    json seeds = json::array();
    for (std::size_t i = 0; i < o.n; ++i) {
        seeds.push_back(o.tpl.seed + i);
    }
    return {{"template", o.tpl.id},
            {"role", o.tpl.role},
            {"robot_speed", o.tpl.robot_speed},
            {"human_speed", o.tpl.human_speed},
            {"top_speed", o.tpl.human_top_speed},
            {"gap", o.tpl.initial_gap},
            {"duration", o.tpl.duration},
            {"seeds", std::move(seeds)}};
}

struct SuiteOpts {
    std::string config_path;
    ScenarioOpts scenario;
    std::string modes_csv = "full,prediction,negotiation";
    std::string bank_dir;
    std::string out = default_out_dir();

    SuiteOpts() {
        scenario.tpl.id = "merge-yield";
        scenario.tpl.role = "follower";
        scenario.n = 10;
    }
};

void print_summary_table(const SuiteSummary& summary) {
    std::cout << std::left << std::setw(13) << "mode" << std::right << std::setw(6)
              << "runs" << std::setw(10) << "breached" << std::setw(12) << "rel_speed"
              << std::setw(12) << "rel_dist" << std::setw(10) << "min_ttc" << "\n";
    const auto cell = [](double v) {
        std::ostringstream ss;
        if (std::isnan(v)) {
            ss << "-";
        } else {
            ss << std::fixed << std::setprecision(2) << v;
        }
        return ss.str();
    };
    for (const auto& m : summary.modes) {
        std::cout << std::left << std::setw(13) << mode_name(m.mode) << std::right
                  << std::setw(6) << m.interactions << std::setw(10) << m.breached
                  << std::setw(12) << cell(m.mean_rel_speed) << std::setw(12)
                  << cell(m.mean_rel_distance) << std::setw(10) << cell(m.mean_min_ttc)
                  << "\n";
    }
    std::cout << "mode ordering: " << (summary.ordering_ok ? "ok" : "violated") << "\n";
}

void run_suite(const SuiteOpts& o) {
    const RunConfig cfg = config_from(o.config_path);
    const std::vector<Mode> modes = parse_modes(o.modes_csv);
    RunAssets assets = prepare_assets(cfg, modes, o.bank_dir, "");

    const fs::path out(o.out);
    fs::create_directories(out / "logs");
    fs::create_directories(out / "reports");
    json outputs = json::array({"summary.json"});

    std::vector<ReplayReport> reports;
    ScenarioTemplate tpl = o.scenario.tpl;
    for (std::size_t i = 0; i < o.scenario.n; ++i) {
        tpl.seed = o.scenario.tpl.seed + i;
        const InteractionLog log = synth_scenario(tpl, cfg);
        const std::string log_name = indexed_name("scenario", i, ".jsonl");
        const std::string report_name = indexed_name("report", i, ".json");
        save_log(log, (out / "logs" / log_name).string());
        reports.push_back(run_replay(log, assets.resources(), cfg, modes));
        std::ofstream os(out / "reports" / report_name, std::ios::trunc);
        os << serialize_report(reports.back());
        if (!os) {
            throw std::runtime_error("cannot write report " + report_name);
        }
        outputs.push_back("logs/" + log_name);
        outputs.push_back("reports/" + report_name);
        std::cerr << "scenario " << i + 1 << "/" << o.scenario.n << " done\n";
    }

    const SuiteSummary summary = compare_modes(reports);
    std::ofstream os(out / "summary.json", std::ios::trunc);
    os << serialize_summary(summary);
    if (!os) {
        throw std::runtime_error("cannot write summary in " + out.string());
    }
    json details = scenario_details(o.scenario);
    details["modes"] = mode_names_json(modes);
    details["bank"] = o.bank_dir.empty() ? json("built") : json(o.bank_dir);
    details["outputs"] = std::move(outputs);
    write_manifest(out, "suite", cfg, std::move(details));
    print_summary_table(summary);
}

struct InferOpts {
    std::string config_path;
    std::string log_path;
    std::string out = default_out_dir();
};

void run_infer(const InferOpts& o) {
    const RunConfig cfg = config_from(o.config_path);
    const InteractionLog log = load_log(o.log_path);
    const ControllerLibrary lib = sample_library(cfg.library);
    const std::vector<BeliefSample> trace = infer_beliefs(log, lib, cfg);

    const fs::path out(o.out);
    fs::create_directories(out);
    std::ofstream os(out / "beliefs.jsonl", std::ios::trunc);
    os << json{{"schema", "belief-trace"}, {"version", 1}, {"samples", trace.size()}}
              .dump()
       << "\n";
    for (const auto& b : trace) {
        os << json{{"t", b.t},
                   {"follower", b.belief.follower},
                   {"leader", b.belief.leader}}
                  .dump()
           << "\n";
    }
    if (!os) {
        throw std::runtime_error("cannot write belief trace in " + out.string());
    }
    write_manifest(out, "infer", cfg,
                   {{"log", o.log_path},
                    {"library_seed", cfg.library.seed},
                    {"outputs", json::array({"beliefs.jsonl"})}});
    if (trace.empty()) {
        std::cout << "no updates: log shorter than the observation window\n";
    } else {
        std::cout << trace.size() << " updates, final belief follower="
                  << trace.back().belief.follower
                  << " leader=" << trace.back().belief.leader << "\n";
    }
}

struct SliceOpts {
    std::string config_path;
    std::string vf_path;
    std::vector<std::size_t> dims{0, 1};
    std::vector<double> at;
    std::string out = default_out_dir();
    bool pgm = false;
};

void run_slice(const SliceOpts& o) {
    const RunConfig cfg = config_from(o.config_path);
    const ValueFunction vf = o.vf_path.empty()
                                 ? initial_level_set(Grid(cfg.grid), cfg.target)
                                 : load_value_function(o.vf_path);
    const Grid& grid = vf.grid;
    const std::size_t ndim = grid.ndim();
    if (o.dims.size() != 2 || o.dims[0] == o.dims[1] || o.dims[0] >= ndim ||
        o.dims[1] >= ndim) {
        throw std::invalid_argument("slice needs two distinct in-range dims");
    }
    std::vector<std::size_t> fixed_dims;
    for (std::size_t d = 0; d < ndim; ++d) {
        if (d != o.dims[0] && d != o.dims[1]) {
            fixed_dims.push_back(d);
        }
    }
    if (!o.at.empty() && o.at.size() != fixed_dims.size()) {
        throw std::invalid_argument("slice --at needs one value per fixed dim (got " +
                                    std::to_string(o.at.size()) + ", need " +
                                    std::to_string(fixed_dims.size()) + ")");
    }

    // Fixed coordinates snap to the nearest grid node; the slice holds exact
    // node values.
    std::vector<std::size_t> idx(ndim, 0);
    json snapped = json::array();
    for (std::size_t j = 0; j < fixed_dims.size(); ++j) {
        const std::size_t d = fixed_dims[j];
        double want = o.at.empty() ? 0.5 * (grid.lower(d) + grid.upper(d)) : o.at[j];
        if (grid.periodic(d)) {
            want = grid.wrap(d, want);
        }
        std::size_t best = 0;
        for (std::size_t i = 1; i < grid.count(d); ++i) {
            if (std::abs(grid.coord(d, i) - want) <
                std::abs(grid.coord(d, best) - want)) {
                best = i;
            }
        }
        idx[d] = best;
        snapped.push_back({{"dim", d}, {"value", grid.coord(d, best)}, {"index", best}});
    }

    const std::size_t rows = grid.count(o.dims[0]);
    const std::size_t cols = grid.count(o.dims[1]);
    const fs::path out(o.out);
    fs::create_directories(out);
    json outputs = json::array({"slice.csv"});
    {
        std::ofstream os(out / "slice.csv", std::ios::trunc);
        os << std::setprecision(std::numeric_limits<double>::max_digits10);
        for (std::size_t r = 0; r < rows; ++r) {
            idx[o.dims[0]] = r;
            for (std::size_t c = 0; c < cols; ++c) {
                idx[o.dims[1]] = c;
                os << (c == 0 ? "" : ",") << vf.at(idx);
            }
            os << "\n";
        }
        if (!os) {
            throw std::runtime_error("cannot write slice in " + out.string());
        }
    }
    if (o.pgm) {
        std::ofstream os(out / "slice.pgm", std::ios::trunc);
        os << "P2\n" << cols << " " << rows << "\n255\n";
        for (std::size_t r = 0; r < rows; ++r) {
            idx[o.dims[0]] = r;
            for (std::size_t c = 0; c < cols; ++c) {
                idx[o.dims[1]] = c;
                os << (c == 0 ? "" : " ") << (vf.at(idx) < 0.0 ? 0 : 255);
            }
            os << "\n";
        }
        if (!os) {
            throw std::runtime_error("cannot write slice image in " + out.string());
        }
        outputs.push_back("slice.pgm");
    }
    write_manifest(out, "slice", cfg,
                   {{"source", o.vf_path.empty() ? json("terminal") : json(o.vf_path)},
                    {"dims", o.dims},
                    {"fixed", std::move(snapped)},
                    {"rows", rows},
                    {"cols", cols},
                    {"outputs", std::move(outputs)}});
    std::cout << "slice " << rows << " x " << cols << " written\n";
}

struct SynthOpts {
    std::string config_path;
    ScenarioOpts scenario;
    std::string out = default_out_dir();
};

void run_synth(const SynthOpts& o) {
    const RunConfig cfg = config_from(o.config_path);
    const fs::path out(o.out);
    fs::create_directories(out);
    json outputs = json::array();
    ScenarioTemplate tpl = o.scenario.tpl;
    for (std::size_t i = 0; i < o.scenario.n; ++i) {
        tpl.seed = o.scenario.tpl.seed + i;
        const InteractionLog log = synth_scenario(tpl, cfg);
        const std::string name = indexed_name("log", i, ".jsonl");
        save_log(log, (out / name).string());
        outputs.push_back(name);
    }
    json details = scenario_details(o.scenario);
    details["outputs"] = std::move(outputs);
    write_manifest(out, "synth", cfg, std::move(details));
    std::cout << "wrote " << o.scenario.n << " log(s) to " << out.string() << "\n";
}

}  // namespace

int cli_dispatch(int argc, const char* const* argv) {
    CLI::App app{"safety verification for two-car interactions via reachable tubes"};
    app.set_version_flag("--version", kToolVersion);
    app.require_subcommand(1);

    SolveOpts solve_opts;
    CLI::App* solve = app.add_subcommand("solve", "build the offline tube bank and the "
                                                  "full-bound tube");
    solve->add_option("--config", solve_opts.config_path, "run configuration JSON");
    solve->add_option("--out", solve_opts.out, "output directory")->capture_default_str();
    solve->add_flag("--bank-only", solve_opts.bank_only, "skip the full-bound tube");
    solve->add_flag("--full-only", solve_opts.full_only, "skip the bank");
    solve->callback([&] { run_solve(solve_opts); });

    ReplayOpts replay_opts;
    CLI::App* replay = app.add_subcommand("replay", "run safety modes over a logged "
                                                    "interaction");
    replay->add_option("--config", replay_opts.config_path, "run configuration JSON");
    replay->add_option("--log", replay_opts.log_path, "interaction log")
        ->required()
        ->check(CLI::ExistingFile);
    replay->add_option("--modes", replay_opts.modes_csv, "comma-separated mode list")
        ->capture_default_str();
    replay->add_option("--bank", replay_opts.bank_dir, "precomputed bank directory");
    replay->add_option("--full", replay_opts.full_path, "precomputed full-bound tube");
    replay->add_option("--out", replay_opts.out, "output directory")
        ->capture_default_str();
    replay->add_flag("--timings", replay_opts.timings, "include wall-clock timings");
    replay->callback([&] { run_replay_cmd(replay_opts); });

    SuiteOpts suite_opts;
    CLI::App* suite = app.add_subcommand("suite", "synthesize scenarios, replay each, "
                                                  "and compare modes");
    suite->add_option("--config", suite_opts.config_path, "run configuration JSON");
    add_scenario_options(suite, suite_opts.scenario);
    suite->add_option("--modes", suite_opts.modes_csv, "comma-separated mode list")
        ->capture_default_str();
    suite->add_option("--bank", suite_opts.bank_dir, "precomputed bank directory");
    suite->add_option("--out", suite_opts.out, "output directory")->capture_default_str();
    suite->callback([&] { run_suite(suite_opts); });

    InferOpts infer_opts;
    CLI::App* infer = app.add_subcommand("infer", "role-belief trace for a log");
    infer->add_option("--config", infer_opts.config_path, "run configuration JSON");
    infer->add_option("--log", infer_opts.log_path, "interaction log")
        ->required()
        ->check(CLI::ExistingFile);
    infer->add_option("--out", infer_opts.out, "output directory")->capture_default_str();
    infer->callback([&] { run_infer(infer_opts); });

    SliceOpts slice_opts;
    CLI::App* slice = app.add_subcommand("slice", "export a 2D slice of a value "
                                                  "function");
    slice->add_option("--config", slice_opts.config_path, "run configuration JSON");
    slice->add_option("--vf", slice_opts.vf_path,
                      "value-function file (default: terminal level set)")
        ->check(CLI::ExistingFile);
    slice->add_option("--dims", slice_opts.dims, "the two free dims")
        ->delimiter(',')
        ->capture_default_str();
    slice->add_option("--at", slice_opts.at,
                      "fixed coordinates for the remaining dims, ascending dim order "
                      "(default: midpoints)")
        ->delimiter(',');
    slice->add_option("--out", slice_opts.out, "output directory")->capture_default_str();
    slice->add_flag("--pgm", slice_opts.pgm, "also write a sign(V) graymap");
    slice->callback([&] { run_slice(slice_opts); });

    SynthOpts synth_opts;
    CLI::App* synth = app.add_subcommand("synth", "emit synthetic scenario logs");
    synth->add_option("--config", synth_opts.config_path, "run configuration JSON");
    add_scenario_options(synth, synth_opts.scenario);
    synth->add_option("--out", synth_opts.out, "output directory")->capture_default_str();
    synth->callback([&] { run_synth(synth_opts); });

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}

int cli_dispatch(const std::vector<std::string>& args) {
    std::vector<const char*> argv;
    argv.reserve(args.size() + 1);
    argv.push_back("rnego");
    for (const std::string& a : args) {
        argv.push_back(a.c_str());
    }
    return cli_dispatch(static_cast<int>(argv.size()), argv.data());
}

}  // namespace rnego
