#include "rnego/log.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

namespace rnego {

namespace {

using nlohmann::json;

json pose_json(const VehiclePose& p) {
    return json{{"x", p.x}, {"y", p.y}, {"psi", p.psi}, {"v", p.v}};
}

json path_json(const PathPolyline& path) {
    json out = json::array();
    for (const auto& p : path.points) {
        out.push_back({p[0], p[1]});
    }
    return out;
}

PathPolyline path_from(const json& j) {
    PathPolyline path;
    for (const auto& p : j) {
        path.points.push_back({p.at(0).get<double>(), p.at(1).get<double>()});
    }
    return path;
}

/// Collects every missing key instead of stopping at the first.
void require_keys(const json& j, std::initializer_list<const char*> keys,
                  const std::string& where, std::vector<std::string>& missing) {
    for (const char* k : keys) {
        if (!j.contains(k)) {
            missing.push_back(where + "." + k);
        }
    }
}

VehiclePose pose_from(const json& j, const std::string& where,
                      std::vector<std::string>& missing) {
    require_keys(j, {"x", "y", "psi", "v"}, where, missing);
    if (!missing.empty()) {
        return {};
    }
    return {j.at("x").get<double>(), j.at("y").get<double>(), j.at("psi").get<double>(),
            j.at("v").get<double>()};
}

[[noreturn]] void fail_line(std::size_t line_no, const std::string& what) {
    throw std::invalid_argument("log line " + std::to_string(line_no) + ": " + what);
}

}  // namespace

void InteractionLog::validate() const {
    if (!(sensor_period > 0.0) || !(verification_period > 0.0)) {
        throw std::invalid_argument("log: periods must be positive");
    }
    if (sensor_period > verification_period + 1e-12) {
        throw std::invalid_argument("log: sensor period must not exceed verification period");
    }
    if (records.empty()) {
        throw std::invalid_argument("log: no records");
    }
    plan.path.validate();
    for (std::size_t i = 1; i < plan.accel.size(); ++i) {
        if (!(plan.accel[i].first > plan.accel[i - 1].first)) {
            throw std::invalid_argument("log: plan accel timestamps must strictly increase");
        }
    }
    for (std::size_t i = 0; i < records.size(); ++i) {
        if (i > 0 && !(records[i].t > records[i - 1].t)) {
            throw std::invalid_argument("log: record " + std::to_string(i) +
                                        " timestamp does not increase");
        }
        try {
            records[i].predicted_path.validate();
            records[i].prediction.validate();
        } catch (const std::invalid_argument& e) {
            throw std::invalid_argument("log: record " + std::to_string(i) + ": " + e.what());
        }
    }
}

std::string serialize_log(const InteractionLog& log) {
    std::ostringstream out;
    json header;
    header["schema"] = "interaction-log";
    header["version"] = 1;
    header["sensor_period"] = log.sensor_period;
    header["verification_period"] = log.verification_period;
    header["role_tag"] = log.role_tag;
    json accel = json::array();
    for (const auto& [t, a] : log.plan.accel) {
        accel.push_back({t, a});
    }
    header["plan"] = {{"path", path_json(log.plan.path)}, {"accel", accel}};
    out << header.dump() << '\n';
    for (const auto& rec : log.records) {
        json traj = json::array();
        for (const auto& s : rec.prediction.samples) {
            traj.push_back({s.t, s.x, s.y, s.psi, s.v});
        }
        json line{{"t", rec.t},
                  {"robot", pose_json(rec.robot)},
                  {"human", pose_json(rec.human)},
                  {"prediction", {{"path", path_json(rec.predicted_path)}, {"traj", traj}}}};
        out << line.dump() << '\n';
    }
    return out.str();
}

InteractionLog parse_log(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    std::size_t line_no = 0;
    InteractionLog log;
    bool have_header = false;
    std::size_t record_index = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) {
            continue;
        }
        json j;
        try {
            j = json::parse(line);
        } catch (const json::parse_error& e) {
            fail_line(line_no, std::string("not valid JSON: ") + e.what());
        }
        if (!have_header) {
            std::vector<std::string> missing;
            require_keys(j, {"schema", "version", "sensor_period", "verification_period",
                             "role_tag", "plan"},
                         "header", missing);
            if (!missing.empty()) {
                std::string what = "missing fields:";
                for (const auto& m : missing) {
                    what += " " + m;
                }
                fail_line(line_no, what);
            }
            if (j.at("schema").get<std::string>() != "interaction-log" ||
                j.at("version").get<int>() != 1) {
                fail_line(line_no, "not an interaction-log version 1 header");
            }
            log.sensor_period = j.at("sensor_period").get<double>();
            log.verification_period = j.at("verification_period").get<double>();
            log.role_tag = j.at("role_tag").get<std::string>();
            const auto& plan = j.at("plan");
            require_keys(plan, {"path", "accel"}, "plan", missing);
            if (!missing.empty()) {
                fail_line(line_no, "missing fields: " + missing.front());
            }
            log.plan.path = path_from(plan.at("path"));
            for (const auto& pa : plan.at("accel")) {
                log.plan.accel.push_back({pa.at(0).get<double>(), pa.at(1).get<double>()});
            }
            have_header = true;
            continue;
        }
        std::vector<std::string> missing;
        const std::string where = "record " + std::to_string(record_index);
        require_keys(j, {"t", "robot", "human", "prediction"}, where, missing);
        LogRecord rec;
        if (missing.empty()) {
            rec.t = j.at("t").get<double>();
            rec.robot = pose_from(j.at("robot"), where + ".robot", missing);
            rec.human = pose_from(j.at("human"), where + ".human", missing);
            require_keys(j.at("prediction"), {"path", "traj"}, where + ".prediction", missing);
        }
        if (!missing.empty()) {
            std::string what = "missing fields:";
            for (const auto& m : missing) {
                what += " " + m;
            }
            fail_line(line_no, what);
        }
        rec.predicted_path = path_from(j.at("prediction").at("path"));
        for (const auto& s : j.at("prediction").at("traj")) {
            rec.prediction.samples.push_back({s.at(0).get<double>(), s.at(1).get<double>(),
                                              s.at(2).get<double>(), s.at(3).get<double>(),
                                              s.at(4).get<double>()});
        }
        log.records.push_back(std::move(rec));
        ++record_index;
    }
    if (!have_header) {
        throw std::invalid_argument("log: empty input, header line required");
    }
    log.validate();
    return log;
}

void save_log(const InteractionLog& log, const std::string& path) {
    std::ofstream out(path);
    if (!out) {
        throw std::runtime_error("log: cannot write " + path);
    }
    out << serialize_log(log);
}

InteractionLog load_log(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw std::runtime_error("log: cannot read " + path);
    }
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_log(buf.str());
}

}  // namespace rnego
