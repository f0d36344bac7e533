#pragma once

#include <string>
#include <utility>
#include <vector>

#include "rnego/frenet.hpp"

namespace rnego {

struct VehiclePose {
    double x = 0.0;    // m
    double y = 0.0;    // m
    double psi = 0.0;  // rad
    double v = 0.0;    // m/s

    bool operator==(const VehiclePose&) const = default;
};

/// One sensor-rate snapshot of both cars plus the human prediction available
/// at that time.
struct LogRecord {
    double t = 0.0;
    VehiclePose robot;
    VehiclePose human;
    PathPolyline predicted_path;     // most-likely human path
    PredictedTrajectory prediction;  // predicted human motion over the horizon

    bool operator==(const LogRecord&) const = default;
};

struct RobotPlan {
    PathPolyline path;
    std::vector<std::pair<double, double>> accel;  // (t, planned acceleration)

    bool operator==(const RobotPlan&) const = default;
};

struct InteractionLog {
    double sensor_period = 0.04;
    double verification_period = 0.1;
    std::string role_tag;  // ground truth when known: follower | leader | adversarial | replay
    RobotPlan plan;
    std::vector<LogRecord> records;

    /// Strictly increasing timestamps, sensor period not above the
    /// verification period, well-formed paths and predictions throughout.
    void validate() const;
    bool operator==(const InteractionLog&) const = default;
};

/// Line-delimited JSON: a header line describing the run, then one line per
/// record. Parse failures name the offending line; missing fields are listed
/// together with the record index.
std::string serialize_log(const InteractionLog& log);
InteractionLog parse_log(const std::string& text);

void save_log(const InteractionLog& log, const std::string& path);
InteractionLog load_log(const std::string& path);

}  // namespace rnego
