#pragma once

#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include <json.hpp>

#include "moonstack/stack/node.hpp"

namespace moonstack::ops {

inline constexpr double kTelemetryPeriod = 1.0;
inline constexpr double kStaleAfter = 3.0;
inline constexpr double kLinkQualityWindow = 2.0;
inline constexpr double kCpuLoadStub = 0.25;

struct JointTelemetry {
  double angle = 0.0;
  double velocity = 0.0;

  bool operator==(const JointTelemetry&) const = default;
};

struct TelemetryFrame {
  double t = 0.0;
  std::string node;
  bool ping_ok = true;
  double link_quality = 1.0;
  double cpu = kCpuLoadStub;
  std::optional<double> battery;  // percent; empty for computers without a module battery
  std::string address;
  std::map<std::string, JointTelemetry> joints;
  std::vector<std::string> neighbors;
  std::vector<stack::Event> events;

  bool operator==(const TelemetryFrame&) const = default;
};

nlohmann::json to_json(const TelemetryFrame& f);
TelemetryFrame telemetry_from_json(const nlohmann::json& j);

struct TelemetryRow {
  TelemetryFrame frame;
  bool stale = false;
};

/// Mission-control view: the newest frame per node, flagged stale once it is
/// more than three seconds old.
class TelemetryAggregator {
 public:
  void add(const TelemetryFrame& frame);
  std::vector<TelemetryRow> table(double now) const;
  void write_csv(std::ostream& os, double now) const;

 private:
  std::map<std::string, TelemetryFrame> latest_;
};

/// Convenience: aggregate a batch of frames as seen at `now`.
std::vector<TelemetryRow> telemetry_aggregate(const std::vector<TelemetryFrame>& frames, double now);

}  // namespace moonstack::ops
