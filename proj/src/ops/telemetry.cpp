#include "moonstack/ops/telemetry.hpp"

#include <fmt/format.h>

namespace moonstack::ops {

using nlohmann::json;

json to_json(const TelemetryFrame& f) {
  json joints = json::object();
  for (const auto& [name, j] : f.joints) joints[name] = {{"angle", j.angle}, {"velocity", j.velocity}};
  json events = json::array();
  for (const auto& e : f.events) events.push_back({{"t", e.t}, {"node", e.node}, {"kind", e.kind}, {"detail", e.detail}});
  return {{"t", f.t},
          {"node", f.node},
          {"ping_ok", f.ping_ok},
          {"link_quality", f.link_quality},
          {"cpu", f.cpu},
          {"battery", f.battery ? json(*f.battery) : json(nullptr)},
          {"address", f.address},
          {"joints", joints},
          {"neighbors", f.neighbors},
          {"events", events}};
}

TelemetryFrame telemetry_from_json(const json& j) {
  TelemetryFrame f;
  f.t = j.at("t").get<double>();
  f.node = j.at("node").get<std::string>();
  f.ping_ok = j.at("ping_ok").get<bool>();
  f.link_quality = j.at("link_quality").get<double>();
  f.cpu = j.at("cpu").get<double>();
  if (!j.at("battery").is_null()) f.battery = j["battery"].get<double>();
  f.address = j.at("address").get<std::string>();
  for (const auto& [name, v] : j.at("joints").items()) f.joints[name] = {v.at("angle").get<double>(), v.at("velocity").get<double>()};
  f.neighbors = j.at("neighbors").get<std::vector<std::string>>();
  for (const auto& e : j.at("events"))
    f.events.push_back({e.at("t").get<double>(), e.at("node").get<std::string>(), e.at("kind").get<std::string>(),
                        e.at("detail").get<std::string>()});
  return f;
}

void TelemetryAggregator::add(const TelemetryFrame& frame) {
  auto it = latest_.find(frame.node);
  if (it == latest_.end() || frame.t >= it->second.t) latest_[frame.node] = frame;
}

std::vector<TelemetryRow> TelemetryAggregator::table(double now) const {
  std::vector<TelemetryRow> rows;
  for (const auto& [node, f] : latest_) rows.push_back({f, now - f.t > kStaleAfter + 1e-9});
  return rows;
}

void TelemetryAggregator::write_csv(std::ostream& os, double now) const {
  os << "node,t,stale,ping_ok,link_quality,cpu,battery,address,neighbors\n";
  for (const auto& row : table(now)) {
    const auto& f = row.frame;
    std::string neighbors;
    for (const auto& n : f.neighbors) neighbors += (neighbors.empty() ? "" : ";") + n;
    os << fmt::format("{},{:.3f},{},{},{:.3f},{:.2f},{},{},{}\n", f.node, f.t, row.stale, f.ping_ok, f.link_quality,
                      f.cpu, f.battery ? fmt::format("{:.1f}", *f.battery) : "", f.address, neighbors);
  }
}

std::vector<TelemetryRow> telemetry_aggregate(const std::vector<TelemetryFrame>& frames, double now) {
  TelemetryAggregator agg;
  for (const auto& f : frames) agg.add(f);
  return agg.table(now);
}

}  // namespace moonstack::ops
