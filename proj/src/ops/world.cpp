#include "moonstack/ops/world.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include <fmt/format.h>

#include "moonstack/error.hpp"
#include "moonstack/stack/joint_node.hpp"
#include "moonstack/stack/messages.hpp"
#include "moonstack/stack/operator_node.hpp"
#include "moonstack/util/hash.hpp"

namespace moonstack::ops {

using nlohmann::json;

namespace {

constexpr model::Level kTickOrder[] = {model::Level::operator_, model::Level::calibrator, model::Level::mover,
                                       model::Level::limb,      model::Level::ik,         model::Level::joint,
                                       model::Level::wheel_direct};

bool starts_with(std::string_view s, std::string_view prefix) { return s.substr(0, prefix.size()) == prefix; }

stack::LaunchConfig launch_config(const Scenario& s) {
  stack::LaunchConfig c;
  c.strategy = s.strategy;
  c.params = {s.parameters.delta_e, s.parameters.delta_offset};
  c.silence_timeout = s.parameters.timeout;
  c.tick = s.parameters.tick;
  for (const auto& cal : s.calibration) {
    stack::CalibrationState st;
    auto slash = cal.joint.find('/');
    st.module = cal.joint.substr(0, slash);
    st.joint = cal.joint.substr(slash + 1);
    st.homing_speed = cal.homing_speed;
    c.calibrations[cal.node] = st;
  }
  return c;
}

}  // namespace

World::World(Scenario scenario, RunOptions options)
    : scenario_(std::move(scenario)), options_(options), plant_(scenario_.description, scenario_.seed) {
  validate_scenario(scenario_);
  bus_.set_logging(options_.record_log);
  auto config = launch_config(scenario_);
  stack::Launcher launcher;
  for (const auto& [id, entry] : scenario_.role_table) {
    hosts_.push_back(launcher.launch(id, scenario_.description, scenario_.role_table, config));
    auto& h = hosts_.back();
    std::set<std::string> patterns;
    for (const auto& n : h.nodes)
      for (auto& p : n->subscriptions()) patterns.insert(std::move(p));
    if (h.role.has(model::Level::mission_control)) {
      patterns.insert("telemetry/*");
      if (!mission_) mission_ = h.id;
    }
    for (const auto& p : patterns) bus_.subscribe(h.id, p);
    if (h.role.has(model::Level::joint) || h.role.has(model::Level::wheel_direct)) owners_.emplace(h.role.module, h.id);
    if (!options_.record_commands)
      if (auto* op = h.find<stack::OperatorNode>()) op->set_tracing(false);
  }
  for (const auto& l : scenario_.link_schedule) bus_.set_link(l.a, l.b, l.condition, l.direction);

  plant_.set_sensor_noise(scenario_.sensor_noise);
  for (const auto& [key, offset] : scenario_.zero_offsets) plant_.joints().at(key).zero_offset = offset;
  for (const auto& [key, angle] : scenario_.initial_state) plant_.joints().at(key).angle = angle;
  for (auto& [key, j] : plant_.joints()) j.setpoint = {ctrl::CommandKind::position, j.sensed()};
  for (const auto& [module, rate] : scenario_.battery_drain)
    if (plant_.batteries().count(module)) plant_.batteries()[module].drain_rate = rate;
  for (const auto& m : scenario_.scene_modules)
    for (const auto& f : m.fixtures) plant_.add_fixture({{m.id, f}, kin::Pose{}, plant::kFixtureWidth, std::nullopt});
  for (const auto& f : scenario_.fixtures) {
    if (auto* existing = plant_.fixture(f.id)) {
      existing->pose = f.pose;
      existing->width = f.width;
      if (f.held_by) throw ValidationError("fixtures", "'" + f.id.str() + "' is already part of the robot");
    } else {
      plant_.add_fixture({f.id, f.pose, f.width, std::nullopt}, f.held_by);
    }
  }
  for (const auto& chain : scenario_.description.chains) {
    auto base = scenario_.limb_bases.find(chain.module);
    plant_.place_limb(chain.module, base == scenario_.limb_bases.end() ? kin::Pose{} : base->second, chain);
  }
  for (const auto& ev : scenario_.operator_script) input(ev.op_id, ev);
}

stack::Host* World::host(const std::string& id) {
  for (auto& h : hosts_)
    if (h.id == id) return &h;
  return nullptr;
}

bool World::alive(const std::string& id) const { return dead_.count(id) == 0; }

void World::crash(const std::string& id) {
  if (!dead_.insert(id).second) return;
  bus_.unsubscribe_all(id);
  record_.events.push_back({now(), id, "node-down", ""});
}

void World::input(const std::string& op_node, stack::InputEvent ev) {
  auto* h = host(op_node);
  auto* op = h ? h->find<stack::OperatorNode>() : nullptr;
  if (!op) throw ValidationError("operator", "'" + op_node + "' does not run an operator node");
  op->input(std::move(ev));
}

std::string World::owner_of(const std::string& module) const {
  auto it = owners_.find(module);
  return it == owners_.end() ? std::string() : it->second;
}

void World::route(const std::vector<bus::Envelope>& envelopes) {
  double t = now();
  for (const auto& e : envelopes) {
    if (!alive(e.dst)) continue;
    if (mission_ && e.dst == *mission_ && starts_with(e.topic, "telemetry/")) {
      try {
        aggregator_.add(telemetry_from_json(json::parse(e.payload)));
      } catch (const std::exception&) {
      }
    }
    auto* h = host(e.dst);
    if (!h) continue;
    for (auto& n : h->nodes) {
      if (!n->wants(e.topic)) continue;
      try {
        n->receive(e, t);
      } catch (const Error& err) {
        record_.events.push_back({t, h->id, "bad-payload", e.topic + ": " + err.what()});
      }
    }
  }
}

void World::collect(stack::Host& h, stack::Node&, stack::TickOutput& out) {
  for (auto& [topic, payload] : out.messages) bus_.publish(topic, std::move(payload), h.id);
  for (const auto& a : out.joints) {
    auto key = a.module + "/" + a.joint;
    if (plant_.joints().count(key)) plant_.command(a.module, a.joint, a.command);
  }
  for (const auto& w : out.wheels)
    if (plant_.wheels().count(w.module)) plant_.command_wheel(w.module, w.left, w.right);
  for (const auto& g : out.grippers)
    if (plant_.gripper(g.gripper)) plant_.command_gripper(g.gripper, g.close);
  for (auto& e : out.events) {
    record_.events.push_back(e);
    pending_events_[h.id].push_back(std::move(e));
  }
}

void World::step() {
  const double dt = scenario_.parameters.tick;
  auto due = bus_.advance(dt);
  const double t = now();

  for (const auto& c : scenario_.crashes)
    if (c.t <= t + 1e-9) crash(c.node);
  for (const auto& [module, b] : plant_.batteries())
    if (b.offline())
      if (auto owner = owner_of(module); !owner.empty() && alive(owner)) crash(owner);
  route(due);

  std::vector<plant::IrMessage> ir;
  auto readings = plant_.step(dt, t, &ir);
  record_.ir.insert(record_.ir.end(), ir.begin(), ir.end());
  for (const auto& r : readings) {
    auto owner = owner_of(r.module);
    if (owner.empty() || !alive(owner)) continue;
    bus_.publish(stack::topic::sensor(r.module, r.joint), stack::encode(stack::SensorMsg{t, r.angle, r.velocity, r.reflector}),
                 owner);
  }
  route(bus_.poll());

  stack::TickOutput out;
  for (auto level : kTickOrder) {
    for (auto& h : hosts_) {
      if (!alive(h.id)) continue;
      for (auto& n : h.nodes) {
        if (n->level() != level) continue;
        out.clear();
        n->tick(t, out);
        collect(h, *n, out);
      }
    }
    route(bus_.poll());
  }

  for (auto& h : hosts_) {
    if (!alive(h.id)) continue;
    if (auto* jn = h.find<stack::JointNode>())
      for (const auto& [name, slot] : jn->slots())
        if (slot.received >= 0.0) last_rx_[jn->module() + "/" + name] = slot.received;
  }
  if (options_.check_safety) {
    const double bound = scenario_.parameters.timeout + 2.0 * dt;
    for (const auto& [key, rx] : last_rx_) {
      double v = plant_.joints().at(key).velocity;
      if (t - rx > bound + 1e-9 && v != 0.0) record_.violations.push_back({t, key, v, rx});
    }
  }
  if (options_.record_truth)
    for (const auto& [key, j] : plant_.joints()) record_.truth.push_back({t, key, j.angle, j.velocity});

  if (t + 1e-9 >= (telemetry_count_ + 1) * kTelemetryPeriod) {
    ++telemetry_count_;
    emit_telemetry();
  }
}

void World::emit_telemetry() {
  const double t = now();
  for (auto& h : hosts_) {
    if (!alive(h.id)) continue;
    TelemetryFrame f;
    f.t = t;
    f.node = h.id;
    f.address = h.id;
    f.ping_ok = !mission_ || h.id == *mission_ || bus_.link(h.id, *mission_).connected_at(t);
    f.link_quality = bus_.link_quality(h.id, kLinkQualityWindow);
    const std::string& module = h.role.module;
    if (!module.empty() && plant_.batteries().count(module)) {
      f.battery = plant_.batteries().at(module).level;
      for (const auto& [key, j] : plant_.joints())
        if (j.module == module) f.joints[j.name] = {j.sensed(), j.velocity};
      const auto& n = plant_.neighbors(module);
      f.neighbors.assign(n.begin(), n.end());
    }
    f.events = std::move(pending_events_[h.id]);
    pending_events_[h.id].clear();
    bus_.publish(stack::topic::telemetry(h.id), to_json(f).dump(), h.id);
    record_.telemetry.push_back(std::move(f));
  }
}

model::RobotDescription World::rederive() const {
  const auto& base = scenario_.description;
  std::map<std::string, const model::ModuleSpec*> known;
  for (const auto& m : base.modules) known[m.id] = &m;
  for (const auto& m : scenario_.scene_modules) known.emplace(m.id, &m);

  model::RobotDescription d;
  d.name = base.name;
  std::set<std::string> attached;
  for (const auto& g : plant_.grippers()) {
    if (!g.grasped_fixture) continue;
    if (known.count(g.grasped_fixture->module)) {
      d.attachments.push_back({g.id, *g.grasped_fixture});
      attached.insert(g.grasped_fixture->module);
    } else if (!d.root) {
      d.root = g.id;  // clamped to something outside the robot: the palette
    }
  }
  d.modules = base.modules;
  for (const auto& m : scenario_.scene_modules)
    if (attached.count(m.id)) d.modules.push_back(m);
  return model::finalize_description(std::move(d));
}

std::uint64_t World::hash() const {
  util::Fnv1a h;
  for (const auto& [key, j] : plant_.joints()) h.add(key).add(j.angle).add(j.velocity);
  auto& wheels = const_cast<plant::Plant&>(plant_).wheels();
  for (const auto& [id, w] : wheels) h.add(id).add(w.pose.x).add(w.pose.y).add(w.pose.heading);
  for (const auto& g : plant_.grippers()) h.add(g.id.str()).add(g.opening).add(g.grasped_fixture ? g.grasped_fixture->str() : "-");
  for (const auto& [id, b] : plant_.batteries()) h.add(id).add(b.level);
  h.add(static_cast<std::uint64_t>(bus_.log().size()));
  return h.value();
}

RunRecord World::finish() {
  record_.scenario = scenario_.name;
  record_.end_time = now();
  if (options_.record_log) record_.delivery_log = bus_.log();
  record_.commands.clear();
  for (auto& h : hosts_)
    if (auto* op = h.find<stack::OperatorNode>())
      for (const auto& c : op->trace()) record_.commands.push_back({h.id, c});
  std::stable_sort(record_.commands.begin(), record_.commands.end(),
                   [](const auto& a, const auto& b) { return a.record.t < b.record.t; });
  record_.mission_table = mission_ ? aggregator_.table(now()) : telemetry_aggregate(record_.telemetry, now());
  try {
    record_.final_description = rederive();
  } catch (const Error& e) {
    record_.final_description.reset();
    record_.events.push_back({now(), "", "description-invalid", e.what()});
  }
  record_.final_hash = fmt::format("{:016x}", hash());
  return record_;
}

RunRecord World::run() {
  auto steps = static_cast<long>(std::llround(scenario_.duration / scenario_.parameters.tick));
  for (long k = 0; k < steps; ++k) step();
  return finish();
}

RunRecord run_scenario(const Scenario& scenario, RunOptions options) { return World(scenario, options).run(); }

bool same_structure(const model::RobotDescription& a, const model::RobotDescription& b) {
  return a.modules == b.modules && a.attachments == b.attachments && a.root == b.root && a.chains == b.chains;
}

void RunRecord::write(const std::filesystem::path& dir) const {
  std::filesystem::create_directories(dir);
  auto open = [&](const char* name) {
    std::ofstream os(dir / name);
    if (!os) throw Error("cannot write '" + (dir / name).string() + "'");
    return os;
  };
  {
    auto os = open("delivery.jsonl");
    bus::write_delivery_log(os, delivery_log);
  }
  {
    auto os = open("truth.jsonl");
    for (const auto& s : truth)
      os << fmt::format("{{\"t\":{},\"joint\":\"{}\",\"angle\":{},\"velocity\":{}}}\n", s.t, s.joint, s.angle, s.velocity);
  }
  {
    auto os = open("commands.csv");
    os << "t,operator,target,y,r_dot,kind,u\n";
    for (const auto& c : commands) {
      const auto& r = c.record;
      os << fmt::format("{},{},{},{},{},{},{}\n", r.t, c.op_node, r.target, r.y, r.r_dot,
                        r.u.kind == ctrl::CommandKind::position ? "position" : "velocity", r.u.value);
    }
  }
  {
    auto os = open("telemetry.jsonl");
    for (const auto& f : telemetry) os << to_json(f).dump() << '\n';
  }
  {
    auto os = open("events.jsonl");
    for (const auto& e : events)
      os << json{{"t", e.t}, {"node", e.node}, {"kind", e.kind}, {"detail", e.detail}}.dump() << '\n';
  }
  {
    auto os = open("mission.csv");
    TelemetryAggregator agg;
    std::map<std::string, bool> stale;
    for (const auto& r : mission_table) agg.add(r.frame);
    agg.write_csv(os, end_time);
  }
  {
    auto os = open("summary.json");
    json s{{"scenario", scenario},
           {"end_time", end_time},
           {"final_hash", final_hash},
           {"safety_violations", violations.size()},
           {"events", events.size()},
           {"final_motor_count", final_description ? json(model::motor_count(*final_description)) : json(nullptr)}};
    os << s.dump(2) << '\n';
  }
}

}  // namespace moonstack::ops
