#include "moonstack/ops/assembly.hpp"

#include <algorithm>
#include <fstream>
#include <limits>

#include <fmt/format.h>

#include "moonstack/error.hpp"
#include "moonstack/model/presets.hpp"

namespace moonstack::ops {

namespace {

using model::Level;

constexpr double kInitAt = 0.1;
constexpr double kApproachAt = 1.0;
constexpr double kCloseAt = 4.0;
constexpr double kReleaseDelay = 0.5;
constexpr double kSettle = 3.0;  // long enough for a telemetry frame after the release
constexpr double kDeadline = 14.0;

model::RobotDescription precursor() {
  model::RobotDescription d;
  d.name = "minimal-precursor";
  d.modules = {model::make_limb("limb1")};
  d.root = model::Endpoint{"limb1", "gripper2"};  // held by the palette, gripper1 free
  return model::finalize_description(std::move(d));
}

stack::InputEvent op_event(double t, stack::InputOp op, std::string target) {
  stack::InputEvent ev;
  ev.t = t;
  ev.op_id = "operator-A";
  ev.op = op;
  ev.target = std::move(target);
  return ev;
}

bool ir_between(const std::vector<plant::IrMessage>& ir, const std::string& a, const std::string& b) {
  return std::any_of(ir.begin(), ir.end(), [&](const auto& m) { return m.from_module == a && m.to_module == b; });
}

}  // namespace

kin::JointVector assembly_reference_q() {
  kin::JointVector q(7);
  q << 0.3, 0.6, -0.2, 0.9, 0.1, -0.5, 0.2;
  return q;
}

Scenario assembly_scenario_spec(const AssemblyOptions& options) {
  Scenario s;
  s.name = "assembly";
  s.description = precursor();
  s.role_table = {{"limb1-pc", {{Level::joint, Level::ik, Level::limb}, "limb1"}},
                  {"mission", {{Level::mover, Level::mission_control}, ""}},
                  {"operator-A", {{Level::operator_}, ""}}};
  s.duration = kDeadline;
  s.seed = options.seed;
  const auto& chain = s.description.chains.at(0);
  for (const auto& j : chain.joints) s.initial_state["limb1/" + j.name] = 0.15;

  s.scene_modules = {model::make_wheel("wheel1")};
  kin::Pose target = kin::forward_kinematics(chain, assembly_reference_q());
  FixtureSpec wheel{{"wheel1", "fixture1"}, target, plant::kFixtureWidth, std::nullopt};
  wheel.pose.position += options.fixture_offset;
  s.fixtures.push_back(wheel);
  s.fixtures.push_back({{"palette", "fixture1"}, kin::Pose{}, plant::kFixtureWidth, model::Endpoint{"limb1", "gripper2"}});
  s.limb_bases["limb1"] = kin::Pose{};

  auto init = op_event(kInitAt, stack::InputOp::plan, "");
  init.plan["limb1"] = std::vector<double>(chain.size(), 0.0);
  auto approach = op_event(kApproachAt, stack::InputOp::ik_target, "limb1");
  approach.pose = target;  // the scripted pose, wherever the wheel really is
  auto close = op_event(kCloseAt, stack::InputOp::grip, "limb1/gripper1");
  close.close = true;
  s.operator_script = {init, approach, close};
  return s;
}

AssemblyResult assembly_scenario(const AssemblyOptions& options) {
  Scenario s = assembly_scenario_spec(options);
  World w(s);
  AssemblyResult out;
  const double tick = s.parameters.tick;
  std::optional<double> done_at;
  while (w.now() < kDeadline - 1e-9 && (!done_at || w.now() < *done_at - 1e-9)) {
    w.step();
    if (!out.grasp_time && ir_between(w.ir(), "limb1", "wheel1")) {
      out.grasp_time = w.now();
      w.input("operator-A", op_event(w.now() + tick, stack::InputOp::ik_release, "limb1"));
      auto open = op_event(w.now() + kReleaseDelay, stack::InputOp::grip, "limb1/gripper2");
      open.close = false;
      w.input("operator-A", open);
      done_at = w.now() + kSettle;
    }
  }

  const plant::GripperPlant* g1 = nullptr;
  const plant::GripperPlant* g2 = nullptr;
  for (const auto& g : w.plant().grippers()) {
    if (g.id == model::Endpoint{"limb1", "gripper1"}) g1 = &g;
    if (g.id == model::Endpoint{"limb1", "gripper2"}) g2 = &g;
  }
  if (!out.grasp_time) {
    double nearest = std::numeric_limits<double>::infinity();
    if (auto tip = w.plant().tip_pose("limb1"))
      for (const auto& f : w.plant().fixtures())
        if (f.id.module == "wheel1") nearest = std::min(nearest, (f.pose.position - tip->position).norm());
    out.diagnostic = fmt::format(
        "grasp failed: limb1.gripper1 closed to {:.4f} m without an IR handshake; nearest wheel fixture {:.3f} m "
        "from the tip (tolerance {:.3f} m); palette not released",
        g1 ? g1->opening : 0.0, nearest, plant::kGraspPositionTol);
  }
  out.record = w.finish();
  out.attached = g1 && g1->grasped_fixture == model::Endpoint{"wheel1", "fixture1"};
  out.released = g2 && !g2->grasped_fixture;
  if (out.record.final_description) {
    out.motor_count = model::motor_count(*out.record.final_description);
    out.matches_minimal = same_structure(*out.record.final_description, model::minimal());
  }
  for (const auto& f : out.record.telemetry)
    if (f.node == "limb1-pc" && std::count(f.neighbors.begin(), f.neighbors.end(), "wheel1")) out.neighbor_in_telemetry = true;
  if (out.grasp_time && !out.matches_minimal && out.diagnostic.empty())
    out.diagnostic = "assembly ended in a structure other than the Minimal robot";
  return out;
}

void write_assembly(const AssemblyResult& result, const std::filesystem::path& dir) {
  result.record.write(dir);
  nlohmann::json ir = nlohmann::json::array();
  for (const auto& m : result.record.ir)
    ir.push_back({{"t", m.t}, {"from", m.from_module}, {"to", m.to_module}, {"neighbors", m.neighbors}});
  nlohmann::json doc{{"attached", result.attached},
                     {"released", result.released},
                     {"grasp_time", result.grasp_time ? nlohmann::json(*result.grasp_time) : nlohmann::json(nullptr)},
                     {"matches_minimal", result.matches_minimal},
                     {"motor_count", result.motor_count},
                     {"neighbor_in_telemetry", result.neighbor_in_telemetry},
                     {"diagnostic", result.diagnostic},
                     {"ir", ir}};
  if (result.record.final_description)
    doc["final_description"] = nlohmann::json::parse(model::serialize_description(*result.record.final_description));
  std::ofstream os(dir / "assembly.json");
  if (!os) throw Error("cannot write assembly.json");
  os << doc.dump(2) << '\n';
}

}  // namespace moonstack::ops
