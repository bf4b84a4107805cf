#include <doctest.h>

#include <Eigen/QR>
#include <algorithm>
#include <cmath>
#include <random>

#include "moonstack/error.hpp"
#include "moonstack/model/presets.hpp"
#include "moonstack/ops/world.hpp"
#include "moonstack/plant/plant.hpp"
#include "moonstack/stack/calibrator.hpp"
#include "moonstack/stack/ik_node.hpp"
#include "moonstack/stack/joint_node.hpp"
#include "moonstack/stack/launch.hpp"
#include "moonstack/stack/limb_node.hpp"
#include "moonstack/stack/mover.hpp"
#include "moonstack/stack/operator_node.hpp"

using namespace moonstack;
using namespace moonstack::stack;
using model::Level;

namespace {

constexpr double kTick = 0.02;
constexpr double kDeltaE = 0.05;
const double kVmax = model::kLimbJointSpeed;

bus::Envelope env(std::string topic, std::string payload, double t = 0.0) {
  bus::Envelope e;
  e.topic = std::move(topic);
  e.payload = std::move(payload);
  e.src = "test";
  e.send_time = t;
  e.deliver_time = t;
  return e;
}

std::string pos_cmd(double t, double v) { return encode(JointCommandMsg{t, {ctrl::CommandKind::position, v}}); }

model::KinematicChain limb_chain() { return model::minimal().chains.at(0); }

kin::JointVector test_q() {
  kin::JointVector q(7);
  q << 0.2, 0.5, -0.3, 0.8, 0.1, -0.4, 0.3;
  return q;
}

void feed_sensors(Node& n, const model::KinematicChain& chain, const kin::JointVector& q, double t) {
  for (std::size_t i = 0; i < chain.size(); ++i)
    n.receive(env(topic::sensor(chain.module, chain.joints[i].name),
                  encode(SensorMsg{t, q[static_cast<Eigen::Index>(i)], 0.0, false}), t),
              t);
}

bool has_event(const std::vector<Event>& events, std::string_view kind) {
  return std::any_of(events.begin(), events.end(), [&](const Event& e) { return e.kind == kind; });
}

ops::Scenario scenario(model::RobotDescription desc, model::RoleTable roles, double duration) {
  ops::Scenario s;
  s.name = "test";
  s.description = std::move(desc);
  s.role_table = std::move(roles);
  s.duration = duration;
  return s;
}

model::RoleTable minimal_roles() {
  return {{"limb1-pc", {{Level::joint, Level::ik, Level::limb}, "limb1"}},
          {"wheel1-pc", {{Level::wheel_direct}, "wheel1"}},
          {"mission", {{Level::mover, Level::mission_control}, ""}},
          {"operator-A", {{Level::operator_}, ""}},
          {"operator-B", {{Level::operator_}, ""}}};
}

stack::InputEvent press(double t, std::string op, InputOp kind, std::string target, double speed = 0.0) {
  stack::InputEvent ev;
  ev.t = t;
  ev.op_id = std::move(op);
  ev.op = kind;
  ev.target = std::move(target);
  ev.speed = speed;
  return ev;
}

double max_abs_velocity(ops::World& w, const std::string& module) {
  double v = 0.0;
  for (const auto& [key, j] : w.plant().joints())
    if (j.module == module) v = std::max(v, std::abs(j.velocity));
  return v;
}

}  // namespace

// ---- level 1 ----

TEST_CASE("joint node forwards a fresh command") {
  auto chain = limb_chain();
  JointNode n("limb1-pc", chain);
  n.receive(env("cmd/limb1/joint2", pos_cmd(0.0, 0.25)), 0.0);
  TickOutput out;
  n.tick(0.02, out);
  REQUIRE(out.joints.size() == 1);
  CHECK(out.joints[0].joint == "joint2");
  CHECK(out.joints[0].command == ctrl::CommandOut{ctrl::CommandKind::position, 0.25});
}

TEST_CASE("joint node holds at the sensor after the silence timeout") {
  auto chain = limb_chain();
  JointNode n("limb1-pc", chain, 0.3);
  n.receive(env("cmd/limb1/joint1", pos_cmd(0.0, 1.0)), 0.0);
  // the watchdog oracle: holding exactly when now - last receive > timeout
  for (int k = 1; k <= 20; ++k) {
    double t = k * kTick;
    n.receive(env("sensor/limb1/joint1", encode(SensorMsg{t, 0.01 * k, kVmax, false}), t), t);
    TickOutput out;
    n.tick(t, out);
    bool expect_hold = t - 0.0 > 0.3 + 1e-9;
    CAPTURE(t);
    CHECK(n.holding("joint1") == expect_hold);
    auto it = std::find_if(out.joints.begin(), out.joints.end(), [](const auto& a) { return a.joint == "joint1"; });
    REQUIRE(it != out.joints.end());
    CHECK(it->command.value == doctest::Approx(expect_hold ? 0.01 * 16 : 1.0));
    if (k == 16) CHECK(has_event(out.events, "silence-hold"));
  }
}

TEST_CASE("joint node clamps commands to the joint limits") {
  auto chain = limb_chain();
  JointNode n("limb1-pc", chain);
  n.receive(env("cmd/limb1/joint3", pos_cmd(0.0, 10.0)), 0.0);
  n.receive(env("cmd/limb1/joint4", encode(JointCommandMsg{0.0, {ctrl::CommandKind::velocity, -9.0}})), 0.0);
  TickOutput out;
  n.tick(0.02, out);
  for (const auto& a : out.joints) {
    if (a.joint == "joint3") CHECK(a.command.value == chain.joints[2].limits.hi);
    if (a.joint == "joint4") CHECK(a.command.value == -chain.joints[3].v_max);
  }
}

TEST_CASE("joint node rejects a command for an unknown joint") {
  JointNode n("limb1-pc", limb_chain());
  n.receive(env("cmd/limb1/joint99", pos_cmd(0.0, 0.1)), 0.0);
  TickOutput out;
  n.tick(0.02, out);
  CHECK(out.joints.empty());
  CHECK(has_event(out.events, "unknown-joint"));
}

TEST_CASE("level 1 never holds more than one future target") {
  auto chain = limb_chain();
  JointNode n("limb1-pc", chain);
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::uniform_int_distribution<int> burst(0, 6);
  for (int k = 1; k <= 500; ++k) {
    double t = k * kTick;
    for (int m = burst(rng); m > 0; --m)
      n.receive(env("cmd/limb1/joint" + std::to_string(1 + (k + m) % 7), pos_cmd(t, u(rng))), t);
    TickOutput out;
    n.tick(t, out);
    for (const auto& j : chain.joints) REQUIRE(n.queued_targets(j.name) <= 1);
  }
}

// ---- level 2 ----

TEST_CASE("IK nudge matches the Jacobian pseudo-inverse") {
  auto chain = limb_chain();
  IkNode n("limb1-pc", chain);
  auto q = test_q();
  Eigen::Matrix<double, 6, 1> nudge = Eigen::Matrix<double, 6, 1>::Zero();
  nudge[0] = 0.01;
  kin::Jacobian J = kin::jacobian(chain, q);
  Eigen::MatrixXd pinv = Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd>(J).pseudoInverse();
  kin::JointVector oracle = pinv * nudge;
  kin::JointVector got = n.nudge_delta(q, nudge);
  CHECK((got - oracle).cwiseAbs().maxCoeff() < 1e-3);
}

TEST_CASE("IK zero nudge gives zero deltas") {
  IkNode n("limb1-pc", limb_chain());
  CHECK(n.nudge_delta(test_q(), Eigen::Matrix<double, 6, 1>::Zero()).norm() == 0.0);
}

TEST_CASE("IK node holds and reports a target beyond reach") {
  auto chain = limb_chain();
  IkNode n("limb1-pc", chain);
  auto q = test_q();
  feed_sensors(n, chain, q, 0.0);
  IkMsg m;
  m.mode = IkMsg::Mode::target;
  m.target.position = Eigen::Vector3d(chain.reach() + 0.5, 0.0, 0.0);
  n.receive(env(topic::ik("limb1"), encode(m)), 0.0);
  TickOutput out;
  n.tick(0.02, out);
  CHECK(has_event(out.events, "ik-unreachable"));
  REQUIRE(out.messages.size() == chain.size());
  for (std::size_t i = 0; i < chain.size(); ++i)
    CHECK(decode_joint_command(out.messages[i].second).command.value == q[static_cast<Eigen::Index>(i)]);
}

TEST_CASE("IK node output stays within delta_e of the sensed angles") {
  auto chain = limb_chain();
  IkNode n("limb1-pc", chain, kDeltaE);
  auto q = test_q();
  feed_sensors(n, chain, q, 0.0);
  IkMsg m;
  m.mode = IkMsg::Mode::target;
  kin::JointVector far = q;
  far[0] += 1.0;
  m.target = kin::forward_kinematics(chain, far);
  n.receive(env(topic::ik("limb1"), encode(m)), 0.0);
  TickOutput out;
  n.tick(0.02, out);
  REQUIRE(out.messages.size() == chain.size());
  for (std::size_t i = 0; i < chain.size(); ++i)
    CHECK(std::abs(decode_joint_command(out.messages[i].second).command.value - q[static_cast<Eigen::Index>(i)]) <=
          kDeltaE + 1e-12);
}

// ---- level 3 ----

TEST_CASE("limb executor drives the plant to the final waypoint") {
  auto desc = model::minimal();
  auto chain = desc.chains.at(0);
  plant::Plant p(desc);
  std::vector<double> start(7, 0.0), goal = {0.4, -0.3, 0.2, 0.6, -0.1, 0.3, 0.5};
  double T = 0.6 / kVmax;
  LimbTrajectory traj;
  for (const auto& j : chain.joints) traj.joints.push_back(j.name);
  traj.waypoints = {{0.0, start}, {T, goal}};
  validate_trajectory(traj, chain);
  LimbExecutor ex(traj, start, kDeltaE);
  double t = 0.0;
  while (!ex.done() && t < 10.0) {
    t += kTick;
    auto readings = p.step(kTick, t);
    std::vector<double> y;
    for (const auto& j : chain.joints) y.push_back(p.joint("limb1", j.name).sensed());
    auto u = ex.step(kTick, y);
    if (!u) break;
    for (std::size_t i = 0; i < u->size(); ++i)
      p.command("limb1", chain.joints[i].name, {ctrl::CommandKind::position, (*u)[i]});
  }
  for (int k = 0; k < 10; ++k) p.step(kTick, t += kTick);
  CHECK(ex.done());
  for (std::size_t i = 0; i < goal.size(); ++i) CHECK(std::abs(p.joint("limb1", chain.joints[i].name).angle - goal[i]) < 1e-3);
}

TEST_CASE("empty trajectory is an immediate no-op") {
  LimbExecutor ex(LimbTrajectory{}, std::vector<double>(7, 0.0));
  CHECK(ex.done());
  CHECK_FALSE(ex.step(kTick, std::vector<double>(7, 0.0)).has_value());
}

TEST_CASE("trajectory with a waypoint outside the limits is rejected whole") {
  auto chain = limb_chain();
  LimbNode n("limb1-pc", chain);
  feed_sensors(n, chain, kin::JointVector::Zero(7), 0.0);
  TrajectoryMsg m;
  m.id = 1;
  for (const auto& j : chain.joints) m.joints.push_back(j.name);
  std::vector<double> bad(7, 0.1);
  bad[2] = 4.0;
  m.waypoints = {{0.0, std::vector<double>(7, 0.0)}, {1.0, std::vector<double>(7, 0.05)}, {2.0, bad}};
  n.receive(env(topic::traj("limb1"), encode(m)), 0.0);
  TickOutput out;
  n.tick(0.02, out);
  CHECK(has_event(out.events, "trajectory-rejected"));
  CHECK(out.messages.empty());
  CHECK_FALSE(n.executor().has_value());
  CHECK_THROWS_AS(validate_trajectory({m.joints, m.waypoints, 0}, chain), ValidationError);
}

TEST_CASE("disconnection mid-trajectory halts the limb") {
  auto s = scenario(model::minimal(), minimal_roles(), 3.0);
  stack::InputEvent plan = press(0.1, "operator-A", InputOp::plan, "");
  plan.plan["limb1"] = {1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0};
  s.operator_script.push_back(plan);
  const double loss = 1.0;
  s.link_schedule.push_back({"mission", "limb1-pc", bus::LinkCondition::outage(loss, bus::kForever)});
  ops::World w(s);
  double moving_at_loss = 0.0;
  while (w.now() < 3.0 - 1e-9) {
    w.step();
    if (std::abs(w.now() - loss) < 1e-9) moving_at_loss = max_abs_velocity(w, "limb1");
    if (w.now() >= loss + s.parameters.timeout + kTick - 1e-9) REQUIRE(max_abs_velocity(w, "limb1") == 0.0);
  }
  CHECK(moving_at_loss > 0.0);
  CHECK(w.plant().joint("limb1", "joint1").angle < 0.9);
}

// ---- level 4 ----

TEST_CASE("mover schedules every limb over the slowest duration") {
  auto desc = model::dragon();
  std::map<std::string, model::KinematicChain> chains;
  for (const auto& c : desc.chains) chains[c.module] = c;
  REQUIRE(chains.size() == 2);
  auto it = chains.begin();
  std::string a = it->first, b = (++it)->first;
  std::map<std::string, std::vector<double>> current{{a, std::vector<double>(7, 0.0)}, {b, std::vector<double>(7, 0.0)}};
  auto ta = current[a], tb = current[b];
  ta[1] = 1.0 * kVmax;  // 1 s alone
  tb[3] = -2.0 * kVmax;  // 2 s alone
  auto plan = mover_sync({{a, ta}, {b, tb}}, current, chains);
  CHECK(plan.common_duration == doctest::Approx(2.0).epsilon(1e-12));
  for (const auto& [limb, traj] : plan.trajectories) CHECK(traj.duration() == doctest::Approx(2.0).epsilon(1e-12));
}

TEST_CASE("single-limb plan equals its solo trajectory") {
  auto desc = model::minimal();
  std::map<std::string, model::KinematicChain> chains{{"limb1", desc.chains[0]}};
  std::vector<double> q0(7, 0.1), q1(7, 0.1);
  q1[4] = 0.6;
  auto plan = mover_sync({{"limb1", q1}}, {{"limb1", q0}}, chains);
  CHECK(plan.common_duration == doctest::Approx(0.5 / kVmax));
  const auto& t = plan.trajectories.at("limb1");
  REQUIRE(t.waypoints.size() == 2);
  CHECK(t.waypoints[0] == Waypoint{0.0, q0});
  CHECK(t.waypoints[1] == Waypoint{plan.common_duration, q1});
}

TEST_CASE("mover rejects a plan with one target out of limits and sends nothing") {
  auto desc = model::dragon();
  std::map<std::string, model::KinematicChain> chains;
  for (const auto& c : desc.chains) chains[c.module] = c;
  std::map<std::string, std::vector<double>> current, targets;
  for (const auto& [id, c] : chains) {
    current[id] = std::vector<double>(7, 0.0);
    targets[id] = std::vector<double>(7, 0.2);
  }
  targets.begin()->second[0] = 5.0;
  CHECK_THROWS_AS(mover_sync(targets, current, chains), ValidationError);

  MoverNode n("mission", desc.chains);
  for (const auto& c : desc.chains) feed_sensors(n, c, kin::JointVector::Zero(7), 0.0);
  n.receive(env(std::string(topic::kMoverPlan), encode(PlanMsg{0.0, 1, targets})), 0.0);
  TickOutput out;
  for (int k = 1; k <= 10; ++k) n.tick(k * kTick, out);
  CHECK(has_event(out.events, "plan-rejected"));
  CHECK(out.messages.empty());
}

TEST_CASE("limbs of one plan finish within one tick of each other") {
  model::RoleTable roles{{"mission", {{Level::mover, Level::mission_control}, ""}},
                         {"operator-A", {{Level::operator_}, ""}}};
  auto desc = model::dragon();
  for (const auto& c : desc.chains) roles[c.module + "-pc"] = {{Level::joint, Level::ik, Level::limb}, c.module};
  auto s = scenario(desc, roles, 4.0);
  stack::InputEvent plan = press(0.1, "operator-A", InputOp::plan, "");
  std::vector<double> near(7, 0.0), far(7, 0.0);
  near[1] = 0.3;
  far[1] = -0.9;
  far[5] = 0.4;
  plan.plan[desc.chains[0].module] = near;
  plan.plan[desc.chains[1].module] = far;
  s.operator_script.push_back(plan);
  ops::World w(s);
  std::map<std::string, double> finished;
  while (w.now() < 4.0 - 1e-9) {
    w.step();
    for (const auto& c : desc.chains) {
      const auto& target = plan.plan.at(c.module);
      bool there = true;
      for (std::size_t i = 0; i < c.size(); ++i)
        there = there && std::abs(w.plant().joint(c.module, c.joints[i].name).angle - target[i]) < 1e-3;
      if (!there) finished.erase(c.module);
      else finished.try_emplace(c.module, w.now());
    }
  }
  REQUIRE(finished.size() == 2);
  CHECK(std::abs(finished.begin()->second - finished.rbegin()->second) <= kTick + 1e-9);
}

// ---- level 5 ----

TEST_CASE("key held 1 s at 0.1 rad/s advances the joint 0.1 rad") {
  auto s = scenario(model::minimal(), minimal_roles(), 2.5);
  s.operator_script = {press(0.5, "operator-A", InputOp::down, "limb1/joint2", 0.1),
                       press(1.5, "operator-A", InputOp::up, "limb1/joint2")};
  auto rec = ops::run_scenario(s);
  double moved = 0.0;
  for (const auto& sample : rec.truth)
    if (sample.joint == "limb1/joint2") moved = sample.angle;
  CHECK(std::abs(moved - 0.1) <= kDeltaE);
}

TEST_CASE("no keys held publishes a zero-rate hold") {
  OperatorNode op("operator-A", model::minimal(), ctrl::StrategyKind::clamped_integral);
  op.input(press(0.0, "operator-A", InputOp::down, "limb1/joint1", 0.1));
  op.input(press(0.1, "operator-A", InputOp::up, "limb1/joint1"));
  op.receive(env("sensor/limb1/joint1", encode(SensorMsg{0.0, 0.0, 0.0, false})), 0.0);
  for (int k = 1; k <= 20; ++k) {
    TickOutput out;
    op.tick(k * kTick, out);
  }
  REQUIRE(!op.trace().empty());
  CHECK(op.trace().back().r_dot == 0.0);
  CHECK(op.held().empty());
}

TEST_CASE("operator rejects a target absent from the description") {
  OperatorNode op("operator-A", model::minimal(), ctrl::StrategyKind::clamped_integral);
  op.input(press(0.0, "operator-A", InputOp::down, "limb7/joint1", 0.1));
  TickOutput out;
  op.tick(0.02, out);
  CHECK(has_event(out.events, "unknown-target"));
  CHECK(out.messages.empty());
}

TEST_CASE("two operators drive disjoint targets without cross-talk") {
  auto s = scenario(model::minimal(), minimal_roles(), 2.0);
  s.operator_script = {press(0.2, "operator-A", InputOp::down, "wheel1/drive", 0.2),
                       press(0.2, "operator-B", InputOp::down, "limb1/joint1", 0.2),
                       press(1.2, "operator-A", InputOp::up, "wheel1/drive"),
                       press(1.2, "operator-B", InputOp::up, "limb1/joint1")};
  ops::World w(s);
  auto rec = w.run();
  for (const auto& e : rec.delivery_log) {
    if (e.topic.rfind("telemetry/", 0) == 0) continue;
    if (e.src == "operator-A") CHECK(e.topic.rfind("wheel/", 0) == 0);
    if (e.src == "operator-B") CHECK(e.topic.rfind("cmd/limb1/", 0) == 0);
  }
  CHECK(w.plant().wheels().at("wheel1").pose.x == doctest::Approx(0.2 * plant::kWheelRadius * 1.0).epsilon(0.05));
  CHECK(w.plant().joint("limb1", "joint1").angle > 0.1);
}

TEST_CASE("wheels keep their last speed when the link drops") {
  auto s = scenario(model::minimal(), minimal_roles(), 3.0);
  s.operator_script = {press(0.2, "operator-A", InputOp::down, "wheel1/drive", 0.2),
                       press(1.5, "operator-A", InputOp::up, "wheel1/drive")};
  s.link_schedule.push_back({"operator-A", "wheel1-pc", bus::LinkCondition::outage(1.0, bus::kForever)});
  ops::World w(s);
  w.run();
  const auto& wheel = w.plant().wheels().at("wheel1");
  CHECK(wheel.left_speed == doctest::Approx(0.2));
  CHECK(wheel.right_speed == doctest::Approx(0.2));
}

// ---- calibration ----

namespace {

ops::Scenario calibration_scenario(double start_above_edge, double zero_offset, std::optional<double> cut) {
  model::RoleTable roles{{"limb1-pc", {{Level::joint}, "limb1"}}, {"cal-pc", {{Level::calibrator}, ""}}};
  auto s = scenario(model::palette_limb(), roles, 10.0);
  s.calibration.push_back({"cal-pc", "limb1/joint2", -0.05});
  s.initial_state["limb1/joint2"] = plant::Reflector{}.hi + start_above_edge;
  s.zero_offsets["limb1/joint2"] = zero_offset;
  if (cut) s.link_schedule.push_back({"cal-pc", "limb1-pc", bus::LinkCondition::outage(*cut, bus::kForever)});
  return s;
}

}  // namespace

TEST_CASE("calibration finds the reflector edge") {
  const double offset = 0.013;
  ops::World w(calibration_scenario(0.3, offset, std::nullopt));
  w.run();
  const auto& st = w.host("cal-pc")->find<CalibratorNode>()->state();
  REQUIRE(st.phase == CalibrationPhase::done);
  // the edge as the sensor sees it
  double edge = plant::Reflector{}.hi - offset;
  CHECK(std::abs(*st.offset - edge) < 0.002);
}

TEST_CASE("calibration starting on the edge is done at once") {
  CalibrationState st;
  st.module = "limb1";
  st.joint = "joint2";
  auto next = calibrate_step(st, SensorMsg{0.0, 0.0042, 0.0, true}, kTick);
  CHECK_FALSE(next.has_value());
  CHECK(st.phase == CalibrationPhase::done);
  CHECK(*st.offset == 0.0042);
}

TEST_CASE("calibration sweep without an edge halts") {
  CalibrationState st;
  st.limits = {-0.5, 0.5};
  std::optional<double> next = 0.3;
  double t = 0.0;
  while (next) next = calibrate_step(st, SensorMsg{t += kTick, *next, -0.05, false}, kTick);
  CHECK(st.phase == CalibrationPhase::halted);
  CHECK(st.error == "reflector-not-found");
}

TEST_CASE("calibration stops when the link is cut mid-seek") {
  const double cut = 2.0;
  ops::World w(calibration_scenario(0.3, 0.0, cut));
  double angle_at_stop = 0.0;
  while (w.now() < 6.0 - 1e-9) {
    w.step();
    double t = w.now();
    const auto& j = w.plant().joint("limb1", "joint2");
    if (t > 2 * kTick && t < cut) CHECK(j.velocity != 0.0);
    if (std::abs(t - (cut + 0.3 + kTick)) < 1e-9) angle_at_stop = j.angle;
    if (t >= cut + 0.3 + kTick - 1e-9) {
      REQUIRE(j.velocity == 0.0);
      REQUIRE(j.angle == angle_at_stop);
    }
  }
  CHECK(w.host("cal-pc")->find<CalibratorNode>()->state().phase == CalibrationPhase::seeking);
}

// ---- launch ----

TEST_CASE("launch instantiates exactly the assigned levels") {
  auto desc = model::minimal();
  auto roles = minimal_roles();
  auto levels = [](const Host& h) {
    std::vector<Level> out;
    for (const auto& n : h.nodes) out.push_back(n->level());
    return out;
  };
  auto limb = launch("limb1-pc", desc, roles);
  CHECK(levels(limb) == std::vector<Level>{Level::joint, Level::ik, Level::limb});
  REQUIRE(limb.find<IkNode>());
  CHECK(limb.find<IkNode>()->chain() == desc.chains[0]);
  auto op = launch("operator-A", desc, roles);
  CHECK(levels(op) == std::vector<Level>{Level::operator_});
  // a pure function of its arguments
  CHECK(levels(launch("limb1-pc", desc, roles)) == levels(limb));
  CHECK_THROWS_AS(launch("nobody", desc, roles), ValidationError);
}

TEST_CASE("launching the same node id twice is an error") {
  Launcher l;
  auto desc = model::minimal();
  auto roles = minimal_roles();
  l.launch("limb1-pc", desc, roles);
  CHECK(l.launched("limb1-pc"));
  CHECK_THROWS_AS(l.launch("limb1-pc", desc, roles), Error);
}

// ---- messages ----

TEST_CASE("message codecs round-trip") {
  TrajectoryMsg t{1.5, 42, {"joint1", "joint2"}, {{0.0, {0.1, 0.2}}, {1.0, {0.3, -0.4}}}};
  auto back = decode_trajectory(encode(t));
  CHECK(back.id == 42);
  CHECK(back.joints == t.joints);
  CHECK(back.waypoints == t.waypoints);
  auto s = decode_sensor(encode(SensorMsg{0.5, -0.25, 0.1, true}));
  CHECK(s.angle == -0.25);
  CHECK(s.reflector);
  CHECK_THROWS_AS(decode_sensor("{\"t\":1"), Error);
  CHECK_THROWS_AS(decode_joint_command("{\"t\":1}"), Error);
  CHECK(topic::cmd("limb1", "joint3") == "cmd/limb1/joint3");
  CHECK(topic::wheel_speed("wheel1") == "wheel/wheel1/speed");
  CHECK(topic::telemetry("limb1-pc") == "telemetry/limb1-pc");
}
