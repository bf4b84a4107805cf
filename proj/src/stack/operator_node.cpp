#include "moonstack/stack/operator_node.hpp"

#include <algorithm>
#include <array>

#include "moonstack/error.hpp"

namespace moonstack::stack {

namespace {

constexpr std::array<std::string_view, 6> kAxes{"x", "y", "z", "rx", "ry", "rz"};

int axis_index(std::string_view axis) {
  for (std::size_t i = 0; i < kAxes.size(); ++i)
    if (kAxes[i] == axis) return static_cast<int>(i);
  return -1;
}

}  // namespace

std::string_view to_string(InputOp op) {
  switch (op) {
    case InputOp::down: return "down";
    case InputOp::up: return "up";
    case InputOp::plan: return "plan";
    case InputOp::ik_target: return "ik_target";
    case InputOp::ik_release: return "ik_release";
    case InputOp::grip: return "grip";
  }
  return "?";
}

InputOp parse_input_op(std::string_view text) {
  for (auto op : {InputOp::down, InputOp::up, InputOp::plan, InputOp::ik_target, InputOp::ik_release, InputOp::grip})
    if (to_string(op) == text) return op;
  throw ValidationError("op", "unknown operator input '" + std::string(text) + "'");
}

OperatorNode::OperatorNode(std::string host, const model::RobotDescription& desc, ctrl::StrategyKind strategy,
                           ctrl::StrategyParams params, double tick)
    : Node(std::move(host)), desc_(desc), strategy_(strategy), params_(params), tick_(tick) {
  // fail early on bad thresholds rather than on the first key press
  (void)ctrl::make_strategy(strategy_, 0.0, 0.0, params_);
}

void OperatorNode::receive(const bus::Envelope& e, double) {
  auto parts = topic::split(e.topic);
  if (parts.size() != 3) return;
  std::string key(parts[1]);
  key += '/';
  key += parts[2];
  y_[key] = decode_sensor(e.payload).angle;
}

void OperatorNode::input(InputEvent ev) {
  // stable insert keeps same-time events in arrival order
  auto pos = std::upper_bound(queue_.begin(), queue_.end(), ev.t,
                              [](double t, const InputEvent& e) { return t < e.t; });
  queue_.insert(pos, std::move(ev));
}

void OperatorNode::release_all(double t) {
  for (const auto& [target, b] : bindings_)
    if (b.held) input(InputEvent{t, host(), InputOp::up, target, 0.0, {}, {}, true});
}

std::vector<std::string> OperatorNode::held() const {
  std::vector<std::string> out;
  for (const auto& [target, b] : bindings_)
    if (b.held) out.push_back(target);
  return out;
}

std::optional<OperatorNode::Binding> OperatorNode::resolve(const std::string& target) const {
  auto parts = topic::split(target);
  Binding b;
  if (parts.size() == 3 && parts[0] == "ik") {
    if (!desc_.find_chain(std::string(parts[1])) || axis_index(parts[2]) < 0) return std::nullopt;
    b.kind = TargetKind::ik;
  } else if (parts.size() == 2) {
    const auto* m = desc_.find_module(std::string(parts[0]));
    if (!m) return std::nullopt;
    if (m->kind == model::ModuleKind::wheel && (parts[1] == "drive" || parts[1] == "turn")) {
      b.kind = TargetKind::wheel;
    } else if (std::any_of(m->joints.begin(), m->joints.end(), [&](const auto& j) { return j.name == parts[1]; })) {
      b.kind = TargetKind::joint;
    } else {
      return std::nullopt;
    }
  } else {
    return std::nullopt;
  }
  b.module = std::string(parts[parts.size() - 2]);
  b.name = std::string(parts.back());
  return b;
}

void OperatorNode::apply(const InputEvent& ev, double t_prev, TickOutput& out) {
  double te = std::max(ev.t, t_prev);
  switch (ev.op) {
    case InputOp::down:
    case InputOp::up: {
      auto it = bindings_.find(ev.target);
      if (it == bindings_.end()) {
        auto b = resolve(ev.target);
        if (!b) {
          out.events.push_back(event(te, "unknown-target", ev.target));
          return;
        }
        it = bindings_.emplace(ev.target, std::move(*b)).first;
      }
      Binding& b = it->second;
      if (b.held) b.displacement += b.speed * (te - std::max(b.since, t_prev));
      b.held = ev.op == InputOp::down;
      b.since = te;
      if (b.held) b.speed = ev.speed;
      return;
    }
    case InputOp::plan: {
      PlanMsg m;
      m.t = te;
      m.targets = ev.plan;
      out.publish(std::string(topic::kMoverPlan), encode(m));
      return;
    }
    case InputOp::ik_target:
      if (!desc_.find_chain(ev.target)) {
        out.events.push_back(event(te, "unknown-target", ev.target));
        return;
      }
      ik_targets_[ev.target] = ev;
      return;
    case InputOp::ik_release:
      ik_targets_.erase(ev.target);
      return;
    case InputOp::grip: {
      auto parts = topic::split(ev.target);
      if (parts.size() != 2) {
        out.events.push_back(event(te, "unknown-target", ev.target));
        return;
      }
      out.publish(topic::grip(parts[0], parts[1]), encode(GripMsg{te, ev.close}));
      return;
    }
  }
}

void OperatorNode::tick(double now, TickOutput& out) {
  double t_prev = started_ ? t_prev_ : now - tick_;
  started_ = true;
  std::size_t consumed = 0;
  while (consumed < queue_.size() && queue_[consumed].t <= now + 1e-9) apply(queue_[consumed++], t_prev, out);
  queue_.erase(queue_.begin(), queue_.begin() + static_cast<long>(consumed));

  double dt = now - t_prev;
  std::map<std::string, Eigen::Matrix<double, 6, 1>> nudges;
  std::map<std::string, std::pair<double, double>> wheels;  // drive, turn
  for (auto& [target, b] : bindings_) {
    if (b.held) b.displacement += b.speed * (now - std::max(b.since, t_prev));
    double r_dot = dt > 0.0 ? b.displacement / dt : 0.0;
    b.displacement = 0.0;
    switch (b.kind) {
      case TargetKind::joint: {
        auto y = y_.find(target);
        if (y == y_.end()) break;  // nothing to anchor on yet
        if (!b.strategy) b.strategy = ctrl::make_strategy(strategy_, y->second, t_prev, params_);
        ctrl::CommandOut u = ctrl::step(*b.strategy, {now, y->second, r_dot});
        out.publish(topic::cmd(b.module, b.name), encode(JointCommandMsg{now, u}));
        if (tracing_) trace_.push_back({now, target, y->second, r_dot, u});
        break;
      }
      case TargetKind::ik: {
        auto& n = nudges.try_emplace(b.module, Eigen::Matrix<double, 6, 1>::Zero()).first->second;
        n[axis_index(b.name)] += r_dot * dt;
        break;
      }
      case TargetKind::wheel: {
        auto& w = wheels[b.module];
        (b.name == "drive" ? w.first : w.second) += r_dot;
        break;
      }
    }
  }
  for (const auto& [limb, n] : nudges) {
    IkMsg m;
    m.t = now;
    m.nudge = n;
    out.publish(topic::ik(limb), encode(m));
  }
  for (const auto& [module, w] : wheels)
    out.publish(topic::wheel_speed(module), encode(WheelSpeedMsg{now, w.first - w.second, w.first + w.second}));
  for (const auto& [limb, ev] : ik_targets_) {
    IkMsg m;
    m.t = now;
    m.mode = IkMsg::Mode::target;
    m.target = ev.pose;
    out.publish(topic::ik(limb), encode(m));
  }
  t_prev_ = now;
}

}  // namespace moonstack::stack
