#include "moonstack/model/presets.hpp"

namespace moonstack::model {

namespace {

Attachment attach(std::string gripper, std::string fixture) { return {parse_endpoint(gripper), parse_endpoint(fixture)}; }

}  // namespace

RobotDescription minimal() {
  RobotDescription d;
  d.name = "minimal";
  d.modules = {make_limb("limb1"), make_wheel("wheel1")};
  d.attachments = {attach("limb1.gripper1", "wheel1.fixture1")};
  return finalize_description(std::move(d));
}

RobotDescription vehicle() {
  RobotDescription d;
  d.name = "vehicle";
  d.modules = {make_limb("limb1"), make_wheel("wheel1"), make_wheel("wheel2")};
  d.attachments = {attach("limb1.gripper1", "wheel1.fixture1"), attach("limb1.gripper2", "wheel2.fixture1")};
  return finalize_description(std::move(d));
}

RobotDescription dragon() {
  RobotDescription d;
  d.name = "dragon";
  d.modules = {make_limb("limb1"), make_wheel("wheel1"), make_limb("limb2"), make_wheel("wheel2")};
  d.attachments = {attach("limb1.gripper1", "wheel1.fixture1"), attach("limb1.gripper2", "wheel2.fixture1"),
                   attach("limb2.gripper1", "wheel2.fixture2")};
  return finalize_description(std::move(d));
}

RobotDescription tricycle() {
  RobotDescription d;
  d.name = "tricycle";
  d.modules.push_back(make_body("body1"));
  for (int i = 1; i <= 3; ++i) {
    auto n = std::to_string(i);
    d.modules.push_back(make_limb("limb" + n));
    d.modules.push_back(make_wheel("wheel" + n));
    d.attachments.push_back(attach("limb" + n + ".gripper1", "body1.fixture" + n));
    d.attachments.push_back(attach("limb" + n + ".gripper2", "wheel" + n + ".fixture1"));
  }
  return finalize_description(std::move(d));
}

RobotDescription palette_limb() {
  RobotDescription d;
  d.name = "palette-limb";
  d.modules = {make_limb("limb1")};
  d.root = parse_endpoint("limb1.gripper1");
  return finalize_description(std::move(d));
}

}  // namespace moonstack::model
