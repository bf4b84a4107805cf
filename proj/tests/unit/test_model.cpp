#include <doctest.h>

#include <functional>
#include <random>
#include <set>
#include <string>

#include "moonstack/error.hpp"
#include "moonstack/model/description.hpp"
#include "moonstack/model/presets.hpp"
#include "moonstack/model/roles.hpp"

using namespace moonstack;
using namespace moonstack::model;

namespace {

const char* kMinimalDoc = R"({
  "name": "minimal",
  "modules": [
    {"id": "limb1", "kind": "Limb"},
    {"id": "wheel1", "kind": "Wheel", "joints": [], "fixtures": ["fixture1", "fixture2"]}
  ],
  "attachments": [["limb1.gripper1", "wheel1.fixture1"]]
})";

std::string error_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.what();
  }
  return "";
}

bool contains(const std::string& haystack, const std::string& needle) { return haystack.find(needle) != std::string::npos; }

}  // namespace

TEST_CASE("minimal document parses to one 7-joint chain") {
  auto d = parse_description(kMinimalDoc);
  CHECK(d.name == "minimal");
  REQUIRE(d.chains.size() == 1);
  CHECK(d.chains[0].joints.size() == 7);
  CHECK(d.chains[0].root_frame == "limb1.gripper1");
  CHECK(d.chains[0].tip_frame == "limb1.gripper2");
  CHECK(motor_count(d) == 11);
  CHECK(d == minimal());
}

TEST_CASE("canonical limb geometry") {
  auto joints = canonical_limb_joints();
  double total = 0.0;
  for (const auto& j : joints) {
    total += j.link_length;
    CHECK(j.v_max == doctest::Approx(5.4 * 2.0 * M_PI / 60.0).epsilon(1e-12));
  }
  CHECK(total == doctest::Approx(1.55).epsilon(1e-12));
  // roll-pitch alternation
  CHECK(joints[0].axis == std::array<double, 3>{1, 0, 0});
  CHECK(joints[1].axis == std::array<double, 3>{0, 1, 0});
  CHECK(joints[6].axis == std::array<double, 3>{1, 0, 0});
}

TEST_CASE("empty module list is rejected") {
  auto msg = error_of([] { parse_description(R"({"name": "x", "modules": [], "attachments": []})"); });
  CHECK(contains(msg, "no modules"));
}

TEST_CASE("dragon has two chains and 22 motors") {
  auto d = dragon();
  CHECK(d.chains.size() == 2);
  // inventory oracle: every limb brings 7 joints and 2 grippers, every wheel 2 drives
  int oracle = 0;
  for (const auto& m : d.modules) oracle += m.kind == ModuleKind::limb ? 7 + 2 : (m.kind == ModuleKind::wheel ? 2 : 0);
  CHECK(oracle == 2 * (9 + 2));
  CHECK(motor_count(d) == oracle);
  auto reparsed = parse_description(serialize_description(d));
  CHECK(reparsed == d);
}

TEST_CASE("motor inventory of reference assemblies") {
  CHECK(motor_count(minimal()) == 11);
  CHECK(motor_count(tricycle()) == 33);
  CHECK(motor_count(vehicle()) == 13);
  RobotDescription body_only;
  body_only.name = "body";
  body_only.modules = {make_body("body1")};
  CHECK(motor_count(finalize_description(body_only)) == 0);
}

TEST_CASE("syntax errors carry line and column") {
  const char* bad = "{\n  \"name\": \"x\",\n  \"modules\": [ ,\n}";
  try {
    parse_description(bad);
    FAIL("expected a syntax error");
  } catch (const SyntaxError& e) {
    CHECK(e.line() == 3);
    CHECK(e.column() == 16);
  }
}

TEST_CASE("structural errors") {
  SUBCASE("dangling attachment") {
    auto msg = error_of([] {
      parse_description(R"({"name":"x","modules":[{"id":"limb1","kind":"Limb"}],"attachments":[["limb1.gripper1","ghost.fixture1"]]})");
    });
    CHECK(contains(msg, "dangling attachment id 'ghost.fixture1'"));
  }
  SUBCASE("duplicate module id") {
    auto msg = error_of([] {
      parse_description(R"({"name":"x","modules":[{"id":"limb1","kind":"Limb"},{"id":"limb1","kind":"Limb"}]})");
    });
    CHECK(contains(msg, "duplicate module id"));
  }
  SUBCASE("cyclic assembly") {
    auto msg = error_of([] {
      parse_description(R"({"name":"x","modules":[{"id":"limb1","kind":"Limb"},{"id":"wheel1","kind":"Wheel","fixtures":["a","b"]}],
        "attachments":[["limb1.gripper1","wheel1.a"],["limb1.gripper2","wheel1.b"]]})");
    });
    CHECK(contains(msg, "cyclic assembly"));
  }
  SUBCASE("fixture used twice") {
    auto msg = error_of([] {
      parse_description(R"({"name":"x","modules":[{"id":"limb1","kind":"Limb"},{"id":"limb2","kind":"Limb"},{"id":"wheel1","kind":"Wheel","fixtures":["a"]}],
        "attachments":[["limb1.gripper1","wheel1.a"],["limb2.gripper1","wheel1.a"]]})");
    });
    CHECK(contains(msg, "more than one attachment"));
  }
  SUBCASE("gripper paired with gripper") {
    auto msg = error_of([] {
      parse_description(R"({"name":"x","modules":[{"id":"limb1","kind":"Limb"},{"id":"limb2","kind":"Limb"}],
        "attachments":[["limb1.gripper1","limb2.gripper1"]]})");
    });
    CHECK(contains(msg, "not a grapple fixture"));
  }
  SUBCASE("disconnected modules") {
    auto msg = error_of([] {
      parse_description(R"({"name":"x","modules":[{"id":"limb1","kind":"Limb"},{"id":"wheel1","kind":"Wheel","fixtures":["a"]}]})");
    });
    CHECK(contains(msg, "not connected"));
  }
  SUBCASE("body needs four fixtures") {
    auto msg = error_of([] { parse_description(R"({"name":"x","modules":[{"id":"b","kind":"Body","fixtures":["a"]}]})"); });
    CHECK(contains(msg, "modules[0].fixtures"));
  }
  SUBCASE("bad joint limits") {
    auto msg = error_of([] {
      parse_description(R"({"name":"x","modules":[{"id":"t","kind":"Gripper-tool","fixtures":["f"],
        "joints":[{"name":"j","axis":[0,0,1],"kind":"revolute","limits":[1,-1],"v_max":1,"link_length":0}]}]})");
    });
    CHECK(contains(msg, "modules[0].joints[0].limits"));
  }
}

TEST_CASE("chain root follows palette anchor, body, then first limb") {
  SUBCASE("palette on gripper2 reverses the chain") {
    RobotDescription d;
    d.name = "rev";
    d.modules = {make_limb("limb1")};
    d.root = parse_endpoint("limb1.gripper2");
    d = finalize_description(d);
    REQUIRE(d.chains.size() == 1);
    const auto& c = d.chains[0];
    CHECK(c.root_frame == "limb1.gripper2");
    CHECK(c.joints.front().name == "joint7");
    CHECK(c.joints.back().name == "joint1");
    CHECK(c.base_offset == doctest::Approx(0.10));
    CHECK(c.reach() == doctest::Approx(1.55));
  }
  SUBCASE("tricycle limbs hang from the body") {
    for (const auto& c : tricycle().chains) CHECK(c.root_frame == c.module + ".gripper1");
  }
  SUBCASE("limb reached through its gripper2 is reversed") {
    RobotDescription d;
    d.name = "x";
    d.modules = {make_body("body1"), make_limb("limb1")};
    d.attachments = {{parse_endpoint("limb1.gripper2"), parse_endpoint("body1.fixture3")}};
    d = finalize_description(d);
    CHECK(d.chains[0].root_frame == "limb1.gripper2");
  }
}

TEST_CASE("parsing is deterministic and round-trips") {
  for (const auto& d : {minimal(), vehicle(), dragon(), tricycle(), palette_limb()}) {
    auto text = serialize_description(d);
    CHECK(parse_description(text) == parse_description(text));
    CHECK(serialize_description(parse_description(text)) == text);
  }
}

TEST_CASE("property: motor count of random tree assemblies is 9L + 2W") {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 200; ++trial) {
    RobotDescription d;
    d.name = "random";
    int limbs = 0;
    int wheels = 0;
    int bodies = 0;
    // Grow a tree: each new module attaches to a free port of an existing one.
    std::vector<Endpoint> free_grippers;
    std::vector<Endpoint> free_fixtures;
    auto add = [&](int kind) {
      std::string id;
      if (kind == 0) {
        id = "limb" + std::to_string(++limbs);
        d.modules.push_back(make_limb(id));
      } else if (kind == 1) {
        id = "wheel" + std::to_string(++wheels);
        d.modules.push_back(make_wheel(id, {"f1", "f2", "f3"}));
      } else {
        id = "body" + std::to_string(++bodies);
        d.modules.push_back(make_body(id));
      }
      return id;
    };
    add(static_cast<int>(rng() % 3));
    auto register_ports = [&](const ModuleSpec& m, const std::string& used) {
      if (m.kind == ModuleKind::limb) {
        for (std::string p : {"gripper1", "gripper2"})
          if (p != used) free_grippers.push_back({m.id, p});
      } else {
        for (const auto& f : m.fixtures)
          if (f != used) free_fixtures.push_back({m.id, f});
      }
    };
    register_ports(d.modules.back(), "");
    int n = 1 + static_cast<int>(rng() % 8);
    for (int i = 0; i < n; ++i) {
      bool as_limb = free_fixtures.empty() ? false : (free_grippers.empty() ? true : rng() % 2 == 0);
      if (as_limb) {
        auto at = rng() % free_fixtures.size();
        Endpoint fixture = free_fixtures[at];
        free_fixtures.erase(free_fixtures.begin() + static_cast<long>(at));
        std::string id = add(0);
        std::string port = rng() % 2 ? "gripper1" : "gripper2";
        d.attachments.push_back({{id, port}, fixture});
        register_ports(d.modules.back(), port);
      } else {
        if (free_grippers.empty()) break;
        auto at = rng() % free_grippers.size();
        Endpoint gripper = free_grippers[at];
        free_grippers.erase(free_grippers.begin() + static_cast<long>(at));
        std::string id = add(1 + static_cast<int>(rng() % 2));
        const auto& m = d.modules.back();
        d.attachments.push_back({gripper, {id, m.fixtures[0]}});
        register_ports(m, m.fixtures[0]);
      }
    }
    auto done = finalize_description(d);
    CHECK(motor_count(done) == 9 * limbs + 2 * wheels);
    CHECK(done.chains.size() == static_cast<std::size_t>(limbs));
  }
}

TEST_CASE("property: attachment graphs with a cycle are rejected") {
  std::mt19937_64 rng(11);
  int cyclic = 0;
  for (int trial = 0; trial < 300; ++trial) {
    int limbs = 1 + static_cast<int>(rng() % 4);
    int wheels = 1 + static_cast<int>(rng() % 4);
    RobotDescription d;
    d.name = "graph";
    for (int i = 0; i < limbs; ++i) d.modules.push_back(make_limb("L" + std::to_string(i)));
    for (int i = 0; i < wheels; ++i) d.modules.push_back(make_wheel("W" + std::to_string(i), {"a", "b", "c"}));
    std::set<std::string> used;
    int edges = static_cast<int>(rng() % static_cast<unsigned>(limbs * 2 + 1));
    for (int e = 0; e < edges; ++e) {
      Endpoint g{"L" + std::to_string(rng() % limbs), rng() % 2 ? "gripper1" : "gripper2"};
      Endpoint f{"W" + std::to_string(rng() % wheels), std::string(1, static_cast<char>('a' + rng() % 3))};
      if (used.count(g.str()) || used.count(f.str())) continue;
      used.insert(g.str());
      used.insert(f.str());
      d.attachments.push_back({g, f});
    }
    // Oracle: depth-first search over the undirected multigraph.
    std::map<std::string, std::vector<std::pair<std::string, std::size_t>>> adj;
    for (std::size_t i = 0; i < d.attachments.size(); ++i) {
      adj[d.attachments[i].gripper.module].push_back({d.attachments[i].fixture.module, i});
      adj[d.attachments[i].fixture.module].push_back({d.attachments[i].gripper.module, i});
    }
    std::set<std::string> visited;
    bool has_cycle = false;
    std::function<void(const std::string&, long)> dfs = [&](const std::string& v, long via) {
      visited.insert(v);
      for (const auto& [w, edge] : adj[v]) {
        if (static_cast<long>(edge) == via) continue;
        if (visited.count(w)) {
          has_cycle = true;
        } else {
          dfs(w, static_cast<long>(edge));
        }
      }
    };
    int components = 0;
    for (const auto& m : d.modules) {
      if (!visited.count(m.id)) {
        ++components;
        dfs(m.id, -1);
      }
    }
    auto msg = error_of([&] { finalize_description(d); });
    if (has_cycle) {
      ++cyclic;
      CHECK(contains(msg, "cyclic assembly"));
    } else if (components > 1) {
      CHECK(contains(msg, "not connected"));
    } else {
      CHECK(msg.empty());
    }
  }
  CHECK(cyclic > 10);
}

TEST_CASE("chain_for_node resolves roles") {
  auto d = dragon();
  RoleTable roles{{"limb1-pc", {{Level::joint, Level::ik, Level::limb}, "limb1"}},
                  {"mission-ctl", {{Level::mover, Level::mission_control}, ""}},
                  {"lost-pc", {{Level::joint}, "wheel1"}}};
  auto r = chain_for_node(d, "limb1-pc", roles);
  REQUIRE(r.chain);
  CHECK(r.chain->joints.size() == 7);
  CHECK(r.chain->module == "limb1");
  CHECK(r.has(Level::ik));

  auto mc = chain_for_node(d, "mission-ctl", roles);
  CHECK_FALSE(mc.chain);

  CHECK(contains(error_of([&] { chain_for_node(d, "ghost-pc", roles); }), "unknown node id 'ghost-pc'"));
  CHECK(contains(error_of([&] { chain_for_node(d, "lost-pc", roles); }), "need a kinematic chain"));
  CHECK(chain_for_node(d, "limb1-pc", roles) == r);
}

TEST_CASE("role table JSON") {
  auto roles = parse_role_table(R"({"limb1-pc": {"levels": [1, 2, 3], "module": "limb1"},
                                    "wheel1-pc": {"levels": ["wheel-direct"], "module": "wheel1"},
                                    "operator-A": {"levels": [5]}})");
  CHECK(roles.at("limb1-pc").levels.size() == 3);
  CHECK(roles.at("wheel1-pc").levels[0] == Level::wheel_direct);
  CHECK(contains(error_of([] { parse_role_table(R"({"x": {"levels": [1]}})"); }), "levels 1-3 need a module"));
  CHECK(contains(error_of([] { parse_role_table(R"({"x": {"levels": [9]}})"); }), "unknown level"));
}
