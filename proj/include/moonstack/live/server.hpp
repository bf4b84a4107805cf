#pragma once

#include <atomic>
#include <functional>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "moonstack/ops/world.hpp"

// Live mode for the operator console. The world runs lockstep on the
// simulation tick, paced to the wall clock; consoles speak JSON over a
// websocket:
//
//   client -> server  {"type":"input","op":"down"|"up","target":"limb1/joint1","speed":0.1}
//   server -> client  {"type":"telemetry","frame":{...}}
//                     {"type":"joint","name":"limb1/joint1","angle":0.12,"target":0.13}
//                     {"type":"hello","operator":"operator-A"}, {"type":"error","message":"..."}
//
// A console picks its operator node with "/?operator=<id>", otherwise it gets
// the first free one.
namespace moonstack::live {

inline constexpr double kJointRateHz = 20.0;

/// Decode one client frame into an operator input at time `now`. Throws
/// ValidationError for anything that is not a well-formed input.
stack::InputEvent parse_client_message(std::string_view text, const std::string& op_id, double now);
std::string telemetry_message(const ops::TelemetryFrame& frame);
std::string joint_message(const std::string& name, double angle, double target);
std::string hello_message(const std::string& op_id);
std::string error_message(const std::string& text);

/// Everything the server does, minus sockets. Single-threaded.
class LiveCore {
 public:
  explicit LiveCore(ops::Scenario scenario);

  /// Bind a console to an operator node. Empty when the wanted one is taken or
  /// unknown, or when no operator node is free.
  std::optional<std::string> attach(const std::optional<std::string>& wanted = std::nullopt);
  /// The console went away: every key it held is released.
  void detach(const std::string& op_id);
  /// Apply one client frame; returns a reply for the client (empty if none).
  std::string handle(const std::string& op_id, std::string_view text);
  /// One simulation tick; returns frames to broadcast.
  std::vector<std::string> step();

  ops::World& world() { return world_; }
  std::vector<std::string> held(const std::string& op_id);
  std::size_t joint_every() const { return joint_every_; }

 private:
  ops::World world_;
  std::set<std::string> operators_;
  std::set<std::string> bound_;
  std::size_t telemetry_sent_ = 0;
  std::size_t joint_every_ = 1;
  long ticks_ = 0;
};

/// Websocket front end. run() blocks until stop() is called from any thread.
class Server {
 public:
  Server(ops::Scenario scenario, unsigned short port, bool realtime = true);
  ~Server();
  Server(const Server&) = delete;
  Server& operator=(const Server&) = delete;

  /// Bound port (useful with port 0).
  unsigned short port() const;
  void run();
  void stop();
  /// Run `fn` on the server thread against the core and wait for it.
  void with_core(const std::function<void(LiveCore&)>& fn);

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace moonstack::live
