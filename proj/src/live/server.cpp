#include "moonstack/live/server.hpp"

#include <chrono>
#include <cmath>
#include <deque>
#include <future>

#include <boost/asio.hpp>
#include <boost/beast/core.hpp>
#include <boost/beast/http.hpp>
#include <boost/beast/websocket.hpp>
#include <json.hpp>

#include "moonstack/error.hpp"
#include "moonstack/stack/operator_node.hpp"
#include "moonstack/util/json_parse.hpp"

namespace moonstack::live {

namespace net = boost::asio;
namespace beast = boost::beast;
namespace http = beast::http;
namespace websocket = beast::websocket;
using tcp = net::ip::tcp;
using nlohmann::json;

// ---- protocol ----

stack::InputEvent parse_client_message(std::string_view text, const std::string& op_id, double now) {
  json m = util::parse_json(text);
  if (!m.is_object()) throw ValidationError("", "expected an object");
  if (m.value("type", "") != "input") throw ValidationError("type", "expected \"input\"");
  auto op = m.find("op");
  if (op == m.end() || !op->is_string()) throw ValidationError("op", "missing");
  stack::InputEvent ev;
  ev.t = now;
  ev.op_id = op_id;
  if (*op == "down") {
    ev.op = stack::InputOp::down;
  } else if (*op == "up") {
    ev.op = stack::InputOp::up;
  } else {
    throw ValidationError("op", "expected \"down\" or \"up\"");
  }
  auto target = m.find("target");
  if (target == m.end() || !target->is_string() || target->get<std::string>().empty())
    throw ValidationError("target", "missing");
  ev.target = target->get<std::string>();
  auto speed = m.find("speed");
  if (speed != m.end() && !speed->is_number()) throw ValidationError("speed", "expected a number");
  if (ev.op == stack::InputOp::down) {
    if (speed == m.end()) throw ValidationError("speed", "missing");
    ev.speed = speed->get<double>();
  }
  return ev;
}

std::string telemetry_message(const ops::TelemetryFrame& frame) {
  return json{{"type", "telemetry"}, {"frame", ops::to_json(frame)}}.dump();
}

std::string joint_message(const std::string& name, double angle, double target) {
  return json{{"type", "joint"}, {"name", name}, {"angle", angle}, {"target", target}}.dump();
}

std::string hello_message(const std::string& op_id) { return json{{"type", "hello"}, {"operator", op_id}}.dump(); }

std::string error_message(const std::string& text) { return json{{"type", "error"}, {"message", text}}.dump(); }

// ---- core ----

namespace {

ops::RunOptions live_options() {
  ops::RunOptions o;  // unbounded run: keep nothing that grows per tick
  o.record_truth = false;
  o.record_log = false;
  o.record_commands = false;
  o.check_safety = false;
  return o;
}

}  // namespace

LiveCore::LiveCore(ops::Scenario scenario) : world_(std::move(scenario), live_options()) {
  for (const auto& [id, entry] : world_.scenario().role_table)
    if (std::find(entry.levels.begin(), entry.levels.end(), model::Level::operator_) != entry.levels.end())
      operators_.insert(id);
  const double tick = world_.scenario().parameters.tick;
  joint_every_ = static_cast<std::size_t>(std::max(1.0, std::ceil(1.0 / (kJointRateHz * tick) - 1e-9)));
}

std::optional<std::string> LiveCore::attach(const std::optional<std::string>& wanted) {
  if (wanted) {
    if (!operators_.count(*wanted) || bound_.count(*wanted)) return std::nullopt;
    bound_.insert(*wanted);
    return wanted;
  }
  for (const auto& id : operators_)
    if (!bound_.count(id)) {
      bound_.insert(id);
      return id;
    }
  return std::nullopt;
}

void LiveCore::detach(const std::string& op_id) {
  bound_.erase(op_id);
  if (auto* h = world_.host(op_id))
    if (auto* op = h->find<stack::OperatorNode>()) op->release_all(world_.now());
}

std::string LiveCore::handle(const std::string& op_id, std::string_view text) {
  try {
    world_.input(op_id, parse_client_message(text, op_id, world_.now()));
  } catch (const Error& e) {
    return error_message(e.what());
  }
  return {};
}

std::vector<std::string> LiveCore::step() {
  world_.step();
  ++ticks_;
  std::vector<std::string> out;
  const auto& frames = world_.telemetry();
  for (; telemetry_sent_ < frames.size(); ++telemetry_sent_) out.push_back(telemetry_message(frames[telemetry_sent_]));
  if (ticks_ % static_cast<long>(joint_every_) == 0)
    for (const auto& [key, j] : world_.plant().joints()) out.push_back(joint_message(key, j.sensed(), j.setpoint.value));
  return out;
}

std::vector<std::string> LiveCore::held(const std::string& op_id) {
  auto* h = world_.host(op_id);
  auto* op = h ? h->find<stack::OperatorNode>() : nullptr;
  return op ? op->held() : std::vector<std::string>{};
}

// ---- websocket front end ----

namespace {

constexpr std::size_t kMaxOutbox = 2000;  // a console this far behind is dropped

std::optional<std::string> wanted_operator(std::string_view target) {
  auto q = target.find("operator=");
  if (q == std::string_view::npos) return std::nullopt;
  auto v = target.substr(q + 9);
  return std::string(v.substr(0, v.find('&')));
}

}  // namespace

struct Server::Impl {
  struct Session : std::enable_shared_from_this<Session> {
    Session(tcp::socket socket, Impl& impl) : ws(std::move(socket)), server(impl) {}

    websocket::stream<beast::tcp_stream> ws;
    Impl& server;
    beast::flat_buffer buffer;
    http::request<http::string_body> request;
    std::deque<std::string> outbox;
    std::string op_id;
    bool open = false;

    void start() {
      http::async_read(ws.next_layer(), buffer, request,
                       [self = shared_from_this()](beast::error_code ec, std::size_t) { self->on_request(ec); });
    }

    void on_request(beast::error_code ec) {
      if (ec) return;
      auto target = request.target();
      auto op = server.core.attach(wanted_operator(std::string_view(target.data(), target.size())));
      ws.async_accept(request, [self = shared_from_this(), op](beast::error_code ec2) { self->on_accept(ec2, op); });
    }

    void on_accept(beast::error_code ec, std::optional<std::string> op) {
      if (ec) {
        if (op) server.core.detach(*op);
        return;
      }
      if (!op) {
        send(error_message("no free operator node"));
        ws.async_close(websocket::close_code::try_again_later, [self = shared_from_this()](beast::error_code) {});
        return;
      }
      op_id = *op;
      open = true;
      server.sessions.insert(shared_from_this());
      send(hello_message(op_id));
      read();
    }

    void read() {
      ws.async_read(buffer, [self = shared_from_this()](beast::error_code ec, std::size_t) { self->on_read(ec); });
    }

    void on_read(beast::error_code ec) {
      if (ec) return close();
      auto reply = server.core.handle(op_id, beast::buffers_to_string(buffer.data()));
      buffer.consume(buffer.size());
      if (!reply.empty()) send(std::move(reply));
      read();
    }

    void send(std::string msg) {
      if (outbox.size() >= kMaxOutbox) return close();
      outbox.push_back(std::move(msg));
      if (outbox.size() == 1) write();
    }

    void write() {
      ws.text(true);
      ws.async_write(net::buffer(outbox.front()), [self = shared_from_this()](beast::error_code ec, std::size_t) {
        if (ec) return self->close();
        self->outbox.pop_front();
        if (!self->outbox.empty()) self->write();
      });
    }

    // the console is gone: release whatever it was holding, right now
    void close() {
      if (!open) return;
      open = false;
      server.core.detach(op_id);
      server.sessions.erase(shared_from_this());
      beast::error_code ignored;
      beast::get_lowest_layer(ws).socket().close(ignored);
    }
  };

  Impl(ops::Scenario scenario, unsigned short port, bool realtime)
      : core(std::move(scenario)),
        acceptor(ioc, tcp::endpoint(net::ip::make_address("127.0.0.1"), port)),
        timer(ioc),
        realtime(realtime) {}

  void accept() {
    acceptor.async_accept([this](beast::error_code ec, tcp::socket socket) {
      if (ec) return;
      std::make_shared<Session>(std::move(socket), *this)->start();
      accept();
    });
  }

  void schedule() {
    const auto tick = std::chrono::duration<double>(core.world().scenario().parameters.tick);
    next += std::chrono::duration_cast<std::chrono::steady_clock::duration>(tick);
    timer.expires_at(realtime ? next : std::chrono::steady_clock::now());
    timer.async_wait([this](beast::error_code ec) {
      if (ec) return;
      auto frames = core.step();
      auto targets = sessions;  // a failed send may erase from `sessions`
      for (const auto& s : targets)
        for (const auto& f : frames)
          if (s->open) s->send(f);
      schedule();
    });
  }

  net::io_context ioc;
  LiveCore core;
  tcp::acceptor acceptor;
  net::steady_timer timer;
  bool realtime;
  std::chrono::steady_clock::time_point next;
  std::set<std::shared_ptr<Session>> sessions;
};

Server::Server(ops::Scenario scenario, unsigned short port, bool realtime)
    : impl_(std::make_unique<Impl>(std::move(scenario), port, realtime)) {}

Server::~Server() = default;

unsigned short Server::port() const { return impl_->acceptor.local_endpoint().port(); }

void Server::run() {
  impl_->next = std::chrono::steady_clock::now();
  impl_->accept();
  impl_->schedule();
  impl_->ioc.run();
}

void Server::stop() { impl_->ioc.stop(); }

void Server::with_core(const std::function<void(LiveCore&)>& fn) {
  std::promise<void> done;
  net::post(impl_->ioc, [&] {
    fn(impl_->core);
    done.set_value();
  });
  done.get_future().wait();
}

}  // namespace moonstack::live
