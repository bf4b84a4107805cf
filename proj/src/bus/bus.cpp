#include "moonstack/bus/bus.hpp"

#include <cmath>
#include <stdexcept>

#include <json.hpp>

#include "moonstack/error.hpp"
#include "moonstack/util/hash.hpp"

namespace moonstack::bus {

namespace {

constexpr double kBucket = 0.1;

long bucket_of(double t) { return static_cast<long>(std::floor(t / kBucket + 1e-9)); }

}  // namespace

bool topic_matches(std::string_view pattern, std::string_view topic) {
  if (pattern == "*") return true;
  if (pattern.size() >= 2 && pattern.substr(pattern.size() - 2) == "/*") {
    auto prefix = pattern.substr(0, pattern.size() - 1);
    return topic.substr(0, prefix.size()) == prefix;
  }
  return pattern == topic;
}

double unit_draw(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

bool LinkCondition::connected_at(double t) const {
  for (const auto& w : connected_intervals) {
    if (w.contains(t)) return true;
  }
  return false;
}

void LinkCondition::validate() const {
  for (std::size_t i = 0; i < connected_intervals.size(); ++i) {
    const auto& w = connected_intervals[i];
    if (!(w.start < w.end)) throw ValidationError("connected_intervals[" + std::to_string(i) + "]", "empty interval");
    if (i > 0 && w.start < connected_intervals[i - 1].end)
      throw ValidationError("connected_intervals[" + std::to_string(i) + "]", "intervals must be sorted and disjoint");
  }
  if (!(latency >= 0.0)) throw ValidationError("latency", "must be non-negative");
  if (!(jitter >= 0.0)) throw ValidationError("jitter", "must be non-negative");
  if (!(drop_rate >= 0.0 && drop_rate <= 1.0)) throw ValidationError("drop_rate", "must lie in [0, 1]");
}

LinkCondition LinkCondition::outage(double start, double end) {
  LinkCondition c;
  c.connected_intervals.clear();
  if (start > 0.0) c.connected_intervals.push_back({0.0, start});
  if (end < kForever) c.connected_intervals.push_back({end, kForever});
  return c;
}

VirtualClock::VirtualClock(ClockMode mode) : mode_(mode), start_(std::chrono::steady_clock::now()) {}

double VirtualClock::now() const {
  if (mode_ == ClockMode::simulated) return sim_now_;
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
}

void VirtualClock::advance(double dt) {
  if (mode_ == ClockMode::wall) throw std::logic_error("advance() is not available on a wall clock");
  if (!(dt > 0.0)) throw std::logic_error("advance() needs dt > 0");
  // Snap to a nanosecond grid so that k * dt lands on the same double as the literal.
  sim_now_ = std::round((sim_now_ + dt) * 1e9) / 1e9;
}

Bus::Bus(ClockMode mode) : clock_(mode) {}

void Bus::subscribe(const NodeId& node, std::string pattern) {
  std::lock_guard lock(mutex_);
  subscriptions_[node].push_back(std::move(pattern));
  topic_cache_.clear();
}

void Bus::unsubscribe_all(const NodeId& node) {
  std::lock_guard lock(mutex_);
  subscriptions_.erase(node);
  topic_cache_.clear();
}

const std::vector<NodeId>& Bus::subscribers(const std::string& topic) {
  auto it = topic_cache_.find(topic);
  if (it != topic_cache_.end()) return it->second;
  std::vector<NodeId> nodes;
  for (const auto& [node, patterns] : subscriptions_) {
    for (const auto& p : patterns) {
      if (topic_matches(p, topic)) {
        nodes.push_back(node);
        break;
      }
    }
  }
  return topic_cache_.emplace(topic, std::move(nodes)).first->second;
}

Bus::Channel& Bus::channel(const NodeId& from, const NodeId& to) {
  auto key = std::pair{from, to};
  auto it = channels_.find(key);
  if (it == channels_.end()) {
    Channel ch;
    ch.rng.seed(util::fnv1a(from + "->" + to));
    it = channels_.emplace(key, std::move(ch)).first;
  }
  return it->second;
}

void Bus::set_link(const NodeId& a, const NodeId& b, LinkCondition cond, Direction dir) {
  cond.validate();
  std::lock_guard lock(mutex_);
  auto apply = [&](const NodeId& from, const NodeId& to) {
    Channel& ch = channel(from, to);
    ch.cond = cond;
    ch.rng.seed(cond.jitter_seed ^ util::fnv1a(from + "->" + to));
  };
  apply(a, b);
  if (dir == Direction::both) apply(b, a);
}

LinkCondition Bus::link(const NodeId& from, const NodeId& to) const {
  std::lock_guard lock(mutex_);
  auto it = channels_.find({from, to});
  return it == channels_.end() ? LinkCondition::ideal() : it->second.cond;
}

void Bus::count(const NodeId& node, double t, bool dropped) {
  auto& c = counters_[node][bucket_of(t)];
  ++c.sent;
  if (dropped) ++c.dropped;
}

void Bus::publish(std::string_view topic_view, std::string payload, const NodeId& src) {
  std::lock_guard lock(mutex_);
  const double t = clock_.now();
  std::string topic(topic_view);
  for (const NodeId& dst : subscribers(topic)) {
    Envelope env;
    env.seq = next_seq_++;
    env.topic = topic;
    env.src = src;
    env.dst = dst;
    env.send_time = t;
    if (dst == src) {
      env.deliver_time = t;
    } else {
      Channel& ch = channel(src, dst);
      const LinkCondition& c = ch.cond;
      bool lost = !c.connected_at(t);
      if (!lost && c.drop_rate > 0.0) lost = unit_draw(ch.rng) < c.drop_rate;
      if (!lost) {
        double delay = c.latency;
        if (c.jitter > 0.0) delay += c.jitter * unit_draw(ch.rng);
        double& last = ch.last_delivery[topic];
        double at = std::max(t + delay, last);
        last = at;
        env.deliver_time = at;
      }
      count(src, t, lost);
      count(dst, t, lost);
    }
    if (logging_) log_.push_back(Envelope{env.seq, env.topic, {}, env.src, env.dst, env.send_time, env.deliver_time});
    if (!env.dropped()) {
      due_.push({*env.deliver_time, env.seq});
      env.payload = payload;
      pending_.emplace(env.seq, std::move(env));
    }
  }
}

std::vector<Envelope> Bus::collect(double now) {
  std::vector<Envelope> out;
  while (!due_.empty() && due_.top().time <= now + 1e-9) {
    auto it = pending_.find(due_.top().seq);
    due_.pop();
    out.push_back(std::move(it->second));
    pending_.erase(it);
  }
  return out;
}

std::vector<Envelope> Bus::advance(double dt) {
  std::lock_guard lock(mutex_);
  clock_.advance(dt);
  return collect(clock_.now());
}

std::vector<Envelope> Bus::poll() {
  std::lock_guard lock(mutex_);
  return collect(clock_.now());
}

double Bus::now() const {
  std::lock_guard lock(mutex_);
  return clock_.now();
}

std::size_t Bus::in_flight() const {
  std::lock_guard lock(mutex_);
  return pending_.size();
}

double Bus::link_quality(const NodeId& node, double window) const {
  std::lock_guard lock(mutex_);
  auto it = counters_.find(node);
  if (it == counters_.end()) return 1.0;
  const double now = clock_.now();
  const long first = bucket_of(now - window);
  const long last = bucket_of(now);  // exclusive
  std::uint64_t sent = 0;
  std::uint64_t dropped = 0;
  for (auto b = it->second.lower_bound(first); b != it->second.end() && b->first < last; ++b) {
    sent += b->second.sent;
    dropped += b->second.dropped;
  }
  return sent == 0 ? 1.0 : 1.0 - static_cast<double>(dropped) / static_cast<double>(sent);
}

void Bus::write_log(std::ostream& os) const {
  std::lock_guard lock(mutex_);
  write_delivery_log(os, log_);
}

void write_delivery_log(std::ostream& os, const std::vector<Envelope>& log) {
  for (const auto& e : log) {
    nlohmann::json rec{{"t_send", e.send_time},
                       {"t_deliver", e.deliver_time ? nlohmann::json(*e.deliver_time) : nlohmann::json(nullptr)},
                       {"topic", e.topic},
                       {"src", e.src},
                       {"dst", e.dst},
                       {"dropped", e.dropped()}};
    os << rec.dump() << '\n';
  }
}

}  // namespace moonstack::bus
