#pragma once

#include <chrono>
#include <cstdint>
#include <limits>
#include <map>
#include <mutex>
#include <optional>
#include <ostream>
#include <queue>
#include <random>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace moonstack::bus {

using NodeId = std::string;

inline constexpr double kForever = std::numeric_limits<double>::infinity();

/// One message copy addressed to one subscriber.
struct Envelope {
  std::uint64_t seq = 0;
  std::string topic;
  std::string payload;
  NodeId src;
  NodeId dst;
  double send_time = 0.0;
  std::optional<double> deliver_time;  // empty when dropped

  bool dropped() const { return !deliver_time.has_value(); }
};

/// Half-open window [start, end) of connectivity.
struct Window {
  double start = 0.0;
  double end = kForever;

  bool contains(double t) const { return t >= start && t < end; }
  bool operator==(const Window&) const = default;
};

struct LinkCondition {
  std::vector<Window> connected_intervals{Window{}};  // sorted, disjoint
  double latency = 0.0;
  double jitter = 0.0;  // extra delay drawn uniformly from [0, jitter)
  std::uint64_t jitter_seed = 0;
  double drop_rate = 0.0;

  bool connected_at(double t) const;
  /// Throws ValidationError on unsorted/overlapping windows, negative latency or a
  /// drop rate outside [0, 1].
  void validate() const;

  static LinkCondition ideal() { return {}; }
  /// Connected always except during [start, end).
  static LinkCondition outage(double start, double end);
};

enum class ClockMode { simulated, wall };
enum class Direction { both, forward };

class VirtualClock {
 public:
  explicit VirtualClock(ClockMode mode = ClockMode::simulated);

  double now() const;
  ClockMode mode() const { return mode_; }
  /// Simulated mode only; throws std::logic_error in wall mode or for dt <= 0.
  void advance(double dt);

 private:
  ClockMode mode_;
  double sim_now_ = 0.0;
  std::chrono::steady_clock::time_point start_;
};

/// Deterministic discrete-event bus. Loss is decided when a message is sent;
/// a message already in flight is delivered even if the link drops afterwards.
class Bus {
 public:
  explicit Bus(ClockMode mode = ClockMode::simulated);

  /// `pattern` is an exact topic, "prefix/*" or "*".
  void subscribe(const NodeId& node, std::string pattern);
  void unsubscribe_all(const NodeId& node);

  /// Never blocks; topics are created on first use.
  void publish(std::string_view topic, std::string payload, const NodeId& src);

  /// Move the simulated clock forward and return everything now due, ordered by
  /// (deliver_time, seq).
  std::vector<Envelope> advance(double dt);
  /// Everything due at the current time.
  std::vector<Envelope> poll();

  void set_link(const NodeId& a, const NodeId& b, LinkCondition cond, Direction dir = Direction::both);
  LinkCondition link(const NodeId& from, const NodeId& to) const;

  double now() const;
  ClockMode mode() const { return clock_.mode(); }

  /// Every envelope ever sent, dropped or not, in send order.
  const std::vector<Envelope>& log() const { return log_; }
  void set_logging(bool enabled) { logging_ = enabled; }
  /// Line-delimited JSON: {"t_send","t_deliver","topic","src","dst","dropped"}.
  void write_log(std::ostream& os) const;

  /// Fraction of `node`'s off-host envelopes sent in [now - window, now) that were
  /// not dropped. 1.0 when nothing was sent.
  double link_quality(const NodeId& node, double window) const;

  std::size_t in_flight() const;

 private:
  struct Channel {
    LinkCondition cond;
    std::mt19937_64 rng;
    std::unordered_map<std::string, double> last_delivery;  // per topic, keeps FIFO
  };
  struct Due {
    double time;
    std::uint64_t seq;
    bool operator>(const Due& o) const { return time != o.time ? time > o.time : seq > o.seq; }
  };
  struct Counter {
    std::uint64_t sent = 0;
    std::uint64_t dropped = 0;
  };

  const std::vector<NodeId>& subscribers(const std::string& topic);
  Channel& channel(const NodeId& from, const NodeId& to);
  std::vector<Envelope> collect(double now);
  void count(const NodeId& node, double t, bool dropped);

  mutable std::mutex mutex_;
  VirtualClock clock_;
  std::uint64_t next_seq_ = 0;
  std::map<NodeId, std::vector<std::string>> subscriptions_;
  std::unordered_map<std::string, std::vector<NodeId>> topic_cache_;
  std::map<std::pair<NodeId, NodeId>, Channel> channels_;
  std::priority_queue<Due, std::vector<Due>, std::greater<>> due_;
  std::unordered_map<std::uint64_t, Envelope> pending_;
  std::vector<Envelope> log_;
  bool logging_ = true;
  std::map<NodeId, std::map<long, Counter>> counters_;  // per node, per 100 ms bucket
};

/// Line-delimited JSON, one record per envelope.
void write_delivery_log(std::ostream& os, const std::vector<Envelope>& log);

/// `pattern` is an exact topic, "prefix/*" or "*".
bool topic_matches(std::string_view pattern, std::string_view topic);

/// Uniform double in [0, 1) from the top 53 bits, identical on every platform.
double unit_draw(std::mt19937_64& rng);

}  // namespace moonstack::bus
