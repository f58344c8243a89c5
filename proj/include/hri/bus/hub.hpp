#pragma once

#include <chrono>
#include <condition_variable>
#include <cstdint>
#include <deque>
#include <functional>
#include <memory>
#include <mutex>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "hri/bus/message.hpp"

namespace hri::bus {

/// A published message as each subscriber receives it: decoded and in its
/// canonical line form.
struct Delivery {
  BusMessage message;
  std::string line;
};

/// One subscriber's bounded inbox. Exceeding the limit closes the inbox; it
/// never drops silently.
class Subscription {
 public:
  Subscription(std::string name, std::size_t limit) : name_(std::move(name)), limit_(limit) {}

  const std::string& name() const { return name_; }
  void subscribe(const std::vector<Channel>& channels);
  void unsubscribe(const std::vector<Channel>& channels);
  bool wants(Channel channel) const;
  std::vector<Channel> channels() const;

  /// Bypasses the channel filter; used for replies addressed to this session.
  void push_direct(std::shared_ptr<const Delivery> delivery);
  /// Next delivery, or nullopt after the timeout or once closed and drained.
  std::optional<std::shared_ptr<const Delivery>> pop(std::chrono::milliseconds timeout);
  std::size_t pending() const;

  void close(std::string reason);
  bool closed() const;
  std::string close_reason() const;

 private:
  friend class Hub;
  /// Returns false and closes when the inbox is full.
  bool offer(const std::shared_ptr<const Delivery>& delivery);

  std::string name_;
  std::size_t limit_;
  mutable std::mutex mu_;
  std::condition_variable cv_;
  std::deque<std::shared_ptr<const Delivery>> queue_;
  std::set<Channel> channels_;
  bool closed_ = false;
  std::string reason_;
};

struct HubConfig {
  std::size_t queue_limit = 10'000;
};

/// In-process pub/sub. Publication is serialized, so every subscriber of a
/// channel sees that channel's messages in the same order.
class Hub {
 public:
  explicit Hub(HubConfig config = {}) : config_(config) {}

  std::shared_ptr<Subscription> attach(std::string name, std::vector<Channel> channels = {});
  void detach(const std::shared_ptr<Subscription>& subscription);

  /// Fans out to matching subscribers. Returns the seq-audit warning, if any;
  /// the message is delivered regardless. Throws EncodeError for invalid
  /// messages.
  std::optional<std::string> publish(const BusMessage& message);

  /// Called under the publication lock with every published delivery.
  void set_observer(std::function<void(const Delivery&)> observer);

  std::size_t subscriber_count() const;
  const HubConfig& config() const { return config_; }

 private:
  HubConfig config_;
  mutable std::mutex mu_;
  std::vector<std::shared_ptr<Subscription>> subscribers_;
  SequenceTracker tracker_;
  std::function<void(const Delivery&)> observer_;
};

/// Stamps outgoing payloads with a producer id and its increasing seq.
class Producer {
 public:
  explicit Producer(std::string source, std::uint64_t first_seq = 1) : source_(std::move(source)), next_(first_seq) {}

  BusMessage make(Payload payload, double timestamp) {
    return BusMessage{source_, next_++, timestamp, std::move(payload)};
  }
  const std::string& source() const { return source_; }

 private:
  std::string source_;
  std::uint64_t next_;
};

}  // namespace hri::bus
