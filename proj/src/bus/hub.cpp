#include <algorithm>

#include "hri/bus/hub.hpp"

namespace hri::bus {

void Subscription::subscribe(const std::vector<Channel>& channels) {
  std::lock_guard lock(mu_);
  channels_.insert(channels.begin(), channels.end());
}

void Subscription::unsubscribe(const std::vector<Channel>& channels) {
  std::lock_guard lock(mu_);
  for (Channel c : channels) channels_.erase(c);
}

bool Subscription::wants(Channel channel) const {
  std::lock_guard lock(mu_);
  return channels_.contains(channel);
}

std::vector<Channel> Subscription::channels() const {
  std::lock_guard lock(mu_);
  return {channels_.begin(), channels_.end()};
}

bool Subscription::offer(const std::shared_ptr<const Delivery>& delivery) {
  {
    std::lock_guard lock(mu_);
    if (closed_) return false;
    if (!channels_.contains(delivery->message.channel())) return true;
    if (queue_.size() >= limit_) {
      closed_ = true;
      reason_ = "queue limit of " + std::to_string(limit_) + " messages exceeded";
      queue_.clear();
    } else {
      queue_.push_back(delivery);
    }
  }
  cv_.notify_all();
  return !closed();
}

void Subscription::push_direct(std::shared_ptr<const Delivery> delivery) {
  {
    std::lock_guard lock(mu_);
    if (closed_) return;
    queue_.push_back(std::move(delivery));
  }
  cv_.notify_all();
}

std::optional<std::shared_ptr<const Delivery>> Subscription::pop(std::chrono::milliseconds timeout) {
  std::unique_lock lock(mu_);
  cv_.wait_for(lock, timeout, [&] { return !queue_.empty() || closed_; });
  if (queue_.empty()) return std::nullopt;
  auto front = std::move(queue_.front());
  queue_.pop_front();
  return front;
}

std::size_t Subscription::pending() const {
  std::lock_guard lock(mu_);
  return queue_.size();
}

void Subscription::close(std::string reason) {
  {
    std::lock_guard lock(mu_);
    if (closed_) return;
    closed_ = true;
    reason_ = std::move(reason);
  }
  cv_.notify_all();
}

bool Subscription::closed() const {
  std::lock_guard lock(mu_);
  return closed_;
}

std::string Subscription::close_reason() const {
  std::lock_guard lock(mu_);
  return reason_;
}

std::shared_ptr<Subscription> Hub::attach(std::string name, std::vector<Channel> channels) {
  auto sub = std::make_shared<Subscription>(std::move(name), config_.queue_limit);
  sub->subscribe(channels);
  std::lock_guard lock(mu_);
  subscribers_.push_back(sub);
  return sub;
}

void Hub::detach(const std::shared_ptr<Subscription>& subscription) {
  std::lock_guard lock(mu_);
  std::erase(subscribers_, subscription);
}

std::optional<std::string> Hub::publish(const BusMessage& message) {
  auto delivery = std::make_shared<const Delivery>(Delivery{message, encode_message(message)});
  std::lock_guard lock(mu_);
  auto warning = tracker_.observe(message.source, message.seq);
  if (observer_) observer_(*delivery);
  std::erase_if(subscribers_, [&](const std::shared_ptr<Subscription>& s) { return !s->offer(delivery); });
  return warning;
}

void Hub::set_observer(std::function<void(const Delivery&)> observer) {
  std::lock_guard lock(mu_);
  observer_ = std::move(observer);
}

std::size_t Hub::subscriber_count() const {
  std::lock_guard lock(mu_);
  return subscribers_.size();
}

}  // namespace hri::bus
