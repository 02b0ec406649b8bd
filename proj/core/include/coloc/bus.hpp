#pragma once

#include <any>
#include <chrono>
#include <condition_variable>
#include <cstdint>
#include <deque>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <typeindex>
#include <vector>

#include "coloc/errors.hpp"

namespace coloc {

inline constexpr std::size_t kDefaultQueueCapacity = 1024;

/// Status events (connection lifecycle, heartbeats) are plain strings here.
inline const char* kStatusTopic = "bus/status";

namespace detail {

struct SubscriptionState {
  std::mutex mutex;
  std::condition_variable ready;
  std::deque<std::any> queue;
  std::size_t capacity = kDefaultQueueCapacity;
  std::uint64_t drops = 0;
  bool closed = false;

  void push(std::any message) {
    {
      std::lock_guard lock(mutex);
      if (closed) return;
      if (queue.size() >= capacity) {
        queue.pop_front();
        ++drops;
      }
      queue.push_back(std::move(message));
    }
    ready.notify_one();
  }

  std::optional<std::any> pop(std::chrono::milliseconds timeout) {
    std::unique_lock lock(mutex);
    if (timeout.count() > 0) {
      ready.wait_for(lock, timeout, [this] { return !queue.empty() || closed; });
    }
    if (queue.empty()) return std::nullopt;
    std::any message = std::move(queue.front());
    queue.pop_front();
    return message;
  }

  void close() {
    {
      std::lock_guard lock(mutex);
      closed = true;
    }
    ready.notify_all();
  }
};

}  // namespace detail

/// Handle to one topic subscription. Messages published after creation queue
/// up (bounded, drop-oldest) until polled. Destroying the handle unsubscribes.
template <typename T>
class Subscription {
 public:
  Subscription() = default;
  explicit Subscription(std::shared_ptr<detail::SubscriptionState> state)
      : state_(std::move(state)) {}
  Subscription(Subscription&&) noexcept = default;
  Subscription& operator=(Subscription&&) noexcept = default;
  Subscription(const Subscription&) = delete;
  Subscription& operator=(const Subscription&) = delete;
  ~Subscription() {
    if (state_) state_->close();
  }

  /// Non-blocking fetch.
  std::optional<T> poll() { return take(std::chrono::milliseconds{0}); }

  /// Blocks up to timeout for the next message.
  std::optional<T> wait(std::chrono::milliseconds timeout) { return take(timeout); }

  std::uint64_t drops() const {
    std::lock_guard lock(state_->mutex);
    return state_->drops;
  }

  std::size_t pending() const {
    std::lock_guard lock(state_->mutex);
    return state_->queue.size();
  }

 private:
  std::optional<T> take(std::chrono::milliseconds timeout) {
    auto message = state_->pop(timeout);
    if (!message) return std::nullopt;
    return std::any_cast<T>(std::move(*message));
  }

  std::shared_ptr<detail::SubscriptionState> state_;
};

/// In-process topic bus. A topic's payload type is pinned on first use;
/// publishing or subscribing with another type is a domain error. Safe for
/// concurrent publishers and subscribers.
class TopicBus {
 public:
  TopicBus() = default;
  TopicBus(const TopicBus&) = delete;
  TopicBus& operator=(const TopicBus&) = delete;

  ~TopicBus() {
    std::lock_guard lock(mutex_);
    for (auto& [name, topic] : topics_) {
      for (auto& state : topic.subscribers) state->close();
    }
  }

  template <typename T>
  Subscription<T> subscribe(const std::string& topic_name,
                            std::size_t capacity = kDefaultQueueCapacity) {
    if (capacity == 0) throw DomainError("subscribe: capacity must be positive");
    auto state = std::make_shared<detail::SubscriptionState>();
    state->capacity = capacity;
    std::lock_guard lock(mutex_);
    Topic& topic = pin_type(topic_name, std::type_index(typeid(T)));
    topic.subscribers.push_back(state);
    return Subscription<T>(std::move(state));
  }

  template <typename T>
  void publish(const std::string& topic_name, T message) {
    std::vector<std::shared_ptr<detail::SubscriptionState>> targets;
    {
      std::lock_guard lock(mutex_);
      Topic& topic = pin_type(topic_name, std::type_index(typeid(T)));
      auto& subs = topic.subscribers;
      std::erase_if(subs, [](const auto& state) {
        std::lock_guard inner(state->mutex);
        return state->closed;
      });
      targets = subs;
    }
    for (std::size_t i = 0; i < targets.size(); ++i) {
      // The last target takes the original, earlier ones copies.
      if (i + 1 == targets.size()) {
        targets[i]->push(std::any(std::move(message)));
      } else {
        targets[i]->push(std::any(message));
      }
    }
  }

  /// Messages dropped to overflow across all subscribers of the topic.
  std::uint64_t drop_count(const std::string& topic_name) const {
    std::lock_guard lock(mutex_);
    auto it = topics_.find(topic_name);
    if (it == topics_.end()) return 0;
    std::uint64_t total = 0;
    for (const auto& state : it->second.subscribers) {
      std::lock_guard inner(state->mutex);
      total += state->drops;
    }
    return total;
  }

 private:
  struct Topic {
    std::optional<std::type_index> type;
    std::vector<std::shared_ptr<detail::SubscriptionState>> subscribers;
  };

  Topic& pin_type(const std::string& name, std::type_index type) {
    Topic& topic = topics_[name];
    if (!topic.type) {
      topic.type = type;
    } else if (*topic.type != type) {
      throw DomainError("topic '" + name + "' already carries a different payload type");
    }
    return topic;
  }

  mutable std::mutex mutex_;
  std::map<std::string, Topic> topics_;
};

/// Topic carrying RangeMeasurements ranged by the given tag.
inline std::string ranging_topic(std::uint16_t tag) {
  return "ranging/tag" + std::to_string(tag);
}

}  // namespace coloc
