#pragma once

#include <atomic>
#include <chrono>
#include <condition_variable>
#include <deque>
#include <filesystem>
#include <functional>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "json.hpp"
#include "shapebots/engine.hpp"
#include "shapebots/scenario.hpp"

namespace shapebots {

struct ServiceOptions {
  double snapshot_hz = 30.0;  ///< upper bound on snapshot rate
  double speed = 1.0;         ///< simulated seconds per wall second while playing
  bool autoplay = false;
  std::filesystem::path scenario_dir;  ///< where load_scenario looks up names
};

/// Owns the simulation on a single thread. Clients talk to it through
/// handle(), which queues the message and waits for it to be applied, and
/// listen through subscriptions.
///
/// Snapshots are conflated: a subscription holds only the newest one. While
/// paused, a snapshot is published only when something changed.
class SimulationService {
 public:
  using Message = std::shared_ptr<const std::string>;

  class Subscription {
   public:
    /// Newest unsent snapshot, if any.
    std::optional<Message> take_snapshot();
    /// Events in order; bounded, the oldest are dropped first.
    std::vector<Message> take_events();
    /// Blocks until something is available or the timeout passes.
    bool wait(std::chrono::milliseconds timeout);

   private:
    friend class SimulationService;
    void post_snapshot(Message m);
    void post_event(Message m);

    static constexpr std::size_t kMaxEvents = 1024;
    std::mutex mutex_;
    std::condition_variable cv_;
    std::optional<Message> snapshot_;
    std::deque<Message> events_;
    std::function<void()> notify_;
  };

  SimulationService(Scenario scenario, ServiceOptions options = {});
  ~SimulationService();
  SimulationService(const SimulationService&) = delete;
  SimulationService& operator=(const SimulationService&) = delete;

  /// Applies one client message and returns the replies for its sender
  /// (acks, metrics, errors). Invalid messages change nothing.
  std::vector<nlohmann::json> handle(const nlohmann::json& message);
  std::vector<nlohmann::json> handle_text(const std::string& text);

  /// Replaces the running scenario. Throws on schema errors.
  void load_scenario(const nlohmann::json& doc);

  /// The first thing a new subscription receives is the current snapshot.
  /// `notify` runs (on the owner thread) whenever new data is queued.
  std::shared_ptr<Subscription> subscribe(std::function<void()> notify = {});
  void unsubscribe(const std::shared_ptr<Subscription>& sub);

  /// Latest published snapshot.
  nlohmann::json snapshot() const;
  bool playing() const;

 private:
  void run();
  std::vector<nlohmann::json> apply(const nlohmann::json& message);
  void publish_snapshot(bool force);
  void publish_events();
  nlohmann::json make_snapshot();
  template <typename F>
  auto on_owner(F&& f) -> decltype(f());

  ServiceOptions options_;
  std::unique_ptr<Engine> engine_;
  Scenario scenario_;
  std::atomic<bool> playing_{false};
  std::uint64_t published_tick_ = 0;
  std::uint64_t seq_ = 0;
  std::uint64_t version_ = 0;            ///< bumped on every state change
  std::uint64_t published_version_ = ~0ull;
  std::chrono::steady_clock::time_point last_publish_{};
  std::chrono::steady_clock::time_point play_origin_{};
  std::uint64_t play_origin_tick_ = 0;

  mutable std::mutex mutex_;  // guards tasks_, subs_, latest_, stop_
  std::condition_variable cv_;
  std::deque<std::function<void()>> tasks_;
  std::vector<std::shared_ptr<Subscription>> subs_;
  std::shared_ptr<const std::string> latest_;
  bool stop_ = false;
  std::thread owner_;
};

}  // namespace shapebots
