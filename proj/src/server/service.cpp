#include "shapebots/server/service.hpp"

#include <future>

#include "shapebots/error.hpp"
#include "shapebots/server/protocol.hpp"

namespace shapebots {

using nlohmann::json;
using Clock = std::chrono::steady_clock;

namespace {

constexpr std::uint64_t kMaxCatchUpTicks = 2000;

thread_local const void* current_owner = nullptr;

}  // namespace

std::optional<SimulationService::Message> SimulationService::Subscription::take_snapshot() {
  std::lock_guard lock(mutex_);
  std::optional<Message> out = std::move(snapshot_);
  snapshot_.reset();
  return out;
}

std::vector<SimulationService::Message> SimulationService::Subscription::take_events() {
  std::lock_guard lock(mutex_);
  std::vector<Message> out(events_.begin(), events_.end());
  events_.clear();
  return out;
}

bool SimulationService::Subscription::wait(std::chrono::milliseconds timeout) {
  std::unique_lock lock(mutex_);
  return cv_.wait_for(lock, timeout, [&] { return snapshot_.has_value() || !events_.empty(); });
}

void SimulationService::Subscription::post_snapshot(Message m) {
  {
    std::lock_guard lock(mutex_);
    snapshot_ = std::move(m);
  }
  cv_.notify_all();
  if (notify_) notify_();
}

void SimulationService::Subscription::post_event(Message m) {
  {
    std::lock_guard lock(mutex_);
    if (events_.size() >= kMaxEvents) events_.pop_front();
    events_.push_back(std::move(m));
  }
  cv_.notify_all();
  if (notify_) notify_();
}

SimulationService::SimulationService(Scenario scenario, ServiceOptions options)
    : options_(std::move(options)), scenario_(std::move(scenario)) {
  if (!(options_.snapshot_hz > 0.0) || options_.snapshot_hz > 30.0) {
    throw InvalidArgument("snapshot rate must be in (0, 30] per second");
  }
  if (!(options_.speed > 0.0)) throw InvalidArgument("speed must be positive");
  engine_ = std::make_unique<Engine>(make_engine(scenario_));
  playing_ = options_.autoplay;
  play_origin_ = Clock::now();
  publish_snapshot(true);
  owner_ = std::thread([this] { run(); });
}

SimulationService::~SimulationService() {
  {
    std::lock_guard lock(mutex_);
    stop_ = true;
  }
  cv_.notify_all();
  if (owner_.joinable()) owner_.join();
}

template <typename F>
auto SimulationService::on_owner(F&& f) -> decltype(f()) {
  if (current_owner == this) return f();
  using R = decltype(f());
  auto task = std::make_shared<std::packaged_task<R()>>(std::forward<F>(f));
  std::future<R> result = task->get_future();
  {
    std::lock_guard lock(mutex_);
    if (stop_) throw Error("simulation service stopped");
    tasks_.emplace_back([task] { (*task)(); });
  }
  cv_.notify_all();
  return result.get();
}

void SimulationService::run() {
  current_owner = this;
  for (;;) {
    std::deque<std::function<void()>> batch;
    {
      std::unique_lock lock(mutex_);
      const auto idle = playing_ ? std::chrono::milliseconds(5) : std::chrono::milliseconds(20);
      cv_.wait_for(lock, idle, [&] { return stop_ || !tasks_.empty(); });
      if (stop_) break;
      batch.swap(tasks_);
    }
    for (auto& t : batch) t();

    if (playing_) {
      const double dt = engine_->params().dt_physics;
      const double elapsed = std::chrono::duration<double>(Clock::now() - play_origin_).count();
      const auto due = play_origin_tick_ + static_cast<std::uint64_t>(elapsed * options_.speed / dt);
      if (due > engine_->tick()) {
        const std::uint64_t n = std::min(due - engine_->tick(), kMaxCatchUpTicks);
        engine_->step_ticks(n);
        ++version_;
        if (due > engine_->tick()) {
          // Fell behind: drop the backlog rather than spiral.
          play_origin_ = Clock::now();
          play_origin_tick_ = engine_->tick();
        }
      }
    }
    publish_events();
    publish_snapshot(false);
  }
  // Fail anything still queued.
  std::lock_guard lock(mutex_);
  tasks_.clear();
}

json SimulationService::make_snapshot() { return protocol::snapshot(*engine_, playing_, ++seq_); }

void SimulationService::publish_snapshot(bool force) {
  const auto now = Clock::now();
  if (!force) {
    if (version_ == published_version_) return;
    // Timestamps must strictly increase while playing.
    if (playing_ && engine_->tick() == published_tick_) return;
    if (now - last_publish_ < std::chrono::duration<double>(1.0 / options_.snapshot_hz)) return;
  }
  auto msg = std::make_shared<const std::string>(make_snapshot().dump());
  last_publish_ = now;
  published_version_ = version_;
  published_tick_ = engine_->tick();
  std::vector<std::shared_ptr<Subscription>> subs;
  {
    std::lock_guard lock(mutex_);
    latest_ = msg;
    subs = subs_;
  }
  for (auto& s : subs) s->post_snapshot(msg);
}

void SimulationService::publish_events() {
  std::vector<EngineEvent> events = engine_->drain_events();
  if (events.empty()) return;
  std::vector<std::shared_ptr<Subscription>> subs;
  {
    std::lock_guard lock(mutex_);
    subs = subs_;
  }
  for (const EngineEvent& e : events) {
    auto msg = std::make_shared<const std::string>(protocol::event(e).dump());
    for (auto& s : subs) s->post_event(msg);
  }
}

std::vector<json> SimulationService::handle(const json& message) {
  return on_owner([&] { return apply(message); });
}

std::vector<json> SimulationService::handle_text(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    return {protocol::error("bad_json", e.what())};
  }
  return handle(doc);
}

void SimulationService::load_scenario(const json& doc) {
  on_owner([&] {
    Scenario s = parse_scenario(doc, options_.scenario_dir);
    auto fresh = std::make_unique<Engine>(make_engine(s));
    scenario_ = std::move(s);
    engine_ = std::move(fresh);
    playing_ = options_.autoplay;
    play_origin_ = Clock::now();
    play_origin_tick_ = 0;
    ++version_;
  });
}

std::vector<json> SimulationService::apply(const json& message) {
  protocol::Request req;
  try {
    req = protocol::parse_request(message);
  } catch (const std::exception& e) {
    std::optional<json> id;
    if (message.is_object() && message.contains("id")) id = message["id"];
    return {protocol::error_from(e, id)};
  }
  using namespace protocol;
  try {
    json extra = json::object();
    std::optional<json> reply;
    std::visit(
        [&](auto& m) {
          using T = std::decay_t<decltype(m)>;
          if constexpr (std::is_same_v<T, LoadScenario>) {
            json doc;
            if (m.name) {
              if (m.name->empty() || m.name->find_first_of("/\\.") != std::string::npos) {
                throw SchemaError("$.name", "scenario names may not contain path separators or dots");
              }
              const std::filesystem::path file = options_.scenario_dir / (*m.name + ".json");
              if (!std::filesystem::exists(file)) throw std::filesystem::filesystem_error(
                  "no such scenario", file, std::make_error_code(std::errc::no_such_file_or_directory));
              Scenario s = shapebots::load_scenario(file);
              auto fresh = std::make_unique<Engine>(make_engine(s));
              scenario_ = std::move(s);
              engine_ = std::move(fresh);
            } else {
              Scenario s = parse_scenario(*m.inline_doc, options_.scenario_dir);
              auto fresh = std::make_unique<Engine>(make_engine(s));
              scenario_ = std::move(s);
              engine_ = std::move(fresh);
            }
            playing_ = options_.autoplay;
            play_origin_ = Clock::now();
            play_origin_tick_ = 0;
          } else if constexpr (std::is_same_v<T, SetShape> || std::is_same_v<T, UploadSvg>) {
            engine_->set_shape(m.shape);
          } else if constexpr (std::is_same_v<T, SetKeyframes>) {
            AnimationPlan plan = sequence_keyframes(m.frames, engine_->world().robots.size(), m.hold);
            plan.loop = m.loop;
            engine_->set_animation(std::move(plan));
          } else if constexpr (std::is_same_v<T, DragRobot>) {
            engine_->drag_robot(m.id, m.pose);
          } else if constexpr (std::is_same_v<T, PlaceRobot>) {
            extra["robot"] = engine_->place_robot(m.pose);
          } else if constexpr (std::is_same_v<T, RemoveRobot>) {
            engine_->remove_robot(m.id);
          } else if constexpr (std::is_same_v<T, Play>) {
            if (!playing_) {
              playing_ = true;
              play_origin_ = Clock::now();
              play_origin_tick_ = engine_->tick();
            }
          } else if constexpr (std::is_same_v<T, Pause>) {
            playing_ = false;
          } else if constexpr (std::is_same_v<T, StepOnce>) {
            playing_ = false;
            engine_->step_ticks(m.ticks);
            extra["tick"] = engine_->tick();
          } else if constexpr (std::is_same_v<T, SetParams>) {
            SimParams p = engine_->requested_params();
            apply_params_json(p, m.patch, "$.params");
            engine_->set_params(p);
          } else if constexpr (std::is_same_v<T, RequestMetrics>) {
            reply = protocol::metrics(engine_->metrics(), *engine_);
            if (req.id) (*reply)["id"] = *req.id;
          }
        },
        req.message);
    ++version_;
    if (reply) return {*reply};
    return {ack(req, extra)};
  } catch (const std::exception& e) {
    return {error_from(e, req.id)};
  }
}

std::shared_ptr<SimulationService::Subscription> SimulationService::subscribe(std::function<void()> notify) {
  auto sub = std::make_shared<Subscription>();
  sub->notify_ = std::move(notify);
  on_owner([&] {
    // The newest published snapshot is at most one publish period old and
    // keeps the per-subscriber stream monotone.
    Message msg;
    {
      std::lock_guard lock(mutex_);
      subs_.push_back(sub);
      msg = latest_;
    }
    sub->post_snapshot(msg);
    return 0;
  });
  return sub;
}

void SimulationService::unsubscribe(const std::shared_ptr<Subscription>& sub) {
  std::lock_guard lock(mutex_);
  std::erase(subs_, sub);
}

json SimulationService::snapshot() const {
  std::lock_guard lock(mutex_);
  return json::parse(*latest_);
}

bool SimulationService::playing() const { return playing_; }

}  // namespace shapebots
