#pragma once

// One live simulation behind a single executor thread. Every mutation is a
// task on that thread; readers only ever see state published between tasks.

#include <atomic>
#include <chrono>
#include <condition_variable>
#include <cstdint>
#include <deque>
#include <functional>
#include <future>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <set>
#include <shared_mutex>
#include <thread>
#include <vector>

#include "feeder/sim/world.hpp"

namespace feeder::gateway {

struct Snapshot {
    std::optional<double> level_pct;
    bool servo_open = false;
    std::optional<SimTime> next_feed;
    firmware::Counters counters;
    double battery_pct = 100.0;
    double hopper_g = 0.0;
    SimTime sim_now{0};
    bool powered = true;
    bool alert_armed = true;
    double realtime_rate = 0.0;
    std::uint64_t event_count = 0;
};

struct InboxPage {
    std::vector<sim::InboxEntry> messages;
    std::size_t next = 0;
};

class SimSession {
public:
    static constexpr double kMaxRealtimeRate = 3600.0;

    explicit SimSession(sim::WorldParams params);
    ~SimSession();
    SimSession(const SimSession&) = delete;
    SimSession& operator=(const SimSession&) = delete;

    // Mutations. Each runs on the executor and returns once published.
    std::uint64_t send_sms(const PhoneNumber& from, const std::string& body);
    SimTime advance(Duration d);
    double refill(double grams);
    /// 0 pauses; otherwise simulated time runs at `rate` times wall time.
    void set_realtime_rate(double rate);

    // Reads.
    Snapshot snapshot() const;
    /// nullopt for a number that is neither authorized nor ever seen.
    std::optional<InboxPage> inbox(const PhoneNumber& number, std::size_t since) const;
    std::vector<sim::TraceRecord> events_since(std::uint64_t since, std::size_t limit) const;
    std::uint64_t event_count() const;
    /// Blocks until more than `since` events exist, the timeout passes or
    /// the session shuts down. True when new events are available.
    bool wait_for_events(std::uint64_t since, std::chrono::milliseconds timeout) const;
    bool stopping() const noexcept;

    void shutdown();

private:
    template <class F>
    auto submit(F f) -> decltype(f(std::declval<sim::World&>()));

    void executor_loop();
    void publish();

    // Executor-owned.
    std::unique_ptr<sim::World> world_;
    std::set<PhoneNumber> known_numbers_;
    double rate_ = 0.0;
    double carry_ms_ = 0.0;

    std::mutex queue_mu_;
    std::condition_variable queue_cv_;
    std::deque<std::function<void()>> tasks_;
    std::atomic<bool> stop_{false};

    mutable std::shared_mutex pub_mu_;
    mutable std::condition_variable_any pub_cv_;
    Snapshot snapshot_;
    std::vector<sim::TraceRecord> events_;
    std::map<PhoneNumber, std::vector<sim::InboxEntry>> inboxes_;

    std::thread executor_;
};

}  // namespace feeder::gateway
