#pragma once

#include <cstdint>
#include <optional>
#include <queue>
#include <vector>

#include "feeder/domain.hpp"

namespace feeder::sim {

class SchedulingInPast : public FeederError {
public:
    using FeederError::FeederError;
};

template <typename Payload>
struct SimEvent {
    SimTime at{0};
    std::uint64_t seq = 0;
    Payload payload;
};

/// Virtual clock with a pending-event queue. Events fire in (time, insertion
/// order); time never moves backwards.
template <typename Payload>
class SimClock {
public:
    explicit SimClock(SimTime start = SimTime{0}) : now_(start) {}

    SimTime now() const noexcept { return now_; }
    std::size_t pending() const noexcept { return queue_.size(); }
    std::optional<SimTime> next_time() const {
        if (queue_.empty()) return std::nullopt;
        return queue_.top().at;
    }

    std::uint64_t schedule(SimTime at, Payload payload) {
        if (at < now_) throw SchedulingInPast("event scheduled before the current simulation time");
        const auto seq = next_seq_++;
        queue_.push(SimEvent<Payload>{at, seq, std::move(payload)});
        return seq;
    }

    /// Removes and returns the next event due at or before `limit`, moving
    /// the clock to its time. Handlers may schedule further events between
    /// calls; those are honoured if still due.
    std::optional<SimEvent<Payload>> pop_until(SimTime limit) {
        if (queue_.empty() || queue_.top().at > limit) return std::nullopt;
        SimEvent<Payload> ev = queue_.top();
        queue_.pop();
        now_ = ev.at;
        return ev;
    }

    /// Fires every event with time <= t in order and leaves the clock at t.
    std::vector<SimEvent<Payload>> advance_to(SimTime t) {
        if (t < now_) throw SchedulingInPast("cannot advance the clock backwards");
        std::vector<SimEvent<Payload>> fired;
        while (auto ev = pop_until(t)) fired.push_back(std::move(*ev));
        now_ = t;
        return fired;
    }

    /// Moves the clock to t after the caller has drained everything due.
    void settle_at(SimTime t) {
        if (t < now_) throw SchedulingInPast("cannot advance the clock backwards");
        now_ = t;
    }

private:
    struct Later {
        bool operator()(const SimEvent<Payload>& a, const SimEvent<Payload>& b) const {
            return a.at != b.at ? a.at > b.at : a.seq > b.seq;
        }
    };

    SimTime now_;
    std::uint64_t next_seq_ = 0;
    std::priority_queue<SimEvent<Payload>, std::vector<SimEvent<Payload>>, Later> queue_;
};

}  // namespace feeder::sim
