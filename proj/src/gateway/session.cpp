#include "feeder/gateway/session.hpp"

#include <cmath>
#include <stdexcept>

namespace feeder::gateway {

SimSession::SimSession(sim::WorldParams params) {
    world_ = std::make_unique<sim::World>(std::move(params));
    for (const auto& n : world_->params().feeder.authorized) known_numbers_.insert(n);
    publish();
    executor_ = std::thread([this] { executor_loop(); });
}

SimSession::~SimSession() { shutdown(); }

void SimSession::shutdown() {
    {
        std::lock_guard lock(queue_mu_);
        if (stop_ && !executor_.joinable()) return;
        stop_ = true;
    }
    queue_cv_.notify_all();
    pub_cv_.notify_all();
    if (executor_.joinable()) executor_.join();
}

bool SimSession::stopping() const noexcept { return stop_.load(); }

template <class F>
auto SimSession::submit(F f) -> decltype(f(std::declval<sim::World&>())) {
    using R = decltype(f(std::declval<sim::World&>()));
    auto task = std::make_shared<std::packaged_task<R()>>([this, f = std::move(f)]() mutable {
        if constexpr (std::is_void_v<R>) {
            f(*world_);
            publish();
        } else {
            R result = f(*world_);
            publish();
            return result;
        }
    });
    auto fut = task->get_future();
    {
        std::lock_guard lock(queue_mu_);
        if (stop_) throw std::runtime_error("simulation session is shutting down");
        tasks_.emplace_back([task] { (*task)(); });
    }
    queue_cv_.notify_all();
    return fut.get();
}

void SimSession::executor_loop() {
    using clock = std::chrono::steady_clock;
    auto last = clock::now();
    std::unique_lock lock(queue_mu_);
    for (;;) {
        if (rate_ > 0.0)
            queue_cv_.wait_for(lock, std::chrono::milliseconds(50), [&] { return stop_ || !tasks_.empty(); });
        else
            queue_cv_.wait(lock, [&] { return stop_ || !tasks_.empty() || rate_ > 0.0; });
        if (stop_) break;

        while (!tasks_.empty()) {
            auto task = std::move(tasks_.front());
            tasks_.pop_front();
            lock.unlock();
            task();
            lock.lock();
        }

        const auto wall = clock::now();
        if (rate_ > 0.0) {
            carry_ms_ += std::chrono::duration<double, std::milli>(wall - last).count() * rate_;
            const auto whole = static_cast<std::int64_t>(carry_ms_);
            if (whole > 0) {
                carry_ms_ -= static_cast<double>(whole);
                lock.unlock();
                world_->advance_by(Duration(whole));
                publish();
                lock.lock();
            }
        }
        last = wall;
    }
}

void SimSession::publish() {
    const auto& w = *world_;
    const auto& dev = w.device();
    Snapshot s;
    if (dev.last_level) s.level_pct = dev.last_level->level_pct;
    s.servo_open = w.gate_open();
    s.next_feed = dev.next_feed_at;
    s.counters = dev.counters;
    s.battery_pct = w.power().battery_pct();
    s.hopper_g = w.hopper().contents_g();
    s.sim_now = w.now();
    s.powered = w.powered();
    s.alert_armed = dev.alert_armed;
    s.realtime_rate = rate_;
    s.event_count = w.trace().size();

    const auto& records = w.trace().records();
    std::unique_lock lock(pub_mu_);
    for (std::size_t i = events_.size(); i < records.size(); ++i) events_.push_back(records[i]);
    for (const auto& number : known_numbers_) inboxes_.try_emplace(number);
    for (auto& [number, published] : inboxes_) {
        if (const auto* src = w.inbox(number))
            for (std::size_t i = published.size(); i < src->size(); ++i) published.push_back((*src)[i]);
    }
    snapshot_ = s;
    lock.unlock();
    pub_cv_.notify_all();
}

std::uint64_t SimSession::send_sms(const PhoneNumber& from, const std::string& body) {
    return submit([&](sim::World& w) {
        known_numbers_.insert(from);
        return w.phone_send(from, body);
    });
}

SimTime SimSession::advance(Duration d) {
    if (d.count() < 0) throw std::invalid_argument("cannot advance by a negative duration");
    return submit([d](sim::World& w) {
        w.advance_by(d);
        return w.now();
    });
}

double SimSession::refill(double grams) {
    if (!(grams > 0.0)) throw std::invalid_argument("refill amount must be positive");
    return submit([grams](sim::World& w) { return w.refill(grams); });
}

void SimSession::set_realtime_rate(double rate) {
    if (!(rate == 0.0 || (rate >= 1.0 && rate <= kMaxRealtimeRate)))
        throw std::invalid_argument("rate must be 0 or between 1 and 3600");
    submit([this, rate](sim::World&) {
        rate_ = rate;
        carry_ms_ = 0.0;
    });
}

Snapshot SimSession::snapshot() const {
    std::shared_lock lock(pub_mu_);
    return snapshot_;
}

std::optional<InboxPage> SimSession::inbox(const PhoneNumber& number, std::size_t since) const {
    std::shared_lock lock(pub_mu_);
    auto it = inboxes_.find(number);
    if (it == inboxes_.end()) return std::nullopt;
    InboxPage page;
    const auto& all = it->second;
    if (since >= all.size()) {
        page.next = since;
        return page;
    }
    page.messages.assign(all.begin() + static_cast<long>(since), all.end());
    page.next = all.size();
    return page;
}

std::vector<sim::TraceRecord> SimSession::events_since(std::uint64_t since, std::size_t limit) const {
    std::shared_lock lock(pub_mu_);
    std::vector<sim::TraceRecord> out;
    for (auto i = since; i < events_.size() && out.size() < limit; ++i) out.push_back(events_[i]);
    return out;
}

std::uint64_t SimSession::event_count() const {
    std::shared_lock lock(pub_mu_);
    return events_.size();
}

bool SimSession::wait_for_events(std::uint64_t since, std::chrono::milliseconds timeout) const {
    std::shared_lock lock(pub_mu_);
    return pub_cv_.wait_for(lock, timeout, [&] { return events_.size() > since || stopping(); }) &&
           events_.size() > since;
}

}  // namespace feeder::gateway
