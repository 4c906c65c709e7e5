#include <algorithm>
#include <stdexcept>

#include "feeder/sim/models.hpp"

namespace feeder::sim {

namespace {
constexpr double kMaMsPerMah = 3.6e6;
}  // namespace

PowerModel::PowerModel(PowerParams params, SimTime start)
    : params_(params), start_(start), front_(start), current_(params.idle_ma()) {
    checkpoints_.push_back({start, 0.0, current_});
    samples_.push_back({start, current_});
    recharges_.emplace_back(start, 0.0);
}

double PowerModel::current_at(SimTime t) const noexcept {
    if (!powered_) return 0.0;
    double ma = params_.idle_ma();
    for (const auto& b : active_) {
        if (b.start <= t && t < b.end) ma += b.ma;
    }
    return ma;
}

void PowerModel::mark(SimTime at) {
    const double c = current_at(at);
    if (checkpoints_.back().at == at)
        checkpoints_.back().current_after = c;
    else
        checkpoints_.push_back({at, cumulative_, c});
    current_ = c;
    if (samples_.back().current_ma == c) return;
    // Bursts starting together collapse into one change point, unless the
    // earlier one has already been handed out.
    if (samples_.back().at == at && samples_.size() > reported_) {
        samples_.back().current_ma = c;
        if (samples_.size() > 1 && samples_[samples_.size() - 2].current_ma == c) samples_.pop_back();
    } else {
        samples_.push_back({at, c});
    }
}

void PowerModel::add_burst(SimTime start, Duration length, double extra_ma) {
    if (start < front_) throw std::logic_error("power burst starts before the integration front");
    if (length.count() <= 0 || !powered_) return;
    active_.push_back({start, start + length, extra_ma});
    if (start == front_) mark(front_);
}

void PowerModel::advance(SimTime t) {
    if (t < front_) throw std::logic_error("power model cannot run backwards");
    for (;;) {
        std::optional<SimTime> edge;
        for (const auto& b : active_) {
            const SimTime e = b.start > front_ ? b.start : b.end;
            if (e > front_ && e <= t && (!edge || e < *edge)) edge = e;
        }
        if (!edge) break;
        cumulative_ += current_ * static_cast<double>((*edge - front_).count());
        front_ = *edge;
        std::erase_if(active_, [&](const Burst& b) { return b.end <= front_; });
        mark(front_);
    }
    cumulative_ += current_ * static_cast<double>((t - front_).count());
    front_ = t;
    std::erase_if(active_, [&](const Burst& b) { return b.end <= front_; });
}

std::vector<PowerSample> PowerModel::take_new_samples() {
    std::vector<PowerSample> out(samples_.begin() + static_cast<long>(reported_), samples_.end());
    reported_ = samples_.size();
    return out;
}

double PowerModel::cumulative_at(SimTime t) const {
    if (t < start_ || t > front_) throw std::out_of_range("power window outside simulated history");
    auto it = std::upper_bound(checkpoints_.begin(), checkpoints_.end(), t,
                               [](SimTime x, const Checkpoint& cp) { return x < cp.at; });
    const Checkpoint& cp = *std::prev(it);
    return cp.cumulative_ma_ms + cp.current_after * static_cast<double>((t - cp.at).count());
}

EnergyUse PowerModel::integrate(SimTime t0, SimTime t1) const {
    if (t1 < t0) throw std::invalid_argument("power window end precedes start");
    const double rail = (cumulative_at(t1) - cumulative_at(t0)) / kMaMsPerMah;
    return {rail, rail * params_.battery_per_rail()};
}

double PowerModel::battery_used_mah_at(SimTime t) const {
    auto it = std::upper_bound(recharges_.begin(), recharges_.end(), t,
                               [](SimTime x, const std::pair<SimTime, double>& r) { return x < r.first; });
    const auto& last = *std::prev(it);
    return (cumulative_at(t) - last.second) / kMaMsPerMah * params_.battery_per_rail();
}

double PowerModel::battery_pct_at(SimTime t) const {
    const double used = battery_used_mah_at(t);
    return std::clamp(100.0 * (1.0 - used / params_.battery_capacity_mah), 0.0, 100.0);
}

void PowerModel::recharge() { recharges_.emplace_back(front_, cumulative_); }

void PowerModel::set_powered(bool on) {
    powered_ = on;
    if (!on) active_.clear();
    mark(front_);
}

double PowerModel::idle_endurance_hours() const noexcept {
    return params_.battery_capacity_mah / (params_.idle_ma() * params_.battery_per_rail());
}

}  // namespace feeder::sim
