#include <algorithm>
#include <cmath>

#include "feeder/sim/models.hpp"

namespace feeder::sim {

namespace {
std::int64_t to_mg(double grams) { return std::llround(grams * 1000.0); }
}  // namespace

Hopper::Hopper(HopperParams params, double container_height_cm, double deadzone_cm, std::uint64_t seed)
    : params_(params), height_cm_(container_height_cm), rng_(seed) {
    const double usable_cm = container_height_cm - deadzone_cm;
    if (!(usable_cm > 0.0)) throw InvalidConfig("hopper needs container height above the dead zone");
    if (!(params.capacity_g > 0.0)) throw InvalidConfig("hopper.capacity_g must be positive");
    if (!(params.initial_g >= 0.0 && params.initial_g <= params.capacity_g))
        throw InvalidConfig("hopper.initial_g must be within [0, capacity]");
    if (!(params.flow_rate_gps > 0.0)) throw InvalidConfig("hopper.flow_rate_gps must be positive");
    if (!(params.dispense_cv >= 0.0)) throw InvalidConfig("hopper.dispense_cv must be >= 0");
    density_ = params.bulk_density_g_per_cm > 0.0 ? params.bulk_density_g_per_cm : params.capacity_g / usable_cm;
    if (params.capacity_g / density_ > usable_cm * (1.0 + 1e-9))
        throw InvalidConfig("hopper at capacity would fill past the sensor dead zone");
    capacity_mg_ = to_mg(params.capacity_g);
    contents_mg_ = initial_mg_ = to_mg(params.initial_g);
}

DispenseResult Hopper::dispense(Duration open_for, SimTime now) {
    if (open_for.count() < 0) throw std::invalid_argument("negative gate duration");
    const double nominal_g = params_.flow_rate_gps * static_cast<double>(open_for.count()) / 1000.0;
    const double cv = params_.dispense_cv;
    const double eps = rng_.truncated_normal(0.0, cv, -3.0 * cv, 3.0 * cv);
    const std::int64_t want_mg = std::max<std::int64_t>(0, to_mg(nominal_g * (1.0 + eps)));
    const std::int64_t got_mg = std::min(want_mg, contents_mg_);
    contents_mg_ -= got_mg;
    dispensed_mg_ += got_mg;
    return DispenseResult{nominal_g, got_mg / 1000.0, open_for, now};
}

double Hopper::refill(double grams) {
    if (!(grams > 0.0)) throw std::invalid_argument("refill amount must be positive");
    const std::int64_t added = std::min(to_mg(grams), capacity_mg_ - contents_mg_);
    contents_mg_ += added;
    refilled_mg_ += added;
    return added / 1000.0;
}

double Hopper::fill_height_cm() const noexcept { return contents_g() / density_; }

double Hopper::surface_distance_cm() const noexcept { return height_cm_ - fill_height_cm(); }

}  // namespace feeder::sim
