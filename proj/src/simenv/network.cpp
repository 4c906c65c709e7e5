#include <cmath>

#include "feeder/sim/models.hpp"

namespace feeder::sim {

void GsmNetworkParams::validate() const {
    if (!(delivery_probability >= 0.0 && delivery_probability <= 1.0))
        throw InvalidConfig("net.delivery_probability must be within [0, 1]");
    if (!(latency_min_ms >= 0.0 && latency_min_ms <= latency_max_ms))
        throw InvalidConfig("net latency bounds must satisfy 0 <= min <= max");
    if (!(latency_sd_ms >= 0.0)) throw InvalidConfig("net.latency_sd_ms must be >= 0");
}

GsmNetwork::GsmNetwork(GsmNetworkParams params, std::uint64_t seed) : params_(params), rng_(seed) {
    params_.validate();
}

Duration GsmNetwork::sample_latency() {
    const double ms = rng_.truncated_normal(params_.latency_mean_ms, params_.latency_sd_ms, params_.latency_min_ms,
                                            params_.latency_max_ms);
    // Rounding can only land on the (integral) bounds, never outside them.
    return Duration(std::llround(ms));
}

DeliveryOutcome GsmNetwork::submit() {
    DeliveryOutcome out;
    out.message_id = next_id_++;
    out.delivered = rng_.bernoulli(params_.delivery_probability);
    out.latency = sample_latency();
    if (out.delivered)
        ++delivered_;
    else
        ++dropped_;
    return out;
}

}  // namespace feeder::sim
