#include <gtest/gtest.h>

#include <cmath>
#include <set>
#include <stdexcept>
#include <string>

#include "feeder/sim/clock.hpp"
#include "feeder/sim/models.hpp"
#include "feeder/sim/rng.hpp"
#include "feeder/sim/trace.hpp"

using namespace feeder;
using namespace feeder::sim;

namespace {
constexpr double kMaMsPerMah = 3600.0 * 1000.0;
}

// ---------------------------------------------------------------- rng

TEST(Rng, SameSeedSameStream) {
    Rng a(42), b(42);
    for (int i = 0; i < 1000; ++i) ASSERT_EQ(a.next(), b.next());
}

TEST(Rng, DerivedSeedsAreDistinct) {
    std::set<std::uint64_t> seen;
    for (std::uint64_t master = 0; master < 50; ++master)
        for (std::uint64_t stream = 0; stream < 200; ++stream) seen.insert(derive_seed(master, stream));
    EXPECT_EQ(seen.size(), 50u * 200u);
}

TEST(Rng, RangesHold) {
    Rng r(7);
    for (int i = 0; i < 100000; ++i) {
        const double u = r.uniform();
        ASSERT_GE(u, 0.0);
        ASSERT_LT(u, 1.0);
        const auto k = r.uniform_int(-3, 5);
        ASSERT_GE(k, -3);
        ASSERT_LE(k, 5);
        const double t = r.truncated_normal(10.0, 4.0, 8.0, 11.0);
        ASSERT_GE(t, 8.0);
        ASSERT_LE(t, 11.0);
    }
    EXPECT_THROW(r.uniform_int(2, 1), std::invalid_argument);
    EXPECT_DOUBLE_EQ(r.truncated_normal(5.0, 0.0, 0.0, 10.0), 5.0);
}

TEST(Rng, NormalMoments) {
    Rng r(11);
    const int n = 200000;
    double s = 0, s2 = 0;
    for (int i = 0; i < n; ++i) {
        const double x = r.normal();
        s += x;
        s2 += x * x;
    }
    EXPECT_NEAR(s / n, 0.0, 0.01);
    EXPECT_NEAR(s2 / n, 1.0, 0.02);
}

// ---------------------------------------------------------------- clock

TEST(SimClock, FiresInTimeThenInsertionOrder) {
    SimClock<int> c;
    c.schedule(SimTime(30), 3);
    c.schedule(SimTime(10), 1);
    c.schedule(SimTime(30), 4);
    c.schedule(SimTime(10), 2);
    const auto fired = c.advance_to(SimTime(100));
    ASSERT_EQ(fired.size(), 4u);
    for (int i = 0; i < 4; ++i) EXPECT_EQ(fired[static_cast<std::size_t>(i)].payload, i + 1);
    EXPECT_EQ(c.now(), SimTime(100));
}

TEST(SimClock, LeavesLaterEventsPending) {
    SimClock<int> c;
    c.schedule(SimTime(50), 1);
    c.schedule(SimTime(150), 2);
    EXPECT_EQ(c.advance_to(SimTime(100)).size(), 1u);
    EXPECT_EQ(c.pending(), 1u);
    EXPECT_EQ(c.next_time(), SimTime(150));
}

TEST(SimClock, RejectsThePast) {
    SimClock<int> c(SimTime(1000));
    EXPECT_THROW(c.schedule(SimTime(999), 0), SchedulingInPast);
    EXPECT_NO_THROW(c.schedule(SimTime(1000), 0));
    EXPECT_THROW(c.advance_to(SimTime(10)), SchedulingInPast);
}

TEST(SimClock, PropertyNeverRunsBackwards) {
    Rng r(3);
    SimClock<int> c;
    for (int i = 0; i < 2000; ++i) c.schedule(SimTime(r.uniform_int(0, 100000)), i);
    SimTime last{0};
    while (auto e = c.pop_until(SimTime(100000))) {
        ASSERT_GE(e->at, last);
        last = e->at;
    }
}

// ---------------------------------------------------------------- network

TEST(GsmNetwork, CertainDeliveryAndLatencyWithinClip) {
    GsmNetworkParams p;
    p.delivery_probability = 1.0;
    GsmNetwork net(p, 5);
    for (int i = 0; i < 10000; ++i) {
        const auto o = net.submit();
        ASSERT_TRUE(o.delivered);
        ASSERT_GE(o.latency.count(), 3000);
        ASSERT_LE(o.latency.count(), 5000);
        ASSERT_EQ(o.message_id, static_cast<std::uint64_t>(i + 1));
    }
    EXPECT_EQ(net.dropped(), 0u);
}

TEST(GsmNetwork, LossRateNearTwoPercent) {
    GsmNetwork net(GsmNetworkParams{}, 9);
    for (int i = 0; i < 10000; ++i) net.submit();
    const double loss = static_cast<double>(net.dropped()) / 10000.0;
    EXPECT_GE(loss, 0.015);
    EXPECT_LE(loss, 0.025);
    EXPECT_EQ(net.delivered() + net.dropped(), 10000u);
}

TEST(GsmNetwork, LatencyStreamIndependentOfLossProbability) {
    GsmNetworkParams a, b;
    a.delivery_probability = 1.0;
    b.delivery_probability = 0.5;
    GsmNetwork na(a, 21), nb(b, 21);
    for (int i = 0; i < 500; ++i) ASSERT_EQ(na.submit().latency, nb.submit().latency);
}

TEST(GsmNetwork, LatencyMeanNearFourSeconds) {
    GsmNetwork net(GsmNetworkParams{}, 4);
    double sum = 0;
    for (int i = 0; i < 20000; ++i) sum += static_cast<double>(net.sample_latency().count());
    EXPECT_NEAR(sum / 20000.0, 4000.0, 25.0);
}

TEST(GsmNetwork, RejectsBadParams) {
    GsmNetworkParams p;
    p.delivery_probability = 1.5;
    EXPECT_THROW(p.validate(), InvalidConfig);
    p = {};
    p.latency_min_ms = 6000;
    EXPECT_THROW(p.validate(), InvalidConfig);
}

// ---------------------------------------------------------------- hopper

TEST(Hopper, NoVariationGivesNominalPortion) {
    HopperParams p;
    p.dispense_cv = 0.0;
    Hopper h(p, 30.0, 2.0, 1);
    const auto r = h.dispense(Duration(2000), SimTime(0));
    EXPECT_EQ(r.dispensed_g, 50.0);
    EXPECT_EQ(r.requested_g, 50.0);
    EXPECT_EQ(h.contents_mg(), 1950000);
}

TEST(Hopper, CapsAtContentsAndCapacity) {
    HopperParams p;
    p.initial_g = 30.0;
    Hopper h(p, 30.0, 2.0, 1);
    EXPECT_DOUBLE_EQ(h.dispense(Duration(2000), SimTime(0)).dispensed_g, 30.0);
    EXPECT_DOUBLE_EQ(h.dispense(Duration(2000), SimTime(0)).dispensed_g, 0.0);
    EXPECT_DOUBLE_EQ(h.refill(5000.0), 2000.0);
    EXPECT_DOUBLE_EQ(h.refill(1.0), 0.0);
    EXPECT_THROW(h.refill(0.0), std::invalid_argument);
    EXPECT_THROW(h.dispense(Duration(-1), SimTime(0)), std::invalid_argument);
}

TEST(Hopper, DensityAndGeometry) {
    Hopper h(HopperParams{}, 30.0, 2.0, 1);
    // 2000 g over 28 usable cm.
    EXPECT_NEAR(h.bulk_density_g_per_cm(), 71.428571, 1e-6);
    EXPECT_NEAR(h.surface_distance_cm(), 2.0, 1e-9);
    const double out = h.dispense(Duration(40000), SimTime(0)).dispensed_g;  // 1000 g nominal
    EXPECT_NEAR(h.surface_distance_cm(), 2.0 + out / h.bulk_density_g_per_cm(), 1e-9);
}

TEST(Hopper, PropertyMassIsConserved) {
    Rng r(99);
    for (int trial = 0; trial < 200; ++trial) {
        HopperParams p;
        p.initial_g = r.uniform(0.0, 2000.0);
        p.dispense_cv = r.uniform(0.0, 0.2);
        Hopper h(p, 30.0, 2.0, r.next());
        for (int k = 0; k < 50; ++k) {
            if (r.bernoulli(0.8))
                h.dispense(Duration(r.uniform_int(0, 5000)), SimTime(0));
            else
                h.refill(r.uniform(0.001, 800.0));
            ASSERT_EQ(h.contents_mg() + h.dispensed_mg(), h.initial_mg() + h.refilled_mg());
            ASSERT_GE(h.contents_mg(), 0);
            ASSERT_LE(h.contents_g(), h.capacity_g());
        }
    }
}

TEST(Hopper, VariationStaysWithinThreeSigma) {
    Hopper h(HopperParams{}, 30.0, 2.0, 8);
    for (int i = 0; i < 30; ++i) {
        const double g = h.dispense(Duration(2000), SimTime(0)).dispensed_g;
        ASSERT_GE(g, 50.0 * (1 - 3 * 0.0267) - 1e-3);
        ASSERT_LE(g, 50.0 * (1 + 3 * 0.0267) + 1e-3);
    }
}

// ---------------------------------------------------------------- ultrasonic

TEST(Ultrasonic, SpeedOfSound) {
    EXPECT_NEAR(actual_sound_speed_mps(25.0), 346.3, 1e-9);
    EXPECT_NEAR(actual_sound_speed_mps(0.0), 331.3, 1e-9);
}

TEST(Ultrasonic, NoiseFreeInversionAtCalibrationTemperature) {
    UltrasonicParams p;
    p.noise_enabled = false;
    Ultrasonic u(p, 1);
    for (double d : {5.0, 16.0, 28.0, 100.0, 399.0}) {
        const auto us = u.ping(d);
        ASSERT_TRUE(us.has_value());
        EXPECT_NEAR(ranging_distance_cm(*us, 346.3), d, 1e-9);
    }
}

TEST(Ultrasonic, ColdAirReadsLong) {
    UltrasonicParams p;
    p.noise_enabled = false;
    p.temp_c = 0.0;
    Ultrasonic u(p, 1);
    const auto us = u.ping(100.0);
    ASSERT_TRUE(us.has_value());
    // 100 * 346.3 / 331.3
    EXPECT_NEAR(ranging_distance_cm(*us, 346.3), 104.5276185, 1e-6);
}

TEST(Ultrasonic, TemperatureErrorSmallestNearCalibration) {
    double best_t = -1, best_err = 1e9;
    for (int t = 0; t <= 40; ++t) {
        UltrasonicParams p;
        p.noise_enabled = false;
        p.temp_c = t;
        Ultrasonic u(p, 1);
        const double err = std::abs(ranging_distance_cm(*u.ping(100.0), 346.3) - 100.0);
        if (err < best_err) {
            best_err = err;
            best_t = t;
        }
    }
    EXPECT_GE(best_t, 20.0);
    EXPECT_LE(best_t, 30.0);
}

TEST(Ultrasonic, OutOfRangeTimesOut) {
    Ultrasonic u(UltrasonicParams{}, 1);
    EXPECT_FALSE(u.ping(401.0).has_value());
}

TEST(Ultrasonic, MisalignmentRaisesTimeouts) {
    EXPECT_EQ(echo_timeout_probability(15.0), 0.0);
    EXPECT_NEAR(echo_timeout_probability(25.0), 0.45, 1e-12);
    EXPECT_EQ(echo_timeout_probability(60.0), 1.0);
    auto timeouts = [](double deg) {
        UltrasonicParams p;
        p.misalignment_deg = deg;
        Ultrasonic u(p, 17);
        int n = 0;
        for (int i = 0; i < 4000; ++i) n += u.ping(20.0) ? 0 : 1;
        return n;
    };
    EXPECT_EQ(timeouts(15.0), 0);
    const int at25 = timeouts(25.0);
    EXPECT_GT(at25, 0);
    EXPECT_NEAR(at25 / 4000.0, 0.45, 0.04);
}

TEST(Ultrasonic, NoiseGrowsWithDistance) {
    UltrasonicParams p;
    EXPECT_DOUBLE_EQ(ranging_noise_sd_cm(100.0, p), 0.3);
    EXPECT_DOUBLE_EQ(ranging_noise_sd_cm(300.0, p), 1.15);
    EXPECT_DOUBLE_EQ(ranging_noise_sd_cm(400.0, p), 2.0);
}

// ---------------------------------------------------------------- power

TEST(PowerModel, IdleHourOracle) {
    PowerModel pm(PowerParams{}, SimTime(0));
    EXPECT_DOUBLE_EQ(pm.current_ma(), 125.0);
    pm.advance(SimTime(3600000));
    const auto e = pm.integrate(SimTime(0), SimTime(3600000));
    EXPECT_NEAR(e.rail_mah, 125.0, 1e-9);
    // 125 * 5 / (0.85 * 12)
    EXPECT_NEAR(e.battery_mah, 61.2745098, 1e-6);
}

TEST(PowerModel, TenMinutesIdle) {
    PowerModel pm(PowerParams{}, SimTime(0));
    pm.advance(SimTime(600000));
    EXPECT_NEAR(pm.integrate(SimTime(0), SimTime(600000)).rail_mah, 20.8333333, 1e-6);
}

TEST(PowerModel, ModemBurstAddsItsCharge) {
    PowerModel pm(PowerParams{}, SimTime(0));
    pm.add_burst(SimTime(1000), Duration(300), 1800.0);
    pm.advance(SimTime(10000));
    const double idle = 125.0 * 10000 / kMaMsPerMah;
    EXPECT_NEAR(pm.integrate(SimTime(0), SimTime(10000)).rail_mah - idle, 0.15, 1e-9);
    const auto& s = pm.samples();
    ASSERT_EQ(s.size(), 3u);
    EXPECT_EQ(s[1], (PowerSample{SimTime(1000), 1925.0}));
    EXPECT_EQ(s[2], (PowerSample{SimTime(1300), 125.0}));
}

TEST(PowerModel, OverlappingBurstsStack) {
    PowerModel pm(PowerParams{}, SimTime(0));
    pm.add_burst(SimTime(0), Duration(2000), 250.0);
    pm.add_burst(SimTime(0), Duration(300), 1800.0);
    pm.advance(SimTime(3000));
    const auto& s = pm.samples();
    ASSERT_EQ(s.size(), 3u);
    EXPECT_EQ(s[0], (PowerSample{SimTime(0), 2175.0}));
    EXPECT_EQ(s[1], (PowerSample{SimTime(300), 375.0}));
    EXPECT_EQ(s[2], (PowerSample{SimTime(2000), 125.0}));
}

TEST(PowerModel, IdleEndurance) {
    PowerModel pm(PowerParams{}, SimTime(0));
    // 1600 / 61.2745...
    EXPECT_NEAR(pm.idle_endurance_hours(), 26.112, 1e-9);
}

TEST(PowerModel, RechargeResetsGauge) {
    PowerModel pm(PowerParams{}, SimTime(0));
    pm.advance(SimTime(3600000 * 13));
    EXPECT_NEAR(pm.battery_pct(), 100.0 * (1 - 13 / 26.112), 1e-6);
    pm.recharge();
    EXPECT_DOUBLE_EQ(pm.battery_pct(), 100.0);
    pm.advance(SimTime(3600000 * 14));
    EXPECT_NEAR(pm.battery_pct(), 100.0 * (1 - 1 / 26.112), 1e-6);
}

TEST(PowerModel, UnpoweredDrawsNothing) {
    PowerModel pm(PowerParams{}, SimTime(0));
    pm.set_powered(false);
    pm.advance(SimTime(100000));
    EXPECT_DOUBLE_EQ(pm.integrate(SimTime(0), SimTime(100000)).rail_mah, 0.0);
}

TEST(PowerModel, RejectsBackwardsUse) {
    PowerModel pm(PowerParams{}, SimTime(0));
    pm.advance(SimTime(500));
    EXPECT_THROW(pm.advance(SimTime(400)), std::logic_error);
    EXPECT_THROW(pm.add_burst(SimTime(100), Duration(10), 5.0), std::logic_error);
    EXPECT_THROW(pm.integrate(SimTime(0), SimTime(600)), std::out_of_range);
}

TEST(PowerModel, PropertyWindowsAreAdditive) {
    Rng r(12);
    PowerModel pm(PowerParams{}, SimTime(0));
    SimTime t{0};
    for (int i = 0; i < 300; ++i) {
        t += Duration(r.uniform_int(0, 5000));
        pm.advance(t);
        if (r.bernoulli(0.5)) pm.add_burst(t, Duration(r.uniform_int(1, 3000)), r.uniform(1, 2000));
    }
    pm.advance(t + Duration(10000));
    const SimTime end = pm.integrated_to();
    for (int i = 0; i < 200; ++i) {
        SimTime a(r.uniform_int(0, end.count())), b(r.uniform_int(0, end.count())), c(r.uniform_int(0, end.count()));
        if (a > b) std::swap(a, b);
        if (b > c) std::swap(b, c);
        if (a > b) std::swap(a, b);
        const double whole = pm.integrate(a, c).rail_mah;
        const double parts = pm.integrate(a, b).rail_mah + pm.integrate(b, c).rail_mah;
        ASSERT_NEAR(whole, parts, 1e-9);
        ASSERT_GE(pm.integrate(a, b).rail_mah, 125.0 * static_cast<double>((b - a).count()) / kMaMsPerMah - 1e-9);
    }
}

// ---------------------------------------------------------------- trace

TEST(Trace, NdjsonFieldOrderAndOptionals) {
    Trace t;
    t.append({0, SimTime(5), "SMS_IN", "from +8801711111111: 1234 FEED", {}, {}, {}, 7, {}});
    t.append({0, SimTime(9), "DISPENSE", "50.00 g in 2000 ms", {}, {}, 50.0, {}, 2000});
    EXPECT_EQ(t.ndjson(),
              "{\"seq\":0,\"at_ms\":5,\"kind\":\"SMS_IN\",\"detail\":\"from +8801711111111: 1234 FEED\","
              "\"msg_id\":7}\n"
              "{\"seq\":1,\"at_ms\":9,\"kind\":\"DISPENSE\",\"detail\":\"50.00 g in 2000 ms\",\"grams\":50.0,"
              "\"duration_ms\":2000}\n");
}

TEST(Trace, AppendMustBeTimeOrdered) {
    Trace t;
    t.append({0, SimTime(10), "A", "", {}, {}, {}, {}, {}});
    t.append({0, SimTime(10), "B", "", {}, {}, {}, {}, {}});
    EXPECT_THROW(t.append({0, SimTime(9), "C", "", {}, {}, {}, {}, {}}), std::logic_error);
    EXPECT_EQ(t.size(), 2u);
    EXPECT_EQ(t.records()[1].seq, 1u);
}
