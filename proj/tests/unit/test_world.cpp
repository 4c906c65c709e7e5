#include <gtest/gtest.h>

#include <algorithm>
#include <string>
#include <vector>

#include "feeder/sim/world.hpp"

using namespace feeder;
using namespace feeder::sim;

namespace {

const PhoneNumber kOwner = PhoneNumber::parse("+8801712345678");
const PhoneNumber kStranger = PhoneNumber::parse("+8801999999999");

WorldParams reliable(std::uint64_t seed = 1) {
    WorldParams p;
    p.seed = seed;
    p.network.delivery_probability = 1.0;
    return p;
}

std::vector<const TraceRecord*> of_kind(const World& w, const std::string& kind) {
    std::vector<const TraceRecord*> out;
    for (const auto& r : w.trace().records())
        if (r.kind == kind) out.push_back(&r);
    return out;
}

std::size_t index_of(const World& w, const TraceRecord* r) {
    return static_cast<std::size_t>(r - w.trace().records().data());
}

}  // namespace

TEST(World, BootsWithModemReady) {
    World w(reliable());
    const auto modem = of_kind(w, "MODEM");
    ASSERT_FALSE(modem.empty());
    EXPECT_EQ(modem.back()->detail, "ready: text mode, new messages pushed");
    EXPECT_EQ(w.modem_init_retries(), 0);
    EXPECT_TRUE(w.powered());
    EXPECT_DOUBLE_EQ(w.hopper().contents_g(), 2000.0);
}

TEST(World, ModemRetriesThenGivesUp) {
    WorldParams p = reliable();
    p.modem_unresponsive_commands = 3;
    World w(p);
    EXPECT_EQ(w.modem_init_retries(), 3);
    p.modem_unresponsive_commands = 4;
    EXPECT_THROW(World{p}, hal::ModemUnresponsive);
}

TEST(World, RemoteFeedRoundTrip) {
    World w(reliable());
    w.advance_to(SimTime(60000));
    const double before = w.hopper().contents_g();
    const auto id = w.phone_send(kOwner, "1234 FEED");
    w.advance_by(Duration(30000));

    const auto in = of_kind(w, "SMS_IN");
    const auto fed = of_kind(w, "FEED_REMOTE");
    const auto out = of_kind(w, "SMS_OUT");
    const auto rx = of_kind(w, "PHONE_RX");
    const auto disp = of_kind(w, "DISPENSE");
    ASSERT_EQ(in.size(), 1u);
    ASSERT_EQ(fed.size(), 1u);
    ASSERT_EQ(out.size(), 1u);
    ASSERT_EQ(rx.size(), 1u);
    ASSERT_EQ(disp.size(), 1u);

    EXPECT_EQ(in[0]->msg_id, id);
    EXPECT_EQ(fed[0]->msg_id, id);
    EXPECT_LT(index_of(w, in[0]), index_of(w, fed[0]));
    EXPECT_LT(index_of(w, fed[0]), index_of(w, out[0]));
    EXPECT_EQ(rx[0]->detail.rfind("to +8801712345678: OK: FED 50g, LEVEL ", 0), 0u);

    // Two hops of 3..5 s each, plus device processing and modem time.
    const auto tx = of_kind(w, "PHONE_TX");
    ASSERT_EQ(tx.size(), 1u);
    const auto rtt = (rx[0]->at - tx[0]->at).count();
    EXPECT_GE(rtt, 6000);
    EXPECT_LT(rtt, 13000);

    EXPECT_EQ(disp[0]->duration_ms, 2000);
    EXPECT_NEAR(before - w.hopper().contents_g(), *disp[0]->grams, 1e-9);
    EXPECT_FALSE(w.gate_open());
    EXPECT_EQ(w.device().counters.feeds_remote, 1u);
}

TEST(World, UnauthorizedGetsOneReplyOnly) {
    World w(reliable());
    const auto servo_before = of_kind(w, "SERVO").size();
    w.phone_send(kStranger, "1234 FEED");
    w.advance_by(Duration(30000));
    const auto* inbox = w.inbox(kStranger);
    ASSERT_NE(inbox, nullptr);
    ASSERT_EQ(inbox->size(), 1u);
    EXPECT_EQ(inbox->front().message.body, "ERROR: Unauthorized Number");
    EXPECT_TRUE(of_kind(w, "DISPENSE").empty());
    EXPECT_EQ(of_kind(w, "SERVO").size(), servo_before);
    EXPECT_EQ(w.inbox(PhoneNumber::parse("+8801000000001")), nullptr);
}

TEST(World, WrongPinAndStatus) {
    World w(reliable());
    w.advance_to(SimTime(3600000));
    w.phone_send(kOwner, "9999 FEED");
    w.advance_by(Duration(60000));
    w.phone_send(kOwner, "1234 STATUS");
    w.advance_by(Duration(60000));
    const auto* inbox = w.inbox(kOwner);
    ASSERT_NE(inbox, nullptr);
    ASSERT_EQ(inbox->size(), 2u);
    EXPECT_EQ((*inbox)[0].message.body, "ERROR: Invalid PIN");
    EXPECT_EQ((*inbox)[1].message.body.rfind("STATUS: LEVEL ", 0), 0u);
}

TEST(World, ThreeScheduledFeedsPerDay) {
    World w(reliable());
    w.advance_to(SimTime(kDay));
    const auto feeds = of_kind(w, "FEED_SCHEDULED");
    ASSERT_EQ(feeds.size(), 3u);
    EXPECT_EQ(feeds[0]->at, SimTime(8 * 3600000));
    EXPECT_EQ(feeds[1]->at, SimTime(14 * 3600000));
    EXPECT_EQ(feeds[2]->at, SimTime(20 * 3600000));
    EXPECT_EQ(of_kind(w, "DISPENSE").size(), 3u);
    // A level check every half hour; the one pinged at midnight has not
    // echoed yet.
    EXPECT_EQ(of_kind(w, "LEVEL_CHECK").size(), 47u);
}

TEST(World, SameSeedSameTraceBytes) {
    auto run = [](std::uint64_t seed) {
        WorldParams p;
        p.seed = seed;
        World w(p);
        for (int i = 0; i < 20; ++i) {
            w.phone_send(kOwner, "1234 FEED");
            w.advance_by(Duration(97000));
        }
        w.advance_by(Duration(kDay));
        return w.trace().ndjson();
    };
    EXPECT_EQ(run(5), run(5));
    EXPECT_NE(run(5), run(6));
}

TEST(World, TraceOrderedWithContiguousSeq) {
    World w(WorldParams{});
    for (int i = 0; i < 30; ++i) {
        w.phone_send(kOwner, i % 3 ? "1234 FEED" : "1234 STATUS");
        w.advance_by(Duration(41000));
    }
    w.advance_by(Duration(2 * kDay));
    const auto& rs = w.trace().records();
    for (std::size_t i = 0; i < rs.size(); ++i) {
        ASSERT_EQ(rs[i].seq, i);
        if (i) {
            ASSERT_GE(rs[i].at, rs[i - 1].at);
        }
    }
}

TEST(World, DispensedMassMatchesHopper) {
    World w(WorldParams{});
    w.advance_to(SimTime(3 * kDay));
    double total = 0;
    for (const auto* d : of_kind(w, "DISPENSE")) total += *d->grams;
    EXPECT_NEAR(total, w.hopper().dispensed_mg() / 1000.0, 1e-6);
    EXPECT_NEAR(2000.0 - w.hopper().contents_g(), total, 1e-6);
}

TEST(World, BatteryRunsFlatWithoutCharger) {
    WorldParams p = reliable();
    p.recharge_below_pct = 0.0;
    World w(p);
    w.advance_to(SimTime(30 * 3600000LL));
    EXPECT_FALSE(w.powered());
    const auto off = of_kind(w, "POWER_OFF");
    ASSERT_EQ(off.size(), 1u);
    // Idle alone would last 26.1 h; feeds and pings shorten that a little.
    EXPECT_GT(off[0]->at, SimTime(24 * 3600000LL));
    EXPECT_LT(off[0]->at, SimTime(26112 * 3600LL));

    w.phone_send(kOwner, "1234 FEED");
    w.advance_by(Duration(30000));
    EXPECT_EQ(of_kind(w, "SMS_LOST").size(), 1u);
    EXPECT_TRUE(of_kind(w, "FEED_REMOTE").empty());

    w.recharge();
    EXPECT_TRUE(w.powered());
    EXPECT_EQ(of_kind(w, "POWER_ON").size(), 1u);
}

TEST(World, OwnerRechargesBelowThreshold) {
    World w(reliable());
    w.advance_to(SimTime(3 * kDay));
    EXPECT_TRUE(w.powered());
    EXPECT_GE(of_kind(w, "RECHARGE").size(), 2u);
    EXPECT_TRUE(of_kind(w, "POWER_OFF").empty());
}

TEST(World, RefillCapsAtCapacity) {
    World w(reliable());
    w.advance_to(SimTime(kDay));
    const double room = 2000.0 - w.hopper().contents_g();
    EXPECT_NEAR(w.refill(5000.0), room, 1e-9);
    EXPECT_DOUBLE_EQ(w.hopper().contents_g(), 2000.0);
    EXPECT_EQ(of_kind(w, "REFILL").size(), 1u);
}

TEST(World, LowFoodRaisesOneAlertPerNumber) {
    WorldParams p = reliable();
    p.hopper.initial_g = 500.0;  // 25%
    World w(p);
    w.advance_to(SimTime(2 * kDay));
    const auto alerts = of_kind(w, "ALERT");
    ASSERT_EQ(alerts.size(), 1u);
    std::size_t alert_sms = 0;
    for (const auto* r : of_kind(w, "SMS_OUT"))
        if (r->detail.find("ALERT: Low Food Level") != std::string::npos) ++alert_sms;
    EXPECT_EQ(alert_sms, 2u);
}

TEST(World, RejectsInvalidSetup) {
    WorldParams p;
    p.network.delivery_probability = -0.1;
    EXPECT_THROW(World{p}, InvalidConfig);
    p = WorldParams{};
    p.feeder.pin = "12";
    EXPECT_THROW(World{p}, InvalidConfig);
    World w(WorldParams{});
    EXPECT_THROW(w.phone_send(kOwner, ""), InvalidMessage);
}
