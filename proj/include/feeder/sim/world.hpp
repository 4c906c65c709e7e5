#pragma once

// Discrete-event digital twin of the feeder: the firmware runs unmodified
// against an emulated modem, a stochastic network, hopper and ranger, and a
// power model. The whole run is a pure function of its parameters, seed and
// the calls made on it.

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <variant>
#include <vector>

#include "feeder/firmware.hpp"
#include "feeder/hal.hpp"
#include "feeder/sim/clock.hpp"
#include "feeder/sim/modem_emulator.hpp"
#include "feeder/sim/models.hpp"
#include "feeder/sim/trace.hpp"

namespace feeder::sim {

struct WorldParams {
    FeederConfig feeder = default_feeder_config();
    PhoneNumber device_number = PhoneNumber::parse("+8801900000000");
    GsmNetworkParams network;
    HopperParams hopper;
    UltrasonicParams sensor;
    PowerParams power;
    // Firmware loop time between reading a message and starting its reply.
    Duration processing{200};
    // The owner plugs the charger in when the gauge drops below this; 0 never.
    double recharge_below_pct = 20.0;
    SimTime start{0};
    std::uint64_t seed = 1;
    int modem_unresponsive_commands = 0;
};

namespace ev {
struct DeliverToDevice {
    SmsMessage msg;
    std::uint64_t msg_id;
};
struct DeliverToPhone {
    SmsMessage msg;
    std::uint64_t msg_id;
};
struct FirmwareWake {};
struct ServoClose {
    ServoCommandValue value;
};
struct EchoReturn {
    std::optional<double> echo_time_us;
};
struct DeviceTransmit {
    PhoneNumber to;
    std::string body;
};
}  // namespace ev

using WorldEvent = std::variant<ev::DeliverToDevice, ev::DeliverToPhone, ev::FirmwareWake, ev::ServoClose,
                                ev::EchoReturn, ev::DeviceTransmit>;

struct InboxEntry {
    SmsMessage message;
    SimTime delivered_at{0};
    std::uint64_t msg_id = 0;
};

class World {
public:
    /// Boots the device: modem init handshake, credentials through EEPROM,
    /// firmware init. Throws hal::ModemUnresponsive or InvalidConfig.
    explicit World(WorldParams params);

    SimTime now() const noexcept { return clock_.now(); }
    void advance_to(SimTime t);
    void advance_by(Duration d) { advance_to(now() + d); }
    std::optional<SimTime> next_event_time() const { return clock_.next_time(); }

    /// An owner's phone sends an SMS to the device. Throws InvalidMessage.
    std::uint64_t phone_send(const PhoneNumber& from, const std::string& body);

    /// Hands a message to the network at `departure`. Loss and per-hop
    /// latency are sampled; a delivered message is scheduled for arrival.
    DeliveryOutcome network_submit(const SmsMessage& msg, SimTime departure);

    double refill(double grams);
    void recharge();

    const firmware::DeviceState& device() const noexcept { return device_; }
    const Hopper& hopper() const noexcept { return hopper_; }
    Hopper& hopper() noexcept { return hopper_; }
    const PowerModel& power() const noexcept { return power_; }
    Ultrasonic& sensor() noexcept { return sensor_; }
    const GsmNetwork& network() const noexcept { return network_; }
    const Trace& trace() const noexcept { return trace_; }
    const WorldParams& params() const noexcept { return params_; }
    const std::vector<DispenseResult>& dispenses() const noexcept { return dispenses_; }
    bool powered() const noexcept { return power_.powered(); }
    bool gate_open() const noexcept { return gate_open_; }
    int modem_init_retries() const noexcept { return modem_retries_; }
    const hal::EepromStorage& eeprom() const noexcept { return eeprom_; }

    /// nullptr for a number that never sent to or heard from the device.
    const std::vector<InboxEntry>* inbox(const PhoneNumber& number) const;

private:
    void boot();
    void dispatch(SimEvent<WorldEvent>& event);
    void on_event(ev::DeliverToDevice& e);
    void on_event(ev::DeliverToPhone& e);
    void on_event(ev::FirmwareWake& e);
    void on_event(ev::ServoClose& e);
    void on_event(ev::EchoReturn& e);
    void on_event(ev::DeviceTransmit& e);

    void handle_incoming(const SmsMessage& msg, std::uint64_t msg_id);
    void apply(firmware::Step step);
    void execute(const std::vector<firmware::Action>& actions);
    void schedule_wake(SimTime at);
    void close_gate();
    void sync_power(SimTime t);
    void check_battery();
    void run_battery_until(SimTime limit);
    void power_on();

    void note(std::string kind, std::string detail, std::optional<std::uint64_t> msg_id = std::nullopt);

    WorldParams params_;
    SimClock<WorldEvent> clock_;
    GsmNetwork network_;
    Hopper hopper_;
    Ultrasonic sensor_;
    PowerModel power_;
    ModemEmulator modem_;
    hal::ModemLineDecoder decoder_;
    hal::EepromStorage eeprom_;
    firmware::DeviceState device_;
    Trace trace_;

    std::set<SimTime> pending_wakes_;
    SimTime modem_free_at_{0};
    bool gate_open_ = false;
    SimTime gate_opened_at_{0};
    std::optional<std::uint64_t> current_msg_id_;
    int modem_retries_ = 0;
    std::vector<DispenseResult> dispenses_;
    std::map<PhoneNumber, std::vector<InboxEntry>> inboxes_;
};

}  // namespace feeder::sim
