#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "feeder/domain.hpp"

namespace feeder::sim {

/// Behavioural model of a SIM800-class modem in text mode, seen from the
/// device's serial line. Echo is off; result codes are verbose.
class ModemEmulator {
public:
    explicit ModemEmulator(PhoneNumber own_number);

    /// Bytes written by the device; returns the modem's answer. An empty
    /// answer means the modem stayed silent (response timeout).
    std::string device_write(std::string_view bytes);

    /// Network-side arrival of an SMS. In push mode this yields the +CMT
    /// notification bytes; otherwise the message is held until push mode is
    /// enabled and then flushed with the OK of the enabling command.
    std::string deliver(const SmsMessage& msg);

    /// Messages the device submitted with AT+CMGS since the last call.
    std::vector<SmsMessage> take_outgoing();

    /// Ignore the next `n` command lines without answering.
    void set_unresponsive_commands(int n) noexcept { unresponsive_ = n; }
    void set_time(SimTime now) noexcept { now_ = now; }

    bool text_mode() const noexcept { return text_mode_; }
    bool push_mode() const noexcept { return push_mode_; }
    const PhoneNumber& own_number() const noexcept { return own_number_; }

private:
    std::string on_command(std::string line);

    PhoneNumber own_number_;
    SimTime now_{0};
    bool text_mode_ = false;
    bool push_mode_ = false;
    int unresponsive_ = 0;
    int next_ref_ = 1;
    std::string line_;
    bool collecting_body_ = false;
    std::optional<PhoneNumber> pending_to_;
    std::string body_;
    std::vector<SmsMessage> outgoing_;
    std::vector<SmsMessage> held_;
};

}  // namespace feeder::sim
