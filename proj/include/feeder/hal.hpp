#pragma once

// Port boundary between the feeder logic and its peripherals, and the
// SIM800-style text-mode AT command codec spoken over the modem port.
//
// Wire format: lines end in CR LF, the send prompt is "> " (0x3E 0x20) with
// no line ending, a message body is terminated by CTRL-Z (0x1A), and number
// fields are enclosed in ASCII double quotes.

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "feeder/domain.hpp"

namespace feeder::hal {

inline constexpr char kCtrlZ = '\x1A';
inline constexpr std::string_view kCrLf = "\r\n";
inline constexpr std::string_view kPrompt = "> ";

class CodecError : public FeederError {
public:
    enum class Kind { BodyTooLong, InvalidBody };
    CodecError(Kind kind, const std::string& what) : FeederError(what), kind_(kind) {}
    Kind kind() const noexcept { return kind_; }

private:
    Kind kind_;
};

/// The two halves of an AT+CMGS exchange: the command line, and the payload
/// that goes out once the modem has answered with the prompt.
struct SendSmsFrames {
    std::string command;  // AT+CMGS="<number>"\r
    std::string payload;  // body bytes followed by 0x1A

    std::string bytes() const { return command + payload; }
};

SendSmsFrames encode_send_sms(const PhoneNumber& to, std::string_view body);

namespace event {
struct Ok {
    bool operator==(const Ok&) const = default;
};
struct Error {
    bool operator==(const Error&) const = default;
};
struct SendPrompt {
    bool operator==(const SendPrompt&) const = default;
};
struct SendConfirm {
    int msg_ref = 0;
    bool operator==(const SendConfirm&) const = default;
};
struct IncomingSms {
    SmsMessage message;
    bool operator==(const IncomingSms&) const = default;
};
struct Unparsed {
    std::string line;
    bool operator==(const Unparsed&) const = default;
};
}  // namespace event

using ModemEvent = std::variant<event::Ok, event::Error, event::SendPrompt, event::SendConfirm,
                                event::IncomingSms, event::Unparsed>;

/// Incremental decoder for bytes arriving from the modem. Keeps partial
/// lines and the header of a two-line +CMT notification between calls, so
/// the events produced do not depend on how the stream is chunked.
class ModemLineDecoder {
public:
    /// `own_number` becomes the recipient of decoded incoming messages.
    explicit ModemLineDecoder(PhoneNumber own_number);

    std::vector<ModemEvent> feed(std::string_view bytes);

    bool idle() const noexcept { return partial_.empty() && !cmt_header_; }

private:
    void on_line(std::string line, std::vector<ModemEvent>& out);

    PhoneNumber own_number_;
    std::string partial_;
    std::optional<std::string> cmt_header_;
};

/// Service-centre timestamp "yy/MM/dd,hh:mm:ss+zz" relative to the
/// simulation epoch, 2025-01-01 00:00:00. The zone is written as +00.
std::string format_scts(SimTime at);
/// Returns nullopt on malformed input. The zone field is ignored.
std::optional<SimTime> parse_scts(std::string_view text);

/// Unsolicited notification a modem in CNMI push mode emits for a new SMS.
std::string format_cmt(const SmsMessage& msg);

class ModemUnresponsive : public FeederError {
public:
    using FeederError::FeederError;
};

/// AT, AT+CMGF=1 (text mode), AT+CNMI=2,2,0,0,0 (push incoming SMS).
std::vector<std::string> modem_init_sequence();

/// Drives the init sequence: each command must be answered OK before the
/// next is sent; a timeout or ERROR is retried up to `max_retries` times.
class ModemInitializer {
public:
    explicit ModemInitializer(int max_retries = 3);

    /// Bytes of the first command.
    std::string start();
    /// Feed a decoded modem event. Returns the next bytes to write, if any.
    std::optional<std::string> on_event(const ModemEvent& ev);
    /// The current command went unanswered. Returns the bytes to resend.
    /// Throws ModemUnresponsive once retries are exhausted.
    std::string on_timeout();

    bool ready() const noexcept { return index_ >= commands_.size(); }
    int retries() const noexcept { return total_retries_; }
    const std::vector<std::string>& retry_log() const noexcept { return retry_log_; }

private:
    std::string retry_current(const char* reason);

    std::vector<std::string> commands_;
    std::size_t index_ = 0;
    int attempts_on_current_ = 0;
    int max_retries_;
    int total_retries_ = 0;
    std::vector<std::string> retry_log_;
};

// ---------------------------------------------------------------------------
// Ports

class ModemPort {
public:
    virtual ~ModemPort() = default;
    /// Writes bytes to the modem and returns whatever it answers before the
    /// response timeout. An empty string is a timeout.
    virtual std::string transact(std::string_view bytes) = 0;
};

class UltrasonicPort {
public:
    virtual ~UltrasonicPort() = default;
    /// Fires one ranging pulse; the echo time in microseconds, or nullopt.
    virtual std::optional<double> trigger() = 0;
};

class ServoPort {
public:
    virtual ~ServoPort() = default;
    virtual void set(ServoCommandValue value) = 0;
};

class ClockPort {
public:
    virtual ~ClockPort() = default;
    virtual SimTime now() const = 0;
    virtual void wake_at(SimTime at) = 0;
};

struct StoredCredentials {
    std::string pin;
    std::vector<PhoneNumber> authorized;

    bool operator==(const StoredCredentials&) const = default;
};

class StoragePort {
public:
    virtual ~StoragePort() = default;
    virtual void save(const StoredCredentials& creds) = 0;
    virtual std::optional<StoredCredentials> load() const = 0;
};

/// 1 KiB EEPROM image. Layout: "PF1" magic, PIN length + bytes, number
/// count, then length-prefixed numbers, then a one-byte additive checksum.
class EepromStorage final : public StoragePort {
public:
    static constexpr std::size_t kSize = 1024;

    EepromStorage();
    void save(const StoredCredentials& creds) override;
    std::optional<StoredCredentials> load() const override;

    const std::array<std::uint8_t, kSize>& image() const noexcept { return bytes_; }
    std::array<std::uint8_t, kSize>& image() noexcept { return bytes_; }

private:
    std::array<std::uint8_t, kSize> bytes_;
};

/// Config subset that lives in non-volatile storage.
StoredCredentials credentials_of(const FeederConfig& config);
void apply_credentials(FeederConfig& config, const StoredCredentials& creds);

struct PortSet {
    ModemPort* modem = nullptr;
    UltrasonicPort* ultrasonic = nullptr;
    ServoPort* servo = nullptr;
    ClockPort* clock = nullptr;
    StoragePort* storage = nullptr;
};

}  // namespace feeder::hal
