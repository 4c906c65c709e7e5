#include "feeder/sim/modem_emulator.hpp"

#include "feeder/hal.hpp"

namespace feeder::sim {

namespace {
const std::string kOk = "\r\nOK\r\n";
const std::string kError = "\r\nERROR\r\n";
}  // namespace

ModemEmulator::ModemEmulator(PhoneNumber own_number) : own_number_(std::move(own_number)) {}

std::string ModemEmulator::device_write(std::string_view bytes) {
    std::string out;
    for (char c : bytes) {
        if (collecting_body_) {
            if (c == hal::kCtrlZ) {
                collecting_body_ = false;
                if (is_valid_sms_body(body_)) {
                    outgoing_.push_back(SmsMessage{own_number_, *pending_to_, body_, now_});
                    out += "\r\n+CMGS: " + std::to_string(next_ref_++) + "\r\n" + kOk;
                } else {
                    out += kError;
                }
                body_.clear();
                pending_to_.reset();
            } else if (c == '\x1B') {  // ESC aborts the send
                collecting_body_ = false;
                body_.clear();
                pending_to_.reset();
                out += kOk;
            } else {
                body_.push_back(c);
            }
            continue;
        }
        if (c == '\r') {
            std::string line = std::move(line_);
            line_.clear();
            if (!line.empty()) out += on_command(std::move(line));
        } else if (c != '\n') {
            line_.push_back(c);
        }
    }
    return out;
}

std::string ModemEmulator::on_command(std::string line) {
    if (unresponsive_ > 0) {
        --unresponsive_;
        return {};
    }
    if (line == "AT") return kOk;
    if (line == "AT+CMGF=1") {
        text_mode_ = true;
        return kOk;
    }
    if (line == "AT+CNMI=2,2,0,0,0") {
        push_mode_ = true;
        std::string out = kOk;
        for (const auto& msg : held_) out += hal::format_cmt(msg);
        held_.clear();
        return out;
    }
    constexpr std::string_view cmgs = "AT+CMGS=\"";
    if (line.starts_with(cmgs) && line.size() > cmgs.size() + 1 && line.back() == '"') {
        if (!text_mode_) return kError;
        const auto raw = std::string_view(line).substr(cmgs.size(), line.size() - cmgs.size() - 1);
        auto to = PhoneNumber::try_parse(raw);
        if (!to) return kError;
        pending_to_ = std::move(*to);
        collecting_body_ = true;
        return "\r\n> ";
    }
    return kError;
}

std::string ModemEmulator::deliver(const SmsMessage& msg) {
    if (!push_mode_) {
        held_.push_back(msg);
        return {};
    }
    return hal::format_cmt(msg);
}

std::vector<SmsMessage> ModemEmulator::take_outgoing() {
    std::vector<SmsMessage> out;
    out.swap(outgoing_);
    return out;
}

}  // namespace feeder::sim
