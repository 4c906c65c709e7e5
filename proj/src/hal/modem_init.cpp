#include "feeder/hal.hpp"

namespace feeder::hal {

std::vector<std::string> modem_init_sequence() {
    return {"AT\r", "AT+CMGF=1\r", "AT+CNMI=2,2,0,0,0\r"};
}

ModemInitializer::ModemInitializer(int max_retries) : commands_(modem_init_sequence()), max_retries_(max_retries) {}

std::string ModemInitializer::start() {
    index_ = 0;
    attempts_on_current_ = 1;
    return commands_.front();
}

std::optional<std::string> ModemInitializer::on_event(const ModemEvent& ev) {
    if (ready()) return std::nullopt;
    if (std::holds_alternative<event::Ok>(ev)) {
        ++index_;
        if (ready()) return std::nullopt;
        attempts_on_current_ = 1;
        return commands_[index_];
    }
    if (std::holds_alternative<event::Error>(ev)) return retry_current("ERROR");
    // Echoes and unsolicited lines do not answer the command.
    return std::nullopt;
}

std::string ModemInitializer::on_timeout() {
    if (ready()) throw std::logic_error("modem already initialized");
    return retry_current("timeout");
}

std::string ModemInitializer::retry_current(const char* reason) {
    const auto& cmd = commands_[index_];
    if (attempts_on_current_ > max_retries_) {
        throw ModemUnresponsive("modem did not answer " + cmd.substr(0, cmd.size() - 1) + " after " +
                                std::to_string(max_retries_) + " retries");
    }
    ++attempts_on_current_;
    ++total_retries_;
    retry_log_.push_back(cmd.substr(0, cmd.size() - 1) + ": " + reason + ", retry " +
                         std::to_string(attempts_on_current_ - 1));
    return cmd;
}

}  // namespace feeder::hal
