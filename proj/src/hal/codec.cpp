#include <charconv>
#include <cstdio>

#include "feeder/hal.hpp"

namespace feeder::hal {

namespace {

using namespace std::chrono;

constexpr sys_days kEpoch = sys_days{year{2025} / January / 1};

bool two_digits(std::string_view s, std::size_t pos, int& out) {
    if (pos + 2 > s.size()) return false;
    const char a = s[pos], b = s[pos + 1];
    if (a < '0' || a > '9' || b < '0' || b > '9') return false;
    out = (a - '0') * 10 + (b - '0');
    return true;
}

// Splits `"a","b","c,d"` into its quoted fields.
std::optional<std::vector<std::string>> quoted_fields(std::string_view s) {
    std::vector<std::string> fields;
    std::size_t i = 0;
    while (true) {
        if (i >= s.size() || s[i] != '"') return std::nullopt;
        const auto close = s.find('"', i + 1);
        if (close == std::string_view::npos) return std::nullopt;
        fields.emplace_back(s.substr(i + 1, close - i - 1));
        i = close + 1;
        if (i == s.size()) return fields;
        if (s[i] != ',') return std::nullopt;
        ++i;
    }
}

struct CmtHeader {
    PhoneNumber from;
    SimTime sent_at;
};

std::optional<CmtHeader> parse_cmt_header(std::string_view line) {
    constexpr std::string_view prefix = "+CMT: ";
    if (!line.starts_with(prefix)) return std::nullopt;
    const auto fields = quoted_fields(line.substr(prefix.size()));
    if (!fields || fields->size() != 3) return std::nullopt;
    const auto from = PhoneNumber::try_parse((*fields)[0]);
    // The number field is sent canonical; reject anything needing cleanup.
    if (!from || from->str() != (*fields)[0]) return std::nullopt;
    const auto sent_at = parse_scts((*fields)[2]);
    if (!sent_at) return std::nullopt;
    return CmtHeader{*from, *sent_at};
}

}  // namespace

SendSmsFrames encode_send_sms(const PhoneNumber& to, std::string_view body) {
    if (body.size() > kMaxSmsBody)
        throw CodecError(CodecError::Kind::BodyTooLong, "SMS body exceeds 160 characters");
    if (!is_valid_sms_body(body))
        throw CodecError(CodecError::Kind::InvalidBody, "SMS body empty or not printable ASCII");
    SendSmsFrames frames;
    frames.command = "AT+CMGS=\"" + to.str() + "\"\r";
    frames.payload.reserve(body.size() + 1);
    frames.payload.append(body);
    frames.payload.push_back(kCtrlZ);
    return frames;
}

std::string format_scts(SimTime at) {
    const auto day_index = floor<days>(at);
    const year_month_day ymd{kEpoch + day_index};
    const auto within = at - day_index;
    const auto h = duration_cast<hours>(within);
    const auto m = duration_cast<minutes>(within - h);
    const auto s = duration_cast<seconds>(within - h - m);
    char buf[32];
    std::snprintf(buf, sizeof buf, "%02d/%02u/%02u,%02d:%02d:%02d+00", static_cast<int>(ymd.year()) % 100,
                  static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()), static_cast<int>(h.count()),
                  static_cast<int>(m.count()), static_cast<int>(s.count()));
    return buf;
}

std::optional<SimTime> parse_scts(std::string_view text) {
    // yy/MM/dd,hh:mm:ss+zz
    if (text.size() != 20) return std::nullopt;
    if (text[2] != '/' || text[5] != '/' || text[8] != ',' || text[11] != ':' || text[14] != ':') return std::nullopt;
    if (text[17] != '+' && text[17] != '-') return std::nullopt;
    int yy, mo, dd, hh, mi, ss, zz;
    if (!two_digits(text, 0, yy) || !two_digits(text, 3, mo) || !two_digits(text, 6, dd) ||
        !two_digits(text, 9, hh) || !two_digits(text, 12, mi) || !two_digits(text, 15, ss) ||
        !two_digits(text, 18, zz))
        return std::nullopt;
    const year_month_day ymd{year{2000 + yy}, month{static_cast<unsigned>(mo)}, day{static_cast<unsigned>(dd)}};
    if (!ymd.ok() || hh > 23 || mi > 59 || ss > 59) return std::nullopt;
    const auto since_epoch = sys_days{ymd} - kEpoch;
    return duration_cast<milliseconds>(since_epoch + hours{hh} + minutes{mi} + seconds{ss});
}

std::string format_cmt(const SmsMessage& msg) {
    return "\r\n+CMT: \"" + msg.from.str() + "\",\"\",\"" + format_scts(msg.sent_at) + "\"\r\n" + msg.body + "\r\n";
}

ModemLineDecoder::ModemLineDecoder(PhoneNumber own_number) : own_number_(std::move(own_number)) {}

std::vector<ModemEvent> ModemLineDecoder::feed(std::string_view bytes) {
    std::vector<ModemEvent> out;
    for (char c : bytes) {
        if (c == '\n') {
            std::string line = std::move(partial_);
            partial_.clear();
            if (!line.empty() && line.back() == '\r') line.pop_back();
            on_line(std::move(line), out);
            continue;
        }
        partial_.push_back(c);
        if (!cmt_header_ && partial_ == kPrompt) {
            partial_.clear();
            out.emplace_back(event::SendPrompt{});
        }
    }
    return out;
}

void ModemLineDecoder::on_line(std::string line, std::vector<ModemEvent>& out) {
    if (cmt_header_) {
        std::string header = std::move(*cmt_header_);
        cmt_header_.reset();
        const auto parsed = parse_cmt_header(header);
        if (parsed && is_valid_sms_body(line)) {
            out.emplace_back(event::IncomingSms{SmsMessage{parsed->from, own_number_, std::move(line), parsed->sent_at}});
        } else {
            out.emplace_back(event::Unparsed{std::move(header)});
            if (!line.empty()) out.emplace_back(event::Unparsed{std::move(line)});
        }
        return;
    }
    if (line.empty()) return;
    if (line == "OK") {
        out.emplace_back(event::Ok{});
    } else if (line == "ERROR") {
        out.emplace_back(event::Error{});
    } else if (line.starts_with("+CMGS: ")) {
        int ref = 0;
        const auto digits = std::string_view(line).substr(7);
        const auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), ref);
        if (ec == std::errc() && ptr == digits.data() + digits.size() && !digits.empty())
            out.emplace_back(event::SendConfirm{ref});
        else
            out.emplace_back(event::Unparsed{std::move(line)});
    } else if (line.starts_with("+CMT: ") && parse_cmt_header(line)) {
        cmt_header_ = std::move(line);
    } else {
        out.emplace_back(event::Unparsed{std::move(line)});
    }
}

}  // namespace feeder::hal
