#include <algorithm>
#include <cctype>
#include <cmath>
#include <stdexcept>

#include "feeder/firmware.hpp"

namespace feeder::firmware {

namespace {

bool is_space(char c) noexcept { return c == ' ' || c == '\t' || c == '\r' || c == '\n'; }

std::string_view trim(std::string_view s) noexcept {
    while (!s.empty() && is_space(s.front())) s.remove_prefix(1);
    while (!s.empty() && is_space(s.back())) s.remove_suffix(1);
    return s;
}

std::vector<std::string_view> split_single_spaces(std::string_view s) {
    std::vector<std::string_view> tokens;
    std::size_t start = 0;
    for (;;) {
        auto pos = s.find(' ', start);
        tokens.push_back(s.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start));
        if (pos == std::string_view::npos) break;
        start = pos + 1;
    }
    return tokens;
}

std::optional<Verb> parse_verb(std::string_view token) {
    std::string upper(token);
    std::transform(upper.begin(), upper.end(), upper.begin(),
                   [](unsigned char c) { return static_cast<char>(std::toupper(c)); });
    if (upper == "FEED") return Verb::Feed;
    if (upper == "STATUS") return Verb::Status;
    if (upper == "RESET") return Verb::Reset;
    return std::nullopt;
}

}  // namespace

std::string_view to_string(ParseError error) noexcept {
    switch (error) {
    case ParseError::BadFormat: return "BadFormat";
    case ParseError::UnknownVerb: return "UnknownVerb";
    case ParseError::BadPortion: return "BadPortion";
    }
    return "?";
}

std::variant<ParsedCommand, ParseError> parse_command(std::string_view body) {
    const auto text = trim(body);
    if (text.empty()) return ParseError::BadFormat;

    const auto tokens = split_single_spaces(text);
    if (tokens.size() < 2 || tokens.size() > 3) return ParseError::BadFormat;
    if (std::any_of(tokens.begin(), tokens.end(), [](std::string_view t) { return t.empty(); }))
        return ParseError::BadFormat;
    if (!is_valid_pin(tokens[0])) return ParseError::BadFormat;

    const auto verb = parse_verb(tokens[1]);
    if (!verb) return ParseError::UnknownVerb;

    ParsedCommand cmd{std::string(tokens[0]), *verb, std::nullopt};
    if (tokens.size() == 3) {
        if (*verb != Verb::Feed) return ParseError::BadFormat;
        const auto grams = tokens[2];
        if (grams.size() > 3 || !std::all_of(grams.begin(), grams.end(), [](char c) { return c >= '0' && c <= '9'; }))
            return ParseError::BadPortion;
        const int value = std::stoi(std::string(grams));
        if (value < kMinPortionG || value > kMaxPortionG) return ParseError::BadPortion;
        cmd.portion_g = value;
    }
    return cmd;
}

Duration portion_to_open_duration(int portion_g, double flow_rate_gps) {
    if (portion_g < kMinPortionG || portion_g > kMaxPortionG)
        throw std::invalid_argument("portion must be within 5..200 g");
    if (!(flow_rate_gps > 0.0)) throw std::invalid_argument("flow rate must be positive");
    const double ms = portion_g / flow_rate_gps * 1000.0;
    return Duration(std::llround(ms / 10.0) * 10);
}

}  // namespace feeder::firmware
