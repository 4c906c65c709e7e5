#include <numeric>

#include "feeder/hal.hpp"

namespace feeder::hal {

namespace {

constexpr std::array<std::uint8_t, 3> kMagic{'P', 'F', '1'};
constexpr std::uint8_t kErased = 0xFF;

std::uint8_t checksum(const std::uint8_t* begin, const std::uint8_t* end) {
    return static_cast<std::uint8_t>(std::accumulate(begin, end, 0u) & 0xFFu);
}

}  // namespace

EepromStorage::EepromStorage() { bytes_.fill(kErased); }

void EepromStorage::save(const StoredCredentials& creds) {
    if (!is_valid_pin(creds.pin)) throw InvalidConfig("refusing to store an invalid PIN");
    if (creds.authorized.empty() || creds.authorized.size() > 10)
        throw InvalidConfig("refusing to store 0 or more than 10 numbers");

    std::vector<std::uint8_t> out(kMagic.begin(), kMagic.end());
    out.push_back(static_cast<std::uint8_t>(creds.pin.size()));
    out.insert(out.end(), creds.pin.begin(), creds.pin.end());
    out.push_back(static_cast<std::uint8_t>(creds.authorized.size()));
    for (const auto& number : creds.authorized) {
        out.push_back(static_cast<std::uint8_t>(number.str().size()));
        out.insert(out.end(), number.str().begin(), number.str().end());
    }
    out.push_back(checksum(out.data(), out.data() + out.size()));

    bytes_.fill(kErased);
    std::copy(out.begin(), out.end(), bytes_.begin());
}

std::optional<StoredCredentials> EepromStorage::load() const {
    if (!std::equal(kMagic.begin(), kMagic.end(), bytes_.begin())) return std::nullopt;
    std::size_t pos = kMagic.size();
    auto take = [&](std::size_t n) -> std::optional<std::string> {
        if (pos + n > bytes_.size()) return std::nullopt;
        std::string s(bytes_.begin() + static_cast<long>(pos), bytes_.begin() + static_cast<long>(pos + n));
        pos += n;
        return s;
    };

    StoredCredentials creds;
    const auto pin = take(bytes_[pos++]);
    if (!pin || !is_valid_pin(*pin)) return std::nullopt;
    creds.pin = *pin;

    const std::size_t count = bytes_[pos++];
    if (count == 0 || count > 10) return std::nullopt;
    for (std::size_t i = 0; i < count; ++i) {
        if (pos >= bytes_.size()) return std::nullopt;
        const auto raw = take(bytes_[pos++]);
        if (!raw) return std::nullopt;
        auto number = PhoneNumber::try_parse(*raw);
        if (!number || number->str() != *raw) return std::nullopt;
        creds.authorized.push_back(std::move(*number));
    }
    if (pos >= bytes_.size() || bytes_[pos] != checksum(bytes_.data(), bytes_.data() + pos)) return std::nullopt;
    return creds;
}

StoredCredentials credentials_of(const FeederConfig& config) {
    return {config.pin, std::vector<PhoneNumber>(config.authorized.begin(), config.authorized.end())};
}

void apply_credentials(FeederConfig& config, const StoredCredentials& creds) {
    config.pin = creds.pin;
    config.authorized = std::set<PhoneNumber>(creds.authorized.begin(), creds.authorized.end());
}

}  // namespace feeder::hal
