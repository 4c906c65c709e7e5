#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "feeder/domain.hpp"

namespace feeder::sim {

/// One line of the simulation trace. Field names in the NDJSON form are
/// fixed: seq, at_ms, kind, detail, and when present current_ma,
/// battery_pct, grams, msg_id, duration_ms.
struct TraceRecord {
    std::uint64_t seq = 0;
    SimTime at{0};
    std::string kind;
    std::string detail;
    std::optional<double> current_ma;
    std::optional<double> battery_pct;
    std::optional<double> grams;
    std::optional<std::uint64_t> msg_id;
    std::optional<std::int64_t> duration_ms;

    bool operator==(const TraceRecord&) const = default;
};

std::string to_ndjson(const TraceRecord& rec);

/// Append-only, time-ordered record of everything that happened in a world.
class Trace {
public:
    const TraceRecord& append(TraceRecord rec);

    const std::vector<TraceRecord>& records() const noexcept { return records_; }
    std::size_t size() const noexcept { return records_.size(); }
    std::uint64_t next_seq() const noexcept { return records_.size(); }

    void write_ndjson(std::ostream& out) const;
    std::string ndjson() const;

private:
    std::vector<TraceRecord> records_;
};

}  // namespace feeder::sim
