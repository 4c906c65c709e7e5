#include "feeder/sim/trace.hpp"

#include <ostream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace feeder::sim {

std::string to_ndjson(const TraceRecord& rec) {
    nlohmann::ordered_json j;
    j["seq"] = rec.seq;
    j["at_ms"] = rec.at.count();
    j["kind"] = rec.kind;
    j["detail"] = rec.detail;
    if (rec.current_ma) j["current_ma"] = *rec.current_ma;
    if (rec.battery_pct) j["battery_pct"] = *rec.battery_pct;
    if (rec.grams) j["grams"] = *rec.grams;
    if (rec.msg_id) j["msg_id"] = *rec.msg_id;
    if (rec.duration_ms) j["duration_ms"] = *rec.duration_ms;
    return j.dump();
}

const TraceRecord& Trace::append(TraceRecord rec) {
    if (!records_.empty() && rec.at < records_.back().at)
        throw std::logic_error("trace records must be appended in time order");
    rec.seq = records_.size();
    records_.push_back(std::move(rec));
    return records_.back();
}

void Trace::write_ndjson(std::ostream& out) const {
    for (const auto& rec : records_) out << to_ndjson(rec) << '\n';
}

std::string Trace::ndjson() const {
    std::ostringstream out;
    write_ndjson(out);
    return out.str();
}

}  // namespace feeder::sim
