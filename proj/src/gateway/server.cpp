#include "feeder/gateway/server.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <limits>

#include "httplib.h"

namespace feeder::gateway {

using nlohmann::ordered_json;

namespace {

void reply(httplib::Response& res, int status, const ordered_json& body) {
    res.status = status;
    res.set_content(body.dump(), "application/json");
}

void fail(httplib::Response& res, int status, const std::string& message) {
    reply(res, status, ordered_json{{"error", message}});
}

std::optional<nlohmann::json> body_json(const httplib::Request& req, httplib::Response& res) {
    auto j = nlohmann::json::parse(req.body, nullptr, false);
    if (j.is_discarded() || !j.is_object()) {
        fail(res, 400, "request body must be a JSON object");
        return std::nullopt;
    }
    return j;
}

std::optional<double> number_field(const nlohmann::json& j, const char* key, httplib::Response& res) {
    auto it = j.find(key);
    if (it == j.end() || !it->is_number()) {
        fail(res, 400, std::string("'") + key + "' must be a number");
        return std::nullopt;
    }
    const double v = it->get<double>();
    if (!std::isfinite(v)) {
        fail(res, 400, std::string("'") + key + "' must be finite");
        return std::nullopt;
    }
    return v;
}

std::optional<std::uint64_t> cursor_param(const httplib::Request& req, const char* key, httplib::Response& res) {
    if (!req.has_param(key)) return 0;
    const auto& raw = req.get_param_value(key);
    std::uint64_t v = 0;
    auto [end, ec] = std::from_chars(raw.data(), raw.data() + raw.size(), v);
    if (ec != std::errc{} || end != raw.data() + raw.size()) {
        fail(res, 400, std::string("'") + key + "' must be a non-negative integer");
        return std::nullopt;
    }
    return v;
}

}  // namespace

ordered_json to_json(const Snapshot& s) {
    ordered_json j;
    j["level_pct"] = s.level_pct ? ordered_json(*s.level_pct) : ordered_json(nullptr);
    j["servo_open"] = s.servo_open;
    if (s.next_feed) {
        j["next_feed"] = {{"at_ms", s.next_feed->count()}, {"time", format_hhmm(*s.next_feed)}};
    } else {
        j["next_feed"] = nullptr;
    }
    j["counters"] = {{"feeds_scheduled", s.counters.feeds_scheduled},
                     {"feeds_remote", s.counters.feeds_remote},
                     {"sms_rx", s.counters.sms_rx},
                     {"sms_tx", s.counters.sms_tx},
                     {"errors", s.counters.errors}};
    j["battery_pct"] = s.battery_pct;
    j["hopper_g"] = s.hopper_g;
    j["sim_now_ms"] = s.sim_now.count();
    j["powered"] = s.powered;
    j["alert_armed"] = s.alert_armed;
    j["realtime_rate"] = s.realtime_rate;
    j["event_count"] = s.event_count;
    return j;
}

ordered_json to_json(const sim::TraceRecord& r) { return ordered_json::parse(sim::to_ndjson(r)); }

ordered_json to_json(const sim::InboxEntry& e) {
    return {{"from", e.message.from.str()},
            {"to", e.message.to.str()},
            {"body", e.message.body},
            {"sent_at_ms", e.message.sent_at.count()},
            {"delivered_at_ms", e.delivered_at.count()},
            {"message_id", e.msg_id}};
}

GatewayServer::GatewayServer(SimSession& session) : session_(session), server_(std::make_unique<httplib::Server>()) {
    routes();
}

GatewayServer::~GatewayServer() { stop(); }

int GatewayServer::bind_any_port(const std::string& host) { return server_->bind_to_any_port(host); }
bool GatewayServer::bind(const std::string& host, int port) { return server_->bind_to_port(host, port); }
bool GatewayServer::listen_after_bind() { return server_->listen_after_bind(); }
bool GatewayServer::running() const { return server_->is_running(); }

void GatewayServer::stop() {
    if (server_) server_->stop();
}

void GatewayServer::routes() {
    auto& srv = *server_;
    srv.set_default_headers({{"Access-Control-Allow-Origin", "*"},
                             {"Access-Control-Allow-Methods", "GET, POST, OPTIONS"},
                             {"Access-Control-Allow-Headers", "Content-Type, Last-Event-ID"}});
    srv.Options(R"(/api/.*)", [](const httplib::Request&, httplib::Response& res) { res.status = 204; });

    srv.set_exception_handler([](const httplib::Request&, httplib::Response& res, std::exception_ptr ep) {
        try {
            std::rethrow_exception(ep);
        } catch (const std::exception& e) {
            fail(res, 500, e.what());
        } catch (...) {
            fail(res, 500, "internal error");
        }
    });

    srv.Get("/api/health", [](const httplib::Request&, httplib::Response& res) {
        reply(res, 200, ordered_json{{"ok", true}});
    });

    srv.Post("/api/sms", [this](const httplib::Request& req, httplib::Response& res) {
        auto j = body_json(req, res);
        if (!j) return;
        if (!j->contains("from") || !(*j)["from"].is_string() || !j->contains("body") || !(*j)["body"].is_string())
            return fail(res, 400, "'from' and 'body' must be strings");
        auto from = PhoneNumber::try_parse((*j)["from"].get<std::string>());
        if (!from) return fail(res, 400, "'from' is not a valid phone number");
        const auto body = (*j)["body"].get<std::string>();
        if (!is_valid_sms_body(body)) return fail(res, 400, "'body' must be 1-160 printable ASCII characters");
        try {
            const auto id = session_.send_sms(*from, body);
            reply(res, 200, ordered_json{{"accepted", true}, {"message_id", id}});
        } catch (const InvalidMessage& e) {
            fail(res, 400, e.what());
        }
    });

    srv.Get("/api/phone/:number/inbox", [this](const httplib::Request& req, httplib::Response& res) {
        auto number = PhoneNumber::try_parse(req.path_params.at("number"));
        if (!number) return fail(res, 400, "not a valid phone number");
        auto since = cursor_param(req, "since", res);
        if (!since) return;
        auto page = session_.inbox(*number, *since);
        if (!page) return fail(res, 404, "number has never exchanged messages with the device");
        ordered_json msgs = ordered_json::array();
        for (const auto& m : page->messages) msgs.push_back(to_json(m));
        reply(res, 200, ordered_json{{"messages", msgs}, {"next", page->next}});
    });

    srv.Get("/api/device/state", [this](const httplib::Request&, httplib::Response& res) {
        reply(res, 200, to_json(session_.snapshot()));
    });

    srv.Post("/api/sim/advance", [this](const httplib::Request& req, httplib::Response& res) {
        auto j = body_json(req, res);
        if (!j) return;
        auto seconds = number_field(*j, "seconds", res);
        if (!seconds) return;
        if (*seconds < 0 || *seconds > 366.0 * 86400.0) return fail(res, 400, "'seconds' must be in [0, 31622400]");
        const auto now = session_.advance(Duration(std::llround(*seconds * 1000.0)));
        reply(res, 200, ordered_json{{"sim_now_ms", now.count()}});
    });

    srv.Post("/api/sim/realtime", [this](const httplib::Request& req, httplib::Response& res) {
        auto j = body_json(req, res);
        if (!j) return;
        auto rate = number_field(*j, "rate", res);
        if (!rate) return;
        try {
            session_.set_realtime_rate(*rate);
        } catch (const std::invalid_argument& e) {
            return fail(res, 400, e.what());
        }
        reply(res, 200, ordered_json{{"rate", *rate}});
    });

    srv.Post("/api/device/refill", [this](const httplib::Request& req, httplib::Response& res) {
        auto j = body_json(req, res);
        if (!j) return;
        auto grams = number_field(*j, "grams", res);
        if (!grams) return;
        if (!(*grams > 0)) return fail(res, 400, "'grams' must be positive");
        const double added = session_.refill(*grams);
        reply(res, 200, ordered_json{{"added_g", added}, {"hopper_g", session_.snapshot().hopper_g}});
    });

    srv.Get("/api/events", [this](const httplib::Request& req, httplib::Response& res) {
        auto since = cursor_param(req, "since", res);
        if (!since) return;
        std::size_t limit = 1000;
        if (req.has_param("limit")) {
            auto l = cursor_param(req, "limit", res);
            if (!l) return;
            limit = static_cast<std::size_t>(std::clamp<std::uint64_t>(*l, 1, 10000));
        }
        const auto events = session_.events_since(*since, limit);
        ordered_json arr = ordered_json::array();
        for (const auto& e : events) arr.push_back(to_json(e));
        const std::uint64_t next = events.empty() ? *since : events.back().seq + 1;
        reply(res, 200, ordered_json{{"events", arr}, {"next", next}});
    });

    // Server-sent events. Each trace record is one message whose id is its
    // sequence number; a client resumes with ?since=N or Last-Event-ID.
    srv.Get("/api/events/stream", [this](const httplib::Request& req, httplib::Response& res) {
        auto since = cursor_param(req, "since", res);
        if (!since) return;
        std::uint64_t cursor = *since;
        if (req.has_header("Last-Event-ID")) {
            const auto& raw = req.get_header_value("Last-Event-ID");
            std::uint64_t last = 0;
            auto [end, ec] = std::from_chars(raw.data(), raw.data() + raw.size(), last);
            if (ec == std::errc{} && end == raw.data() + raw.size()) cursor = last + 1;
        }
        res.set_header("Cache-Control", "no-cache");
        res.set_chunked_content_provider(
            "text/event-stream", [this, cursor](std::size_t, httplib::DataSink& sink) mutable {
                if (session_.stopping() || !server_->is_running()) return false;
                if (!session_.wait_for_events(cursor, std::chrono::milliseconds(250))) {
                    const std::string ping = ": keep-alive\n\n";
                    return sink.write(ping.data(), ping.size());
                }
                for (const auto& e : session_.events_since(cursor, 500)) {
                    std::string msg = "id: " + std::to_string(e.seq) + "\nevent: trace\ndata: " + sim::to_ndjson(e) + "\n\n";
                    if (!sink.write(msg.data(), msg.size())) return false;
                    cursor = e.seq + 1;
                }
                return true;
            });
    });
}

}  // namespace feeder::gateway
