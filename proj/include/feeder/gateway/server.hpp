#pragma once

#include <memory>
#include <string>

#include "feeder/gateway/session.hpp"
#include "json.hpp"

namespace httplib {
class Server;
}

namespace feeder::gateway {

nlohmann::ordered_json to_json(const Snapshot& snapshot);
nlohmann::ordered_json to_json(const sim::TraceRecord& record);
nlohmann::ordered_json to_json(const sim::InboxEntry& entry);

/// HTTP + JSON front end for a SimSession. CORS is open to any origin.
class GatewayServer {
public:
    explicit GatewayServer(SimSession& session);
    ~GatewayServer();

    /// Binds to an ephemeral port and returns it, or -1.
    int bind_any_port(const std::string& host = "127.0.0.1");
    bool bind(const std::string& host, int port);
    /// Serves until stop(). Call after a successful bind.
    bool listen_after_bind();
    void stop();
    bool running() const;

private:
    void routes();

    SimSession& session_;
    std::unique_ptr<httplib::Server> server_;
};

}  // namespace feeder::gateway
