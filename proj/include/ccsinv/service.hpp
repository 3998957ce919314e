#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <string_view>

namespace ccsinv {

struct ApiResponse {
    int status = 200;
    std::string body;
    std::string content_type = "application/json";
};

inline constexpr std::uint64_t kDefaultServiceBudget = 10'000'000;

// Stateless JSON handlers behind the HTTP routes. Each takes the raw request
// body and never throws; failures become 400 (bad input) or 500 responses.
ApiResponse handle_invert(std::string_view body);
ApiResponse handle_diagnose(std::string_view body);
ApiResponse handle_parse(std::string_view body);
ApiResponse handle_eval(std::string_view body, std::uint64_t budget_cap = kDefaultServiceBudget);
ApiResponse handle_latex(std::string_view body);
ApiResponse handle_examples();
ApiResponse handle_example(std::string_view name);

/// Column label used for an inverted system in comparison tables.
std::string column_label(std::string_view inverter);

struct ServiceOptions {
    std::string host = "127.0.0.1";
    std::uint64_t budget_cap = kDefaultServiceBudget;
    std::string static_dir;  // built web UI; empty serves a placeholder page
};

/// HTTP facade. Routes:
///   POST /api/invert  /api/diagnose  /api/parse  /api/eval  /api/latex
///   GET  /api/examples  /api/examples/{name}
class Server {
public:
    explicit Server(ServiceOptions options = {});
    ~Server();
    Server(const Server&) = delete;
    Server& operator=(const Server&) = delete;

    /// Blocks until stop().
    bool listen(int port);
    /// Binds an ephemeral port and returns it (or -1).
    int bind_any_port();
    /// Blocks serving on the port bound by bind_any_port().
    bool listen_after_bind();
    void stop();
    void wait_until_ready() const;

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

}  // namespace ccsinv
