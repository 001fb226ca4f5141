#pragma once

#include "gterms/pipeline.hpp"
#include "gterms/themes.hpp"

#include <filesystem>
#include <memory>
#include <string>

namespace httplib {
class Server;
}

namespace gterms::server {

struct ServerOptions {
    std::string host = "127.0.0.1";
    int port = 8080;                      // 0 binds any free port
    std::string cors_origin;              // empty disables CORS headers
    std::filesystem::path ledger_path;    // default <run>/themes.json
    std::filesystem::path static_dir;     // optional UI build to serve at /
};

// JSON API over a finished run. Reads never mutate; theme writes go through
// the ledger store, which serializes them.
class ApiServer {
public:
    ApiServer(std::shared_ptr<const pipeline::LoadedRun> run, ServerOptions options);
    ~ApiServer();

    ApiServer(const ApiServer&) = delete;
    ApiServer& operator=(const ApiServer&) = delete;

    // Binds and returns the bound port; throws IoError on failure.
    int bind();
    // Blocks until stop().
    void listen();
    void stop();
    bool running() const;

    themes::LedgerStore& ledger() { return *ledger_; }

private:
    void routes();

    std::shared_ptr<const pipeline::LoadedRun> run_;
    ServerOptions options_;
    std::unique_ptr<themes::LedgerStore> ledger_;
    std::unique_ptr<httplib::Server> http_;
};

}  // namespace gterms::server
