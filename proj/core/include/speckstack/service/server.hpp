#pragma once

#include <cstddef>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>

#include "speckstack/quantize.hpp"
#include "speckstack/service/session.hpp"

namespace speckstack::service {

struct ServiceOptions {
    /// Applied to F64 uploads; PGM uploads keep their own levels.
    QuantizerSpec quantizer;
    int workers = 1;
    /// Session dumps go here after each mutation and are reloaded at start.
    std::optional<std::filesystem::path> persist_dir;
    std::size_t max_body_bytes = std::size_t{256} << 20;
};

/// HTTP front end of the ROI-training workflow. Every route delegates the
/// numerics to the core library; responses are JSON, PNG or PGM and errors
/// are application/problem+json documents.
class Server {
  public:
    explicit Server(ServiceOptions options = {});
    ~Server();
    Server(const Server&) = delete;
    Server& operator=(const Server&) = delete;

    /// Binds an ephemeral port and returns it.
    int bind_to_any_port(const std::string& host);
    bool bind(const std::string& host, int port);
    /// Serves until stop(); call after a successful bind.
    bool listen_after_bind();
    void stop();
    void wait_until_ready() const;

    SessionStore& sessions();

  private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

}  // namespace speckstack::service
