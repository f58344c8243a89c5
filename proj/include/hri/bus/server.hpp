#pragma once

#include <atomic>
#include <chrono>
#include <cstdint>
#include <list>
#include <memory>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "hri/bus/hub.hpp"

namespace hri::bus {

class StartupError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct ServerConfig {
  std::string host = "127.0.0.1";
  std::uint16_t port = 8765;  // 0 picks a free port
  std::string static_dir;     // console assets; empty disables static serving
};

/// TCP endpoint for the hub. A connection speaks the line protocol directly,
/// or starts with an HTTP GET that either upgrades to WebSocket (one message
/// per text frame) or fetches a static file.
class Server {
 public:
  Server(Hub& hub, ServerConfig config);
  ~Server();
  Server(const Server&) = delete;
  Server& operator=(const Server&) = delete;

  /// Binds and starts accepting. Throws StartupError when the port is busy.
  void start();
  void stop();
  std::uint16_t port() const { return port_; }
  std::size_t session_count() const;

 private:
  struct Session;
  void accept_loop();
  void run_session(Session& session);
  void reap();

  Hub& hub_;
  ServerConfig config_;
  int listen_fd_ = -1;
  std::uint16_t port_ = 0;
  std::atomic<bool> running_{false};
  std::thread acceptor_;
  mutable std::mutex mu_;
  std::list<std::unique_ptr<Session>> sessions_;
  std::mutex reply_mu_;
  Producer replies_{"bus"};
};

/// Blocking client for the line or WebSocket transport.
class Client {
 public:
  enum class Transport { line, websocket };

  /// Throws std::runtime_error when the connection or upgrade fails.
  Client(const std::string& host, std::uint16_t port, Transport transport = Transport::line,
         std::string source = "client");
  ~Client();
  Client(const Client&) = delete;
  Client& operator=(const Client&) = delete;

  void send(const BusMessage& message);
  /// Stamps the payload with this client's source and next seq.
  void publish(Payload payload, double timestamp);
  /// Sends raw bytes as one message; lets tests inject malformed input.
  void send_raw(const std::string& text);
  /// Subscribes and waits for the server's acknowledgement.
  void subscribe(const std::vector<Channel>& channels,
                 std::chrono::milliseconds timeout = std::chrono::milliseconds(2000));

  std::optional<std::string> receive_line(std::chrono::milliseconds timeout);
  std::optional<BusMessage> receive(std::chrono::milliseconds timeout);
  void close();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
  Producer producer_;
};

/// HTTP GET helper for static-serving tests: returns status code and body.
std::pair<int, std::string> http_get(const std::string& host, std::uint16_t port, const std::string& path);

}  // namespace hri::bus
