#include <arpa/inet.h>
#include <netdb.h>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <poll.h>
#include <sys/socket.h>
#include <unistd.h>

#include <openssl/evp.h>
#include <openssl/sha.h>

#include <algorithm>
#include <cctype>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <map>
#include <random>
#include <sstream>

#include "hri/bus/server.hpp"

namespace hri::bus {

namespace {

constexpr std::size_t kMaxLine = 1 << 20;
constexpr std::uint64_t kMaxFrame = 1 << 20;

bool send_all(int fd, std::string_view data) {
  while (!data.empty()) {
    const ssize_t n = ::send(fd, data.data(), data.size(), MSG_NOSIGNAL);
    if (n <= 0) {
      if (n < 0 && errno == EINTR) continue;
      return false;
    }
    data.remove_prefix(static_cast<std::size_t>(n));
  }
  return true;
}

/// Buffered reader over a socket.
class Stream {
 public:
  explicit Stream(int fd) : fd_(fd) {}

  /// Waits up to `timeout` for data; negative waits forever. False on
  /// timeout, EOF or error.
  bool fill(int timeout_ms) {
    pollfd p{fd_, POLLIN, 0};
    const int r = ::poll(&p, 1, timeout_ms);
    if (r <= 0) {
      timed_out_ = r == 0;
      return false;
    }
    char buf[8192];
    const ssize_t n = ::recv(fd_, buf, sizeof buf, 0);
    if (n <= 0) {
      eof_ = true;
      return false;
    }
    buffer_.append(buf, static_cast<std::size_t>(n));
    return true;
  }

  /// Line without its terminator; nullopt on EOF, timeout or oversize.
  std::optional<std::string> read_line(int timeout_ms = -1) {
    for (;;) {
      const auto pos = buffer_.find('\n');
      if (pos != std::string::npos) {
        std::string line = buffer_.substr(0, pos);
        buffer_.erase(0, pos + 1);
        if (!line.empty() && line.back() == '\r') line.pop_back();
        return line;
      }
      if (buffer_.size() > kMaxLine) return std::nullopt;
      if (!fill(timeout_ms)) return std::nullopt;
    }
  }

  std::optional<std::string> read_exact(std::size_t n, int timeout_ms = -1) {
    while (buffer_.size() < n) {
      if (!fill(timeout_ms)) return std::nullopt;
    }
    std::string out = buffer_.substr(0, n);
    buffer_.erase(0, n);
    return out;
  }

  std::string_view peek() const { return buffer_; }
  bool eof() const { return eof_; }
  bool timed_out() const { return timed_out_; }

 private:
  int fd_;
  std::string buffer_;
  bool eof_ = false;
  bool timed_out_ = false;
};

std::string base64(const unsigned char* data, std::size_t n) {
  std::string out(4 * ((n + 2) / 3), '\0');
  const int len = EVP_EncodeBlock(reinterpret_cast<unsigned char*>(out.data()), data, static_cast<int>(n));
  out.resize(static_cast<std::size_t>(len));
  return out;
}

std::string websocket_accept(const std::string& key) {
  const std::string joined = key + "258EAFA5-E914-47DA-95CA-C5AB0DC85B11";
  unsigned char digest[SHA_DIGEST_LENGTH];
  SHA1(reinterpret_cast<const unsigned char*>(joined.data()), joined.size(), digest);
  return base64(digest, sizeof digest);
}

enum class Opcode : std::uint8_t { continuation = 0, text = 1, binary = 2, close = 8, ping = 9, pong = 10 };

std::string encode_frame(std::string_view payload, Opcode opcode, bool mask) {
  std::string out;
  out.push_back(static_cast<char>(0x80 | static_cast<std::uint8_t>(opcode)));
  const std::uint8_t mask_bit = mask ? 0x80 : 0x00;
  const std::uint64_t n = payload.size();
  if (n < 126) {
    out.push_back(static_cast<char>(mask_bit | n));
  } else if (n <= 0xFFFF) {
    out.push_back(static_cast<char>(mask_bit | 126));
    out.push_back(static_cast<char>((n >> 8) & 0xFF));
    out.push_back(static_cast<char>(n & 0xFF));
  } else {
    out.push_back(static_cast<char>(mask_bit | 127));
    for (int shift = 56; shift >= 0; shift -= 8) out.push_back(static_cast<char>((n >> shift) & 0xFF));
  }
  if (!mask) {
    out.append(payload);
    return out;
  }
  static thread_local std::mt19937 rng{std::random_device{}()};
  std::uint8_t key[4];
  for (auto& k : key) k = static_cast<std::uint8_t>(rng());
  out.append(reinterpret_cast<const char*>(key), 4);
  for (std::size_t i = 0; i < payload.size(); ++i) {
    out.push_back(static_cast<char>(static_cast<std::uint8_t>(payload[i]) ^ key[i % 4]));
  }
  return out;
}

struct Frame {
  Opcode opcode = Opcode::text;
  bool fin = true;
  std::string payload;
};

std::optional<Frame> read_frame(Stream& in, int timeout_ms = -1) {
  auto head = in.read_exact(2, timeout_ms);
  if (!head) return std::nullopt;
  Frame f;
  const auto b0 = static_cast<std::uint8_t>((*head)[0]);
  const auto b1 = static_cast<std::uint8_t>((*head)[1]);
  f.fin = (b0 & 0x80) != 0;
  f.opcode = static_cast<Opcode>(b0 & 0x0F);
  const bool masked = (b1 & 0x80) != 0;
  std::uint64_t n = b1 & 0x7F;
  if (n == 126 || n == 127) {
    const std::size_t width = n == 126 ? 2 : 8;
    auto ext = in.read_exact(width, timeout_ms);
    if (!ext) return std::nullopt;
    n = 0;
    for (char c : *ext) n = (n << 8) | static_cast<std::uint8_t>(c);
  }
  if (n > kMaxFrame) return std::nullopt;
  std::string key;
  if (masked) {
    auto k = in.read_exact(4, timeout_ms);
    if (!k) return std::nullopt;
    key = *k;
  }
  auto body = in.read_exact(static_cast<std::size_t>(n), timeout_ms);
  if (!body) return std::nullopt;
  f.payload = std::move(*body);
  if (masked) {
    for (std::size_t i = 0; i < f.payload.size(); ++i) f.payload[i] = static_cast<char>(f.payload[i] ^ key[i % 4]);
  }
  return f;
}

/// Whole text messages from a WebSocket, answering pings and reassembling
/// fragments. Nullopt once the peer closes.
std::optional<std::string> read_ws_message(Stream& in, int fd, bool mask_replies, int timeout_ms = -1) {
  std::string message;
  for (;;) {
    auto frame = read_frame(in, timeout_ms);
    if (!frame) return std::nullopt;
    switch (frame->opcode) {
      case Opcode::ping:
        send_all(fd, encode_frame(frame->payload, Opcode::pong, mask_replies));
        continue;
      case Opcode::pong:
        continue;
      case Opcode::close:
        send_all(fd, encode_frame("", Opcode::close, mask_replies));
        return std::nullopt;
      default:
        message += frame->payload;
        if (frame->fin) return message;
    }
  }
}

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
  return s;
}

std::string trim(std::string s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.pop_back();
  std::size_t i = 0;
  while (i < s.size() && std::isspace(static_cast<unsigned char>(s[i]))) ++i;
  return s.substr(i);
}

std::string content_type(const std::filesystem::path& p) {
  static const std::map<std::string, std::string> types{
      {".html", "text/html; charset=utf-8"}, {".js", "text/javascript"},  {".css", "text/css"},
      {".json", "application/json"},         {".svg", "image/svg+xml"},   {".png", "image/png"},
      {".map", "application/json"},          {".ico", "image/x-icon"},
  };
  auto it = types.find(p.extension().string());
  return it == types.end() ? "application/octet-stream" : it->second;
}

std::string http_response(int status, std::string_view reason, std::string_view type, std::string_view body) {
  std::ostringstream out;
  out << "HTTP/1.1 " << status << ' ' << reason << "\r\n"
      << "Content-Type: " << type << "\r\n"
      << "Content-Length: " << body.size() << "\r\n"
      << "Connection: close\r\n\r\n"
      << body;
  return out.str();
}

/// Resolves a request path inside root; nullopt for escapes and misses.
std::optional<std::filesystem::path> resolve_static(const std::string& root, std::string target) {
  if (root.empty()) return std::nullopt;
  target = target.substr(0, target.find_first_of("?#"));
  if (target.empty() || target.front() != '/') return std::nullopt;
  if (target.back() == '/') target += "index.html";
  const std::filesystem::path rel = std::filesystem::path(target.substr(1)).lexically_normal();
  if (rel.empty() || rel.is_absolute() || *rel.begin() == "..") return std::nullopt;
  std::error_code ec;
  const auto full = std::filesystem::path(root) / rel;
  if (!std::filesystem::is_regular_file(full, ec)) return std::nullopt;
  return full;
}

int connect_to(const std::string& host, std::uint16_t port) {
  addrinfo hints{};
  hints.ai_family = AF_INET;
  hints.ai_socktype = SOCK_STREAM;
  addrinfo* res = nullptr;
  if (::getaddrinfo(host.c_str(), std::to_string(port).c_str(), &hints, &res) != 0 || !res) {
    throw std::runtime_error("cannot resolve " + host);
  }
  const int fd = ::socket(res->ai_family, res->ai_socktype, res->ai_protocol);
  const int rc = fd < 0 ? -1 : ::connect(fd, res->ai_addr, res->ai_addrlen);
  ::freeaddrinfo(res);
  if (rc != 0) {
    if (fd >= 0) ::close(fd);
    throw std::runtime_error("cannot connect to " + host + ":" + std::to_string(port));
  }
  const int one = 1;
  ::setsockopt(fd, IPPROTO_TCP, TCP_NODELAY, &one, sizeof one);
  return fd;
}

}  // namespace

// ---------------------------------------------------------------------------
// Server

struct Server::Session {
  int fd = -1;
  std::thread thread;
  std::atomic<bool> done{false};
};

Server::Server(Hub& hub, ServerConfig config) : hub_(hub), config_(std::move(config)) {}

Server::~Server() { stop(); }

void Server::start() {
  if (running_) return;
  listen_fd_ = ::socket(AF_INET, SOCK_STREAM, 0);
  if (listen_fd_ < 0) throw StartupError("cannot create socket");
  const int one = 1;
  ::setsockopt(listen_fd_, SOL_SOCKET, SO_REUSEADDR, &one, sizeof one);
  sockaddr_in addr{};
  addr.sin_family = AF_INET;
  addr.sin_port = htons(config_.port);
  if (::inet_pton(AF_INET, config_.host.c_str(), &addr.sin_addr) != 1) {
    ::close(listen_fd_);
    listen_fd_ = -1;
    throw StartupError("invalid bind address " + config_.host);
  }
  if (::bind(listen_fd_, reinterpret_cast<sockaddr*>(&addr), sizeof addr) != 0 || ::listen(listen_fd_, 64) != 0) {
    const std::string why = std::strerror(errno);
    ::close(listen_fd_);
    listen_fd_ = -1;
    throw StartupError("port " + std::to_string(config_.port) + " busy: " + why);
  }
  socklen_t len = sizeof addr;
  ::getsockname(listen_fd_, reinterpret_cast<sockaddr*>(&addr), &len);
  port_ = ntohs(addr.sin_port);
  running_ = true;
  acceptor_ = std::thread([this] { accept_loop(); });
}

void Server::stop() {
  if (!running_.exchange(false)) return;
  if (acceptor_.joinable()) acceptor_.join();
  ::close(listen_fd_);
  listen_fd_ = -1;
  std::list<std::unique_ptr<Session>> sessions;
  {
    std::lock_guard lock(mu_);
    for (auto& s : sessions_) ::shutdown(s->fd, SHUT_RDWR);
    sessions.swap(sessions_);
  }
  for (auto& s : sessions) {
    if (s->thread.joinable()) s->thread.join();
  }
}

std::size_t Server::session_count() const {
  std::lock_guard lock(mu_);
  return static_cast<std::size_t>(
      std::count_if(sessions_.begin(), sessions_.end(), [](const auto& s) { return !s->done; }));
}

void Server::reap() {
  std::list<std::unique_ptr<Session>> finished;
  {
    std::lock_guard lock(mu_);
    for (auto it = sessions_.begin(); it != sessions_.end();) {
      if ((*it)->done) {
        finished.push_back(std::move(*it));
        it = sessions_.erase(it);
      } else {
        ++it;
      }
    }
  }
  for (auto& s : finished) s->thread.join();
}

void Server::accept_loop() {
  while (running_) {
    pollfd p{listen_fd_, POLLIN, 0};
    if (::poll(&p, 1, 50) <= 0) {
      reap();
      continue;
    }
    const int fd = ::accept(listen_fd_, nullptr, nullptr);
    if (fd < 0) continue;
    const int one = 1;
    ::setsockopt(fd, IPPROTO_TCP, TCP_NODELAY, &one, sizeof one);
    auto session = std::make_unique<Session>();
    session->fd = fd;
    Session* raw = session.get();
    {
      std::lock_guard lock(mu_);
      sessions_.push_back(std::move(session));
    }
    raw->thread = std::thread([this, raw] {
      run_session(*raw);
      ::close(raw->fd);
      raw->done = true;
    });
    reap();
  }
}

void Server::run_session(Session& session) {
  const int fd = session.fd;
  Stream in(fd);
  bool websocket = false;

  // Protocol sniffing: an HTTP request line means upgrade or static fetch.
  std::optional<std::string> first;
  while (in.peek().size() < 4 && in.peek().find('\n') == std::string_view::npos) {
    if (!in.fill(-1)) return;
  }
  if (in.peek().starts_with("GET ")) {
    auto request = in.read_line();
    if (!request) return;
    std::map<std::string, std::string> headers;
    for (;;) {
      auto h = in.read_line();
      if (!h) return;
      if (h->empty()) break;
      const auto colon = h->find(':');
      if (colon != std::string::npos) headers[lower(trim(h->substr(0, colon)))] = trim(h->substr(colon + 1));
    }
    std::istringstream rl(*request);
    std::string method, target;
    rl >> method >> target;
    if (lower(headers["upgrade"]) == "websocket" && headers.contains("sec-websocket-key")) {
      const std::string reply =
          "HTTP/1.1 101 Switching Protocols\r\nUpgrade: websocket\r\nConnection: Upgrade\r\n"
          "Sec-WebSocket-Accept: " +
          websocket_accept(headers["sec-websocket-key"]) + "\r\n\r\n";
      if (!send_all(fd, reply)) return;
      websocket = true;
    } else {
      auto file = resolve_static(config_.static_dir, target);
      if (!file) {
        send_all(fd, http_response(404, "Not Found", "text/plain", "not found\n"));
        return;
      }
      std::ifstream f(*file, std::ios::binary);
      std::ostringstream body;
      body << f.rdbuf();
      send_all(fd, http_response(200, "OK", content_type(*file), body.str()));
      return;
    }
  }

  auto sub = hub_.attach("session");
  auto reply = [&](std::string op, std::vector<Channel> channels, std::string text) {
    std::lock_guard lock(reply_mu_);
    BusMessage m = replies_.make(SessionPayload{std::move(op), std::move(channels), std::move(text)}, 0.0);
    sub->push_direct(std::make_shared<const Delivery>(Delivery{m, encode_message(m)}));
  };

  std::thread writer([&] {
    for (;;) {
      auto d = sub->pop(std::chrono::milliseconds(100));
      if (!d) {
        if (sub->closed()) break;
        continue;
      }
      const std::string& line = (*d)->line;
      const bool ok = websocket ? send_all(fd, encode_frame(std::string_view(line).substr(0, line.size() - 1),
                                                            Opcode::text, false))
                                : send_all(fd, line);
      if (!ok) break;
    }
    // Overflow or a dead peer ends the whole session.
    ::shutdown(fd, SHUT_RDWR);
  });

  auto handle = [&](const std::string& text) {
    BusMessage m;
    try {
      m = decode_message(text);
    } catch (const DecodeError& e) {
      reply("error", {}, e.what());
      return;
    }
    if (const auto* s = std::get_if<SessionPayload>(&m.payload)) {
      if (s->op == "subscribe") {
        sub->subscribe(s->channels);
        reply("subscribe", sub->channels(), "");
        return;
      }
      if (s->op == "unsubscribe") {
        sub->unsubscribe(s->channels);
        reply("unsubscribe", sub->channels(), "");
        return;
      }
      if (s->op == "hello") return;
    }
    if (auto warning = hub_.publish(m)) reply("warning", {}, *warning);
  };

  for (;;) {
    std::optional<std::string> text = websocket ? read_ws_message(in, fd, false) : in.read_line();
    if (!text) break;
    if (websocket) {
      std::istringstream lines(*text);
      std::string line;
      while (std::getline(lines, line)) {
        if (!line.empty()) handle(line);
      }
    } else if (!text->empty()) {
      handle(*text);
    }
  }
  sub->close("disconnected");
  writer.join();
  hub_.detach(sub);
}

// ---------------------------------------------------------------------------
// Client

struct Client::Impl {
  int fd = -1;
  Transport transport = Transport::line;
  std::unique_ptr<Stream> in;
  std::mutex send_mu;
};

Client::Client(const std::string& host, std::uint16_t port, Transport transport, std::string source)
    : impl_(std::make_unique<Impl>()), producer_(std::move(source)) {
  impl_->fd = connect_to(host, port);
  impl_->transport = transport;
  impl_->in = std::make_unique<Stream>(impl_->fd);
  if (transport == Transport::websocket) {
    const std::string key = "dGhlIHNhbXBsZSBub25jZQ==";
    const std::string request = "GET /bus HTTP/1.1\r\nHost: " + host +
                                "\r\nUpgrade: websocket\r\nConnection: Upgrade\r\n"
                                "Sec-WebSocket-Key: " +
                                key + "\r\nSec-WebSocket-Version: 13\r\n\r\n";
    send_all(impl_->fd, request);
    auto status = impl_->in->read_line(5000);
    if (!status || status->find(" 101 ") == std::string::npos) {
      close();
      throw std::runtime_error("websocket upgrade refused");
    }
    bool accepted = false;
    for (;;) {
      auto h = impl_->in->read_line(5000);
      if (!h) break;
      if (h->empty()) break;
      const auto colon = h->find(':');
      if (colon != std::string::npos && lower(trim(h->substr(0, colon))) == "sec-websocket-accept") {
        accepted = trim(h->substr(colon + 1)) == websocket_accept(key);
      }
    }
    if (!accepted) {
      close();
      throw std::runtime_error("websocket accept key mismatch");
    }
  }
}

Client::~Client() { close(); }

void Client::send_raw(const std::string& text) {
  std::lock_guard lock(impl_->send_mu);
  if (impl_->fd < 0) throw std::runtime_error("client closed");
  bool ok;
  if (impl_->transport == Transport::websocket) {
    std::string_view body = text;
    if (!body.empty() && body.back() == '\n') body.remove_suffix(1);
    ok = send_all(impl_->fd, encode_frame(body, Opcode::text, true));
  } else {
    ok = send_all(impl_->fd, text.ends_with('\n') ? text : text + "\n");
  }
  if (!ok) throw std::runtime_error("send failed");
}

void Client::send(const BusMessage& message) { send_raw(encode_message(message)); }

void Client::publish(Payload payload, double timestamp) { send(producer_.make(std::move(payload), timestamp)); }

void Client::subscribe(const std::vector<Channel>& channels, std::chrono::milliseconds timeout) {
  publish(SessionPayload{"subscribe", channels, ""}, 0.0);
  const auto deadline = std::chrono::steady_clock::now() + timeout;
  while (std::chrono::steady_clock::now() < deadline) {
    auto left = std::chrono::duration_cast<std::chrono::milliseconds>(deadline - std::chrono::steady_clock::now());
    auto m = receive(left);
    if (!m) break;
    if (const auto* s = std::get_if<SessionPayload>(&m->payload); s && s->op == "subscribe") return;
  }
  throw std::runtime_error("subscription not acknowledged");
}

std::optional<std::string> Client::receive_line(std::chrono::milliseconds timeout) {
  if (impl_->fd < 0) return std::nullopt;
  const int ms = static_cast<int>(timeout.count());
  if (impl_->transport == Transport::websocket) return read_ws_message(*impl_->in, impl_->fd, true, ms);
  return impl_->in->read_line(ms);
}

std::optional<BusMessage> Client::receive(std::chrono::milliseconds timeout) {
  auto line = receive_line(timeout);
  if (!line) return std::nullopt;
  return decode_message(*line);
}

void Client::close() {
  if (!impl_ || impl_->fd < 0) return;
  ::shutdown(impl_->fd, SHUT_RDWR);
  ::close(impl_->fd);
  impl_->fd = -1;
}

std::pair<int, std::string> http_get(const std::string& host, std::uint16_t port, const std::string& path) {
  const int fd = connect_to(host, port);
  send_all(fd, "GET " + path + " HTTP/1.1\r\nHost: " + host + "\r\nConnection: close\r\n\r\n");
  std::string response;
  char buf[4096];
  for (;;) {
    const ssize_t n = ::recv(fd, buf, sizeof buf, 0);
    if (n <= 0) break;
    response.append(buf, static_cast<std::size_t>(n));
  }
  ::close(fd);
  int status = 0;
  std::istringstream(response.substr(response.find(' ') + 1)) >> status;
  const auto body = response.find("\r\n\r\n");
  return {status, body == std::string::npos ? std::string() : response.substr(body + 4)};
}

}  // namespace hri::bus
