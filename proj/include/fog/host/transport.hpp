#pragma once

// Byte transports between the host and a device: an in-process channel and
// a localhost TCP link carrying the identical byte stream.

#include <arpa/inet.h>
#include <netdb.h>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <poll.h>
#include <sys/socket.h>
#include <unistd.h>

#include <algorithm>
#include <atomic>
#include <cerrno>
#include <chrono>
#include <cstdint>
#include <cstring>
#include <deque>
#include <functional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "fog/error.hpp"
#include "fog/micro/device.hpp"

namespace fog::host {

using Millis = std::chrono::milliseconds;
inline constexpr Millis kDefaultTimeout{5000};

class Transport {
 public:
  virtual ~Transport() = default;
  virtual void send(std::span<const std::uint8_t> bytes) = 0;
  // Exactly n bytes. TransportTimeout if nothing arrives in time, ShortReply
  // if only part of the reply arrives.
  virtual std::vector<std::uint8_t> receive(std::size_t n, Millis timeout = kDefaultTimeout) = 0;
};

// Drives a Device directly. Construction resets the device, so the ready
// byte is the first thing available to receive().
class InProcessTransport : public Transport {
 public:
  explicit InProcessTransport(micro::Device& device) : device_(device) {
    const auto ready = device_.reset();
    rx_.assign(ready.begin(), ready.end());
  }

  void send(std::span<const std::uint8_t> bytes) override {
    for (auto b : bytes) {
      const auto out = device_.push_byte(b);
      rx_.insert(rx_.end(), out.begin(), out.end());
    }
  }

  std::vector<std::uint8_t> receive(std::size_t n, Millis = kDefaultTimeout) override {
    if (rx_.empty() && n > 0) throw Error(Errc::TransportTimeout, "device sent nothing");
    if (rx_.size() < n) {
      throw Error(Errc::ShortReply, "expected " + std::to_string(n) + " bytes, got " +
                                        std::to_string(rx_.size()));
    }
    std::vector<std::uint8_t> out(rx_.begin(), rx_.begin() + static_cast<std::ptrdiff_t>(n));
    rx_.erase(rx_.begin(), rx_.begin() + static_cast<std::ptrdiff_t>(n));
    return out;
  }

  std::size_t pending() const { return rx_.size(); }

 private:
  micro::Device& device_;
  std::deque<std::uint8_t> rx_;
};

namespace detail {

class Fd {
 public:
  Fd() = default;
  explicit Fd(int fd) : fd_(fd) {}
  Fd(const Fd&) = delete;
  Fd& operator=(const Fd&) = delete;
  Fd(Fd&& o) noexcept : fd_(std::exchange(o.fd_, -1)) {}
  Fd& operator=(Fd&& o) noexcept {
    if (this != &o) {
      close();
      fd_ = std::exchange(o.fd_, -1);
    }
    return *this;
  }
  ~Fd() { close(); }

  int get() const { return fd_; }
  explicit operator bool() const { return fd_ >= 0; }
  void close() {
    if (fd_ >= 0) ::close(fd_);
    fd_ = -1;
  }

 private:
  int fd_ = -1;
};

inline void send_all(int fd, std::span<const std::uint8_t> bytes) {
  std::size_t sent = 0;
  while (sent < bytes.size()) {
    const auto n = ::send(fd, bytes.data() + sent, bytes.size() - sent, MSG_NOSIGNAL);
    if (n < 0) {
      if (errno == EINTR) continue;
      throw Error(Errc::Io, std::string("send: ") + std::strerror(errno));
    }
    sent += static_cast<std::size_t>(n);
  }
}

inline std::string errno_text(const char* what) { return std::string(what) + ": " + std::strerror(errno); }

}  // namespace detail

class TcpTransport : public Transport {
 public:
  TcpTransport(const std::string& host, std::uint16_t port) {
    addrinfo hints{};
    hints.ai_family = AF_UNSPEC;
    hints.ai_socktype = SOCK_STREAM;
    addrinfo* res = nullptr;
    const auto service = std::to_string(port);
    if (const int rc = ::getaddrinfo(host.c_str(), service.c_str(), &hints, &res); rc != 0) {
      throw Error(Errc::Io, "resolve " + host + ": " + ::gai_strerror(rc));
    }
    std::string last_error = "no address";
    for (auto* ai = res; ai; ai = ai->ai_next) {
      detail::Fd fd(::socket(ai->ai_family, ai->ai_socktype, ai->ai_protocol));
      if (!fd) continue;
      if (::connect(fd.get(), ai->ai_addr, ai->ai_addrlen) == 0) {
        int one = 1;
        ::setsockopt(fd.get(), IPPROTO_TCP, TCP_NODELAY, &one, sizeof(one));
        fd_ = std::move(fd);
        break;
      }
      last_error = detail::errno_text("connect");
    }
    ::freeaddrinfo(res);
    if (!fd_) throw Error(Errc::Io, host + ":" + service + ": " + last_error);
  }

  void send(std::span<const std::uint8_t> bytes) override { detail::send_all(fd_.get(), bytes); }

  std::vector<std::uint8_t> receive(std::size_t n, Millis timeout = kDefaultTimeout) override {
    std::vector<std::uint8_t> out;
    out.reserve(n);
    const auto deadline = std::chrono::steady_clock::now() + timeout;
    while (out.size() < n) {
      const auto left = std::chrono::duration_cast<Millis>(deadline - std::chrono::steady_clock::now());
      pollfd p{fd_.get(), POLLIN, 0};
      const int rc = left.count() > 0 ? ::poll(&p, 1, static_cast<int>(left.count())) : 0;
      if (rc < 0 && errno == EINTR) continue;
      if (rc < 0) throw Error(Errc::Io, detail::errno_text("poll"));
      if (rc == 0) {
        if (out.empty()) throw Error(Errc::TransportTimeout, "no reply within " + std::to_string(timeout.count()) + " ms");
        throw Error(Errc::ShortReply, "got " + std::to_string(out.size()) + " of " + std::to_string(n) + " bytes");
      }
      std::uint8_t buf[256];
      const auto got = ::recv(fd_.get(), buf, std::min(sizeof(buf), n - out.size()), 0);
      if (got < 0) {
        if (errno == EINTR) continue;
        throw Error(Errc::Io, detail::errno_text("recv"));
      }
      if (got == 0) {
        throw Error(Errc::ShortReply, "connection closed after " + std::to_string(out.size()) + " of " +
                                          std::to_string(n) + " bytes");
      }
      out.insert(out.end(), buf, buf + got);
    }
    return out;
  }

 private:
  detail::Fd fd_;
};

// Serves a device on a TCP port. Each accepted connection gets a freshly
// reset device and is handled to completion before the next accept.
class TcpDeviceServer {
 public:
  // port 0 binds an ephemeral port; see port().
  TcpDeviceServer(micro::Device& device, std::uint16_t port, const std::string& bind_addr = "127.0.0.1")
      : device_(device) {
    listen_ = detail::Fd(::socket(AF_INET, SOCK_STREAM, 0));
    if (!listen_) throw Error(Errc::Io, detail::errno_text("socket"));
    int one = 1;
    ::setsockopt(listen_.get(), SOL_SOCKET, SO_REUSEADDR, &one, sizeof(one));
    sockaddr_in addr{};
    addr.sin_family = AF_INET;
    addr.sin_port = htons(port);
    if (::inet_pton(AF_INET, bind_addr.c_str(), &addr.sin_addr) != 1) {
      throw Error(Errc::InvalidArgument, "bad bind address " + bind_addr);
    }
    if (::bind(listen_.get(), reinterpret_cast<sockaddr*>(&addr), sizeof(addr)) != 0) {
      throw Error(Errc::Io, detail::errno_text("bind"));
    }
    if (::listen(listen_.get(), 4) != 0) throw Error(Errc::Io, detail::errno_text("listen"));
    socklen_t len = sizeof(addr);
    ::getsockname(listen_.get(), reinterpret_cast<sockaddr*>(&addr), &len);
    port_ = ntohs(addr.sin_port);
  }

  std::uint16_t port() const { return port_; }

  void stop() { stop_ = true; }

  // Accepts up to max_connections sessions (0 = until stop()).
  void serve(std::size_t max_connections = 0,
             const std::function<void(const micro::Device&)>& on_close = {}) {
    std::size_t served = 0;
    while (!stop_ && (max_connections == 0 || served < max_connections)) {
      pollfd p{listen_.get(), POLLIN, 0};
      const int rc = ::poll(&p, 1, 200);
      if (rc <= 0) continue;
      detail::Fd conn(::accept(listen_.get(), nullptr, nullptr));
      if (!conn) continue;
      int one = 1;
      ::setsockopt(conn.get(), IPPROTO_TCP, TCP_NODELAY, &one, sizeof(one));
      handle(conn.get());
      ++served;
      if (on_close) on_close(device_);
    }
  }

 private:
  void handle(int fd) {
    try {
      detail::send_all(fd, device_.reset());
      std::uint8_t buf[4096];
      std::vector<std::uint8_t> out;
      while (!stop_) {
        pollfd p{fd, POLLIN, 0};
        const int rc = ::poll(&p, 1, 200);
        if (rc == 0) continue;
        if (rc < 0 && errno == EINTR) continue;
        const auto n = ::recv(fd, buf, sizeof(buf), 0);
        if (n <= 0) break;
        out.clear();
        for (ssize_t i = 0; i < n; ++i) {
          const auto reply = device_.push_byte(buf[i]);
          out.insert(out.end(), reply.begin(), reply.end());
        }
        if (!out.empty()) detail::send_all(fd, out);
      }
    } catch (const Error&) {
      // Peer went away mid-reply; the next connection starts fresh.
    }
  }

  micro::Device& device_;
  detail::Fd listen_;
  std::uint16_t port_ = 0;
  std::atomic<bool> stop_{false};
};

}  // namespace fog::host
