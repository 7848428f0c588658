#pragma once

#include <arpa/inet.h>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <sys/socket.h>
#include <unistd.h>

#include <condition_variable>
#include <cstdint>
#include <deque>
#include <memory>
#include <mutex>
#include <optional>
#include <string>

#include "vron/bytes.hpp"
#include "vron/error.hpp"
#include "vron/wire.hpp"

namespace vron {

// Channel media. Stage workers speak framed wire messages over either a
// bounded in-memory byte queue (in_process transport) or a loopback TCP
// socket (tcp transport); the stream abstractions below make the two
// indistinguishable to stage code.

/// Bounded multi-producer/multi-consumer queue of byte chunks with close
/// semantics: push blocks when full, returns false once closed; pop returns
/// nullopt once closed and drained. The bound doubles as the pipeline's
/// in-flight frame window.
class BytePipe {
public:
  explicit BytePipe(std::size_t capacity = 8) : capacity_(capacity) {}

  bool push(Bytes b) {
    std::unique_lock<std::mutex> lk(mu_);
    cv_push_.wait(lk, [&] { return closed_ || q_.size() < capacity_; });
    if (closed_) return false;
    q_.push_back(std::move(b));
    cv_pop_.notify_one();
    return true;
  }

  std::optional<Bytes> pop() {
    std::unique_lock<std::mutex> lk(mu_);
    cv_pop_.wait(lk, [&] { return closed_ || !q_.empty(); });
    if (q_.empty()) return std::nullopt;
    Bytes b = std::move(q_.front());
    q_.pop_front();
    cv_push_.notify_one();
    return b;
  }

  void close() {
    std::lock_guard<std::mutex> lk(mu_);
    closed_ = true;
    cv_pop_.notify_all();
    cv_push_.notify_all();
  }

private:
  std::mutex mu_;
  std::condition_variable cv_push_, cv_pop_;
  std::deque<Bytes> q_;
  std::size_t capacity_;
  bool closed_ = false;
};

// ---------------------------------------------------------------------------
// TCP plumbing (loopback)

class TcpSocket {
public:
  TcpSocket() = default;
  explicit TcpSocket(int fd) : fd_(fd) {}
  TcpSocket(TcpSocket&& o) noexcept : fd_(o.fd_) { o.fd_ = -1; }
  TcpSocket& operator=(TcpSocket&& o) noexcept {
    if (this != &o) {
      reset();
      fd_ = o.fd_;
      o.fd_ = -1;
    }
    return *this;
  }
  TcpSocket(const TcpSocket&) = delete;
  TcpSocket& operator=(const TcpSocket&) = delete;
  ~TcpSocket() { reset(); }

  bool valid() const { return fd_ >= 0; }

  static TcpSocket connect_to(const std::string& host, std::uint16_t port) {
    int fd = ::socket(AF_INET, SOCK_STREAM, 0);
    if (fd < 0) fail(ErrorCode::SpawnFailed, "socket() failed");
    sockaddr_in addr{};
    addr.sin_family = AF_INET;
    addr.sin_port = htons(port);
    if (::inet_pton(AF_INET, host.c_str(), &addr.sin_addr) != 1) {
      ::close(fd);
      fail(ErrorCode::SpawnFailed, "bad address: " + host);
    }
    if (::connect(fd, reinterpret_cast<sockaddr*>(&addr), sizeof addr) != 0) {
      ::close(fd);
      fail(ErrorCode::SpawnFailed, "connect to " + host + ":" + std::to_string(port) + " failed");
    }
    int one = 1;
    ::setsockopt(fd, IPPROTO_TCP, TCP_NODELAY, &one, sizeof one);
    return TcpSocket(fd);
  }

  /// Returns up to `cap` bytes; empty optional on orderly shutdown.
  std::optional<Bytes> read_some(std::size_t cap = 1 << 16) {
    Bytes buf(cap);
    ssize_t n = ::recv(fd_, buf.data(), buf.size(), 0);
    if (n <= 0) return std::nullopt;
    buf.resize(static_cast<std::size_t>(n));
    return buf;
  }

  bool write_all(const Bytes& b) {
    std::size_t sent = 0;
    while (sent < b.size()) {
      ssize_t n = ::send(fd_, b.data() + sent, b.size() - sent, MSG_NOSIGNAL);
      if (n <= 0) return false;
      sent += static_cast<std::size_t>(n);
    }
    return true;
  }

  void shutdown_write() {
    if (fd_ >= 0) ::shutdown(fd_, SHUT_WR);
  }

private:
  void reset() {
    if (fd_ >= 0) ::close(fd_);
    fd_ = -1;
  }
  int fd_ = -1;
};

class TcpListener {
public:
  /// Binds 127.0.0.1; port 0 picks a free port (see port()).
  explicit TcpListener(std::uint16_t port = 0) {
    fd_ = ::socket(AF_INET, SOCK_STREAM, 0);
    if (fd_ < 0) fail(ErrorCode::SpawnFailed, "socket() failed");
    int one = 1;
    ::setsockopt(fd_, SOL_SOCKET, SO_REUSEADDR, &one, sizeof one);
    sockaddr_in addr{};
    addr.sin_family = AF_INET;
    addr.sin_addr.s_addr = htonl(INADDR_LOOPBACK);
    addr.sin_port = htons(port);
    if (::bind(fd_, reinterpret_cast<sockaddr*>(&addr), sizeof addr) != 0 ||
        ::listen(fd_, 16) != 0) {
      ::close(fd_);
      fail(ErrorCode::SpawnFailed, "bind/listen on port " + std::to_string(port) + " failed");
    }
    socklen_t len = sizeof addr;
    ::getsockname(fd_, reinterpret_cast<sockaddr*>(&addr), &len);
    port_ = ntohs(addr.sin_port);
  }
  ~TcpListener() {
    if (fd_ >= 0) ::close(fd_);
  }
  TcpListener(const TcpListener&) = delete;
  TcpListener& operator=(const TcpListener&) = delete;

  std::uint16_t port() const { return port_; }

  TcpSocket accept() {
    int c = ::accept(fd_, nullptr, nullptr);
    if (c < 0) fail(ErrorCode::SpawnFailed, "accept() failed");
    int one = 1;
    ::setsockopt(c, IPPROTO_TCP, TCP_NODELAY, &one, sizeof one);
    return TcpSocket(c);
  }

private:
  int fd_ = -1;
  std::uint16_t port_ = 0;
};

// ---------------------------------------------------------------------------
// Unified channel endpoints

/// Write side of a message channel. Bytes are forwarded verbatim.
struct ByteSink {
  std::function<bool(const Bytes&)> write;
  std::function<void()> close;
};

inline ByteSink sink_from_pipe(std::shared_ptr<BytePipe> pipe) {
  return {[pipe](const Bytes& b) { return pipe->push(b); }, [pipe] { pipe->close(); }};
}

inline StreamReader reader_from_pipe(std::shared_ptr<BytePipe> pipe) {
  return StreamReader([pipe]() { return pipe->pop(); });
}

inline ByteSink sink_from_socket(std::shared_ptr<TcpSocket> sock) {
  return {[sock](const Bytes& b) { return sock->write_all(b); },
          [sock] { sock->shutdown_write(); }};
}

inline StreamReader reader_from_socket(std::shared_ptr<TcpSocket> sock) {
  return StreamReader([sock]() { return sock->read_some(); });
}

/// A sink shared by several producers: writes are serialized (each write
/// call lands contiguously in the stream) and close() takes effect once
/// every producer has closed. Used for the encoder input, which is fed by
/// both the last frame edge and the sidecar edge.
inline ByteSink shared_sink(const ByteSink& inner, int producers) {
  auto state = std::make_shared<std::pair<std::mutex, int>>();
  state->second = producers;
  auto write_inner = inner.write;
  auto close_inner = inner.close;
  return {[state, write_inner](const Bytes& b) {
            std::lock_guard<std::mutex> lk(state->first);
            return write_inner(b);
          },
          [state, close_inner] {
            std::lock_guard<std::mutex> lk(state->first);
            if (--state->second == 0) close_inner();
          }};
}

}  // namespace vron
