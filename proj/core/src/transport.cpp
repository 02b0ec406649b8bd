#include "coloc/transport.hpp"

#include <arpa/inet.h>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <sys/socket.h>
#include <unistd.h>

#include <array>
#include <cerrno>
#include <cstring>

#include "coloc/errors.hpp"

namespace coloc {

namespace {

std::string errno_text(const char* what) {
  return std::string(what) + ": " + std::strerror(errno);
}

sockaddr_in make_address(const std::string& host, std::uint16_t port) {
  sockaddr_in addr{};
  addr.sin_family = AF_INET;
  addr.sin_port = htons(port);
  if (inet_pton(AF_INET, host.c_str(), &addr.sin_addr) != 1) {
    throw TransportError("invalid IPv4 address: " + host);
  }
  return addr;
}

}  // namespace

StreamServer::StreamServer(TopicBus& bus, ServerOptions options)
    : bus_(bus), options_(std::move(options)) {}

StreamServer::~StreamServer() { stop(); }

std::uint16_t StreamServer::start() {
  if (running_.load()) return port_;

  listen_fd_ = ::socket(AF_INET, SOCK_STREAM, 0);
  if (listen_fd_ < 0) throw TransportError(errno_text("socket"));
  const int one = 1;
  ::setsockopt(listen_fd_, SOL_SOCKET, SO_REUSEADDR, &one, sizeof(one));

  sockaddr_in addr = make_address(options_.host, options_.port);
  if (::bind(listen_fd_, reinterpret_cast<sockaddr*>(&addr), sizeof(addr)) < 0) {
    const std::string text = errno_text("bind");
    ::close(listen_fd_);
    listen_fd_ = -1;
    throw TransportError(text);
  }
  if (::listen(listen_fd_, 8) < 0) {
    const std::string text = errno_text("listen");
    ::close(listen_fd_);
    listen_fd_ = -1;
    throw TransportError(text);
  }
  socklen_t len = sizeof(addr);
  ::getsockname(listen_fd_, reinterpret_cast<sockaddr*>(&addr), &len);
  port_ = ntohs(addr.sin_port);

  running_.store(true);
  accept_thread_ = std::thread([this] { accept_loop(); });
  heartbeat_thread_ = std::thread([this] { heartbeat_loop(); });
  bus_.publish<std::string>(kStatusTopic, "listening port=" + std::to_string(port_));
  return port_;
}

void StreamServer::stop() {
  if (!running_.exchange(false)) return;
  ::shutdown(listen_fd_, SHUT_RDWR);
  ::close(listen_fd_);
  listen_fd_ = -1;
  if (accept_thread_.joinable()) accept_thread_.join();
  if (heartbeat_thread_.joinable()) heartbeat_thread_.join();

  std::vector<std::thread> workers;
  {
    std::lock_guard lock(workers_mutex_);
    for (int fd : worker_fds_) ::shutdown(fd, SHUT_RDWR);
    workers.swap(workers_);
    worker_fds_.clear();
  }
  for (auto& worker : workers) {
    if (worker.joinable()) worker.join();
  }
}

void StreamServer::accept_loop() {
  while (running_.load()) {
    const int fd = ::accept(listen_fd_, nullptr, nullptr);
    if (fd < 0) {
      if (!running_.load()) break;
      continue;
    }
    const int one = 1;
    ::setsockopt(fd, IPPROTO_TCP, TCP_NODELAY, &one, sizeof(one));
    std::lock_guard lock(workers_mutex_);
    worker_fds_.push_back(fd);
    workers_.emplace_back([this, fd] { serve_connection(fd); });
  }
}

void StreamServer::heartbeat_loop() {
  auto next = std::chrono::steady_clock::now() + options_.heartbeat_interval;
  while (running_.load()) {
    std::this_thread::sleep_for(std::chrono::milliseconds(1));
    if (std::chrono::steady_clock::now() < next) continue;
    next += options_.heartbeat_interval;
    if (active_connections_.load() == 0) {
      bus_.publish<std::string>(kStatusTopic, "waiting");
    }
  }
}

void StreamServer::serve_connection(int fd) {
  active_connections_.fetch_add(1);
  bus_.publish<std::string>(kStatusTopic, "connected");

  FrameDecoder decoder;
  std::map<std::uint16_t, std::uint64_t> bundles_per_tag;
  std::array<std::uint8_t, 4096> chunk;
  while (running_.load()) {
    const ssize_t n = ::recv(fd, chunk.data(), chunk.size(), 0);
    if (n <= 0) break;
    decoder.feed({chunk.data(), static_cast<std::size_t>(n)});
    WireFrame frame;
    while (decoder.next(frame)) {
      frames_received_.fetch_add(1);
      const std::uint64_t sequence = bundles_per_tag[frame.tag_id]++;
      for (const auto& entry : frame.entries) {
        RangeMeasurement measurement;
        measurement.pair = {frame.tag_id, entry.anchor_id};
        measurement.distance = to_meters(entry.distance_mm);
        measurement.timestamp = static_cast<double>(frame.epoch_micros) * 1e-6;
        measurement.sequence = sequence;
        measurement.quality = entry.quality;
        bus_.publish(ranging_topic(frame.tag_id), measurement);
      }
    }
  }
  crc_failures_.fetch_add(decoder.crc_failures());
  resync_bytes_.fetch_add(decoder.resync_bytes());
  ::close(fd);
  active_connections_.fetch_sub(1);
  bus_.publish<std::string>(kStatusTopic, "disconnected");
}

StreamClient::~StreamClient() { close(); }

StreamClient::StreamClient(StreamClient&& other) noexcept : fd_(other.fd_) { other.fd_ = -1; }

StreamClient& StreamClient::operator=(StreamClient&& other) noexcept {
  if (this != &other) {
    close();
    fd_ = other.fd_;
    other.fd_ = -1;
  }
  return *this;
}

void StreamClient::connect(const std::string& host, std::uint16_t port) {
  close();
  fd_ = ::socket(AF_INET, SOCK_STREAM, 0);
  if (fd_ < 0) throw TransportError(errno_text("socket"));
  sockaddr_in addr = make_address(host, port);
  if (::connect(fd_, reinterpret_cast<sockaddr*>(&addr), sizeof(addr)) < 0) {
    const std::string text = errno_text("connect");
    ::close(fd_);
    fd_ = -1;
    throw TransportError(text);
  }
  const int one = 1;
  ::setsockopt(fd_, IPPROTO_TCP, TCP_NODELAY, &one, sizeof(one));
}

void StreamClient::send(const WireFrame& frame) { send_bytes(encode_frame(frame)); }

void StreamClient::send_bytes(const std::vector<std::uint8_t>& bytes) {
  if (fd_ < 0) throw TransportError("send on closed stream");
  std::size_t sent = 0;
  while (sent < bytes.size()) {
    const ssize_t n = ::send(fd_, bytes.data() + sent, bytes.size() - sent, MSG_NOSIGNAL);
    if (n <= 0) {
      throw TransportError(errno_text("send"));
    }
    sent += static_cast<std::size_t>(n);
  }
}

void StreamClient::close() {
  if (fd_ >= 0) {
    ::close(fd_);
    fd_ = -1;
  }
}

WireFrame bundle_measurements(std::uint16_t tag, std::uint64_t epoch_micros,
                              const std::vector<RangeMeasurement>& measurements) {
  WireFrame frame;
  frame.tag_id = tag;
  frame.epoch_micros = epoch_micros;
  frame.entries.reserve(measurements.size());
  for (const auto& measurement : measurements) {
    if (measurement.pair.tag != tag) {
      throw DomainError("bundle_measurements: measurement from another tag");
    }
    WireEntry entry;
    entry.anchor_id = measurement.pair.anchor;
    entry.distance_mm = to_millimeters(measurement.distance);
    entry.quality = static_cast<std::uint8_t>(measurement.quality);
    frame.entries.push_back(entry);
  }
  return frame;
}

}  // namespace coloc
