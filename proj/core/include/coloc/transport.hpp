#pragma once

#include <atomic>
#include <chrono>
#include <cstdint>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

#include "coloc/bus.hpp"
#include "coloc/twr.hpp"
#include "coloc/wire.hpp"

namespace coloc {

struct ServerOptions {
  std::string host = "127.0.0.1";
  std::uint16_t port = 0;  // 0 picks an ephemeral port
  std::chrono::milliseconds heartbeat_interval{5000};
};

/// Accepts one stream connection per tag, decodes frames, and republishes
/// every entry as a RangeMeasurement on `ranging/tag<N>`. Lifecycle and
/// liveness events go to the status topic as plain text; connection loss is
/// an event, not a failure, and accepting continues.
class StreamServer {
 public:
  StreamServer(TopicBus& bus, ServerOptions options = {});
  ~StreamServer();

  StreamServer(const StreamServer&) = delete;
  StreamServer& operator=(const StreamServer&) = delete;

  /// Binds and starts the accept loop; returns the bound port.
  std::uint16_t start();
  void stop();

  std::uint16_t port() const { return port_; }
  std::uint64_t frames_received() const { return frames_received_.load(); }
  std::uint64_t crc_failures() const { return crc_failures_.load(); }
  std::uint64_t resync_bytes() const { return resync_bytes_.load(); }

 private:
  void accept_loop();
  void heartbeat_loop();
  void serve_connection(int fd);

  TopicBus& bus_;
  ServerOptions options_;
  std::uint16_t port_ = 0;
  int listen_fd_ = -1;
  std::atomic<bool> running_{false};
  std::atomic<int> active_connections_{0};
  std::atomic<std::uint64_t> frames_received_{0};
  std::atomic<std::uint64_t> crc_failures_{0};
  std::atomic<std::uint64_t> resync_bytes_{0};
  std::thread accept_thread_;
  std::thread heartbeat_thread_;
  std::mutex workers_mutex_;
  std::vector<std::thread> workers_;
  std::vector<int> worker_fds_;
};

/// One outgoing frame stream (one per tag, per the transport contract).
class StreamClient {
 public:
  StreamClient() = default;
  ~StreamClient();

  StreamClient(const StreamClient&) = delete;
  StreamClient& operator=(const StreamClient&) = delete;
  StreamClient(StreamClient&& other) noexcept;
  StreamClient& operator=(StreamClient&& other) noexcept;

  void connect(const std::string& host, std::uint16_t port);
  void send(const WireFrame& frame);
  void send_bytes(const std::vector<std::uint8_t>& bytes);
  void close();
  bool connected() const { return fd_ >= 0; }

 private:
  int fd_ = -1;
};

/// Measurements of one tag bundled into the frame for one epoch.
WireFrame bundle_measurements(std::uint16_t tag, std::uint64_t epoch_micros,
                              const std::vector<RangeMeasurement>& measurements);

}  // namespace coloc
