#pragma once

#include <cstddef>
#include <cstdint>
#include <deque>
#include <span>
#include <vector>

namespace coloc {

inline constexpr std::uint8_t kWireMagic0 = 0x4C;
inline constexpr std::uint8_t kWireMagic1 = 0x44;
inline constexpr std::uint8_t kWireVersion = 1;
inline constexpr std::size_t kWireHeaderSize = 14;  // magic..count
inline constexpr std::size_t kWireEntrySize = 7;
inline constexpr std::size_t kWireCrcSize = 2;

/// One ranged anchor inside a bundle.
struct WireEntry {
  std::uint16_t anchor_id = 0;
  std::uint32_t distance_mm = 0;
  std::uint8_t quality = 0;

  bool operator==(const WireEntry&) const = default;
};

/// One per-tag, per-epoch measurement bundle.
struct WireFrame {
  std::uint16_t tag_id = 0;
  std::uint64_t epoch_micros = 0;
  std::vector<WireEntry> entries;

  bool operator==(const WireFrame&) const = default;
};

/// CRC-16/CCITT-FALSE: poly 0x1021, init 0xFFFF, no reflection, no xor-out.
std::uint16_t crc16_ccitt_false(std::span<const std::uint8_t> bytes);

/// Meters to wire millimeters, round-to-nearest. Negative input clamps to 0;
/// values beyond the 32-bit millimeter range are an encoding error.
std::uint32_t to_millimeters(double meters);

inline double to_meters(std::uint32_t millimeters) { return millimeters * 1e-3; }

/// Serialized size of a frame with the given entry count.
inline std::size_t frame_size(std::size_t count) {
  return kWireHeaderSize + kWireEntrySize * count + kWireCrcSize;
}

/// Little-endian layout: magic, version, tag_id, epoch_micros, count,
/// entries, crc16 over everything before it.
std::vector<std::uint8_t> encode_frame(const WireFrame& frame);

/// Strict single-frame decode for tests: the bytes must hold exactly one
/// valid frame.
WireFrame decode_frame(std::span<const std::uint8_t> bytes);

/// Incremental decoder for a byte stream. Garbage before a magic is skipped
/// one byte at a time (counted in resync_bytes); a frame whose checksum fails
/// is dropped whole (counted in crc_failures); partial input is simply kept
/// until more bytes arrive.
class FrameDecoder {
 public:
  /// Consumes a chunk; completed frames queue up for next().
  void feed(std::span<const std::uint8_t> bytes);

  /// Pops the oldest decoded frame, false when none is pending.
  bool next(WireFrame& out);

  std::uint64_t frames_decoded() const { return frames_decoded_; }
  std::uint64_t resync_bytes() const { return resync_bytes_; }
  std::uint64_t crc_failures() const { return crc_failures_; }
  /// Bytes buffered waiting for the rest of a frame.
  std::size_t pending_bytes() const { return buffer_.size(); }

 private:
  void scan();

  std::vector<std::uint8_t> buffer_;
  std::deque<WireFrame> ready_;
  std::uint64_t frames_decoded_ = 0;
  std::uint64_t resync_bytes_ = 0;
  std::uint64_t crc_failures_ = 0;
};

}  // namespace coloc
