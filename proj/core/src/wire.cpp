#include "coloc/wire.hpp"

#include <cmath>

#include "coloc/errors.hpp"

namespace coloc {

namespace {

void put_u16(std::vector<std::uint8_t>& out, std::uint16_t value) {
  out.push_back(static_cast<std::uint8_t>(value & 0xFF));
  out.push_back(static_cast<std::uint8_t>(value >> 8));
}

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t value) {
  for (int i = 0; i < 4; ++i) {
    out.push_back(static_cast<std::uint8_t>((value >> (8 * i)) & 0xFF));
  }
}

void put_u64(std::vector<std::uint8_t>& out, std::uint64_t value) {
  for (int i = 0; i < 8; ++i) {
    out.push_back(static_cast<std::uint8_t>((value >> (8 * i)) & 0xFF));
  }
}

std::uint16_t get_u16(const std::uint8_t* p) {
  return static_cast<std::uint16_t>(p[0] | (p[1] << 8));
}

std::uint32_t get_u32(const std::uint8_t* p) {
  return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
         (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}

std::uint64_t get_u64(const std::uint8_t* p) {
  std::uint64_t value = 0;
  for (int i = 7; i >= 0; --i) {
    value = (value << 8) | p[i];
  }
  return value;
}

WireFrame parse_body(const std::uint8_t* p, std::size_t count) {
  WireFrame frame;
  frame.tag_id = get_u16(p + 3);
  frame.epoch_micros = get_u64(p + 5);
  frame.entries.resize(count);
  const std::uint8_t* entry = p + kWireHeaderSize;
  for (std::size_t i = 0; i < count; ++i, entry += kWireEntrySize) {
    frame.entries[i].anchor_id = get_u16(entry);
    frame.entries[i].distance_mm = get_u32(entry + 2);
    frame.entries[i].quality = entry[6];
  }
  return frame;
}

}  // namespace

std::uint16_t crc16_ccitt_false(std::span<const std::uint8_t> bytes) {
  std::uint16_t crc = 0xFFFF;
  for (std::uint8_t byte : bytes) {
    crc ^= static_cast<std::uint16_t>(byte) << 8;
    for (int bit = 0; bit < 8; ++bit) {
      crc = (crc & 0x8000) ? static_cast<std::uint16_t>((crc << 1) ^ 0x1021)
                           : static_cast<std::uint16_t>(crc << 1);
    }
  }
  return crc;
}

std::uint32_t to_millimeters(double meters) {
  if (!std::isfinite(meters)) {
    throw EncodingError("to_millimeters: non-finite distance");
  }
  if (meters <= 0.0) return 0;
  const double mm = std::round(meters * 1000.0);
  if (mm > 4294967295.0) {
    throw EncodingError("to_millimeters: distance exceeds 32-bit millimeters");
  }
  return static_cast<std::uint32_t>(mm);
}

std::vector<std::uint8_t> encode_frame(const WireFrame& frame) {
  if (frame.entries.empty()) {
    throw EncodingError("encode_frame: frame needs at least one entry");
  }
  if (frame.entries.size() > 255) {
    throw EncodingError("encode_frame: more than 255 entries");
  }
  std::vector<std::uint8_t> out;
  out.reserve(frame_size(frame.entries.size()));
  out.push_back(kWireMagic0);
  out.push_back(kWireMagic1);
  out.push_back(kWireVersion);
  put_u16(out, frame.tag_id);
  put_u64(out, frame.epoch_micros);
  out.push_back(static_cast<std::uint8_t>(frame.entries.size()));
  for (const auto& entry : frame.entries) {
    put_u16(out, entry.anchor_id);
    put_u32(out, entry.distance_mm);
    out.push_back(entry.quality);
  }
  put_u16(out, crc16_ccitt_false({out.data(), out.size()}));
  return out;
}

WireFrame decode_frame(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < frame_size(1)) {
    throw ParseError("decode_frame: truncated frame");
  }
  if (bytes[0] != kWireMagic0 || bytes[1] != kWireMagic1) {
    throw ParseError("decode_frame: bad magic");
  }
  if (bytes[2] != kWireVersion) {
    throw ParseError("decode_frame: unsupported version");
  }
  const std::size_t count = bytes[kWireHeaderSize - 1];
  if (count == 0) {
    throw ParseError("decode_frame: zero entry count");
  }
  if (bytes.size() != frame_size(count)) {
    throw ParseError("decode_frame: length does not match entry count");
  }
  const std::size_t body = kWireHeaderSize + kWireEntrySize * count;
  const std::uint16_t expected = crc16_ccitt_false(bytes.subspan(0, body));
  if (get_u16(bytes.data() + body) != expected) {
    throw ParseError("decode_frame: checksum mismatch");
  }
  return parse_body(bytes.data(), count);
}

void FrameDecoder::feed(std::span<const std::uint8_t> bytes) {
  buffer_.insert(buffer_.end(), bytes.begin(), bytes.end());
  scan();
}

bool FrameDecoder::next(WireFrame& out) {
  if (ready_.empty()) return false;
  out = std::move(ready_.front());
  ready_.pop_front();
  return true;
}

void FrameDecoder::scan() {
  std::size_t head = 0;
  const std::size_t size = buffer_.size();
  while (true) {
    const std::size_t available = size - head;
    if (available < 1) break;
    if (buffer_[head] != kWireMagic0) {
      ++head;
      ++resync_bytes_;
      continue;
    }
    if (available < 2) break;
    if (buffer_[head + 1] != kWireMagic1) {
      ++head;
      ++resync_bytes_;
      continue;
    }
    if (available < kWireHeaderSize) break;
    const std::uint8_t version = buffer_[head + 2];
    const std::size_t count = buffer_[head + kWireHeaderSize - 1];
    if (version != kWireVersion || count == 0) {
      // Treat as a false magic: resync one byte at a time.
      ++head;
      ++resync_bytes_;
      continue;
    }
    const std::size_t total = frame_size(count);
    if (available < total) break;

    const std::uint8_t* start = buffer_.data() + head;
    const std::size_t body = kWireHeaderSize + kWireEntrySize * count;
    const std::uint16_t expected = crc16_ccitt_false({start, body});
    if (get_u16(start + body) != expected) {
      ++crc_failures_;
      head += total;
      continue;
    }
    ready_.push_back(parse_body(start, count));
    ++frames_decoded_;
    head += total;
  }
  buffer_.erase(buffer_.begin(), buffer_.begin() + static_cast<std::ptrdiff_t>(head));
}

}  // namespace coloc
