#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "grip/errors.hpp"

namespace grip::wire {

enum class Hand : std::uint8_t { Left = 0, Right = 1 };

inline Hand other_hand(Hand h) {
  return h == Hand::Left ? Hand::Right : Hand::Left;
}

// One timestamped voltage sample from one sensor on one hand.
struct SensorReading {
  int sensor_id = 1;               // anatomical location, 1..12
  Hand hand = Hand::Left;
  std::uint32_t timestamp_ms = 0;  // since session start
  std::uint16_t voltage_mv = 0;    // 0..3300 (supply rail)

  bool operator==(const SensorReading&) const = default;
};

inline constexpr int kSensorIdMin = 1;
inline constexpr int kSensorIdMax = 12;
inline constexpr std::uint16_t kSupplyRailMv = 3300;

inline bool reading_valid(const SensorReading& r) {
  return r.sensor_id >= kSensorIdMin && r.sensor_id <= kSensorIdMax &&
         r.voltage_mv <= kSupplyRailMv;
}

// Frame layout, 9 bytes:
//   byte 0      sync marker 0xA5
//   byte 1      bits 7..5 zero, bit 4 hand (0=left, 1=right), bits 3..0 sensor id
//   bytes 2..5  timestamp_ms, u32 little-endian
//   bytes 6..7  voltage_mv, u16 little-endian
//   byte 8      XOR of bytes 0..7
inline constexpr std::size_t kFrameSize = 9;
inline constexpr std::uint8_t kSyncByte = 0xA5;

using Frame = std::array<std::uint8_t, kFrameSize>;

// Throws InvalidReading if sensor id or voltage is out of range.
Frame encode_frame(const SensorReading& reading);

enum class DecodeStatus : std::uint8_t {
  Ok,
  BadSync,
  BadChecksum,
  FieldOutOfRange,
};

// Non-throwing decode of exactly kFrameSize bytes; `out` is written only on Ok.
DecodeStatus try_decode_frame(std::span<const std::uint8_t> bytes,
                              SensorReading& out) noexcept;

// Throwing variant: BadSync / BadChecksum / FieldOutOfRange, or Error if the
// input is not exactly 9 bytes.
SensorReading decode_frame(std::span<const std::uint8_t> bytes);

struct SkippedSpan {
  std::size_t offset = 0;  // from the start of the stream
  std::size_t length = 0;

  bool operator==(const SkippedSpan&) const = default;
};

struct StreamDecodeReport {
  std::vector<SensorReading> readings;
  std::vector<SkippedSpan> skipped_byte_spans;  // disjoint, ordered
  std::size_t pending_bytes = 0;                // trailing incomplete frame
};

// Resynchronizing stream decoder. Holds at most one incomplete frame between
// feeds; not safe for unserialized sharing across threads, but may be handed
// off between them.
class StreamDecoder {
 public:
  // Consumes bytes, decoding every frame that validates. On a validation
  // failure the scan advances a single byte and retries from the next sync
  // marker.
  void feed(std::span<const std::uint8_t> bytes);

  const std::vector<SensorReading>& readings() const { return readings_; }
  const std::vector<SkippedSpan>& skipped_byte_spans() const { return skipped_; }
  std::size_t pending_byte_count() const { return pending_.size(); }

  StreamDecodeReport report() const;

 private:
  void mark_skipped(std::size_t offset);

  std::vector<SensorReading> readings_;
  std::vector<SkippedSpan> skipped_;
  std::vector<std::uint8_t> pending_;
  std::size_t consumed_ = 0;  // bytes fully scanned since construction
};

// One-shot decode of an arbitrary byte sequence. Corruption is reported via
// skipped spans, never thrown.
StreamDecodeReport decode_stream(std::span<const std::uint8_t> bytes);

}  // namespace grip::wire
