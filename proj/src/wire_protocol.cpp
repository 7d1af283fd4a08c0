#include "grip/wire_protocol.hpp"

#include <string>

namespace grip::wire {

namespace {

std::uint8_t xor_checksum(std::span<const std::uint8_t> bytes) {
  std::uint8_t x = 0;
  for (std::uint8_t b : bytes) x ^= b;
  return x;
}

}  // namespace

Frame encode_frame(const SensorReading& reading) {
  if (reading.sensor_id < kSensorIdMin || reading.sensor_id > kSensorIdMax) {
    throw InvalidReading("sensor id " + std::to_string(reading.sensor_id) +
                         " outside [1, 12]");
  }
  if (reading.voltage_mv > kSupplyRailMv) {
    throw InvalidReading("voltage " + std::to_string(reading.voltage_mv) +
                         " mV exceeds the 3300 mV rail");
  }
  Frame f{};
  f[0] = kSyncByte;
  f[1] = static_cast<std::uint8_t>(
      (reading.hand == Hand::Right ? 0x10 : 0x00) |
      (reading.sensor_id & 0x0F));
  f[2] = static_cast<std::uint8_t>(reading.timestamp_ms & 0xFF);
  f[3] = static_cast<std::uint8_t>((reading.timestamp_ms >> 8) & 0xFF);
  f[4] = static_cast<std::uint8_t>((reading.timestamp_ms >> 16) & 0xFF);
  f[5] = static_cast<std::uint8_t>((reading.timestamp_ms >> 24) & 0xFF);
  f[6] = static_cast<std::uint8_t>(reading.voltage_mv & 0xFF);
  f[7] = static_cast<std::uint8_t>((reading.voltage_mv >> 8) & 0xFF);
  f[8] = xor_checksum(std::span(f).first(8));
  return f;
}

DecodeStatus try_decode_frame(std::span<const std::uint8_t> bytes,
                              SensorReading& out) noexcept {
  if (bytes.size() != kFrameSize) return DecodeStatus::BadSync;
  if (bytes[0] != kSyncByte) return DecodeStatus::BadSync;
  if (xor_checksum(bytes.first(8)) != bytes[8]) return DecodeStatus::BadChecksum;

  const std::uint8_t id_byte = bytes[1];
  const int sensor_id = id_byte & 0x0F;
  if ((id_byte & 0xE0) != 0) return DecodeStatus::FieldOutOfRange;
  if (sensor_id < kSensorIdMin || sensor_id > kSensorIdMax) {
    return DecodeStatus::FieldOutOfRange;
  }
  const std::uint16_t voltage =
      static_cast<std::uint16_t>(bytes[6] | (bytes[7] << 8));
  if (voltage > kSupplyRailMv) return DecodeStatus::FieldOutOfRange;

  out.sensor_id = sensor_id;
  out.hand = (id_byte & 0x10) ? Hand::Right : Hand::Left;
  out.timestamp_ms = static_cast<std::uint32_t>(bytes[2]) |
                     (static_cast<std::uint32_t>(bytes[3]) << 8) |
                     (static_cast<std::uint32_t>(bytes[4]) << 16) |
                     (static_cast<std::uint32_t>(bytes[5]) << 24);
  out.voltage_mv = voltage;
  return DecodeStatus::Ok;
}

SensorReading decode_frame(std::span<const std::uint8_t> bytes) {
  if (bytes.size() != kFrameSize) {
    throw Error("frame must be exactly " + std::to_string(kFrameSize) +
                " bytes, got " + std::to_string(bytes.size()));
  }
  SensorReading r;
  switch (try_decode_frame(bytes, r)) {
    case DecodeStatus::Ok:
      return r;
    case DecodeStatus::BadSync:
      throw BadSync("frame does not start with the 0xA5 sync marker");
    case DecodeStatus::BadChecksum:
      throw BadChecksum("XOR checksum mismatch");
    case DecodeStatus::FieldOutOfRange:
      throw FieldOutOfRange("decoded sensor id or voltage out of range");
  }
  throw Error("unreachable");
}

void StreamDecoder::mark_skipped(std::size_t offset) {
  if (!skipped_.empty() &&
      skipped_.back().offset + skipped_.back().length == offset) {
    ++skipped_.back().length;
  } else {
    skipped_.push_back({offset, 1});
  }
}

void StreamDecoder::feed(std::span<const std::uint8_t> bytes) {
  pending_.insert(pending_.end(), bytes.begin(), bytes.end());

  std::size_t i = 0;
  const std::size_t n = pending_.size();
  while (i < n) {
    if (pending_[i] != kSyncByte) {
      mark_skipped(consumed_ + i);
      ++i;
      continue;
    }
    if (n - i < kFrameSize) break;  // possible frame prefix, keep for later
    SensorReading r;
    if (try_decode_frame(std::span(pending_).subspan(i, kFrameSize), r) ==
        DecodeStatus::Ok) {
      readings_.push_back(r);
      i += kFrameSize;
    } else {
      mark_skipped(consumed_ + i);
      ++i;
    }
  }
  pending_.erase(pending_.begin(), pending_.begin() + static_cast<std::ptrdiff_t>(i));
  consumed_ += i;
}

StreamDecodeReport StreamDecoder::report() const {
  return StreamDecodeReport{readings_, skipped_, pending_.size()};
}

StreamDecodeReport decode_stream(std::span<const std::uint8_t> bytes) {
  StreamDecoder decoder;
  decoder.feed(bytes);
  return decoder.report();
}

}  // namespace grip::wire
