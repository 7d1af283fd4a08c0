#include <doctest.h>

#include <random>

#include "grip/wire_protocol.hpp"

using namespace grip;
using namespace grip::wire;

namespace {

SensorReading random_reading(std::mt19937_64& rng) {
  std::uniform_int_distribution<int> sensor(1, 12);
  std::uniform_int_distribution<int> hand(0, 1);
  std::uniform_int_distribution<std::uint32_t> ts(0, 0xFFFFFFFFu);
  std::uniform_int_distribution<int> mv(0, 3300);
  return {sensor(rng), hand(rng) ? Hand::Right : Hand::Left, ts(rng),
          static_cast<std::uint16_t>(mv(rng))};
}

std::vector<std::uint8_t> encode_all(const std::vector<SensorReading>& readings) {
  std::vector<std::uint8_t> bytes;
  for (const auto& r : readings) {
    const Frame f = encode_frame(r);
    bytes.insert(bytes.end(), f.begin(), f.end());
  }
  return bytes;
}

}  // namespace

TEST_CASE("encode_frame emits the documented byte layout") {
  // Worked out by hand from the layout and the XOR arithmetic.
  CHECK(encode_frame({10, Hand::Right, 1000, 512}) ==
        Frame{0xA5, 0x1A, 0xE8, 0x03, 0x00, 0x00, 0x00, 0x02, 0x56});
  CHECK(encode_frame({1, Hand::Left, 0, 0}) ==
        Frame{0xA5, 0x01, 0x00, 0x00, 0x00, 0x00, 0x00, 0x00, 0xA4});
}

TEST_CASE("encode_frame rejects invalid readings") {
  CHECK_THROWS_AS(encode_frame({13, Hand::Left, 0, 0}), InvalidReading);
  CHECK_THROWS_AS(encode_frame({0, Hand::Left, 0, 0}), InvalidReading);
  CHECK_THROWS_AS(encode_frame({5, Hand::Left, 0, 3301}), InvalidReading);
}

TEST_CASE("decode_frame inverts encode_frame") {
  const SensorReading r{3, Hand::Left, 40, 1500};
  CHECK(decode_frame(encode_frame(r)) == r);
}

TEST_CASE("decode_frame error taxonomy") {
  Frame f = encode_frame({7, Hand::Right, 123456, 900});

  SUBCASE("flipped checksum byte") {
    f[8] ^= 0xFF;
    CHECK_THROWS_AS(decode_frame(f), BadChecksum);
  }
  SUBCASE("missing sync marker") {
    f[0] = 0x00;
    CHECK_THROWS_AS(decode_frame(f), BadSync);
  }
  SUBCASE("sensor nibble zero with a valid checksum") {
    f[1] = static_cast<std::uint8_t>(f[1] & 0xF0);
    f[8] = 0;
    for (int i = 0; i < 8; ++i) f[8] ^= f[static_cast<std::size_t>(i)];
    CHECK_THROWS_AS(decode_frame(f), FieldOutOfRange);
  }
  SUBCASE("voltage above the rail with a valid checksum") {
    f[6] = 0xFF;
    f[7] = 0x0F;  // 4095 mV
    f[8] = 0;
    for (int i = 0; i < 8; ++i) f[8] ^= f[static_cast<std::size_t>(i)];
    CHECK_THROWS_AS(decode_frame(f), FieldOutOfRange);
  }
  SUBCASE("wrong length") {
    CHECK_THROWS_AS(decode_frame(std::span(f).first(8)), Error);
  }
}

TEST_CASE("round trip holds over randomized readings") {
  std::mt19937_64 rng(2024);
  for (int i = 0; i < 2000; ++i) {
    const SensorReading r = random_reading(rng);
    CHECK(decode_frame(encode_frame(r)) == r);
  }
}

TEST_CASE("any single flipped byte invalidates a frame") {
  const Frame f = encode_frame({12, Hand::Right, 987654, 3300});
  for (std::size_t pos = 0; pos < kFrameSize; ++pos) {
    for (std::uint8_t bit = 0; bit < 8; ++bit) {
      Frame corrupted = f;
      corrupted[pos] = static_cast<std::uint8_t>(corrupted[pos] ^ (1u << bit));
      SensorReading out;
      CHECK(try_decode_frame(corrupted, out) != DecodeStatus::Ok);
    }
  }
}

TEST_CASE("decode_stream consumes back-to-back frames") {
  std::mt19937_64 rng(7);
  std::vector<SensorReading> readings{random_reading(rng), random_reading(rng),
                                      random_reading(rng)};
  const auto report = decode_stream(encode_all(readings));
  CHECK(report.readings == readings);
  CHECK(report.skipped_byte_spans.empty());
  CHECK(report.pending_bytes == 0);
}

TEST_CASE("decode_stream resynchronizes after a garbage prefix") {
  std::vector<std::uint8_t> bytes{0x11, 0x22, 0x33, 0x44};
  const SensorReading r{4, Hand::Left, 77, 250};
  const Frame f = encode_frame(r);
  bytes.insert(bytes.end(), f.begin(), f.end());

  const auto report = decode_stream(bytes);
  REQUIRE(report.readings.size() == 1);
  CHECK(report.readings[0] == r);
  REQUIRE(report.skipped_byte_spans.size() == 1);
  CHECK(report.skipped_byte_spans[0] == SkippedSpan{0, 4});
  CHECK(report.pending_bytes == 0);
}

TEST_CASE("decode_stream keeps a plausible trailing frame prefix pending") {
  const SensorReading r{9, Hand::Right, 500, 1000};
  auto bytes = encode_all({r});
  bytes.push_back(kSyncByte);
  bytes.insert(bytes.end(), {0x01, 0x02, 0x03, 0x04});

  const auto report = decode_stream(bytes);
  REQUIRE(report.readings.size() == 1);
  CHECK(report.readings[0] == r);
  CHECK(report.pending_bytes == 5);
  CHECK(report.skipped_byte_spans.empty());
}

TEST_CASE("corrupting a contiguous span loses only overlapping frames") {
  std::mt19937_64 rng(99);
  std::vector<SensorReading> readings;
  for (int i = 0; i < 20; ++i) readings.push_back(random_reading(rng));
  const auto clean = encode_all(readings);

  for (const std::size_t start : {13UL, 40UL, 90UL}) {
    for (const std::size_t len : {1UL, 5UL, 11UL}) {
      auto bytes = clean;
      for (std::size_t i = start; i < start + len; ++i) {
        bytes[i] = static_cast<std::uint8_t>(bytes[i] ^ 0x5A);
      }
      const auto report = decode_stream(bytes);

      std::vector<SensorReading> expected_kept;
      for (std::size_t frame = 0; frame < readings.size(); ++frame) {
        const std::size_t lo = frame * kFrameSize;
        const std::size_t hi = lo + kFrameSize;
        const bool overlaps = lo < start + len && start < hi;
        if (!overlaps) expected_kept.push_back(readings[frame]);
      }
      // Every decoded reading must be genuine and every untouched frame kept.
      std::size_t matched = 0;
      for (const auto& kept : expected_kept) {
        bool found = false;
        for (const auto& got : report.readings) {
          if (got == kept) {
            found = true;
            break;
          }
        }
        if (found) ++matched;
      }
      CHECK(matched == expected_kept.size());
    }
  }
}

TEST_CASE("stateful decoder handles arbitrary feed boundaries") {
  std::mt19937_64 rng(1234);
  std::vector<SensorReading> readings;
  for (int i = 0; i < 50; ++i) readings.push_back(random_reading(rng));
  const auto bytes = encode_all(readings);

  StreamDecoder one_shot;
  one_shot.feed(bytes);

  StreamDecoder trickle;
  for (std::uint8_t b : bytes) trickle.feed(std::span(&b, 1));

  CHECK(trickle.readings() == one_shot.readings());
  CHECK(trickle.readings() == readings);
  CHECK(trickle.pending_byte_count() == 0);
  CHECK(trickle.skipped_byte_spans().empty());
}

TEST_CASE("decode_stream reproduces any encoded reading list without skips") {
  std::mt19937_64 rng(555);
  for (int trial = 0; trial < 25; ++trial) {
    std::vector<SensorReading> readings;
    const int count = static_cast<int>(rng() % 40);
    for (int i = 0; i < count; ++i) readings.push_back(random_reading(rng));
    const auto report = decode_stream(encode_all(readings));
    CHECK(report.readings == readings);
    CHECK(report.skipped_byte_spans.empty());
    CHECK(report.pending_bytes == 0);
  }
}
