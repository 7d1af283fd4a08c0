#pragma once

#include <cstdint>
#include <ostream>
#include <span>
#include <vector>

#include "grip/errors.hpp"

namespace grip::io {

// Destination for encoded frame bytes. Implementations throw SinkError on
// write failure.
class ByteSink {
 public:
  virtual ~ByteSink() = default;
  virtual void write(std::span<const std::uint8_t> bytes) = 0;
};

class OstreamSink final : public ByteSink {
 public:
  explicit OstreamSink(std::ostream& os) : os_(os) {}
  void write(std::span<const std::uint8_t> bytes) override {
    os_.write(reinterpret_cast<const char*>(bytes.data()),
              static_cast<std::streamsize>(bytes.size()));
    if (!os_) throw SinkError("stream write failed");
  }

 private:
  std::ostream& os_;
};

class VectorSink final : public ByteSink {
 public:
  void write(std::span<const std::uint8_t> bytes) override {
    data_.insert(data_.end(), bytes.begin(), bytes.end());
  }
  const std::vector<std::uint8_t>& data() const { return data_; }

 private:
  std::vector<std::uint8_t> data_;
};

}  // namespace grip::io
