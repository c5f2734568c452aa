#pragma once

#include <chrono>
#include <cstdint>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace confcore {

using Bytes = std::vector<std::uint8_t>;
using TimeMs = std::int64_t;

Bytes to_bytes(std::string_view s);
std::string to_string(std::span<const std::uint8_t> b);
std::string hex_encode(std::span<const std::uint8_t> b);
Bytes hex_decode(std::string_view hex);  // throws std::invalid_argument on bad input

/// Clock abstraction so expiry checks and schedulers are deterministic in tests.
class Clock {
 public:
  virtual ~Clock() = default;
  virtual TimeMs now_ms() const = 0;
};

class SystemClock final : public Clock {
 public:
  TimeMs now_ms() const override {
    return std::chrono::duration_cast<std::chrono::milliseconds>(
               std::chrono::steady_clock::now().time_since_epoch())
        .count();
  }
};

/// Manually advanced clock for deterministic tests and schedulers.
class SimClock final : public Clock {
 public:
  explicit SimClock(TimeMs start = 0) : now_(start) {}
  TimeMs now_ms() const override { return now_; }
  void advance(TimeMs delta) { now_ += delta; }
  void set(TimeMs t) { now_ = t; }

 private:
  TimeMs now_;
};

/// Seedable RNG used everywhere workload content must be reproducible.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }
  std::uint64_t next_below(std::uint64_t bound) {
    return std::uniform_int_distribution<std::uint64_t>(0, bound - 1)(engine_);
  }
  double next_unit() { return std::uniform_real_distribution<double>(0.0, 1.0)(engine_); }
  Bytes next_bytes(std::size_t n) {
    Bytes out(n);
    for (auto& b : out) b = static_cast<std::uint8_t>(engine_() & 0xFF);
    return out;
  }

 private:
  std::mt19937_64 engine_;
};

/// Big-endian integer packing used by the bit-exact wire formats.
void put_u16(Bytes& out, std::uint16_t v);
void put_u32(Bytes& out, std::uint32_t v);
void put_u64(Bytes& out, std::uint64_t v);

/// Cursor-style reader; throws std::out_of_range when the buffer is short.
class ByteReader {
 public:
  explicit ByteReader(std::span<const std::uint8_t> data) : data_(data) {}

  std::uint8_t u8();
  std::uint16_t u16();
  std::uint32_t u32();
  std::uint64_t u64();
  Bytes take(std::size_t n);
  bool done() const { return pos_ == data_.size(); }
  std::size_t remaining() const { return data_.size() - pos_; }

 private:
  void need(std::size_t n) const;
  std::span<const std::uint8_t> data_;
  std::size_t pos_ = 0;
};

}  // namespace confcore
