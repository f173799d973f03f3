#pragma once

#include <array>
#include <cmath>
#include <cstdint>

namespace polybranch {

// Philox4x32-10 counter-based generator. One independent stream per (seed, stream id);
// the counter walks blocks of four 32-bit words, so results never depend on thread layout.
class Philox {
 public:
  using result_type = std::uint64_t;
  using Block = std::array<std::uint32_t, 4>;
  using Key = std::array<std::uint32_t, 2>;

  Philox(std::uint64_t seed, std::uint64_t stream);

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return ~result_type(0); }

  result_type operator()() {
    if (pos_ > 2) refill();
    std::uint64_t v = (static_cast<std::uint64_t>(buf_[pos_]) << 32) | buf_[pos_ + 1];
    pos_ += 2;
    return v;
  }
  // uniform on the open interval (0,1), 53 bits
  double uniform() { return (static_cast<double>((*this)() >> 11) + 0.5) * 0x1.0p-53; }
  // exponential with unit rate
  double exponential() { return -std::log(uniform()); }

  static Block bijection(Block ctr, Key key) {
    for (int r = 0; r < 10; ++r) {
      std::uint64_t p0 = std::uint64_t{0xD2511F53u} * ctr[0];
      std::uint64_t p1 = std::uint64_t{0xCD9E8D57u} * ctr[2];
      ctr = {static_cast<std::uint32_t>(p1 >> 32) ^ ctr[1] ^ key[0], static_cast<std::uint32_t>(p1),
             static_cast<std::uint32_t>(p0 >> 32) ^ ctr[3] ^ key[1], static_cast<std::uint32_t>(p0)};
      key[0] += 0x9E3779B9u;
      key[1] += 0xBB67AE85u;
    }
    return ctr;
  }

 private:
  void refill() {
    Block ctr{static_cast<std::uint32_t>(block_), static_cast<std::uint32_t>(block_ >> 32),
              static_cast<std::uint32_t>(stream_), static_cast<std::uint32_t>(stream_ >> 32)};
    buf_ = bijection(ctr, key_);
    ++block_;
    pos_ = 0;
  }

  Key key_;
  std::uint64_t stream_;
  std::uint64_t block_ = 0;
  Block buf_{};
  int pos_ = 4;
};

// Stream id helper: distinct sub-streams for one path (e.g. levels or coupled copies).
constexpr std::uint64_t stream_id(std::uint64_t path, std::uint32_t sub = 0) {
  return (path << 8) ^ static_cast<std::uint64_t>(sub);
}

}  // namespace polybranch
