#pragma once

#include <chrono>
#include <limits>
#include <stdexcept>

namespace bsp {

using Cost = double;
inline constexpr Cost kInfinity = std::numeric_limits<Cost>::infinity();

class Timeout : public std::runtime_error {
 public:
  Timeout() : std::runtime_error("time limit reached") {}
};

class Deadline {
 public:
  using Clock = std::chrono::steady_clock;

  Deadline() = default;  // never expires
  explicit Deadline(double seconds)
      : at_(Clock::now() + std::chrono::duration_cast<Clock::duration>(
                               std::chrono::duration<double>(seconds))),
        set_(true) {}

  bool expired() const { return set_ && Clock::now() >= at_; }
  void check() const {
    if (expired()) throw Timeout();
  }

 private:
  Clock::time_point at_{};
  bool set_ = false;
};

}  // namespace bsp
