#pragma once

#include <array>
#include <cstddef>

namespace uiodrem {

/// Mid-step value of a uniformly sampled signal from the newest sample and up
/// to three previous ones (Lagrange interpolation at t_k + dt/2). Falls back
/// to lower order while the history fills.
template <typename T>
class MidpointEstimator {
 public:
  void reset() { count_ = 0; }

  void push(const T& sample) {
    history_[0] = history_[1];
    history_[1] = history_[2];
    history_[2] = sample;
    if (count_ < 3) ++count_;
  }

  /// Value halfway between the last pushed sample and `next`.
  T midpoint(const T& next) const {
    const T& a = history_[0];
    const T& b = history_[1];
    const T& c = history_[2];
    switch (count_) {
      case 0:
        return next;
      case 1:
        return T(0.5 * (c + next));
      case 2:
        return T(-0.125 * b + 0.75 * c + 0.375 * next);
      default:
        return T(0.0625 * a - 0.3125 * b + 0.9375 * c + 0.3125 * next);
    }
  }

 private:
  std::array<T, 3> history_{};
  std::size_t count_ = 0;
};

}  // namespace uiodrem
