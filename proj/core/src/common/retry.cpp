#include "histkit/retry.hpp"

#include <algorithm>
#include <cmath>

namespace histkit {

std::chrono::milliseconds RetryPolicy::backoff_before(int attempt) const {
  if (attempt <= 0) return std::chrono::milliseconds{0};
  const double ms = static_cast<double>(initial_backoff.count()) *
                    std::pow(backoff_multiplier, static_cast<double>(attempt - 1));
  return std::chrono::milliseconds{
      static_cast<long long>(std::min(ms, static_cast<double>(max_backoff.count())))};
}

}  // namespace histkit
