#pragma once

#include <chrono>

namespace histkit {

// Exponential backoff for remote calls: attempt n (0-based) waits
// initial_backoff * multiplier^(n-1), capped at max_backoff.
struct RetryPolicy {
  int retries = 3;  // attempts = retries + 1
  std::chrono::milliseconds initial_backoff{500};
  double backoff_multiplier = 2.0;
  std::chrono::milliseconds max_backoff{30000};

  std::chrono::milliseconds backoff_before(int attempt) const;
};

}  // namespace histkit
