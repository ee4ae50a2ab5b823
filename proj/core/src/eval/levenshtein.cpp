#include "histkit/eval/levenshtein.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "histkit/text.hpp"

namespace histkit::eval {

std::size_t levenshtein_distance(std::u32string_view a, std::u32string_view b) {
  if (a.size() < b.size()) std::swap(a, b);
  // Single row over the shorter string.
  std::vector<std::size_t> row(b.size() + 1);
  for (std::size_t j = 0; j <= b.size(); ++j) row[j] = j;
  for (std::size_t i = 1; i <= a.size(); ++i) {
    std::size_t diag = row[0];
    row[0] = i;
    for (std::size_t j = 1; j <= b.size(); ++j) {
      const std::size_t up = row[j];
      const std::size_t sub = diag + (a[i - 1] == b[j - 1] ? 0 : 1);
      row[j] = std::min({up + 1, row[j - 1] + 1, sub});
      diag = up;
    }
  }
  return row[b.size()];
}

std::size_t levenshtein_distance(std::string_view utf8_a, std::string_view utf8_b) {
  return levenshtein_distance(text::decode_utf8(utf8_a), text::decode_utf8(utf8_b));
}

std::size_t levenshtein_distance_bounded(std::u32string_view a, std::u32string_view b,
                                         std::size_t max_distance) {
  if (a.size() < b.size()) std::swap(a, b);
  const std::size_t n = a.size();
  const std::size_t m = b.size();
  if (n - m > max_distance) return max_distance + 1;
  if (m == 0) return n;
  if (max_distance >= n) return levenshtein_distance(a, b);

  // Ukkonen band: only cells with |i - j| <= max_distance can stay within the
  // bound. Cells outside the band hold `cap`.
  const std::size_t cap = max_distance + 1;
  std::vector<std::size_t> prev(m + 1, cap);
  std::vector<std::size_t> cur(m + 1, cap);
  for (std::size_t j = 0; j <= std::min(m, max_distance); ++j) prev[j] = j;
  for (std::size_t i = 1; i <= n; ++i) {
    const std::size_t lo = i > max_distance ? i - max_distance : 1;
    const std::size_t hi = std::min(m, i + max_distance);
    std::fill(cur.begin(), cur.end(), cap);
    cur[0] = i <= max_distance ? i : cap;
    std::size_t row_min = cur[0];
    for (std::size_t j = lo; j <= hi; ++j) {
      const std::size_t sub = prev[j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1);
      const std::size_t v = std::min({prev[j] + 1, cur[j - 1] + 1, sub, cap});
      cur[j] = v;
      row_min = std::min(row_min, v);
    }
    if (row_min > max_distance) return cap;
    std::swap(prev, cur);
  }
  return prev[m];
}

double lev_similarity_stripped(std::u32string_view a, std::u32string_view b) {
  const std::size_t longest = std::max(a.size(), b.size());
  if (longest == 0) return 1.0;
  return 1.0 - static_cast<double>(levenshtein_distance(a, b)) / static_cast<double>(longest);
}

double lev_similarity(std::string_view utf8_a, std::string_view utf8_b, bool casefold) {
  return lev_similarity_stripped(text::alphanumeric_only(utf8_a, casefold),
                                 text::alphanumeric_only(utf8_b, casefold));
}

bool lev_similarity_exceeds(std::u32string_view a, std::u32string_view b, double threshold) {
  const std::size_t longest = std::max(a.size(), b.size());
  if (longest == 0) return 1.0 > threshold;
  if (threshold >= 1.0) return false;
  // sim > t  <=>  dist < (1 - t) * longest, so anything above floor((1-t)*longest)
  // cannot pass; the exact comparison below settles the boundary.
  const double slack = (1.0 - threshold) * static_cast<double>(longest);
  const std::size_t bound = slack >= static_cast<double>(longest)
                                ? longest
                                : static_cast<std::size_t>(std::floor(slack));
  const std::size_t dist = levenshtein_distance_bounded(a, b, bound);
  if (dist > bound) return false;
  return 1.0 - static_cast<double>(dist) / static_cast<double>(longest) > threshold;
}

}  // namespace histkit::eval
