#pragma once

#include <cstddef>
#include <string>
#include <string_view>

namespace histkit::eval {

// Edit distance over Unicode scalar values (insert, delete, substitute; unit
// costs).
std::size_t levenshtein_distance(std::u32string_view a, std::u32string_view b);
std::size_t levenshtein_distance(std::string_view utf8_a, std::string_view utf8_b);

// Returns the exact distance when it is <= max_distance, otherwise any value
// > max_distance. Runs in O(max_distance * min(|a|, |b|)).
std::size_t levenshtein_distance_bounded(std::u32string_view a, std::u32string_view b,
                                         std::size_t max_distance);

// 1 - dist / max(|a'|, |b'|) where a', b' keep only letters and digits;
// 1.0 when both are empty after stripping.
double lev_similarity(std::string_view utf8_a, std::string_view utf8_b, bool casefold = false);

// Same, on inputs that are already stripped.
double lev_similarity_stripped(std::u32string_view a, std::u32string_view b);

// Whether lev_similarity_stripped(a, b) > threshold, using the banded
// distance to stop early.
bool lev_similarity_exceeds(std::u32string_view a, std::u32string_view b, double threshold);

}  // namespace histkit::eval
