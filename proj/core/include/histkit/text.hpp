#pragma once

#include <string>
#include <string_view>

namespace histkit::text {

// Decodes UTF-8 into Unicode scalar values. Ill-formed sequences decode to
// U+FFFD, one replacement per maximal invalid subpart.
std::u32string decode_utf8(std::string_view utf8);

std::string encode_utf8(std::u32string_view code_points);

// Keeps only code points that are Unicode letters (L*) or decimal digits (Nd).
std::u32string alphanumeric_only(std::string_view utf8, bool casefold = false);

// Trims and collapses every run of Unicode whitespace to a single U+0020.
std::string collapse_whitespace(std::string_view utf8);

}  // namespace histkit::text
