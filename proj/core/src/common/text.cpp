#include "histkit/text.hpp"

#include <unicode/uchar.h>

#include <cstdint>

namespace histkit::text {
namespace {

constexpr char32_t kReplacement = 0xFFFD;

bool is_continuation(unsigned char byte) { return (byte & 0xC0U) == 0x80U; }

}  // namespace

std::u32string decode_utf8(std::string_view utf8) {
  std::u32string out;
  out.reserve(utf8.size());
  std::size_t i = 0;
  const std::size_t n = utf8.size();
  while (i < n) {
    const auto lead = static_cast<unsigned char>(utf8[i]);
    if (lead < 0x80U) {
      out.push_back(lead);
      ++i;
      continue;
    }
    std::size_t len = 0;
    char32_t cp = 0;
    char32_t min_cp = 0;
    if (lead >= 0xC2U && lead <= 0xDFU) {
      len = 2;
      cp = lead & 0x1FU;
      min_cp = 0x80;
    } else if (lead >= 0xE0U && lead <= 0xEFU) {
      len = 3;
      cp = lead & 0x0FU;
      min_cp = 0x800;
    } else if (lead >= 0xF0U && lead <= 0xF4U) {
      len = 4;
      cp = lead & 0x07U;
      min_cp = 0x10000;
    } else {
      out.push_back(kReplacement);
      ++i;
      continue;
    }
    std::size_t consumed = 1;
    bool ok = true;
    for (; consumed < len; ++consumed) {
      if (i + consumed >= n || !is_continuation(static_cast<unsigned char>(utf8[i + consumed]))) {
        ok = false;
        break;
      }
      cp = (cp << 6U) | (static_cast<unsigned char>(utf8[i + consumed]) & 0x3FU);
    }
    if (!ok || cp < min_cp || cp > 0x10FFFF || (cp >= 0xD800 && cp <= 0xDFFF)) {
      out.push_back(kReplacement);
      i += consumed;
      continue;
    }
    out.push_back(cp);
    i += len;
  }
  return out;
}

std::string encode_utf8(std::u32string_view code_points) {
  std::string out;
  out.reserve(code_points.size());
  for (char32_t cp : code_points) {
    if (cp > 0x10FFFF || (cp >= 0xD800 && cp <= 0xDFFF)) cp = kReplacement;
    if (cp < 0x80) {
      out.push_back(static_cast<char>(cp));
    } else if (cp < 0x800) {
      out.push_back(static_cast<char>(0xC0U | (cp >> 6U)));
      out.push_back(static_cast<char>(0x80U | (cp & 0x3FU)));
    } else if (cp < 0x10000) {
      out.push_back(static_cast<char>(0xE0U | (cp >> 12U)));
      out.push_back(static_cast<char>(0x80U | ((cp >> 6U) & 0x3FU)));
      out.push_back(static_cast<char>(0x80U | (cp & 0x3FU)));
    } else {
      out.push_back(static_cast<char>(0xF0U | (cp >> 18U)));
      out.push_back(static_cast<char>(0x80U | ((cp >> 12U) & 0x3FU)));
      out.push_back(static_cast<char>(0x80U | ((cp >> 6U) & 0x3FU)));
      out.push_back(static_cast<char>(0x80U | (cp & 0x3FU)));
    }
  }
  return out;
}

std::u32string alphanumeric_only(std::string_view utf8, bool casefold) {
  std::u32string out;
  for (char32_t cp : decode_utf8(utf8)) {
    const auto c = static_cast<UChar32>(cp);
    if (!u_isalnum(c)) continue;
    out.push_back(casefold ? static_cast<char32_t>(u_foldCase(c, U_FOLD_CASE_DEFAULT)) : cp);
  }
  return out;
}

std::string collapse_whitespace(std::string_view utf8) {
  std::u32string out;
  bool pending_space = false;
  for (char32_t cp : decode_utf8(utf8)) {
    if (u_isUWhiteSpace(static_cast<UChar32>(cp))) {
      pending_space = !out.empty();
      continue;
    }
    if (pending_space) out.push_back(U' ');
    pending_space = false;
    out.push_back(cp);
  }
  return encode_utf8(out);
}

}  // namespace histkit::text
