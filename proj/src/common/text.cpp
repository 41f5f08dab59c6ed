#include "silico/text.hpp"

#include <unicode/normalizer2.h>
#include <unicode/uchar.h>
#include <unicode/unistr.h>
#include <unicode/utf8.h>

#include "silico/error.hpp"

namespace silico::text {

namespace {

icu::UnicodeString nfc(std::string_view utf8) {
  UErrorCode status = U_ZERO_ERROR;
  const icu::Normalizer2* normalizer = icu::Normalizer2::getNFCInstance(status);
  if (U_FAILURE(status)) fail(ErrorKind::Internal, "ICU NFC normalizer unavailable");
  const auto src = icu::UnicodeString::fromUTF8(icu::StringPiece(utf8.data(), static_cast<int32_t>(utf8.size())));
  icu::UnicodeString out = normalizer->normalize(src, status);
  if (U_FAILURE(status)) fail(ErrorKind::Internal, "ICU NFC normalization failed");
  return out;
}

void append_utf8(std::string& out, UChar32 c) {
  char buf[U8_MAX_LENGTH];
  int32_t len = 0;
  UBool error = false;
  U8_APPEND(reinterpret_cast<uint8_t*>(buf), len, U8_MAX_LENGTH, c, error);
  if (!error) out.append(buf, static_cast<std::size_t>(len));
}

template <typename Fn>
void for_each_codepoint(std::string_view utf8, Fn&& fn) {
  const auto* s = reinterpret_cast<const uint8_t*>(utf8.data());
  const auto n = static_cast<int32_t>(utf8.size());
  int32_t i = 0;
  while (i < n) {
    UChar32 c;
    U8_NEXT(s, i, n, c);
    fn(c < 0 ? 0xFFFD : c);
  }
}

}  // namespace

std::string normalize_description(std::string_view utf8) {
  const icu::UnicodeString normalized = nfc(utf8);
  std::string out;
  out.reserve(utf8.size());
  bool pending_space = false;
  for (int32_t i = 0; i < normalized.length();) {
    const UChar32 c = normalized.char32At(i);
    i += U16_LENGTH(c);
    if (u_isUWhiteSpace(c)) {
      pending_space = !out.empty();
      continue;
    }
    if (pending_space) {
      out.push_back(' ');
      pending_space = false;
    }
    append_utf8(out, c);
  }
  return out;
}

bool is_blank(std::string_view utf8) {
  bool blank = true;
  for_each_codepoint(utf8, [&](UChar32 c) {
    if (!u_isUWhiteSpace(c)) blank = false;
  });
  return blank;
}

std::string casefold(std::string_view utf8) {
  std::string out;
  out.reserve(utf8.size());
  for_each_codepoint(utf8, [&](UChar32 c) { append_utf8(out, u_foldCase(c, U_FOLD_CASE_DEFAULT)); });
  return out;
}

std::vector<std::string> codepoints(std::string_view utf8) {
  std::vector<std::string> out;
  for_each_codepoint(utf8, [&](UChar32 c) {
    std::string cp;
    append_utf8(cp, c);
    out.push_back(std::move(cp));
  });
  return out;
}

std::vector<std::string> word_tokens(std::string_view utf8) {
  std::string composed;
  nfc(utf8).toUTF8String(composed);
  std::vector<std::string> tokens;
  std::string current;
  for_each_codepoint(composed, [&](UChar32 c) {
    if (u_isalnum(c)) {
      append_utf8(current, u_foldCase(c, U_FOLD_CASE_DEFAULT));
    } else if (!current.empty()) {
      tokens.push_back(std::move(current));
      current.clear();
    }
  });
  if (!current.empty()) tokens.push_back(std::move(current));
  return tokens;
}

std::string xml_escape(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      case '\'': out += "&apos;"; break;
      default:
        // XML 1.0 forbids most C0 controls even when escaped.
        if (static_cast<unsigned char>(c) < 0x20 && c != '\t' && c != '\n' && c != '\r') {
          out.push_back(' ');
        } else {
          out.push_back(c);
        }
    }
  }
  return out;
}

}  // namespace silico::text
