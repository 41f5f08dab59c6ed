#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace silico::text {

/// NFC-normalizes, collapses every run of Unicode whitespace to one ASCII
/// space and trims both ends. Case is preserved. Invalid UTF-8 sequences are
/// replaced with U+FFFD.
std::string normalize_description(std::string_view utf8);

/// True when the text is empty or consists only of Unicode whitespace.
bool is_blank(std::string_view utf8);

/// Unicode simple case folding.
std::string casefold(std::string_view utf8);

/// Splits into codepoints, each returned as its UTF-8 encoding.
std::vector<std::string> codepoints(std::string_view utf8);

/// Lowercased alphanumeric word tokens; every other codepoint separates.
std::vector<std::string> word_tokens(std::string_view utf8);

std::string xml_escape(std::string_view s);

}  // namespace silico::text
