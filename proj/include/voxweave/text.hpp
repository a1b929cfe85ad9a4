#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace voxweave {

std::string_view trim(std::string_view s);
std::string ascii_lower(std::string_view s);

/// Collapses runs of whitespace (ASCII and U+3000) into one space and trims.
std::string collapse_whitespace(std::string_view s);

/// Invalid bytes decode to U+FFFD.
std::vector<char32_t> utf8_decode(std::string_view s);
std::string utf8_encode(char32_t cp);
std::string utf8_encode(const std::vector<char32_t>& cps);

bool is_whitespace(char32_t cp);

/// ASCII punctuation plus the Latin-1, General Punctuation, CJK symbol and
/// fullwidth punctuation ranges.
bool is_punctuation(char32_t cp);

}  // namespace voxweave
