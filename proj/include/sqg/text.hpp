#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace sqg::text {

/// Decodes UTF-8 into code points. Invalid bytes decode to U+FFFD.
std::vector<char32_t> decode_utf8(std::string_view s);

std::string encode_utf8(char32_t cp);
std::string encode_utf8(const std::vector<char32_t>& cps);

/// Unicode whitespace, including the ideographic space U+3000.
bool is_space(char32_t cp);

std::string trim(std::string_view s);

/// Canonical form used for duplicate detection.
///
/// Trims surrounding whitespace, folds full-width ASCII variants
/// (U+FF01..U+FF5E) and the common CJK punctuation marks onto their
/// half-width equivalents, and lowercases Latin letters. CJK ideographs
/// pass through unchanged.
std::string normalize(std::string_view s);

/// Splits on '\n', dropping a trailing '\r' from each line.
std::vector<std::string> split_lines(std::string_view s);

}  // namespace sqg::text
