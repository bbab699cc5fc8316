#pragma once

#include <optional>
#include <string>
#include <string_view>

namespace gnpass::utf8 {

// Strict UTF-8 decode: rejects overlong forms, surrogates and code points
// above U+10FFFF. Returns std::nullopt on any invalid sequence.
std::optional<std::u32string> decode(std::string_view bytes);

// Latin-1 decode: every byte maps to U+0000..U+00FF, never fails.
std::u32string decode_latin1(std::string_view bytes);

// Number of code points in a valid UTF-8 string.
std::optional<std::size_t> count_codepoints(std::string_view bytes);

void append(char32_t cp, std::string& out);
std::string encode(std::u32string_view cps);

// "U+0061" style escape for vocabulary files.
std::string escape_codepoint(char32_t cp);
std::optional<char32_t> parse_codepoint(std::string_view escaped);

}  // namespace gnpass::utf8
