#pragma once

#include <cstddef>
#include <string>
#include <string_view>

// Thin ICU wrappers. Invalid UTF-8 sequences decode as U+FFFD.
namespace gterms::unicode {

std::string nfc(std::string_view utf8);

// Full Unicode lowercase mapping (root locale).
std::string lower(std::string_view utf8);

// Letters, decimal digits and combining marks.
bool is_word_char(char32_t cp);

std::size_t codepoint_count(std::string_view utf8);

// Decodes the code point starting at `pos` and advances `pos` past it.
char32_t next_codepoint(std::string_view utf8, std::size_t& pos);

}  // namespace gterms::unicode
