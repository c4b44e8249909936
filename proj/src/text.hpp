#pragma once

#include <string>
#include <string_view>

namespace cartography::text {

// Code points of a UTF-8 string; ill-formed sequences decode to U+FFFD.
std::u32string decode_utf8(std::string_view s);
std::string encode_utf8(std::u32string_view s);

bool is_whitespace(char32_t c);
bool is_alnum(char32_t c);
char32_t to_lower(char32_t c);

// True when the string is empty after trimming Unicode whitespace.
bool is_blank(std::string_view s);

}  // namespace cartography::text
