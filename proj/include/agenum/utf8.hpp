#pragma once

#include <string>
#include <string_view>

namespace agenum {

// Throws Error(kSyntax) on malformed input.
std::u32string decode_utf8(std::string_view bytes);

void append_utf8(char32_t c, std::string* out);
std::string encode_utf8(std::u32string_view text);

}  // namespace agenum
