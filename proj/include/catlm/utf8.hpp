#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace catlm {

// Decodes UTF-8 into code points. Throws CatlmError(Err::EncodingError)
// with the byte offset of the first invalid byte; offsets are relative to
// the start of `bytes` plus `base_offset`.
std::vector<char32_t> utf8_decode(std::string_view bytes, size_t base_offset = 0);

// Number of code points; same validation behaviour as utf8_decode.
size_t utf8_length(std::string_view bytes, size_t base_offset = 0);

// First code point of a nonempty string.
char32_t utf8_first(std::string_view bytes, size_t base_offset = 0);

void utf8_append(std::string& out, char32_t cp);
std::string utf8_encode(const std::vector<char32_t>& cps);

// ASCII-only lowercasing; multibyte sequences pass through untouched.
std::string ascii_lower(std::string_view s);

}  // namespace catlm
