#include "catlm/utf8.hpp"

#include "catlm/error.hpp"

namespace catlm {

namespace {

// Returns the code point starting at bytes[i] and advances i, or throws.
char32_t decode_one(std::string_view bytes, size_t& i, size_t base_offset) {
    auto fail = [&](size_t at) {
        raise(Err::EncodingError, "invalid UTF-8 at byte offset " + std::to_string(base_offset + at));
    };
    unsigned char b0 = static_cast<unsigned char>(bytes[i]);
    if (b0 < 0x80) {
        ++i;
        return b0;
    }
    size_t extra = 0;
    char32_t cp = 0;
    if ((b0 & 0xE0) == 0xC0) {
        extra = 1;
        cp = b0 & 0x1F;
    } else if ((b0 & 0xF0) == 0xE0) {
        extra = 2;
        cp = b0 & 0x0F;
    } else if ((b0 & 0xF8) == 0xF0) {
        extra = 3;
        cp = b0 & 0x07;
    } else {
        fail(i);
    }
    if (i + extra >= bytes.size()) fail(i);
    for (size_t k = 1; k <= extra; ++k) {
        unsigned char b = static_cast<unsigned char>(bytes[i + k]);
        if ((b & 0xC0) != 0x80) fail(i);
        cp = (cp << 6) | (b & 0x3F);
    }
    // reject overlong encodings, surrogates and out-of-range values
    if ((extra == 1 && cp < 0x80) || (extra == 2 && cp < 0x800) || (extra == 3 && cp < 0x10000) ||
        (cp >= 0xD800 && cp <= 0xDFFF) || cp > 0x10FFFF)
        fail(i);
    i += extra + 1;
    return cp;
}

}  // namespace

std::vector<char32_t> utf8_decode(std::string_view bytes, size_t base_offset) {
    std::vector<char32_t> out;
    out.reserve(bytes.size());
    size_t i = 0;
    while (i < bytes.size()) out.push_back(decode_one(bytes, i, base_offset));
    return out;
}

size_t utf8_length(std::string_view bytes, size_t base_offset) {
    size_t n = 0, i = 0;
    while (i < bytes.size()) {
        decode_one(bytes, i, base_offset);
        ++n;
    }
    return n;
}

char32_t utf8_first(std::string_view bytes, size_t base_offset) {
    size_t i = 0;
    return decode_one(bytes, i, base_offset);
}

void utf8_append(std::string& out, char32_t cp) {
    if (cp < 0x80) {
        out.push_back(static_cast<char>(cp));
    } else if (cp < 0x800) {
        out.push_back(static_cast<char>(0xC0 | (cp >> 6)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    } else if (cp < 0x10000) {
        out.push_back(static_cast<char>(0xE0 | (cp >> 12)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    } else {
        out.push_back(static_cast<char>(0xF0 | (cp >> 18)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3F)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    }
}

std::string utf8_encode(const std::vector<char32_t>& cps) {
    std::string out;
    out.reserve(cps.size());
    for (char32_t cp : cps) utf8_append(out, cp);
    return out;
}

std::string ascii_lower(std::string_view s) {
    std::string out(s);
    for (char& c : out)
        if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
    return out;
}

}  // namespace catlm
