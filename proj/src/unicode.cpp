#include "gterms/unicode.hpp"

#include "gterms/error.hpp"

#include <unicode/locid.h>
#include <unicode/normalizer2.h>
#include <unicode/uchar.h>
#include <unicode/unistr.h>
#include <unicode/utf8.h>

namespace gterms::unicode {

std::string nfc(std::string_view utf8) {
    UErrorCode status = U_ZERO_ERROR;
    const icu::Normalizer2* norm = icu::Normalizer2::getNFCInstance(status);
    if (U_FAILURE(status)) throw Error("ICU NFC normalizer unavailable");
    const auto src = icu::UnicodeString::fromUTF8(icu::StringPiece(utf8.data(), static_cast<int32_t>(utf8.size())));
    if (norm->isNormalized(src, status) && U_SUCCESS(status)) {
        std::string out;
        src.toUTF8String(out);
        return out;
    }
    status = U_ZERO_ERROR;
    icu::UnicodeString dst = norm->normalize(src, status);
    if (U_FAILURE(status)) throw Error("NFC normalization failed");
    std::string out;
    dst.toUTF8String(out);
    return out;
}

std::string lower(std::string_view utf8) {
    bool ascii = true;
    for (char c : utf8)
        if (static_cast<unsigned char>(c) >= 0x80) {
            ascii = false;
            break;
        }
    if (ascii) {
        std::string out(utf8);
        for (auto& c : out)
            if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
        return out;
    }
    auto s = icu::UnicodeString::fromUTF8(icu::StringPiece(utf8.data(), static_cast<int32_t>(utf8.size())));
    s.toLower(icu::Locale::getRoot());
    std::string out;
    s.toUTF8String(out);
    return out;
}

bool is_word_char(char32_t cp) {
    const auto c = static_cast<UChar32>(cp);
    if (u_isalpha(c) || u_isdigit(c)) return true;
    const int8_t type = u_charType(c);
    return type == U_NON_SPACING_MARK || type == U_COMBINING_SPACING_MARK || type == U_ENCLOSING_MARK;
}

std::size_t codepoint_count(std::string_view utf8) {
    std::size_t n = 0;
    std::size_t pos = 0;
    while (pos < utf8.size()) {
        next_codepoint(utf8, pos);
        ++n;
    }
    return n;
}

char32_t next_codepoint(std::string_view utf8, std::size_t& pos) {
    const auto* s = reinterpret_cast<const uint8_t*>(utf8.data());
    auto i = static_cast<int32_t>(pos);
    const auto len = static_cast<int32_t>(utf8.size());
    UChar32 c;
    U8_NEXT(s, i, len, c);
    pos = static_cast<std::size_t>(i);
    return c < 0 ? U'�' : static_cast<char32_t>(c);
}

}  // namespace gterms::unicode
