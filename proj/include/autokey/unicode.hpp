#pragma once

#include <string>
#include <string_view>

namespace autokey::unicode {

enum class CharClass { kSymbol = 0, kSpace = 1, kLetter = 2, kDigit = 3 };

// Invalid byte sequences decode to U+FFFD.
std::u32string decode_utf8(std::string_view text);
std::string encode_utf8(std::u32string_view text);

// Canonical composition (NFC).
std::u32string nfc(std::u32string_view text);
std::string nfc(std::string_view utf8);

char32_t to_lower(char32_t cp);
std::string to_lower(std::string_view utf8);

CharClass classify(char32_t cp);

const char* unicode_version();

}  // namespace autokey::unicode
