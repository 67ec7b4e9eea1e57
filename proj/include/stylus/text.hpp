#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace stylus {

// UTF-8 decoding with U+FFFD substitution for invalid byte sequences, plus
// the codepoint classes the preprocessing statistics rely on. Class
// membership is a documented heuristic over fixed ranges, not a full
// Unicode property database.

std::vector<char32_t> utf8_decode(std::string_view s);
void utf8_append(std::string& out, char32_t cp);
std::string utf8_encode(const std::vector<char32_t>& cps);

bool is_space_cp(char32_t cp);
bool is_digit_cp(char32_t cp);      // ASCII 0-9 and Bangla U+09E6..U+09EF
bool is_emoji_cp(char32_t cp);      // common emoji/symbol blocks
bool is_punct_cp(char32_t cp);      // ASCII punctuation, danda, ellipsis, curly quotes
bool is_sentence_terminal_cp(char32_t cp);  // . ! ? danda (U+0964/U+0965) ellipsis

}  // namespace stylus
