#pragma once

#include <string>
#include <string_view>

namespace toxspan {

// All span offsets in this library index Unicode scalar values, not bytes.
// Texts are decoded to std::u32string at the file boundary and re-encoded
// on output; everything in between is plain position arithmetic.

/// Decodes UTF-8 bytes to code points. Throws InputError on malformed
/// input (truncated sequences, overlongs, surrogates, out-of-range).
std::u32string utf8_decode(std::string_view bytes);

/// Encodes code points back to UTF-8.
std::string utf8_encode(std::u32string_view text);

/// Whitespace test used by the tokenizer and span editing: ASCII blanks
/// plus the common Unicode space separators.
bool is_space(char32_t c);

/// Word characters: ASCII alphanumerics, and every non-space code point
/// >= U+0080 (accented letters stay intact; no Unicode property tables at
/// desk scale).
bool is_word_char(char32_t c);

/// ASCII-only lowercasing; other code points pass through unchanged.
char32_t to_lower(char32_t c);

}  // namespace toxspan
