#pragma once

#include <string>
#include <string_view>

namespace sentinel {

// Canonical text key used for dialogue dedup and mock embeddings.
//
// Applies Unicode NFC, then ASCII-lowercases, trims, collapses internal
// whitespace runs to single spaces, and strips terminal '.', '!', '?' runs.
// Idempotent and never longer than its input.
std::string normalize_text(std::string_view s);

// NFC composition via ICU. Invalid UTF-8 falls back to the input unchanged.
std::string nfc(std::string_view s);

// True when `term` occurs in `text` with non-alphanumeric (or boundary)
// characters on both sides. Both arguments are expected pre-normalized.
bool contains_whole_word(std::string_view text, std::string_view term);

}  // namespace sentinel
