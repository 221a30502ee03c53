#include "sentinel/text.hpp"

#include <unicode/unorm2.h>
#include <unicode/ustring.h>

#include <cctype>
#include <vector>

namespace sentinel {

namespace {

bool is_space(unsigned char c) {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v';
}

bool is_terminal_punct(unsigned char c) { return c == '.' || c == '!' || c == '?'; }

bool is_word_char(unsigned char c) { return std::isalnum(c) != 0; }

}  // namespace

std::string nfc(std::string_view s) {
  if (s.empty()) return {};
  UErrorCode ec = U_ZERO_ERROR;
  const UNormalizer2* norm = unorm2_getNFCInstance(&ec);
  if (U_FAILURE(ec)) return std::string(s);

  std::vector<UChar> utf16(s.size() + 1);
  int32_t ulen = 0;
  u_strFromUTF8(utf16.data(), static_cast<int32_t>(utf16.size()), &ulen, s.data(),
                static_cast<int32_t>(s.size()), &ec);
  if (U_FAILURE(ec)) return std::string(s);

  std::vector<UChar> composed(static_cast<size_t>(ulen) + 1);
  int32_t clen = unorm2_normalize(norm, utf16.data(), ulen, composed.data(),
                                  static_cast<int32_t>(composed.size()), &ec);
  if (ec == U_BUFFER_OVERFLOW_ERROR) {
    // NFC can expand in rare cases (e.g. compatibility-exclusion scripts).
    ec = U_ZERO_ERROR;
    composed.resize(static_cast<size_t>(clen) + 1);
    clen = unorm2_normalize(norm, utf16.data(), ulen, composed.data(),
                            static_cast<int32_t>(composed.size()), &ec);
  }
  if (U_FAILURE(ec)) return std::string(s);

  std::string out(static_cast<size_t>(clen) * 4 + 4, '\0');
  int32_t olen = 0;
  u_strToUTF8(out.data(), static_cast<int32_t>(out.size()), &olen, composed.data(), clen, &ec);
  if (U_FAILURE(ec)) return std::string(s);
  out.resize(static_cast<size_t>(olen));
  return out;
}

std::string normalize_text(std::string_view s) {
  std::string composed = nfc(s);

  std::string out;
  out.reserve(composed.size());
  bool pending_space = false;
  for (unsigned char c : composed) {
    if (is_space(c)) {
      if (!out.empty()) pending_space = true;
      continue;
    }
    if (pending_space) {
      out.push_back(' ');
      pending_space = false;
    }
    if (c < 0x80) c = static_cast<unsigned char>(std::tolower(c));
    out.push_back(static_cast<char>(c));
  }

  // Trailing whitespace and terminal punctuation can shadow each other
  // ("hi . ?"), so strip until stable.
  for (;;) {
    size_t before = out.size();
    while (!out.empty() && is_space(static_cast<unsigned char>(out.back()))) out.pop_back();
    while (!out.empty() && is_terminal_punct(static_cast<unsigned char>(out.back()))) out.pop_back();
    if (out.size() == before) break;
  }
  return out;
}

bool contains_whole_word(std::string_view text, std::string_view term) {
  if (term.empty() || term.size() > text.size()) return false;
  for (size_t pos = text.find(term); pos != std::string_view::npos;
       pos = text.find(term, pos + 1)) {
    bool left_ok = pos == 0 || !is_word_char(static_cast<unsigned char>(text[pos - 1]));
    size_t end = pos + term.size();
    bool right_ok = end == text.size() || !is_word_char(static_cast<unsigned char>(text[end]));
    if (left_ok && right_ok) return true;
  }
  return false;
}

}  // namespace sentinel
