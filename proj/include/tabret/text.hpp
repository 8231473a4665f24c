#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace tabret {

/// Splits text into lowercase tokens. A token is a maximal run of ASCII
/// letters/digits or non-ASCII bytes (so UTF-8 words stay intact); everything
/// else separates tokens. No stemming, no stopwords.
std::vector<std::string> tokenize(std::string_view text);

/// Appends the tokens of `text` to `out`.
void tokenize_into(std::string_view text, std::vector<std::string>& out);

/// Lowercased tokens re-joined with single spaces. Used as the canonical form
/// of heading labels.
std::string normalize_label(std::string_view text);

std::string_view trim(std::string_view s);

/// Splits on a single delimiter character, keeping empty fields.
std::vector<std::string_view> split(std::string_view s, char delim);

/// Splits on runs of spaces/tabs, dropping empty fields.
std::vector<std::string_view> split_ws(std::string_view s);

}  // namespace tabret
