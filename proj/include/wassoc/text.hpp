#pragma once

#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "wassoc/error.hpp"

namespace wassoc {

bool is_valid_utf8(std::string_view text);

// NFC-normalizes and lowercases (root locale). Throws Error on invalid UTF-8.
std::string normalize_token(std::string_view text);

// NFC + Unicode case folding; used for attribute matching.
std::string fold_case(std::string_view text);

// Splits on runs of ASCII spaces; never yields empty tokens.
std::vector<std::string> split_tokens(std::string_view phrase);
std::string join_tokens(std::span<const std::string> tokens);

// Splits on every tab, keeping empty fields.
std::vector<std::string> split_fields(std::string_view line);

std::string_view trim_spaces(std::string_view text);
bool has_whitespace(std::string_view text);

// Number of code points, for column alignment.
std::size_t display_width(std::string_view utf8);

}  // namespace wassoc
