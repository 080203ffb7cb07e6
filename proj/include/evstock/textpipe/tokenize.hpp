#pragma once

#include <cctype>
#include <string>
#include <string_view>
#include <vector>

namespace evstock::textpipe {

namespace detail {

inline bool is_token_char(unsigned char c) { return std::isalnum(c) != 0; }

} // namespace detail

/// Lowercased tokens split on whitespace and punctuation. Two joiners
/// survive inside a token: an apostrophe between alphanumerics (possessives
/// like "nokia's") and a period between digits ("7.2").
inline std::vector<std::string> tokenize(std::string_view text) {
    std::vector<std::string> tokens;
    std::string current;
    for (std::size_t i = 0; i < text.size(); ++i) {
        const unsigned char c = static_cast<unsigned char>(text[i]);
        if (detail::is_token_char(c)) {
            current += static_cast<char>(std::tolower(c));
            continue;
        }
        const bool joiner =
            !current.empty() && i + 1 < text.size() &&
            ((c == '\'' && detail::is_token_char(static_cast<unsigned char>(text[i + 1]))) ||
             (c == '.' && std::isdigit(static_cast<unsigned char>(text[i - 1])) &&
              std::isdigit(static_cast<unsigned char>(text[i + 1]))));
        if (joiner) {
            current += static_cast<char>(c);
        } else if (!current.empty()) {
            tokens.push_back(std::move(current));
            current.clear();
        }
    }
    if (!current.empty()) tokens.push_back(std::move(current));
    return tokens;
}

} // namespace evstock::textpipe
