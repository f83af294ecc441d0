#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace clonefuse {

enum class TokenKind { identifier, keyword, number, string, op, punctuation };

struct Token {
    TokenKind kind;
    std::string text;
    size_t index = 0;  // 0-based position within the sequence
};

using TokenSequence = std::vector<Token>;

// Thrown on unterminated string/char literals and block comments.
class LexError : public std::runtime_error {
public:
    LexError(const std::string& what, size_t line)
        : std::runtime_error(what + " at line " + std::to_string(line)), line_(line) {}
    size_t line() const { return line_; }

private:
    size_t line_;
};

// C-family lexer: identifiers/keywords, integer and float literals,
// string/char literals with escapes, longest-match multi-character
// operators. Comments and whitespace are dropped.
TokenSequence lex(const std::string& source);

const char* token_kind_name(TokenKind kind);

}  // namespace clonefuse
