#include "clonefuse/lexer.hpp"

#include <array>
#include <cctype>
#include <string_view>
#include <unordered_set>

namespace clonefuse {

namespace {

const std::unordered_set<std::string_view>& keyword_set() {
    // Union of Java and C/C++ keywords; IR-Plag is Java but the lexer stays
    // language-agnostic within the C family.
    static const std::unordered_set<std::string_view> kw = {
        "abstract", "assert", "auto", "boolean", "break", "byte", "case", "catch",
        "char", "class", "const", "continue", "default", "do", "double", "else",
        "enum", "extends", "extern", "final", "finally", "float", "for", "goto",
        "if", "implements", "import", "inline", "instanceof", "int", "interface",
        "long", "namespace", "native", "new", "package", "private", "protected",
        "public", "register", "return", "short", "signed", "sizeof", "static",
        "strictfp", "struct", "super", "switch", "synchronized", "template",
        "this", "throw", "throws", "transient", "try", "typedef", "union",
        "unsigned", "using", "virtual", "void", "volatile", "while",
        "true", "false", "null", "nullptr",
    };
    return kw;
}

// Multi-character operators first, longest match wins.
constexpr std::array<std::string_view, 41> kOperators = {
    ">>>=", "<<=", ">>=", ">>>", "...", "->*", "==", "!=", "<=", ">=",
    "&&",   "||",  "++",  "--",  "+=",  "-=",  "*=", "/=", "%=", "&=",
    "|=",   "^=",  "->",  "::",  "<<",  ">>",  "##", "=",  "+",  "-",
    "*",    "/",   "%",   "<",   ">",   "!",   "&",  "|",  "^",  "~",
    "?",
};

bool is_ident_start(char c) {
    return std::isalpha(static_cast<unsigned char>(c)) || c == '_' || c == '$';
}

bool is_ident_char(char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '$';
}

bool is_punct(char c) {
    switch (c) {
        case '(': case ')': case '[': case ']':
        case '{': case '}': case ';': case ',':
            return true;
        default:
            return false;
    }
}

}  // namespace

const char* token_kind_name(TokenKind kind) {
    switch (kind) {
        case TokenKind::identifier: return "identifier";
        case TokenKind::keyword: return "keyword";
        case TokenKind::number: return "number";
        case TokenKind::string: return "string";
        case TokenKind::op: return "operator";
        case TokenKind::punctuation: return "punctuation";
    }
    return "unknown";
}

TokenSequence lex(const std::string& source) {
    TokenSequence out;
    size_t i = 0;
    const size_t n = source.size();
    size_t line = 1;

    auto push = [&out](TokenKind kind, std::string text) {
        Token t{kind, std::move(text), out.size()};
        out.push_back(std::move(t));
    };

    while (i < n) {
        char c = source[i];

        if (c == '\n') {
            ++line;
            ++i;
            continue;
        }
        if (std::isspace(static_cast<unsigned char>(c))) {
            ++i;
            continue;
        }

        // Comments.
        if (c == '/' && i + 1 < n && source[i + 1] == '/') {
            while (i < n && source[i] != '\n') ++i;
            continue;
        }
        if (c == '/' && i + 1 < n && source[i + 1] == '*') {
            size_t start_line = line;
            i += 2;
            bool closed = false;
            while (i + 1 < n) {
                if (source[i] == '\n') ++line;
                if (source[i] == '*' && source[i + 1] == '/') {
                    i += 2;
                    closed = true;
                    break;
                }
                ++i;
            }
            if (!closed) throw LexError("unterminated block comment", start_line);
            continue;
        }

        // String and char literals, escapes honored.
        if (c == '"' || c == '\'') {
            size_t start_line = line;
            char quote = c;
            size_t start = i;
            ++i;
            bool closed = false;
            while (i < n) {
                char d = source[i];
                if (d == '\\' && i + 1 < n) {
                    i += 2;
                    continue;
                }
                if (d == '\n') break;  // raw newline never appears inside a literal
                if (d == quote) {
                    ++i;
                    closed = true;
                    break;
                }
                ++i;
            }
            if (!closed) {
                throw LexError(quote == '"' ? "unterminated string literal"
                                            : "unterminated character literal",
                               start_line);
            }
            push(TokenKind::string, source.substr(start, i - start));
            continue;
        }

        // Numbers: integers, floats, hex, exponents, digit separators and
        // type suffixes all fold into one token.
        if (std::isdigit(static_cast<unsigned char>(c)) ||
            (c == '.' && i + 1 < n && std::isdigit(static_cast<unsigned char>(source[i + 1])))) {
            size_t start = i;
            ++i;
            while (i < n) {
                char d = source[i];
                if (std::isalnum(static_cast<unsigned char>(d)) || d == '.' || d == '_') {
                    ++i;
                } else if ((d == '+' || d == '-') &&
                           (source[i - 1] == 'e' || source[i - 1] == 'E' ||
                            source[i - 1] == 'p' || source[i - 1] == 'P')) {
                    ++i;
                } else {
                    break;
                }
            }
            push(TokenKind::number, source.substr(start, i - start));
            continue;
        }

        if (is_ident_start(c)) {
            size_t start = i;
            while (i < n && is_ident_char(source[i])) ++i;
            std::string text = source.substr(start, i - start);
            TokenKind kind = keyword_set().count(text) ? TokenKind::keyword : TokenKind::identifier;
            push(kind, std::move(text));
            continue;
        }

        if (is_punct(c)) {
            push(TokenKind::punctuation, std::string(1, c));
            ++i;
            continue;
        }

        // Operators, longest match first.
        std::string_view rest(source.data() + i, n - i);
        bool matched = false;
        for (std::string_view op : kOperators) {
            if (rest.substr(0, op.size()) == op) {
                push(TokenKind::op, std::string(op));
                i += op.size();
                matched = true;
                break;
            }
        }
        if (matched) continue;

        // Anything else (':', '.', '@', '#', '\\', stray bytes) becomes a
        // single-character operator token so lexing stays total.
        push(TokenKind::op, std::string(1, c));
        ++i;
    }

    return out;
}

}  // namespace clonefuse
