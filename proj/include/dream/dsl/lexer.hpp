#pragma once

#include <cctype>
#include <string>
#include <string_view>
#include <vector>

#include "dream/error.hpp"

namespace dream::dsl {

enum class Tok { Ident, Int, Real, String, Punct, End };

struct Token {
    Tok kind = Tok::End;
    std::string text;
    SourcePos pos;

    [[nodiscard]] bool is(std::string_view punct) const { return kind == Tok::Punct && text == punct; }
    [[nodiscard]] bool is_word(std::string_view w) const { return kind == Tok::Ident && text == w; }
};

/// Thrown for the first lexical or syntax error; carries its position.
class ParseError : public Error {
public:
    ParseError(Diagnostic d) : Error(d.str()), diag(std::move(d)) {}  // NOLINT(google-explicit-constructor)
    Diagnostic diag;
};

inline std::string describe(const Token& t) {
    switch (t.kind) {
        case Tok::End: return "end of input";
        case Tok::String: return "string \"" + t.text + "\"";
        default: return "'" + t.text + "'";
    }
}

/// Splits scenario text into tokens. `//` starts a comment to end of line.
inline std::vector<Token> lex(std::string_view src) {
    static const char* const kPuncts[] = {":=", "->", "=>", "==", "!=", "<=", ">=", "&&", "||",
                                          "{",  "}",  "(",  ")",  "[",  "]",  ",",  ";",  ":",
                                          ".",  "#",  "<",  ">",  "+",  "-",  "*",  "/",  "%",
                                          "!",  "&",  "|",  "="};
    std::vector<Token> out;
    std::size_t i = 0, line = 1, col = 1;
    auto advance = [&](std::size_t n) {
        for (std::size_t k = 0; k < n; ++k, ++i) {
            if (src[i] == '\n') {
                ++line;
                col = 1;
            } else {
                ++col;
            }
        }
    };
    while (i < src.size()) {
        const char c = src[i];
        if (std::isspace(static_cast<unsigned char>(c))) {
            advance(1);
            continue;
        }
        if (src.substr(i, 2) == "//") {
            while (i < src.size() && src[i] != '\n') advance(1);
            continue;
        }
        const SourcePos pos{line, col};
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
            std::size_t j = i;
            while (j < src.size() && (std::isalnum(static_cast<unsigned char>(src[j])) || src[j] == '_')) ++j;
            out.push_back({Tok::Ident, std::string(src.substr(i, j - i)), pos});
            advance(j - i);
            continue;
        }
        if (std::isdigit(static_cast<unsigned char>(c))) {
            std::size_t j = i;
            while (j < src.size() && std::isdigit(static_cast<unsigned char>(src[j]))) ++j;
            Tok kind = Tok::Int;
            if (j + 1 < src.size() && src[j] == '.' && std::isdigit(static_cast<unsigned char>(src[j + 1]))) {
                kind = Tok::Real;
                ++j;
                while (j < src.size() && std::isdigit(static_cast<unsigned char>(src[j]))) ++j;
            }
            out.push_back({kind, std::string(src.substr(i, j - i)), pos});
            advance(j - i);
            continue;
        }
        if (c == '"') {
            std::size_t j = i + 1;
            while (j < src.size() && src[j] != '"' && src[j] != '\n') ++j;
            if (j >= src.size() || src[j] != '"') throw ParseError({pos, "unterminated string"});
            out.push_back({Tok::String, std::string(src.substr(i + 1, j - i - 1)), pos});
            advance(j + 1 - i);
            continue;
        }
        bool matched = false;
        for (const char* p : kPuncts) {
            std::string_view pv(p);
            if (src.substr(i, pv.size()) == pv) {
                out.push_back({Tok::Punct, std::string(pv), pos});
                advance(pv.size());
                matched = true;
                break;
            }
        }
        if (!matched) throw ParseError({pos, std::string("unexpected character '") + c + "'"});
    }
    out.push_back({Tok::End, "", {line, col}});
    return out;
}

}  // namespace dream::dsl
