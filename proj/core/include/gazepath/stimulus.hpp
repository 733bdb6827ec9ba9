#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "gazepath/errors.hpp"

namespace gazepath {

enum class TokenKind { identifier, keyword, literal, op, punctuation, comment };

std::string_view to_string(TokenKind kind);
TokenKind token_kind_from_string(std::string_view name);

inline constexpr std::size_t kTokenKindCount = 6;

/// Monospace code pane geometry in screen pixels.
struct CodePane {
    double origin_x_px = 64.0;
    double origin_y_px = 64.0;
    double cell_w_px = 10.0;
    double cell_h_px = 21.0;
    int tab_width = 4;

    bool operator==(const CodePane&) const = default;
};

void validate_pane(const CodePane& pane);

struct Rect {
    double x0 = 0, y0 = 0, x1 = 0, y1 = 0;

    bool contains(double x, double y) const { return x >= x0 && x < x1 && y >= y0 && y < y1; }
    double center_x() const { return 0.5 * (x0 + x1); }
    double center_y() const { return 0.5 * (y0 + y1); }
    bool overlaps(const Rect& o) const { return x0 < o.x1 && o.x0 < x1 && y0 < o.y1 && o.y0 < y1; }
    bool operator==(const Rect&) const = default;
};

/// Lexer output. Columns count code points on the raw line (a tab is one column);
/// `offset` is the byte offset of the lexeme in the source.
struct LexedToken {
    std::string lexeme;
    TokenKind kind = TokenKind::identifier;
    std::size_t line = 0;
    std::size_t col_start = 0;
    std::size_t end_line = 0;  // differs from `line` only for block comments and text blocks
    std::size_t col_end = 0;   // exclusive, on `end_line`
    std::size_t offset = 0;

    bool operator==(const LexedToken&) const = default;
};

/// Lossless, parse-free Java lexer. Every non-whitespace byte of `source` belongs
/// to exactly one token. Throws LexError on unterminated literals and comments.
std::vector<LexedToken> tokenize_java(std::string_view source);

/// One area of interest. Lexemes never contain whitespace: comments and string
/// literals that do are split at whitespace into several AOIs of the same kind.
/// Columns here are display columns (tabs expanded).
struct Token {
    std::string lexeme;
    TokenKind kind = TokenKind::identifier;
    std::size_t line = 0;
    std::size_t col_start = 0;
    std::size_t col_end = 0;
    Rect bbox;
    std::size_t offset = 0;

    bool substantive() const { return kind != TokenKind::punctuation; }
    bool operator==(const Token&) const = default;
};

struct StimulusLayout {
    std::string method_id;
    std::string source;
    std::vector<Token> tokens;  // ordered by (line, col_start)
    CodePane pane;

    std::size_t line_count() const;
};

StimulusLayout layout(std::string method_id, std::string source,
                      const std::vector<LexedToken>& tokens, const CodePane& pane);

/// tokenize_java + layout.
StimulusLayout layout_method(std::string method_id, std::string source, const CodePane& pane = {});

struct MethodSource {
    std::string method_id;
    std::string source;

    bool operator==(const MethodSource&) const = default;
};

/// Method corpus JSONL: {"method_id": str, "source": str} per line.
std::vector<MethodSource> load_method_corpus(const std::filesystem::path& path);
std::vector<MethodSource> parse_method_corpus(std::istream& in, const std::string& source_name = "<stream>");
void write_method_corpus(std::ostream& out, const std::vector<MethodSource>& methods);

/// One JSON line per AOI with its bounding box, for overlay tools.
void write_layout_dump(std::ostream& out, const StimulusLayout& layout);

}  // namespace gazepath
