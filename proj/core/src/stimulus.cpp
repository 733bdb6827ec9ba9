#include "gazepath/stimulus.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <fstream>
#include <set>

#include "json.hpp"

namespace gazepath {

using nlohmann::json;

namespace {

constexpr std::array<std::string_view, kTokenKindCount> kKindNames = {
    "identifier", "keyword", "literal", "operator", "punctuation", "comment"};

const std::set<std::string_view, std::less<>>& java_keywords() {
    static const std::set<std::string_view, std::less<>> words = {
        "abstract", "assert",     "boolean",   "break",     "byte",         "case",
        "catch",    "char",       "class",     "const",     "continue",     "default",
        "do",       "double",     "else",      "enum",      "extends",      "final",
        "finally",  "float",      "for",       "goto",      "if",           "implements",
        "import",   "instanceof", "int",       "interface", "long",         "native",
        "new",      "package",    "private",   "protected", "public",       "return",
        "short",    "static",     "strictfp",  "super",     "switch",       "synchronized",
        "this",     "throw",      "throws",    "transient", "try",          "void",
        "volatile", "while"};
    return words;
}

// Longest first so that a prefix scan finds the maximal munch.
constexpr std::array<std::string_view, 36> kOperators = {
    ">>>=", "<<=", ">>=", ">>>", "->", "::", "++", "--", "&&", "||", "==", "!=",
    "<=",   ">=",  "+=",  "-=",  "*=",  "/=", "&=", "|=", "^=", "%=", "<<", ">>", "=",
    ">",    "<",   "!",   "~",   "?",   ":",  "+",  "-",  "*",  "/",  "&"};
constexpr std::string_view kMoreSingleOps = "|^%";
constexpr std::string_view kPunctuation = "(){}[];,.@";

bool is_space(char c) { return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f'; }
bool is_continuation(char c) { return (static_cast<unsigned char>(c) & 0xC0) == 0x80; }
bool is_ident_start(char c) {
    const auto u = static_cast<unsigned char>(c);
    return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || c == '_' || c == '$' || u >= 0x80;
}
bool is_digit(char c) { return c >= '0' && c <= '9'; }
bool is_ident_part(char c) { return is_ident_start(c) || is_digit(c); }

class Lexer {
public:
    explicit Lexer(std::string_view src) : src_(src) {}

    std::vector<LexedToken> run() {
        while (pos_ < src_.size()) {
            const char c = src_[pos_];
            if (is_space(c)) {
                advance();
                continue;
            }
            begin();
            if (starts_with("//")) {
                while (pos_ < src_.size() && src_[pos_] != '\n' && src_[pos_] != '\r') advance();
                finish(TokenKind::comment);
            } else if (starts_with("/*")) {
                advance(2);
                while (pos_ < src_.size() && !starts_with("*/")) advance();
                if (pos_ >= src_.size()) throw LexError("unterminated block comment", tok_.line);
                advance(2);
                finish(TokenKind::comment);
            } else if (starts_with("\"\"\"")) {
                lex_text_block();
            } else if (c == '"' || c == '\'') {
                lex_quoted(c);
            } else if (is_digit(c) || (c == '.' && pos_ + 1 < src_.size() && is_digit(src_[pos_ + 1]))) {
                lex_number();
            } else if (is_ident_start(c)) {
                while (pos_ < src_.size() && is_ident_part(src_[pos_])) advance();
                const auto word = src_.substr(tok_.offset, pos_ - tok_.offset);
                if (word == "true" || word == "false" || word == "null") {
                    finish(TokenKind::literal);
                } else if (java_keywords().count(word) != 0) {
                    finish(TokenKind::keyword);
                } else {
                    finish(TokenKind::identifier);
                }
            } else {
                lex_symbol();
            }
        }
        return std::move(out_);
    }

private:
    bool starts_with(std::string_view s) const { return src_.substr(pos_, s.size()) == s; }

    void advance(std::size_t count = 1) {
        for (std::size_t k = 0; k < count && pos_ < src_.size(); ++k) {
            const char c = src_[pos_++];
            if (c == '\n') {
                ++line_;
                col_ = 0;
            } else if (!is_continuation(c)) {
                ++col_;
            }
        }
        // A multi-byte code point occupies one column; skip its tail bytes.
        while (pos_ < src_.size() && is_continuation(src_[pos_])) ++pos_;
    }

    void begin() {
        tok_ = LexedToken{};
        tok_.line = line_;
        tok_.col_start = col_;
        tok_.offset = pos_;
    }

    void finish(TokenKind kind) {
        tok_.kind = kind;
        tok_.lexeme = std::string(src_.substr(tok_.offset, pos_ - tok_.offset));
        tok_.end_line = line_;
        tok_.col_end = col_;
        out_.push_back(std::move(tok_));
    }

    void lex_quoted(char quote) {
        advance();
        while (true) {
            if (pos_ >= src_.size() || src_[pos_] == '\n' || src_[pos_] == '\r') {
                throw LexError(quote == '"' ? "unterminated string literal"
                                            : "unterminated character literal",
                               tok_.line);
            }
            const char c = src_[pos_];
            if (c == '\\') {
                advance(2);
                continue;
            }
            advance();
            if (c == quote) break;
        }
        finish(TokenKind::literal);
    }

    void lex_text_block() {
        advance(3);
        while (pos_ < src_.size() && !starts_with("\"\"\"")) {
            advance(src_[pos_] == '\\' ? 2 : 1);
        }
        if (pos_ >= src_.size()) throw LexError("unterminated text block", tok_.line);
        advance(3);
        finish(TokenKind::literal);
    }

    void lex_number() {
        bool hex = starts_with("0x") || starts_with("0X");
        bool seen_dot = false;
        if (hex) advance(2);
        while (pos_ < src_.size()) {
            const char c = src_[pos_];
            const bool exponent = hex ? (c == 'p' || c == 'P') : (c == 'e' || c == 'E');
            if (exponent) {
                advance();
                if (pos_ < src_.size() && (src_[pos_] == '+' || src_[pos_] == '-')) advance();
            } else if (c == '.' && !seen_dot && !starts_with("..")) {
                seen_dot = true;
                advance();
            } else if (std::isalnum(static_cast<unsigned char>(c)) || c == '_') {
                advance();
            } else {
                break;
            }
        }
        finish(TokenKind::literal);
    }

    void lex_symbol() {
        if (starts_with("...")) {
            advance(3);
            finish(TokenKind::punctuation);
            return;
        }
        for (const auto op : kOperators) {
            if (starts_with(op)) {
                advance(op.size());
                finish(TokenKind::op);
                return;
            }
        }
        const char c = src_[pos_];
        advance();
        finish(kMoreSingleOps.find(c) != std::string_view::npos ? TokenKind::op
                                                                 : TokenKind::punctuation);
    }

    std::string_view src_;
    std::size_t pos_ = 0;
    std::size_t line_ = 0;
    std::size_t col_ = 0;
    LexedToken tok_;
    std::vector<LexedToken> out_;
};

}  // namespace

std::string_view to_string(TokenKind kind) { return kKindNames[static_cast<std::size_t>(kind)]; }

TokenKind token_kind_from_string(std::string_view name) {
    for (std::size_t i = 0; i < kKindNames.size(); ++i) {
        if (kKindNames[i] == name) return static_cast<TokenKind>(i);
    }
    throw ParseError("unknown token kind '" + std::string(name) + "'");
}

void validate_pane(const CodePane& pane) {
    if (!(pane.cell_w_px > 0) || !(pane.cell_h_px > 0)) {
        throw ParameterError("code pane cell dimensions must be > 0");
    }
    if (pane.tab_width < 1) throw ParameterError("tab_width must be >= 1");
}

std::vector<LexedToken> tokenize_java(std::string_view source) { return Lexer(source).run(); }

std::size_t StimulusLayout::line_count() const {
    return static_cast<std::size_t>(std::count(source.begin(), source.end(), '\n')) + 1;
}

StimulusLayout layout(std::string method_id, std::string source,
                      const std::vector<LexedToken>& tokens, const CodePane& pane) {
    validate_pane(pane);

    // Display position of every byte: line and tab-expanded column.
    std::vector<std::size_t> line_of(source.size() + 1), col_of(source.size() + 1);
    {
        std::size_t line = 0, col = 0;
        const auto tab = static_cast<std::size_t>(pane.tab_width);
        for (std::size_t i = 0; i < source.size(); ++i) {
            const char c = source[i];
            if (is_continuation(c)) {
                line_of[i] = line_of[i - 1];
                col_of[i] = col_of[i - 1];
                continue;
            }
            line_of[i] = line;
            col_of[i] = col;
            if (c == '\n') {
                ++line;
                col = 0;
            } else if (c == '\t') {
                col = (col / tab + 1) * tab;
            } else {
                ++col;
            }
        }
    }

    StimulusLayout out;
    out.pane = pane;
    for (const auto& lt : tokens) {
        const std::size_t begin = lt.offset;
        const std::size_t end = lt.offset + lt.lexeme.size();
        std::size_t i = begin;
        while (i < end) {
            while (i < end && is_space(source[i])) ++i;
            if (i >= end) break;
            std::size_t j = i;
            while (j < end && !is_space(source[j])) ++j;

            Token t;
            t.lexeme = source.substr(i, j - i);
            t.kind = lt.kind;
            t.offset = i;
            t.line = line_of[i];
            t.col_start = col_of[i];
            t.col_end = col_of[j - 1] + 1;
            t.bbox = Rect{pane.origin_x_px + static_cast<double>(t.col_start) * pane.cell_w_px,
                          pane.origin_y_px + static_cast<double>(t.line) * pane.cell_h_px,
                          pane.origin_x_px + static_cast<double>(t.col_end) * pane.cell_w_px,
                          pane.origin_y_px + static_cast<double>(t.line + 1) * pane.cell_h_px};
            out.tokens.push_back(std::move(t));
            i = j;
        }
    }
    out.method_id = std::move(method_id);
    out.source = std::move(source);
    return out;
}

StimulusLayout layout_method(std::string method_id, std::string source, const CodePane& pane) {
    auto lexed = tokenize_java(source);
    return layout(std::move(method_id), std::move(source), lexed, pane);
}

std::vector<MethodSource> parse_method_corpus(std::istream& in, const std::string& source_name) {
    std::vector<MethodSource> methods;
    std::set<std::string> seen;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        try {
            const auto j = json::parse(line);
            MethodSource m{j.at("method_id").get<std::string>(), j.at("source").get<std::string>()};
            if (!seen.insert(m.method_id).second) {
                throw ValidationError(source_name + ":" + std::to_string(line_no) +
                                      ": duplicate method_id " + m.method_id);
            }
            methods.push_back(std::move(m));
        } catch (const json::exception& e) {
            throw ParseError(source_name + ":" + std::to_string(line_no) + ": " + e.what());
        }
    }
    return methods;
}

std::vector<MethodSource> load_method_corpus(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open method corpus " + path.string());
    return parse_method_corpus(in, path.string());
}

void write_method_corpus(std::ostream& out, const std::vector<MethodSource>& methods) {
    for (const auto& m : methods) {
        out << json{{"method_id", m.method_id}, {"source", m.source}}.dump() << '\n';
    }
}

void write_layout_dump(std::ostream& out, const StimulusLayout& layout) {
    for (std::size_t i = 0; i < layout.tokens.size(); ++i) {
        const auto& t = layout.tokens[i];
        json j;
        j["method_id"] = layout.method_id;
        j["index"] = i;
        j["lexeme"] = t.lexeme;
        j["kind"] = to_string(t.kind);
        j["line"] = t.line;
        j["col_start"] = t.col_start;
        j["col_end"] = t.col_end;
        j["bbox"] = {t.bbox.x0, t.bbox.y0, t.bbox.x1, t.bbox.y1};
        out << j.dump() << '\n';
    }
}

}  // namespace gazepath
