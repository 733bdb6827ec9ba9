#include <doctest.h>

#include <map>
#include <random>
#include <sstream>

#include "gazepath/stimulus.hpp"
#include "gazepath/synth.hpp"
#include "oracles.hpp"

using namespace gazepath;

namespace {

using Kinds = std::vector<std::pair<std::string, TokenKind>>;

Kinds lex(std::string_view src) {
    Kinds out;
    for (const auto& t : tokenize_java(src)) out.emplace_back(t.lexeme, t.kind);
    return out;
}

}  // namespace

TEST_SUITE("stimulus") {

TEST_CASE("elementary statement") {
    CHECK(lex("int i = 0;") == Kinds{{"int", TokenKind::keyword},
                                     {"i", TokenKind::identifier},
                                     {"=", TokenKind::op},
                                     {"0", TokenKind::literal},
                                     {";", TokenKind::punctuation}});
    CHECK(to_string(TokenKind::op) == "operator");
    CHECK(token_kind_from_string("operator") == TokenKind::op);
}

TEST_CASE("first line of the example method") {
    const auto src = fixture::example_source();
    const auto first_line = src.substr(0, src.find('\n'));
    CHECK(lex(first_line) == Kinds{{"public", TokenKind::keyword},
                                   {"void", TokenKind::keyword},
                                   {"testNegativeParseCases", TokenKind::identifier},
                                   {"(", TokenKind::punctuation},
                                   {")", TokenKind::punctuation},
                                   {"{", TokenKind::punctuation}});
}

TEST_CASE("comments are single tokens") {
    CHECK(lex("// x+y") == Kinds{{"// x+y", TokenKind::comment}});
    CHECK(lex("a /* b\n c */ d") ==
          Kinds{{"a", TokenKind::identifier}, {"/* b\n c */", TokenKind::comment}, {"d", TokenKind::identifier}});
}

TEST_CASE("literals, operators and punctuation") {
    CHECK(lex("x >>>= 0x1F_FFL;") == Kinds{{"x", TokenKind::identifier},
                                           {">>>=", TokenKind::op},
                                           {"0x1F_FFL", TokenKind::literal},
                                           {";", TokenKind::punctuation}});
    CHECK(lex("a->b::c") == Kinds{{"a", TokenKind::identifier},
                                  {"->", TokenKind::op},
                                  {"b", TokenKind::identifier},
                                  {"::", TokenKind::op},
                                  {"c", TokenKind::identifier}});
    CHECK(lex("@Override f(String... a)") == Kinds{{"@", TokenKind::punctuation},
                                                   {"Override", TokenKind::identifier},
                                                   {"f", TokenKind::identifier},
                                                   {"(", TokenKind::punctuation},
                                                   {"String", TokenKind::identifier},
                                                   {"...", TokenKind::punctuation},
                                                   {"a", TokenKind::identifier},
                                                   {")", TokenKind::punctuation}});
    CHECK(lex("3.14e-2f 'x' '\\'' null true") == Kinds{{"3.14e-2f", TokenKind::literal},
                                                       {"'x'", TokenKind::literal},
                                                       {"'\\''", TokenKind::literal},
                                                       {"null", TokenKind::literal},
                                                       {"true", TokenKind::literal}});
    CHECK(lex("s = \"a \\\" b\";") == Kinds{{"s", TokenKind::identifier},
                                            {"=", TokenKind::op},
                                            {"\"a \\\" b\"", TokenKind::literal},
                                            {";", TokenKind::punctuation}});
    CHECK(lex("t = \"\"\"\n  hi\n  \"\"\";").at(2).second == TokenKind::literal);
}

TEST_CASE("lexer errors carry a line") {
    try {
        tokenize_java("int a;\nString s = \"oops;\n");
        FAIL("expected LexError");
    } catch (const LexError& e) {
        CHECK(e.line() == 1);
    }
    CHECK_THROWS_AS(tokenize_java("/* never closed"), LexError);
}

TEST_CASE("positions are code-point columns") {
    const auto t = tokenize_java("a\n  bb = \"é\" c");
    REQUIRE(t.size() == 5);
    CHECK(t[1].line == 1);
    CHECK(t[1].col_start == 2);
    CHECK(t[1].col_end == 4);
    CHECK(t[4].col_start == 11);
}

TEST_CASE("bounding boxes") {
    CodePane pane;
    pane.origin_x_px = 100;
    pane.origin_y_px = 50;
    pane.cell_w_px = 10;
    pane.cell_h_px = 20;
    const auto l = layout_method("m", "int x;\nfoo", pane);
    REQUIRE(l.tokens.size() == 4);
    CHECK(l.tokens[0].bbox == Rect{100, 50, 130, 70});
    CHECK(l.tokens[3].bbox.y0 == pane.origin_y_px + pane.cell_h_px);
    CHECK(l.line_count() == 2);
}

TEST_CASE("tab expansion") {
    const auto l = layout_method("m", "\tfoo();", {});
    CHECK(l.tokens[0].col_start == 4);
    CHECK(l.tokens[0].col_end == 7);
    const auto l2 = layout_method("m", "ab\tc", {});
    CHECK(l2.tokens[1].col_start == 4);
}

TEST_CASE("comment and string AOIs never contain whitespace") {
    const auto l = layout_method("m", "x = \"a b\"; // x+y z\n/* p\n   q */", {});
    std::vector<std::string> words;
    for (const auto& t : l.tokens) {
        words.push_back(t.lexeme);
        CHECK(t.lexeme.find_first_of(" \t\n") == std::string::npos);
    }
    CHECK(words == std::vector<std::string>{"x", "=", "\"a", "b\"", ";", "//", "x+y", "z", "/*", "p", "q", "*/"});
    CHECK(l.tokens[10].line == 2);
    CHECK(l.tokens[10].col_start == 3);
}

TEST_CASE("pane validation") {
    CodePane p;
    p.cell_w_px = 0;
    CHECK_THROWS_AS(validate_pane(p), ParameterError);
    p = {};
    p.tab_width = 0;
    CHECK_THROWS_AS(validate_pane(p), ParameterError);
}

TEST_CASE("method corpus round trip and duplicate ids") {
    const std::vector<MethodSource> methods{{"a", "void f() {\n\tint \"q\";\n}"}, {"b", "x"}};
    std::ostringstream out;
    write_method_corpus(out, methods);
    std::istringstream in(out.str());
    const auto back = parse_method_corpus(in);
    REQUIRE(back.size() == 2);
    CHECK(back[0].source == methods[0].source);
    std::istringstream dup(out.str() + out.str());
    CHECK_THROWS_AS(parse_method_corpus(dup), ValidationError);
}

TEST_CASE("property: boxes disjoint, coverage exact, layout pure") {
    for (const auto& m : synthetic_methods(30, 11)) {
        CAPTURE(m.method_id);
        const auto l = layout_method(m.method_id, m.source, {});
        for (std::size_t i = 0; i < l.tokens.size(); ++i) {
            for (std::size_t j = i + 1; j < l.tokens.size(); ++j) CHECK_FALSE(l.tokens[i].bbox.overlaps(l.tokens[j].bbox));
        }
        // Each non-whitespace character (no tabs in these sources) sits in exactly one token span.
        std::size_t line = 0, col = 0;
        for (const char c : m.source) {
            if (c == '\n') {
                ++line;
                col = 0;
                continue;
            }
            if (c != ' ') {
                int owners = 0;
                for (const auto& t : l.tokens) owners += t.line == line && col >= t.col_start && col < t.col_end;
                CHECK(owners == 1);
            }
            ++col;
        }
        CHECK(layout_method(m.method_id, m.source, {}).tokens == l.tokens);
    }
}

}
