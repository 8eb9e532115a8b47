#pragma once

#include <cctype>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "graph.hpp"

namespace cfbounds {

class ParseError : public std::runtime_error {
public:
    ParseError(int line, int column, const std::string& what)
        : std::runtime_error("line " + std::to_string(line) + ", column " + std::to_string(column) + ": " + what),
          line_(line),
          column_(column) {}
    int line() const { return line_; }
    int column() const { return column_; }

private:
    int line_;
    int column_;
};

// Raw parse of a graph description; may mix hidden vertices and explicit
// bidirected edges.
struct GraphFile {
    std::vector<Variable> observed;
    std::vector<std::string> hidden;
    std::vector<std::pair<std::string, std::string>> directed;
    std::vector<std::pair<std::string, std::string>> bidirected;

    CausalGraph to_causal_graph() const {
        if (!bidirected.empty()) {
            const auto& [a, b] = bidirected.front();
            throw std::invalid_argument("Cannot build a causal graph with bidirected edge (" + a + " <-> " + b + ")");
        }
        return CausalGraph(observed, hidden, directed);
    }

    // Latent projection of the hidden-variable part, merged with the
    // explicitly written bidirected edges.
    Admg to_admg() const {
        const CausalGraph cg(observed, hidden, directed);
        const Admg base = latent_projection(cg);
        std::set<std::pair<std::string, std::string>> seen;
        std::vector<std::pair<std::string, std::string>> bi = base.bidirected();
        for (const auto& [a, b] : bi) seen.insert(a < b ? std::make_pair(a, b) : std::make_pair(b, a));
        for (const auto& [a, b] : bidirected) {
            if (seen.insert(a < b ? std::make_pair(a, b) : std::make_pair(b, a)).second) {
                bi.push_back({a, b});
            }
        }
        return Admg(base.vertices(), base.directed(), std::move(bi));
    }
};

namespace detail {

struct Token {
    enum class Kind { Ident, Arrow, BiArrow, LBrace, RBrace, Comma, Semicolon };
    Kind kind;
    std::string text;
    int column;
};

inline std::vector<Token> lex_line(const std::string& line, int lineno) {
    std::vector<Token> out;
    std::size_t i = 0;
    while (i < line.size()) {
        const char c = line[i];
        if (c == '#') break;
        if (std::isspace(static_cast<unsigned char>(c))) {
            ++i;
            continue;
        }
        const int col = static_cast<int>(i) + 1;
        if (std::isalnum(static_cast<unsigned char>(c)) || c == '_') {
            std::size_t j = i;
            while (j < line.size() &&
                   (std::isalnum(static_cast<unsigned char>(line[j])) || line[j] == '_')) {
                ++j;
            }
            out.push_back({Token::Kind::Ident, line.substr(i, j - i), col});
            i = j;
        } else if (line.compare(i, 3, "<->") == 0) {
            out.push_back({Token::Kind::BiArrow, "<->", col});
            i += 3;
        } else if (line.compare(i, 2, "->") == 0) {
            out.push_back({Token::Kind::Arrow, "->", col});
            i += 2;
        } else if (c == '{') {
            out.push_back({Token::Kind::LBrace, "{", col});
            ++i;
        } else if (c == '}') {
            out.push_back({Token::Kind::RBrace, "}", col});
            ++i;
        } else if (c == ',') {
            out.push_back({Token::Kind::Comma, ",", col});
            ++i;
        } else if (c == ';') {
            out.push_back({Token::Kind::Semicolon, ";", col});
            ++i;
        } else {
            throw ParseError(lineno, col, std::string("unexpected character '") + c + "'");
        }
    }
    return out;
}

}  // namespace detail

// Parses the graph description language: one statement per line, of the
// forms
//   node A;              node A in {v1, v2, v3};
//   hidden H;
//   A -> B;              A <-> B;
// with '#' starting a comment.
inline GraphFile parse_graph(const std::string& text) {
    using detail::Token;
    GraphFile gf;
    std::set<std::string> declared;
    std::set<std::string> hidden_set;
    std::set<std::pair<std::string, std::string>> dir_seen;
    std::set<std::pair<std::string, std::string>> bi_seen;

    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const std::vector<Token> toks = detail::lex_line(line, lineno);
        if (toks.empty()) continue;
        std::size_t p = 0;
        const auto peek = [&]() -> const Token* { return p < toks.size() ? &toks[p] : nullptr; };
        const auto end_column = [&]() {
            return toks.empty() ? 1 : toks.back().column + static_cast<int>(toks.back().text.size());
        };
        const auto expect = [&](Token::Kind k, const std::string& what) -> const Token& {
            if (p >= toks.size()) throw ParseError(lineno, end_column(), "expected " + what);
            if (toks[p].kind != k) {
                throw ParseError(lineno, toks[p].column, "expected " + what + " before '" + toks[p].text + "'");
            }
            return toks[p++];
        };
        const auto expect_name = [&](const std::string& what) -> const Token& {
            const Token& t = expect(Token::Kind::Ident, what);
            if (std::isdigit(static_cast<unsigned char>(t.text[0]))) {
                throw ParseError(lineno, t.column, "invalid variable name '" + t.text + "'");
            }
            return t;
        };
        const auto finish = [&]() {
            expect(Token::Kind::Semicolon, "';'");
            if (p != toks.size()) {
                throw ParseError(lineno, toks[p].column, "unexpected '" + toks[p].text + "' after ';'");
            }
        };

        if (toks[0].kind == Token::Kind::Ident && toks[0].text == "node") {
            ++p;
            const Token& name = expect_name("variable name");
            if (!declared.insert(name.text).second) {
                throw ParseError(lineno, name.column, "duplicate declaration of '" + name.text + "'");
            }
            Variable v;
            v.name = name.text;
            if (peek() && peek()->kind == Token::Kind::Ident && peek()->text == "in") {
                ++p;
                expect(Token::Kind::LBrace, "'{'");
                v.domain.clear();
                for (;;) {
                    const Token& val = expect(Token::Kind::Ident, "domain value");
                    if (std::find(v.domain.begin(), v.domain.end(), val.text) != v.domain.end()) {
                        throw ParseError(lineno, val.column, "duplicate domain value '" + val.text + "'");
                    }
                    v.domain.push_back(val.text);
                    if (peek() && peek()->kind == Token::Kind::Comma) {
                        ++p;
                        continue;
                    }
                    break;
                }
                const Token& rb = expect(Token::Kind::RBrace, "'}'");
                if (v.domain.size() < 2) {
                    throw ParseError(lineno, rb.column, "variable '" + v.name + "' needs at least two domain values");
                }
            }
            finish();
            gf.observed.push_back(std::move(v));
        } else if (toks[0].kind == Token::Kind::Ident && toks[0].text == "hidden") {
            ++p;
            const Token& name = expect_name("variable name");
            if (!declared.insert(name.text).second) {
                throw ParseError(lineno, name.column, "duplicate declaration of '" + name.text + "'");
            }
            finish();
            hidden_set.insert(name.text);
            gf.hidden.push_back(name.text);
        } else {
            const Token& lhs = expect_name("statement or variable name");
            if (!declared.count(lhs.text)) {
                throw ParseError(lineno, lhs.column, "unknown identifier '" + lhs.text + "'");
            }
            if (!peek()) throw ParseError(lineno, end_column(), "expected '->' or '<->'");
            const bool bi = peek()->kind == Token::Kind::BiArrow;
            if (!bi && peek()->kind != Token::Kind::Arrow) {
                throw ParseError(lineno, peek()->column, "expected '->' or '<->' before '" + peek()->text + "'");
            }
            ++p;
            const Token& rhs = expect_name("variable name");
            if (!declared.count(rhs.text)) {
                throw ParseError(lineno, rhs.column, "unknown identifier '" + rhs.text + "'");
            }
            finish();
            if (lhs.text == rhs.text) {
                throw ParseError(lineno, lhs.column, "self loop on '" + lhs.text + "'");
            }
            if (bi) {
                if (hidden_set.count(lhs.text)) {
                    throw ParseError(lineno, lhs.column, "bidirected edge endpoint '" + lhs.text + "' is hidden");
                }
                if (hidden_set.count(rhs.text)) {
                    throw ParseError(lineno, rhs.column, "bidirected edge endpoint '" + rhs.text + "' is hidden");
                }
                const auto key = lhs.text < rhs.text ? std::make_pair(lhs.text, rhs.text)
                                                     : std::make_pair(rhs.text, lhs.text);
                if (!bi_seen.insert(key).second) {
                    throw ParseError(lineno, lhs.column, "duplicate edge (" + lhs.text + " <-> " + rhs.text + ")");
                }
                gf.bidirected.push_back({lhs.text, rhs.text});
            } else {
                if (!dir_seen.insert({lhs.text, rhs.text}).second) {
                    throw ParseError(lineno, lhs.column, "duplicate edge (" + lhs.text + " -> " + rhs.text + ")");
                }
                gf.directed.push_back({lhs.text, rhs.text});
            }
        }
    }
    return gf;
}

inline GraphFile load_graph_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("Cannot open file '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_graph(buf.str());
}

}  // namespace cfbounds
