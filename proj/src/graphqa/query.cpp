// Copyright 2026 The SceneAgent Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "sceneagent/graphqa/query.hpp"

#include <cctype>
#include <set>

#include "sceneagent/error.hpp"
#include "sceneagent/text.hpp"

namespace sceneagent::graphqa {

std::string_view to_string(Field f) {
    switch (f) {
        case Field::t_start: return "t_start";
        case Field::t_end: return "t_end";
        case Field::category: return "category";
        case Field::relation: return "relation";
        case Field::confidence: return "confidence";
    }
    return "t_end";
}

std::string_view to_string(CompareOp op) {
    switch (op) {
        case CompareOp::eq: return "=";
        case CompareOp::ne: return "!=";
        case CompareOp::lt: return "<";
        case CompareOp::le: return "<=";
        case CompareOp::gt: return ">";
        case CompareOp::ge: return ">=";
    }
    return "=";
}

namespace {

enum class Tok {
    kw_match, kw_count, kw_exists, kw_where, kw_and, kw_return, kw_latest, kw_earliest, kw_limit,
    ident, string, number, lparen, rparen, colon, edge_open, edge_close, dot, op, end, invalid,
};

std::string_view describe(Tok t) {
    switch (t) {
        case Tok::kw_match: return "MATCH";
        case Tok::kw_count: return "COUNT";
        case Tok::kw_exists: return "EXISTS";
        case Tok::kw_where: return "WHERE";
        case Tok::kw_and: return "AND";
        case Tok::kw_return: return "RETURN";
        case Tok::kw_latest: return "LATEST";
        case Tok::kw_earliest: return "EARLIEST";
        case Tok::kw_limit: return "LIMIT";
        case Tok::ident: return "identifier";
        case Tok::string: return "string";
        case Tok::number: return "number";
        case Tok::lparen: return "(";
        case Tok::rparen: return ")";
        case Tok::colon: return ":";
        case Tok::edge_open: return "-[";
        case Tok::edge_close: return "]->";
        case Tok::dot: return ".";
        case Tok::op: return "comparison operator";
        case Tok::end: return "end of query";
        case Tok::invalid: return "invalid token";
    }
    return "?";
}

struct Token {
    Tok kind = Tok::end;
    std::string text;
    std::size_t offset = 0;  // 1-based
};

const std::pair<std::string_view, Tok> kKeywords[] = {
    {"MATCH", Tok::kw_match},   {"COUNT", Tok::kw_count},   {"EXISTS", Tok::kw_exists},
    {"WHERE", Tok::kw_where},   {"AND", Tok::kw_and},       {"RETURN", Tok::kw_return},
    {"LATEST", Tok::kw_latest}, {"EARLIEST", Tok::kw_earliest}, {"LIMIT", Tok::kw_limit},
};

class Lexer {
public:
    explicit Lexer(std::string_view src) : src_(src) {}

    Token next() {
        while (pos_ < src_.size() && std::isspace(static_cast<unsigned char>(src_[pos_]))) ++pos_;
        const std::size_t start = pos_;
        auto make = [&](Tok k, std::size_t len) {
            pos_ = start + len;
            return Token{k, std::string(src_.substr(start, len)), start + 1};
        };
        if (pos_ >= src_.size()) return Token{Tok::end, "", start + 1};
        const char c = src_[pos_];
        const auto peek = [&](std::size_t k) { return start + k < src_.size() ? src_[start + k] : '\0'; };
        switch (c) {
            case '(': return make(Tok::lparen, 1);
            case ')': return make(Tok::rparen, 1);
            case ':': return make(Tok::colon, 1);
            case '.': return make(Tok::dot, 1);
            case '-': return peek(1) == '[' ? make(Tok::edge_open, 2) : make(Tok::invalid, 1);
            case ']':
                return (peek(1) == '-' && peek(2) == '>') ? make(Tok::edge_close, 3) : make(Tok::invalid, 1);
            case '=': return make(Tok::op, 1);
            case '!': return peek(1) == '=' ? make(Tok::op, 2) : make(Tok::invalid, 1);
            case '<':
            case '>': return peek(1) == '=' ? make(Tok::op, 2) : make(Tok::op, 1);
            case '\'': {
                const auto close = src_.find('\'', start + 1);
                if (close == std::string_view::npos) return make(Tok::invalid, src_.size() - start);
                pos_ = close + 1;
                return Token{Tok::string, std::string(src_.substr(start + 1, close - start - 1)), start + 1};
            }
            default: break;
        }
        if (std::isdigit(static_cast<unsigned char>(c))) {
            std::size_t len = 0;
            while (std::isdigit(static_cast<unsigned char>(peek(len)))) ++len;
            if (peek(len) == '.' && std::isdigit(static_cast<unsigned char>(peek(len + 1)))) {
                ++len;
                while (std::isdigit(static_cast<unsigned char>(peek(len)))) ++len;
            }
            return make(Tok::number, len);
        }
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
            std::size_t len = 0;
            while (std::isalnum(static_cast<unsigned char>(peek(len))) || peek(len) == '_') ++len;
            const auto word = src_.substr(start, len);
            const auto upper = text::to_upper(word);
            for (const auto& [kw, tok] : kKeywords) {
                if (upper == kw) return make(tok, len);
            }
            for (char ch : word) {
                if (std::isupper(static_cast<unsigned char>(ch))) return make(Tok::invalid, len);
            }
            if (std::isdigit(static_cast<unsigned char>(word[0]))) return make(Tok::invalid, len);
            return make(Tok::ident, len);
        }
        return make(Tok::invalid, 1);
    }

private:
    std::string_view src_;
    std::size_t pos_ = 0;
};

class Parser {
public:
    explicit Parser(std::string_view src) : lexer_(src) { advance(); }

    QueryAst parse() {
        QueryAst ast;
        if (accept(Tok::kw_match)) {
            ast.form = QueryForm::match;
        } else if (accept(Tok::kw_count)) {
            ast.form = QueryForm::count;
        } else if (accept(Tok::kw_exists)) {
            ast.form = QueryForm::exists;
        } else {
            fail({Tok::kw_match, Tok::kw_count, Tok::kw_exists});
        }
        ast.src = node_spec();
        expect(Tok::edge_open, {Tok::edge_open});
        ast.edge.var = expect(Tok::ident, {Tok::ident}).text;
        if (accept(Tok::colon)) ast.edge.relation = expect(Tok::ident, {Tok::ident}).text;
        expect(Tok::edge_close, {Tok::colon, Tok::edge_close});
        ast.dst = node_spec();

        if (accept(Tok::kw_where)) {
            ast.where.push_back(condition());
            while (accept(Tok::kw_and)) ast.where.push_back(condition());
        }
        if (ast.form == QueryForm::match) {
            expect(Tok::kw_return, ast.where.empty() ? std::vector{Tok::kw_where, Tok::kw_return}
                                                     : std::vector{Tok::kw_and, Tok::kw_return});
            ast.selector = expect(Tok::ident, {Tok::ident}).text;
            if (accept(Tok::kw_latest)) {
                ast.order = Order::latest;
            } else if (accept(Tok::kw_earliest)) {
                ast.order = Order::earliest;
            }
            if (accept(Tok::kw_limit)) {
                const auto tok = expect(Tok::number, {Tok::number});
                if (tok.text.find('.') != std::string::npos || std::stoull(tok.text) == 0) {
                    throw syntax_error(tok, "LIMIT must be a positive integer", {Tok::number});
                }
                ast.limit = std::stoull(tok.text);
            }
            if (current_.kind != Tok::end) {
                std::vector<Tok> exp;
                if (ast.order == Order::none && !ast.limit) exp = {Tok::kw_latest, Tok::kw_earliest};
                if (!ast.limit) exp.push_back(Tok::kw_limit);
                exp.push_back(Tok::end);
                fail(exp);
            }
        } else if (current_.kind != Tok::end) {
            fail(ast.where.empty() ? std::vector{Tok::kw_where, Tok::end} : std::vector{Tok::kw_and, Tok::end});
        }
        return ast;
    }

private:
    NodeSpec node_spec() {
        NodeSpec spec;
        expect(Tok::lparen, {Tok::lparen});
        spec.var = expect(Tok::ident, {Tok::ident}).text;
        if (accept(Tok::colon)) spec.label = expect(Tok::ident, {Tok::ident}).text;
        expect(Tok::rparen, {Tok::colon, Tok::rparen});
        return spec;
    }

    Condition condition() {
        Condition c;
        c.var = expect(Tok::ident, {Tok::ident}).text;
        expect(Tok::dot, {Tok::dot});
        const auto field_tok = expect(Tok::ident, {Tok::ident});
        const std::pair<std::string_view, Field> fields[] = {{"t_start", Field::t_start},
                                                             {"t_end", Field::t_end},
                                                             {"category", Field::category},
                                                             {"relation", Field::relation},
                                                             {"confidence", Field::confidence}};
        bool found = false;
        for (const auto& [name, f] : fields) {
            if (field_tok.text == name) {
                c.field = f;
                found = true;
            }
        }
        if (!found) {
            throw syntax_error(field_tok, "unknown field '" + field_tok.text +
                                              "' (expected t_start, t_end, category, relation or confidence)",
                               {Tok::ident});
        }
        const auto op_tok = expect(Tok::op, {Tok::op});
        const std::pair<std::string_view, CompareOp> ops[] = {{"=", CompareOp::eq},  {"!=", CompareOp::ne},
                                                              {"<", CompareOp::lt},  {"<=", CompareOp::le},
                                                              {">", CompareOp::gt},  {">=", CompareOp::ge}};
        for (const auto& [name, op] : ops) {
            if (op_tok.text == name) c.op = op;
        }
        if (current_.kind == Tok::string) {
            c.literal = Literal{true, current_.text, 0.0};
        } else if (current_.kind == Tok::number) {
            c.literal = Literal{false, current_.text, std::stod(current_.text)};
        } else {
            fail({Tok::string, Tok::number});
        }
        advance();
        return c;
    }

    void advance() { current_ = lexer_.next(); }

    bool accept(Tok kind) {
        if (current_.kind != kind) return false;
        advance();
        return true;
    }

    Token expect(Tok kind, const std::vector<Tok>& expected) {
        if (current_.kind != kind) fail(expected);
        Token tok = current_;
        advance();
        return tok;
    }

    static Error syntax_error(const Token& at, const std::string& message, const std::vector<Tok>& expected) {
        nlohmann::json exp = nlohmann::json::array();
        for (auto t : expected) exp.push_back(describe(t));
        return Error(ErrorCode::syntax_error, "syntax error at offset " + std::to_string(at.offset) + ": " + message,
                     nlohmann::json{{"offset", at.offset}, {"expected", exp}, {"found", at.text}});
    }

    [[noreturn]] void fail(const std::vector<Tok>& expected) {
        std::string want;
        for (std::size_t i = 0; i < expected.size(); ++i) {
            if (i) want += i + 1 == expected.size() ? " or " : ", ";
            want += "'" + std::string(describe(expected[i])) + "'";
        }
        const std::string found = current_.kind == Tok::end ? "end of query" : "'" + current_.text + "'";
        throw syntax_error(current_, "expected " + want + ", found " + found, expected);
    }

    Lexer lexer_;
    Token current_;
};

}  // namespace

void check_query(const QueryAst& ast) {
    const std::set<std::string> node_vars{ast.src.var, ast.dst.var};
    if (ast.src.var == ast.dst.var || ast.src.var == ast.edge.var || ast.dst.var == ast.edge.var) {
        throw Error(ErrorCode::invalid_argument, "pattern variables must be distinct");
    }
    auto bound = [&](const std::string& v) { return node_vars.contains(v) || v == ast.edge.var; };
    if (ast.form == QueryForm::match) {
        if (!ast.selector || !bound(*ast.selector)) {
            throw Error(ErrorCode::unbound_variable, "RETURN variable '" + ast.selector.value_or("") + "' is not bound");
        }
    }
    for (const auto& c : ast.where) {
        if (!bound(c.var)) throw Error(ErrorCode::unbound_variable, "variable '" + c.var + "' is not bound");
        const bool is_edge = c.var == ast.edge.var;
        const bool string_field = c.field == Field::category || c.field == Field::relation;
        if (is_edge && c.field == Field::category) {
            throw Error(ErrorCode::invalid_field, "edge variable '" + c.var + "' has no field category");
        }
        if (!is_edge && (c.field == Field::relation || c.field == Field::confidence)) {
            throw Error(ErrorCode::invalid_field,
                        "node variable '" + c.var + "' has no field " + std::string(to_string(c.field)));
        }
        if (string_field != c.literal.is_string) {
            throw Error(ErrorCode::invalid_field,
                        "field " + std::string(to_string(c.field)) + " compared with a literal of the wrong type");
        }
        if (string_field && c.op != CompareOp::eq && c.op != CompareOp::ne) {
            throw Error(ErrorCode::invalid_field, "string fields only support = and !=");
        }
    }
}

QueryAst parse_query(std::string_view text) {
    Parser parser(text);
    QueryAst ast = parser.parse();
    check_query(ast);
    return ast;
}

std::string render_query(const QueryAst& ast) {
    auto node = [](const NodeSpec& n) { return "(" + n.var + (n.label ? ":" + *n.label : "") + ")"; };
    std::string out;
    switch (ast.form) {
        case QueryForm::match: out = "MATCH "; break;
        case QueryForm::count: out = "COUNT "; break;
        case QueryForm::exists: out = "EXISTS "; break;
    }
    out += node(ast.src) + "-[" + ast.edge.var + (ast.edge.relation ? ":" + *ast.edge.relation : "") + "]->" +
           node(ast.dst);
    for (std::size_t i = 0; i < ast.where.size(); ++i) {
        const auto& c = ast.where[i];
        out += i == 0 ? " WHERE " : " AND ";
        out += c.var + "." + std::string(to_string(c.field)) + " " + std::string(to_string(c.op)) + " ";
        out += c.literal.is_string ? "'" + c.literal.text + "'" : c.literal.text;
    }
    if (ast.form == QueryForm::match) {
        out += " RETURN " + ast.selector.value_or("");
        if (ast.order == Order::latest) out += " LATEST";
        if (ast.order == Order::earliest) out += " EARLIEST";
        if (ast.limit) out += " LIMIT " + std::to_string(*ast.limit);
    }
    return out;
}

}  // namespace sceneagent::graphqa
