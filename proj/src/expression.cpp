#include "schedopt/expression.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>

namespace schedopt {

namespace {

enum class Tok { number, ident, string, op, lparen, rparen, end };

struct Token {
    Tok kind;
    std::string text;
    std::size_t column;  // 1-based
};

std::vector<Token> tokenize(std::string_view src) {
    std::vector<Token> out;
    std::size_t i = 0;
    while (i < src.size()) {
        const char c = src[i];
        const std::size_t col = i + 1;
        if (std::isspace(static_cast<unsigned char>(c))) {
            ++i;
        } else if (std::isdigit(static_cast<unsigned char>(c)) ||
                   (c == '.' && i + 1 < src.size() && std::isdigit(static_cast<unsigned char>(src[i + 1])))) {
            std::size_t j = i;
            while (j < src.size() && (std::isdigit(static_cast<unsigned char>(src[j])) || src[j] == '.')) ++j;
            if (j < src.size() && (src[j] == 'e' || src[j] == 'E')) {
                std::size_t k = j + 1;
                if (k < src.size() && (src[k] == '+' || src[k] == '-')) ++k;
                if (k < src.size() && std::isdigit(static_cast<unsigned char>(src[k]))) {
                    j = k;
                    while (j < src.size() && std::isdigit(static_cast<unsigned char>(src[j]))) ++j;
                }
            }
            out.push_back({Tok::number, std::string(src.substr(i, j - i)), col});
            i = j;
        } else if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
            std::size_t j = i;
            while (j < src.size() && (std::isalnum(static_cast<unsigned char>(src[j])) || src[j] == '_')) ++j;
            out.push_back({Tok::ident, std::string(src.substr(i, j - i)), col});
            i = j;
        } else if (c == '"' || c == '\'') {
            std::size_t j = i + 1;
            while (j < src.size() && src[j] != c) ++j;
            if (j >= src.size()) throw ParseError(col, "unterminated string literal");
            out.push_back({Tok::string, std::string(src.substr(i + 1, j - i - 1)), col});
            i = j + 1;
        } else if (c == '(') {
            out.push_back({Tok::lparen, "(", col});
            ++i;
        } else if (c == ')') {
            out.push_back({Tok::rparen, ")", col});
            ++i;
        } else {
            static constexpr std::string_view two[] = {"<=", ">=", "==", "!=", "&&", "||"};
            std::string_view rest = src.substr(i);
            bool matched = false;
            for (auto op : two) {
                if (rest.starts_with(op)) {
                    out.push_back({Tok::op, std::string(op), col});
                    i += 2;
                    matched = true;
                    break;
                }
            }
            if (matched) continue;
            if (std::string_view("+-*/%<>!").find(c) != std::string_view::npos) {
                out.push_back({Tok::op, std::string(1, c), col});
                ++i;
            } else {
                throw ParseError(col, std::string("unexpected character '") + c + "'");
            }
        }
    }
    out.push_back({Tok::end, "", src.size() + 1});
    return out;
}

using Node = ConstraintExpr::Node;
using Op = ConstraintExpr::Op;
using Type = ConstraintExpr::Type;
using NodeKind = ConstraintExpr::NodeKind;

class Parser {
public:
    Parser(std::vector<Token> tokens, std::span<const Parameter> params, std::vector<Node>& nodes)
        : tokens_(std::move(tokens)), params_(params), nodes_(nodes) {}

    int parse() {
        int root = parse_or();
        if (peek().kind != Tok::end) throw ParseError(peek().column, "unexpected '" + peek().text + "'");
        return root;
    }

private:
    const Token& peek() const { return tokens_[pos_]; }
    const Token& advance() { return tokens_[pos_++]; }
    bool accept_op(std::string_view op) {
        if (peek().kind == Tok::op && peek().text == op) {
            ++pos_;
            return true;
        }
        return false;
    }

    int add(Node n) {
        nodes_.push_back(std::move(n));
        return static_cast<int>(nodes_.size()) - 1;
    }

    Type type_of(int i) const { return nodes_[i].type; }

    int binary(Op op, int lhs, int rhs, Type type) {
        Node n;
        n.kind = NodeKind::binary;
        n.op = op;
        n.lhs = lhs;
        n.rhs = rhs;
        n.type = type;
        return add(std::move(n));
    }

    void require(int node, Type t, std::size_t col, std::string_view what) {
        if (type_of(node) != t) throw ParseError(col, std::string("type error: ") + std::string(what));
    }

    int parse_or() {
        int lhs = parse_and();
        while (peek().kind == Tok::op && peek().text == "||") {
            const auto col = advance().column;
            int rhs = parse_and();
            require(lhs, Type::boolean, col, "'||' needs boolean operands");
            require(rhs, Type::boolean, col, "'||' needs boolean operands");
            lhs = binary(Op::lor, lhs, rhs, Type::boolean);
        }
        return lhs;
    }

    int parse_and() {
        int lhs = parse_not();
        while (peek().kind == Tok::op && peek().text == "&&") {
            const auto col = advance().column;
            int rhs = parse_not();
            require(lhs, Type::boolean, col, "'&&' needs boolean operands");
            require(rhs, Type::boolean, col, "'&&' needs boolean operands");
            lhs = binary(Op::land, lhs, rhs, Type::boolean);
        }
        return lhs;
    }

    int parse_not() {
        if (peek().kind == Tok::op && peek().text == "!") {
            const auto col = advance().column;
            int operand = parse_not();
            require(operand, Type::boolean, col, "'!' needs a boolean operand");
            Node n;
            n.kind = NodeKind::unary;
            n.op = Op::lnot;
            n.lhs = operand;
            n.type = Type::boolean;
            return add(std::move(n));
        }
        return parse_compare();
    }

    int parse_compare() {
        int lhs = parse_sum();
        if (peek().kind != Tok::op) return lhs;
        static const std::pair<std::string_view, Op> ops[] = {{"<", Op::lt},  {"<=", Op::le}, {">", Op::gt},
                                                              {">=", Op::ge}, {"==", Op::eq}, {"!=", Op::ne}};
        for (auto [text, op] : ops) {
            if (peek().text != text) continue;
            const auto col = advance().column;
            int rhs = parse_sum();
            const Type a = type_of(lhs);
            const Type b = type_of(rhs);
            const bool numeric = a == Type::number && b == Type::number;
            const bool categorical = (a == Type::category || a == Type::label) &&
                                     (b == Type::category || b == Type::label) &&
                                     (a == Type::category || b == Type::category);
            if (!numeric && !categorical)
                throw ParseError(col, "type error: cannot compare these operands with '" + std::string(text) + "'");
            if (categorical && op != Op::eq && op != Op::ne)
                throw ParseError(col, "type error: categorical values only support == and !=");
            if (categorical) check_label(lhs, rhs, col);
            return binary(op, lhs, rhs, Type::boolean);
        }
        return lhs;
    }

    void check_label(int lhs, int rhs, std::size_t col) {
        auto check = [&](int cat, int lit) {
            if (nodes_[cat].kind != NodeKind::parameter || nodes_[lit].kind != NodeKind::label) return;
            const auto& labels = params_[nodes_[cat].parameter].labels();
            if (std::find(labels.begin(), labels.end(), nodes_[lit].label) == labels.end())
                throw ParseError(col, "'" + nodes_[lit].label + "' is not a label of parameter '" +
                                          params_[nodes_[cat].parameter].name() + "'");
        };
        check(lhs, rhs);
        check(rhs, lhs);
    }

    int parse_sum() {
        int lhs = parse_product();
        while (peek().kind == Tok::op && (peek().text == "+" || peek().text == "-")) {
            const auto& tok = advance();
            const Op op = tok.text == "+" ? Op::add : Op::sub;
            int rhs = parse_product();
            require(lhs, Type::number, tok.column, "arithmetic needs numeric operands");
            require(rhs, Type::number, tok.column, "arithmetic needs numeric operands");
            lhs = binary(op, lhs, rhs, Type::number);
        }
        return lhs;
    }

    int parse_product() {
        int lhs = parse_unary();
        while (peek().kind == Tok::op && (peek().text == "*" || peek().text == "/" || peek().text == "%")) {
            const auto& tok = advance();
            const Op op = tok.text == "*" ? Op::mul : tok.text == "/" ? Op::div : Op::mod;
            int rhs = parse_unary();
            require(lhs, Type::number, tok.column, "arithmetic needs numeric operands");
            require(rhs, Type::number, tok.column, "arithmetic needs numeric operands");
            lhs = binary(op, lhs, rhs, Type::number);
        }
        return lhs;
    }

    int parse_unary() {
        if (peek().kind == Tok::op && peek().text == "-") {
            const auto col = advance().column;
            int operand = parse_unary();
            require(operand, Type::number, col, "unary '-' needs a numeric operand");
            Node n;
            n.kind = NodeKind::unary;
            n.op = Op::neg;
            n.lhs = operand;
            n.type = Type::number;
            return add(std::move(n));
        }
        return parse_primary();
    }

    int parse_primary() {
        const Token& tok = peek();
        switch (tok.kind) {
            case Tok::number: {
                advance();
                Node n;
                n.kind = NodeKind::number;
                n.type = Type::number;
                const char* first = tok.text.data();
                const char* last = first + tok.text.size();
                auto res = std::from_chars(first, last, n.number);
                if (res.ec != std::errc() || res.ptr != last)
                    throw ParseError(tok.column, "malformed number '" + tok.text + "'");
                n.integral = tok.text.find_first_of(".eE") == std::string::npos;
                return add(std::move(n));
            }
            case Tok::string: {
                advance();
                Node n;
                n.kind = NodeKind::label;
                n.type = Type::label;
                n.label = tok.text;
                return add(std::move(n));
            }
            case Tok::ident: {
                advance();
                auto it = std::find_if(params_.begin(), params_.end(),
                                       [&](const Parameter& p) { return p.name() == tok.text; });
                if (it == params_.end()) throw ParseError(tok.column, "unknown identifier '" + tok.text + "'");
                if (it->kind() == ParameterKind::permutation)
                    throw ParseError(tok.column,
                                     "permutation parameter '" + tok.text + "' cannot appear in a constraint");
                Node n;
                n.kind = NodeKind::parameter;
                n.parameter = static_cast<std::size_t>(it - params_.begin());
                n.type = it->kind() == ParameterKind::categorical ? Type::category : Type::number;
                return add(std::move(n));
            }
            case Tok::lparen: {
                advance();
                int inner = parse_or();
                if (peek().kind != Tok::rparen) throw ParseError(peek().column, "expected ')'");
                advance();
                return inner;
            }
            case Tok::end: throw ParseError(tok.column, "unexpected end of input");
            default: throw ParseError(tok.column, "unexpected '" + tok.text + "'");
        }
    }

    std::vector<Token> tokens_;
    std::span<const Parameter> params_;
    std::vector<Node>& nodes_;
    std::size_t pos_ = 0;
};

struct ArithmeticFault {};

struct Scalar {
    double value = 0.0;
    bool integral = false;
    const std::string* text = nullptr;  // label / categorical value
};

class Evaluator {
public:
    Evaluator(const std::vector<Node>& nodes, std::span<const Value* const> assignment)
        : nodes_(nodes), assignment_(assignment) {}

    bool truth(int i) const {
        const Node& n = nodes_[i];
        if (n.kind == NodeKind::unary) return !truth(n.lhs);  // lnot
        switch (n.op) {
            case Op::land: return truth(n.lhs) && truth(n.rhs);
            case Op::lor: return truth(n.lhs) || truth(n.rhs);
            default: break;
        }
        const Scalar a = scalar(n.lhs);
        const Scalar b = scalar(n.rhs);
        if (a.text || b.text) {
            const bool equal = a.text && b.text && *a.text == *b.text;
            return n.op == Op::eq ? equal : !equal;
        }
        switch (n.op) {
            case Op::lt: return a.value < b.value;
            case Op::le: return a.value <= b.value;
            case Op::gt: return a.value > b.value;
            case Op::ge: return a.value >= b.value;
            case Op::eq: return a.value == b.value;
            case Op::ne: return a.value != b.value;
            default: return false;
        }
    }

    Scalar scalar(int i) const {
        const Node& n = nodes_[i];
        switch (n.kind) {
            case NodeKind::number: return {n.number, n.integral, nullptr};
            case NodeKind::label: return {0.0, false, &n.label};
            case NodeKind::parameter: {
                const Value& v = *assignment_[n.parameter];
                if (auto d = std::get_if<double>(&v)) return {*d, std::floor(*d) == *d, nullptr};
                if (auto k = std::get_if<std::int64_t>(&v)) return {static_cast<double>(*k), true, nullptr};
                if (auto s = std::get_if<std::string>(&v)) return {0.0, false, s};
                return {};
            }
            case NodeKind::unary: {
                Scalar s = scalar(n.lhs);
                s.value = -s.value;
                return s;
            }
            case NodeKind::binary: break;
        }
        const Scalar a = scalar(n.lhs);
        const Scalar b = scalar(n.rhs);
        const bool integral = a.integral && b.integral;
        switch (n.op) {
            case Op::add: return {a.value + b.value, integral, nullptr};
            case Op::sub: return {a.value - b.value, integral, nullptr};
            case Op::mul: return {a.value * b.value, integral, nullptr};
            case Op::div:
                if (b.value == 0.0) throw ArithmeticFault{};
                return {integral ? std::trunc(a.value / b.value) : a.value / b.value, integral, nullptr};
            case Op::mod:
                if (b.value == 0.0) throw ArithmeticFault{};
                if (integral) {
                    const auto x = static_cast<long long>(a.value);
                    const auto y = static_cast<long long>(b.value);
                    return {static_cast<double>(x % y), true, nullptr};
                }
                return {std::fmod(a.value, b.value), false, nullptr};
            default: return {};
        }
    }

private:
    const std::vector<Node>& nodes_;
    std::span<const Value* const> assignment_;
};

}  // namespace

ConstraintExpr parse_constraint(std::string_view text, std::span<const Parameter> parameters) {
    ConstraintExpr expr;
    expr.text_ = std::string(text);
    Parser parser(tokenize(text), parameters, expr.nodes_);
    expr.root_ = parser.parse();
    if (expr.nodes_[expr.root_].type != Type::boolean)
        throw ParseError(1, "type error: constraint must be a boolean expression");
    for (const auto& n : expr.nodes_) {
        if (n.kind == NodeKind::parameter) expr.variables_.push_back(n.parameter);
    }
    std::sort(expr.variables_.begin(), expr.variables_.end());
    expr.variables_.erase(std::unique(expr.variables_.begin(), expr.variables_.end()), expr.variables_.end());
    return expr;
}

Truth ConstraintExpr::evaluate(std::span<const Value* const> assignment) const {
    for (auto v : variables_) {
        if (v >= assignment.size() || assignment[v] == nullptr) return Truth::undecided;
    }
    try {
        return Evaluator(nodes_, assignment).truth(root_) ? Truth::satisfied : Truth::violated;
    } catch (const ArithmeticFault&) {
        return Truth::violated;
    }
}

bool ConstraintExpr::evaluate(const Configuration& cfg) const {
    std::vector<const Value*> ptrs(cfg.values.size());
    for (std::size_t i = 0; i < cfg.values.size(); ++i) ptrs[i] = &cfg.values[i];
    return evaluate(ptrs) == Truth::satisfied;
}

}  // namespace schedopt
