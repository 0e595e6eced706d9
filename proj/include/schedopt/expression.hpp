#pragma once

#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "schedopt/parameter.hpp"

namespace schedopt {

/// Outcome of evaluating a constraint on a (possibly partial) assignment.
enum class Truth { violated, satisfied, undecided };

/// A parsed known constraint.
///
/// Grammar (lowest precedence first):
///
///     expr    := and ( "||" and )*
///     and     := not ( "&&" not )*
///     not     := "!" not | compare
///     compare := sum ( ("<"|"<="|">"|">="|"=="|"!=") sum )?
///     sum     := product ( ("+"|"-") product )*
///     product := unary ( ("*"|"/"|"%") unary )*
///     unary   := "-" unary | primary
///     primary := number | string | identifier | "(" expr ")"
///
/// Identifiers name integer, ordinal, real or categorical parameters.
/// Categorical parameters compare (== / !=) against quoted labels or other
/// categoricals. Arithmetic on two integral operands is integral (truncating
/// division, C remainder); otherwise it is floating point. Division or
/// remainder by zero makes the whole constraint false.
class ConstraintExpr {
public:
    enum class NodeKind { number, label, parameter, unary, binary };
    enum class Op { add, sub, mul, div, mod, neg, lt, le, gt, ge, eq, ne, land, lor, lnot };
    enum class Type { number, boolean, label, category };

    struct Node {
        NodeKind kind = NodeKind::number;
        Type type = Type::number;
        Op op = Op::add;
        double number = 0.0;
        bool integral = false;
        std::string label;
        std::size_t parameter = 0;
        int lhs = -1;
        int rhs = -1;
    };

    const std::string& text() const { return text_; }
    /// Indices (into the space) of every parameter the expression reads; sorted, unique.
    const std::vector<std::size_t>& variables() const { return variables_; }
    const std::vector<Node>& nodes() const { return nodes_; }
    int root() const { return root_; }

    /// `assignment[i]` points at the value of parameter i, or is null when unassigned.
    Truth evaluate(std::span<const Value* const> assignment) const;
    bool evaluate(const Configuration& cfg) const;

private:
    friend ConstraintExpr parse_constraint(std::string_view, std::span<const Parameter>);

    std::string text_;
    std::vector<Node> nodes_;
    std::vector<std::size_t> variables_;
    int root_ = -1;
};

/// Parses and type-checks `text`, resolving identifiers against `parameters`.
/// Throws ParseError carrying the 1-based column of the offending token.
ConstraintExpr parse_constraint(std::string_view text, std::span<const Parameter> parameters);

}  // namespace schedopt
