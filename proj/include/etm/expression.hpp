#pragma once

// Closed-form initial profiles in the single variable x.
//
// Grammar:  expr  := term (('+' | '-') term)*
//           term  := unary (('*' | '/') unary)*
//           unary := ('+' | '-') unary | power
//           power := primary ('^' unary)?
//           primary := number | x | pi | e | func '(' expr ')' | '(' expr ')'
//           func  := exp | log | sqrt | sin | cos | abs

#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace etm {

class Expression {
public:
    /// Throws ConfigError on a syntax error.
    static Expression parse(const std::string& source);

    double operator()(double x) const;
    const std::string& source() const { return source_; }

    struct Node;

private:
    std::string source_;
    std::shared_ptr<const Node> root_;
};

/// Ordered segments; a segment applies to x <= x_max (inclusive), the last
/// one may leave x_max unset and applies everywhere beyond.
struct PiecewiseExpression {
    struct Segment {
        std::optional<double> x_max;
        Expression expr;
    };
    std::vector<Segment> segments;

    double operator()(double x) const;
};

} // namespace etm
