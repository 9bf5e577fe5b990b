#pragma once

#include <memory>
#include <string>
#include <string_view>
#include <vector>

namespace pfreq {

/// Arithmetic expression over x, y, t.
///
///   expr   := term (('+' | '-') term)*
///   term   := unary (('*' | '/') unary)*
///   unary  := ('+' | '-') unary | power
///   power  := atom ('^' unary)?          right-associative
///   atom   := number | name | name '(' expr ')' | '(' expr ')'
///
/// Names: x, y, t, pi, e. Functions: sin, cos, tan, exp, log, sqrt, abs, tanh, cosh, sinh.
/// Parse errors throw config-error naming the expression and the 1-based position.
class Expression {
public:
    static Expression parse(std::string_view source);

    double operator()(double x = 0.0, double y = 0.0, double t = 0.0) const;
    const std::string& source() const noexcept { return source_; }
    bool uses_variable(char name) const;

    struct Node;

private:
    std::string source_;
    std::shared_ptr<const std::vector<Node>> nodes_;
    int root_ = -1;
};

}  // namespace pfreq
