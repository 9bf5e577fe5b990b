#include "pfreq/expression.hpp"

#include <cctype>
#include <cmath>
#include <cstdlib>
#include <numbers>

#include "pfreq/errors.hpp"

namespace pfreq {

struct Expression::Node {
    enum class Op { number, var_x, var_y, var_t, neg, add, sub, mul, div, pow, call } op;
    double value = 0.0;
    int lhs = -1;
    int rhs = -1;
    double (*fn)(double) = nullptr;
};

namespace {

using Node = Expression::Node;

struct Function {
    std::string_view name;
    double (*fn)(double);
};

double fn_sin(double v) { return std::sin(v); }
double fn_cos(double v) { return std::cos(v); }
double fn_tan(double v) { return std::tan(v); }
double fn_exp(double v) { return std::exp(v); }
double fn_log(double v) { return std::log(v); }
double fn_sqrt(double v) { return std::sqrt(v); }
double fn_abs(double v) { return std::abs(v); }
double fn_tanh(double v) { return std::tanh(v); }
double fn_cosh(double v) { return std::cosh(v); }
double fn_sinh(double v) { return std::sinh(v); }

constexpr Function kFunctions[] = {
    {"sin", fn_sin},   {"cos", fn_cos},   {"tan", fn_tan},   {"exp", fn_exp},   {"log", fn_log},
    {"sqrt", fn_sqrt}, {"abs", fn_abs},   {"tanh", fn_tanh}, {"cosh", fn_cosh}, {"sinh", fn_sinh},
};

class Parser {
public:
    Parser(std::string_view src, std::vector<Node>& nodes) : src_(src), nodes_(nodes) {}

    int parse() {
        const int root = expr();
        skip();
        if (pos_ < src_.size()) fail("unexpected '" + std::string(1, src_[pos_]) + "'");
        return root;
    }

private:
    [[noreturn]] void fail(const std::string& what) const {
        throw Error(ErrorKind::config_error,
                    "expression '" + std::string(src_) + "' at position " + std::to_string(pos_ + 1) + ": " + what);
    }

    void skip() {
        while (pos_ < src_.size() && std::isspace(static_cast<unsigned char>(src_[pos_]))) ++pos_;
    }

    bool accept(char c) {
        skip();
        if (pos_ < src_.size() && src_[pos_] == c) {
            ++pos_;
            return true;
        }
        return false;
    }

    int push(Node n) {
        nodes_.push_back(n);
        return static_cast<int>(nodes_.size()) - 1;
    }

    int binary(Node::Op op, int lhs, int rhs) { return push({op, 0.0, lhs, rhs, nullptr}); }

    int expr() {
        int lhs = term();
        for (;;) {
            if (accept('+')) lhs = binary(Node::Op::add, lhs, term());
            else if (accept('-')) lhs = binary(Node::Op::sub, lhs, term());
            else return lhs;
        }
    }

    int term() {
        int lhs = unary();
        for (;;) {
            if (accept('*')) lhs = binary(Node::Op::mul, lhs, unary());
            else if (accept('/')) lhs = binary(Node::Op::div, lhs, unary());
            else return lhs;
        }
    }

    int unary() {
        if (accept('-')) return push({Node::Op::neg, 0.0, unary(), -1, nullptr});
        if (accept('+')) return unary();
        return power();
    }

    int power() {
        const int base = atom();
        if (accept('^')) return binary(Node::Op::pow, base, unary());
        return base;
    }

    int atom() {
        skip();
        if (pos_ >= src_.size()) fail("unexpected end of expression");
        const char c = src_[pos_];
        if (c == '(') {
            ++pos_;
            const int inner = expr();
            if (!accept(')')) fail("expected ')'");
            return inner;
        }
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return number();
        if (std::isalpha(static_cast<unsigned char>(c))) return name();
        fail("unexpected '" + std::string(1, c) + "'");
    }

    int number() {
        const std::string rest(src_.substr(pos_));
        char* end = nullptr;
        const double v = std::strtod(rest.c_str(), &end);
        if (end == rest.c_str()) fail("malformed number");
        pos_ += static_cast<std::size_t>(end - rest.c_str());
        return push({Node::Op::number, v, -1, -1, nullptr});
    }

    int name() {
        const std::size_t start = pos_;
        while (pos_ < src_.size() && (std::isalnum(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '_')) ++pos_;
        const std::string_view id = src_.substr(start, pos_ - start);
        skip();
        if (pos_ < src_.size() && src_[pos_] == '(') {
            for (const Function& f : kFunctions) {
                if (f.name == id) {
                    ++pos_;
                    const int arg = expr();
                    if (!accept(')')) fail("expected ')' after argument of " + std::string(id));
                    return push({Node::Op::call, 0.0, arg, -1, f.fn});
                }
            }
            pos_ = start;
            fail("unknown function '" + std::string(id) + "'");
        }
        if (id == "x") return push({Node::Op::var_x, 0.0, -1, -1, nullptr});
        if (id == "y") return push({Node::Op::var_y, 0.0, -1, -1, nullptr});
        if (id == "t") return push({Node::Op::var_t, 0.0, -1, -1, nullptr});
        if (id == "pi") return push({Node::Op::number, std::numbers::pi, -1, -1, nullptr});
        if (id == "e") return push({Node::Op::number, std::numbers::e, -1, -1, nullptr});
        pos_ = start;
        fail("unknown name '" + std::string(id) + "'");
    }

    std::string_view src_;
    std::vector<Node>& nodes_;
    std::size_t pos_ = 0;
};

double eval(const std::vector<Node>& nodes, int i, double x, double y, double t) {
    const Node& n = nodes[static_cast<std::size_t>(i)];
    switch (n.op) {
        case Node::Op::number: return n.value;
        case Node::Op::var_x: return x;
        case Node::Op::var_y: return y;
        case Node::Op::var_t: return t;
        case Node::Op::neg: return -eval(nodes, n.lhs, x, y, t);
        case Node::Op::add: return eval(nodes, n.lhs, x, y, t) + eval(nodes, n.rhs, x, y, t);
        case Node::Op::sub: return eval(nodes, n.lhs, x, y, t) - eval(nodes, n.rhs, x, y, t);
        case Node::Op::mul: return eval(nodes, n.lhs, x, y, t) * eval(nodes, n.rhs, x, y, t);
        case Node::Op::div: return eval(nodes, n.lhs, x, y, t) / eval(nodes, n.rhs, x, y, t);
        case Node::Op::pow: return std::pow(eval(nodes, n.lhs, x, y, t), eval(nodes, n.rhs, x, y, t));
        case Node::Op::call: return n.fn(eval(nodes, n.lhs, x, y, t));
    }
    return 0.0;
}

}  // namespace

Expression Expression::parse(std::string_view source) {
    auto nodes = std::make_shared<std::vector<Node>>();
    Parser parser(source, *nodes);
    Expression e;
    e.root_ = parser.parse();
    e.source_ = std::string(source);
    e.nodes_ = std::move(nodes);
    return e;
}

double Expression::operator()(double x, double y, double t) const {
    if (!nodes_) return 0.0;
    return eval(*nodes_, root_, x, y, t);
}

bool Expression::uses_variable(char name) const {
    if (!nodes_) return false;
    const Node::Op want = name == 'x' ? Node::Op::var_x : name == 'y' ? Node::Op::var_y : Node::Op::var_t;
    for (const Node& n : *nodes_) {
        if (n.op == want) return true;
    }
    return false;
}

}  // namespace pfreq
