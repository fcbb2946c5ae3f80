#include "etm/expression.hpp"

#include <cctype>
#include <cmath>
#include <cstdlib>
#include <numbers>
#include <variant>

#include "etm/errors.hpp"

namespace etm {

enum class Func { Exp, Log, Sqrt, Sin, Cos, Abs };

struct Expression::Node {
    struct Constant { double value; };
    struct Variable {};
    struct Unary { char op; std::shared_ptr<const Node> arg; };
    struct Binary { char op; std::shared_ptr<const Node> lhs, rhs; };
    struct Call { Func func; std::shared_ptr<const Node> arg; };

    std::variant<Constant, Variable, Unary, Binary, Call> v;

    double eval(double x) const {
        return std::visit(
            [x](const auto& node) -> double {
                using T = std::decay_t<decltype(node)>;
                if constexpr (std::is_same_v<T, Constant>) {
                    return node.value;
                } else if constexpr (std::is_same_v<T, Variable>) {
                    return x;
                } else if constexpr (std::is_same_v<T, Unary>) {
                    const double a = node.arg->eval(x);
                    return node.op == '-' ? -a : a;
                } else if constexpr (std::is_same_v<T, Binary>) {
                    const double a = node.lhs->eval(x);
                    const double b = node.rhs->eval(x);
                    switch (node.op) {
                    case '+': return a + b;
                    case '-': return a - b;
                    case '*': return a * b;
                    case '/': return a / b;
                    default: return std::pow(a, b);
                    }
                } else {
                    const double a = node.arg->eval(x);
                    switch (node.func) {
                    case Func::Exp: return std::exp(a);
                    case Func::Log: return std::log(a);
                    case Func::Sqrt: return std::sqrt(a);
                    case Func::Sin: return std::sin(a);
                    case Func::Cos: return std::cos(a);
                    case Func::Abs: return std::abs(a);
                    }
                    return a;
                }
            },
            v);
    }
};

namespace {

using NodePtr = std::shared_ptr<const Expression::Node>;

class Parser {
public:
    explicit Parser(const std::string& src) : src_(src) {}

    NodePtr parse() {
        auto node = expr();
        skip_space();
        if (pos_ != src_.size()) fail("unexpected trailing input");
        return node;
    }

private:
    const std::string& src_;
    std::size_t pos_ = 0;

    [[noreturn]] void fail(const std::string& what) const {
        throw ConfigError("", "expression '" + src_ + "': " + what + " at position " + std::to_string(pos_));
    }

    void skip_space() {
        while (pos_ < src_.size() && std::isspace(static_cast<unsigned char>(src_[pos_]))) ++pos_;
    }

    bool accept(char c) {
        skip_space();
        if (pos_ < src_.size() && src_[pos_] == c) {
            ++pos_;
            return true;
        }
        return false;
    }

    static NodePtr make(auto node) { return std::make_shared<const Expression::Node>(Expression::Node{node}); }

    NodePtr expr() {
        auto lhs = term();
        for (;;) {
            if (accept('+')) lhs = make(Expression::Node::Binary{'+', lhs, term()});
            else if (accept('-')) lhs = make(Expression::Node::Binary{'-', lhs, term()});
            else return lhs;
        }
    }

    NodePtr term() {
        auto lhs = unary();
        for (;;) {
            if (accept('*')) lhs = make(Expression::Node::Binary{'*', lhs, unary()});
            else if (accept('/')) lhs = make(Expression::Node::Binary{'/', lhs, unary()});
            else return lhs;
        }
    }

    NodePtr unary() {
        if (accept('-')) return make(Expression::Node::Unary{'-', unary()});
        if (accept('+')) return unary();
        return power();
    }

    NodePtr power() {
        auto base = primary();
        if (accept('^')) return make(Expression::Node::Binary{'^', base, unary()});
        return base;
    }

    NodePtr primary() {
        skip_space();
        if (pos_ >= src_.size()) fail("unexpected end of input");
        const char c = src_[pos_];
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
            const char* begin = src_.c_str() + pos_;
            char* end = nullptr;
            const double value = std::strtod(begin, &end);
            if (end == begin) fail("malformed number");
            pos_ += static_cast<std::size_t>(end - begin);
            return make(Expression::Node::Constant{value});
        }
        if (accept('(')) {
            auto inner = expr();
            if (!accept(')')) fail("expected ')'");
            return inner;
        }
        if (std::isalpha(static_cast<unsigned char>(c))) {
            std::size_t start = pos_;
            while (pos_ < src_.size() && std::isalnum(static_cast<unsigned char>(src_[pos_]))) ++pos_;
            const std::string name = src_.substr(start, pos_ - start);
            if (name == "x") return make(Expression::Node::Variable{});
            if (name == "pi") return make(Expression::Node::Constant{std::numbers::pi});
            if (name == "e") return make(Expression::Node::Constant{std::numbers::e});
            Func f;
            if (name == "exp") f = Func::Exp;
            else if (name == "log") f = Func::Log;
            else if (name == "sqrt") f = Func::Sqrt;
            else if (name == "sin") f = Func::Sin;
            else if (name == "cos") f = Func::Cos;
            else if (name == "abs") f = Func::Abs;
            else {
                pos_ = start;
                fail("unknown identifier '" + name + "'");
            }
            if (!accept('(')) fail("expected '(' after " + name);
            auto arg = expr();
            if (!accept(')')) fail("expected ')'");
            return make(Expression::Node::Call{f, arg});
        }
        fail(std::string("unexpected character '") + c + "'");
    }
};

} // namespace

Expression Expression::parse(const std::string& source) {
    Expression e;
    e.source_ = source;
    e.root_ = Parser(source).parse();
    return e;
}

double Expression::operator()(double x) const { return root_->eval(x); }

double PiecewiseExpression::operator()(double x) const {
    for (const auto& seg : segments)
        if (!seg.x_max || x <= *seg.x_max) return seg.expr(x);
    throw ConfigError("initial_condition", "no segment covers x = " + std::to_string(x));
}

} // namespace etm
