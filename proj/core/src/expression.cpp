#include "rswave/expression.hpp"

#include <cctype>
#include <cmath>
#include <cstdlib>
#include <numbers>
#include <utility>

#include "rswave/error.hpp"

namespace rswave {

class ExpressionParser {
public:
    explicit ExpressionParser(const std::string& s, Expression& out) : s_(s), out_(out) {}

    void run() {
        expr();
        skip();
        if (pos_ != s_.size()) fail("unexpected character");
        if (out_.program_.empty()) fail("empty expression");
        int depth = 0;
        for (const auto& in : out_.program_) {
            switch (in.op) {
                case Op::Num: case Op::VarT: case Op::VarX: case Op::VarY: ++depth; break;
                case Op::Add: case Op::Sub: case Op::Mul: case Op::Div: case Op::Pow:
                case Op::Min: case Op::Max: --depth; break;
                default: break;
            }
            if (depth > 64) fail("expression nests too deeply");
        }
    }

private:
    using Op = Expression::Op;

    [[noreturn]] void fail(const std::string& what) const {
        throw ConfigError("expression '" + s_ + "': " + what + " at position " + std::to_string(pos_));
    }
    void skip() {
        while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
    }
    bool accept(char c) {
        skip();
        if (pos_ < s_.size() && s_[pos_] == c) {
            ++pos_;
            return true;
        }
        return false;
    }
    void emit(Op op, double v = 0.0) { out_.program_.push_back({op, v}); }

    void expr() {
        term();
        for (;;) {
            if (accept('+')) {
                term();
                emit(Op::Add);
            } else if (accept('-')) {
                term();
                emit(Op::Sub);
            } else {
                return;
            }
        }
    }
    void term() {
        unary();
        for (;;) {
            if (accept('*')) {
                unary();
                emit(Op::Mul);
            } else if (accept('/')) {
                unary();
                emit(Op::Div);
            } else {
                return;
            }
        }
    }
    void unary() {
        if (accept('-')) {
            unary();
            emit(Op::Neg);
        } else if (accept('+')) {
            unary();
        } else {
            power();
        }
    }
    void power() {
        primary();
        if (accept('^')) {
            unary();  // right associative, binds tighter than unary minus on the left
            emit(Op::Pow);
        }
    }
    void primary() {
        skip();
        if (pos_ >= s_.size()) fail("unexpected end");
        const char c = s_[pos_];
        if (c == '(') {
            ++pos_;
            expr();
            if (!accept(')')) fail("missing ')'");
            return;
        }
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
            const char* begin = s_.c_str() + pos_;
            char* end = nullptr;
            const double v = std::strtod(begin, &end);
            if (end == begin) fail("bad number");
            pos_ += static_cast<std::size_t>(end - begin);
            emit(Op::Num, v);
            return;
        }
        if (std::isalpha(static_cast<unsigned char>(c))) {
            std::size_t start = pos_;
            while (pos_ < s_.size() && (std::isalnum(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '_')) ++pos_;
            const std::string name = s_.substr(start, pos_ - start);
            identifier(name);
            return;
        }
        fail("unexpected character");
    }
    void identifier(const std::string& name) {
        if (name == "t") { emit(Op::VarT); out_.uses_t_ = true; return; }
        if (name == "x") { emit(Op::VarX); out_.uses_x_ = true; return; }
        if (name == "y") { emit(Op::VarY); out_.uses_y_ = true; return; }
        if (name == "pi") { emit(Op::Num, std::numbers::pi); return; }
        if (name == "e") { emit(Op::Num, std::numbers::e); return; }
        static const std::pair<const char*, Op> unary_fns[] = {
            {"sin", Op::Sin}, {"cos", Op::Cos}, {"tan", Op::Tan}, {"exp", Op::Exp},
            {"log", Op::Log}, {"sqrt", Op::Sqrt}, {"abs", Op::Abs}, {"tanh", Op::Tanh},
            {"sinh", Op::Sinh}, {"cosh", Op::Cosh}};
        for (const auto& [n, op] : unary_fns) {
            if (name != n) continue;
            if (!accept('(')) fail("expected '(' after " + name);
            expr();
            if (!accept(')')) fail("missing ')'");
            emit(op);
            return;
        }
        static const std::pair<const char*, Op> binary_fns[] = {
            {"min", Op::Min}, {"max", Op::Max}, {"pow", Op::Pow}};
        for (const auto& [n, op] : binary_fns) {
            if (name != n) continue;
            if (!accept('(')) fail("expected '(' after " + name);
            expr();
            if (!accept(',')) fail("expected ',' in " + name);
            expr();
            if (!accept(')')) fail("missing ')'");
            emit(op);
            return;
        }
        fail("unknown identifier '" + name + "'");
    }

    const std::string& s_;
    Expression& out_;
    std::size_t pos_ = 0;
};

Expression Expression::parse(const std::string& text) {
    Expression e;
    e.text_ = text;
    ExpressionParser(text, e).run();
    return e;
}

Expression Expression::constant(double c) {
    Expression e;
    e.text_ = std::to_string(c);
    e.program_.push_back({Op::Num, c});
    return e;
}

double Expression::eval(double t, double x, double y) const {
    double stack[64];
    int top = 0;
    for (const Instr& in : program_) {
        switch (in.op) {
            case Op::Num: stack[top++] = in.value; break;
            case Op::VarT: stack[top++] = t; break;
            case Op::VarX: stack[top++] = x; break;
            case Op::VarY: stack[top++] = y; break;
            case Op::Add: --top; stack[top - 1] += stack[top]; break;
            case Op::Sub: --top; stack[top - 1] -= stack[top]; break;
            case Op::Mul: --top; stack[top - 1] *= stack[top]; break;
            case Op::Div: --top; stack[top - 1] /= stack[top]; break;
            case Op::Pow: --top; stack[top - 1] = std::pow(stack[top - 1], stack[top]); break;
            case Op::Min: --top; stack[top - 1] = std::min(stack[top - 1], stack[top]); break;
            case Op::Max: --top; stack[top - 1] = std::max(stack[top - 1], stack[top]); break;
            case Op::Neg: stack[top - 1] = -stack[top - 1]; break;
            case Op::Sin: stack[top - 1] = std::sin(stack[top - 1]); break;
            case Op::Cos: stack[top - 1] = std::cos(stack[top - 1]); break;
            case Op::Tan: stack[top - 1] = std::tan(stack[top - 1]); break;
            case Op::Exp: stack[top - 1] = std::exp(stack[top - 1]); break;
            case Op::Log: stack[top - 1] = std::log(stack[top - 1]); break;
            case Op::Sqrt: stack[top - 1] = std::sqrt(stack[top - 1]); break;
            case Op::Abs: stack[top - 1] = std::abs(stack[top - 1]); break;
            case Op::Tanh: stack[top - 1] = std::tanh(stack[top - 1]); break;
            case Op::Sinh: stack[top - 1] = std::sinh(stack[top - 1]); break;
            case Op::Cosh: stack[top - 1] = std::cosh(stack[top - 1]); break;
        }
    }
    return stack[0];
}

}  // namespace rswave
