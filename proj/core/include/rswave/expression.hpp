#pragma once

#include <string>
#include <vector>

namespace rswave {

/// Arithmetic expression in t, x, y compiled to a postfix program.
/// Grammar: + - * / ^ (right-assoc), unary minus, parentheses, numbers,
/// constants pi and e, unary functions sin cos tan exp log sqrt abs tanh
/// sinh cosh, binary functions min max pow.
class Expression {
public:
    Expression() = default;
    /// Throws ConfigError with the offending position on malformed input.
    static Expression parse(const std::string& text);
    static Expression constant(double c);

    double eval(double t, double x, double y = 0.0) const;

    bool depends_on_t() const { return uses_t_; }
    bool is_constant() const { return !uses_t_ && !uses_x_ && !uses_y_; }
    const std::string& text() const { return text_; }

    enum class Op : unsigned char {
        Num, VarT, VarX, VarY, Add, Sub, Mul, Div, Pow, Neg,
        Sin, Cos, Tan, Exp, Log, Sqrt, Abs, Tanh, Sinh, Cosh, Min, Max
    };
    struct Instr {
        Op op;
        double value;
    };

private:
    std::string text_;
    std::vector<Instr> program_;
    bool uses_t_ = false, uses_x_ = false, uses_y_ = false;
    friend class ExpressionParser;
};

}  // namespace rswave
