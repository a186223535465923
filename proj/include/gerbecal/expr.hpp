#pragma once

#include <map>
#include <memory>
#include <set>
#include <string>
#include <vector>

#include "gerbecal/errors.hpp"

namespace gerbecal::symexpr {

/// Evaluation point: coordinate name -> value.
using Point = std::map<std::string, double>;

/// Immutable symbolic scalar expression over named coordinates.
///
/// Node set: constants, variables, + - * /, integer powers, sin, cos, exp,
/// log.  Values are shared; all operations build new trees.
class Expr {
public:
    enum class Kind { Const, Var, Add, Sub, Mul, Div, Pow, Sin, Cos, Exp, Log };

    Expr(); // zero
    static Expr constant(double v);
    static Expr var(const std::string& name);

    Kind kind() const { return node_->kind; }
    bool is_constant(double v) const;
    bool is_zero() const { return is_constant(0.0); }

    double eval(const Point& p) const;
    Expr diff(const std::string& v) const;

    /// Best-effort structural normalization: flattens sums/products, folds
    /// constants, drops units.  Idempotent.
    Expr normalized() const;

    /// Substitute variables by expressions (used for pullbacks and the
    /// radial reparameterization of the homotopy operator).
    Expr substituted(const std::map<std::string, Expr>& repl) const;

    /// Coefficients [c0, c1, ...] of this expression viewed as a polynomial
    /// in `v` with Expr coefficients.  Throws DomainError when the
    /// expression is not polynomial in `v` (v under /, sin, ... ).
    std::vector<Expr> poly_coeffs(const std::string& v) const;

    void free_vars(std::set<std::string>& out) const;
    std::set<std::string> free_vars() const;

    std::string str() const;

    friend Expr operator+(const Expr& a, const Expr& b);
    friend Expr operator-(const Expr& a, const Expr& b);
    friend Expr operator*(const Expr& a, const Expr& b);
    friend Expr operator/(const Expr& a, const Expr& b);
    friend Expr operator-(const Expr& a);
    friend Expr pow_int(const Expr& base, int exponent);
    friend Expr sin(const Expr& a);
    friend Expr cos(const Expr& a);
    friend Expr exp(const Expr& a);
    friend Expr log(const Expr& a);

    // Internal tree node; exposed for the evaluator and printer only.
    // cached_str memoizes the printed form (trees are immutable and
    // shared, and normalization sorts operands by that key).
    struct Node {
        Kind kind;
        double value = 0.0;      // Const
        std::string name;        // Var
        int exponent = 0;        // Pow
        std::shared_ptr<const Node> a, b;
        mutable std::string cached_str;
    };

private:
    explicit Expr(std::shared_ptr<const Node> n) : node_(std::move(n)) {}
    static Expr make(Kind k, Expr a, Expr b);

    std::shared_ptr<const Node> node_;
};

Expr operator+(const Expr& a, const Expr& b);
Expr operator-(const Expr& a, const Expr& b);
Expr operator*(const Expr& a, const Expr& b);
Expr operator/(const Expr& a, const Expr& b);
Expr operator-(const Expr& a);
Expr pow_int(const Expr& base, int exponent);
Expr sin(const Expr& a);
Expr cos(const Expr& a);
Expr exp(const Expr& a);
Expr log(const Expr& a);

inline Expr operator*(double c, const Expr& e) { return Expr::constant(c) * e; }
inline Expr operator*(const Expr& e, double c) { return Expr::constant(c) * e; }
inline Expr operator+(const Expr& e, double c) { return e + Expr::constant(c); }
inline Expr operator-(const Expr& e, double c) { return e - Expr::constant(c); }

/// Parse the conventional infix grammar, e.g. "x^2*y + sin(z)".
/// Recognized functions: sin, cos, exp, log.  Powers take integer
/// exponents only.  Throws ParseError with the byte offset on failure.
Expr parse_expr(const std::string& text);

} // namespace gerbecal::symexpr
