#include "gerbecal/expr.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdlib>
#include <sstream>

namespace gerbecal::symexpr {

using Kind = Expr::Kind;

namespace {

bool almost_integer(double v) { return v == std::floor(v); }

double pow_int_val(double base, int e) {
    if (e == 0) return 1.0;
    if (base == 0.0 && e < 0) throw DomainError("0 raised to negative power");
    bool neg = e < 0;
    unsigned n = neg ? static_cast<unsigned>(-(long long)e) : static_cast<unsigned>(e);
    double r = 1.0, b = base;
    while (n) {
        if (n & 1u) r *= b;
        b *= b;
        n >>= 1u;
    }
    return neg ? 1.0 / r : r;
}

} // namespace

Expr::Expr() : node_(std::make_shared<Node>(Node{Kind::Const, 0.0, "", 0, nullptr, nullptr})) {}

Expr Expr::constant(double v) {
    auto n = std::make_shared<Node>();
    n->kind = Kind::Const;
    n->value = v;
    return Expr(std::move(n));
}

Expr Expr::var(const std::string& name) {
    auto n = std::make_shared<Node>();
    n->kind = Kind::Var;
    n->name = name;
    return Expr(std::move(n));
}

bool Expr::is_constant(double v) const {
    return node_->kind == Kind::Const && node_->value == v;
}

Expr Expr::make(Kind k, Expr a, Expr b) {
    auto n = std::make_shared<Node>();
    n->kind = k;
    n->a = a.node_;
    n->b = b.node_;
    return Expr(std::move(n));
}

Expr operator+(const Expr& a, const Expr& b) { return Expr::make(Kind::Add, a, b); }
Expr operator-(const Expr& a, const Expr& b) { return Expr::make(Kind::Sub, a, b); }
Expr operator*(const Expr& a, const Expr& b) { return Expr::make(Kind::Mul, a, b); }
Expr operator/(const Expr& a, const Expr& b) { return Expr::make(Kind::Div, a, b); }
Expr operator-(const Expr& a) { return Expr::constant(-1.0) * a; }

Expr pow_int(const Expr& base, int exponent) {
    auto n = std::make_shared<Expr::Node>();
    n->kind = Kind::Pow;
    n->exponent = exponent;
    n->a = base.node_;
    return Expr(std::move(n));
}

Expr sin(const Expr& a) { return Expr::make(Kind::Sin, a, Expr()); }
Expr cos(const Expr& a) { return Expr::make(Kind::Cos, a, Expr()); }
Expr exp(const Expr& a) { return Expr::make(Kind::Exp, a, Expr()); }
Expr log(const Expr& a) { return Expr::make(Kind::Log, a, Expr()); }

// ---------------------------------------------------------------------------
// evaluation

namespace {

double eval_node(const std::shared_ptr<const Expr::Node>& n, const Point& p);

double eval_child(const std::shared_ptr<const Expr::Node>& n, const Point& p) {
    return eval_node(n, p);
}

double eval_node(const std::shared_ptr<const Expr::Node>& n, const Point& p) {
    switch (n->kind) {
    case Kind::Const: return n->value;
    case Kind::Var: {
        auto it = p.find(n->name);
        if (it == p.end()) throw MissingVariable(n->name);
        return it->second;
    }
    case Kind::Add: return eval_child(n->a, p) + eval_child(n->b, p);
    case Kind::Sub: return eval_child(n->a, p) - eval_child(n->b, p);
    case Kind::Mul: return eval_child(n->a, p) * eval_child(n->b, p);
    case Kind::Div: {
        double den = eval_child(n->b, p);
        if (den == 0.0) throw DomainError("division by zero");
        return eval_child(n->a, p) / den;
    }
    case Kind::Pow: return pow_int_val(eval_child(n->a, p), n->exponent);
    case Kind::Sin: return std::sin(eval_child(n->a, p));
    case Kind::Cos: return std::cos(eval_child(n->a, p));
    case Kind::Exp: return std::exp(eval_child(n->a, p));
    case Kind::Log: {
        double v = eval_child(n->a, p);
        if (v <= 0.0) throw DomainError("log of non-positive value");
        return std::log(v);
    }
    }
    throw std::logic_error("unreachable expr kind");
}

} // namespace

double Expr::eval(const Point& p) const { return eval_node(node_, p); }

// ---------------------------------------------------------------------------
// differentiation

Expr Expr::diff(const std::string& v) const {
    const Node& n = *node_;
    Expr a = n.a ? Expr(n.a) : Expr();
    Expr b = n.b ? Expr(n.b) : Expr();
    switch (n.kind) {
    case Kind::Const: return Expr();
    case Kind::Var: return n.name == v ? Expr::constant(1.0) : Expr();
    case Kind::Add: return a.diff(v) + b.diff(v);
    case Kind::Sub: return a.diff(v) - b.diff(v);
    case Kind::Mul: return a.diff(v) * b + a * b.diff(v);
    case Kind::Div: return (a.diff(v) * b - a * b.diff(v)) / pow_int(b, 2);
    case Kind::Pow:
        if (n.exponent == 0) return Expr();
        return Expr::constant(n.exponent) * pow_int(a, n.exponent - 1) * a.diff(v);
    case Kind::Sin: return cos(a) * a.diff(v);
    case Kind::Cos: return Expr::constant(-1.0) * sin(a) * a.diff(v);
    case Kind::Exp: return exp(a) * a.diff(v);
    case Kind::Log: return a.diff(v) / a;
    }
    throw std::logic_error("unreachable expr kind");
}

// ---------------------------------------------------------------------------
// normalization

void Expr::free_vars(std::set<std::string>& out) const {
    const Node& n = *node_;
    if (n.kind == Kind::Var) out.insert(n.name);
    if (n.a) Expr(n.a).free_vars(out);
    if (n.b) Expr(n.b).free_vars(out);
}

std::set<std::string> Expr::free_vars() const {
    std::set<std::string> s;
    free_vars(s);
    return s;
}

Expr Expr::normalized() const {
    const Node& n = *node_;
    Expr a = n.a ? Expr(n.a).normalized() : Expr();
    Expr b = n.b ? Expr(n.b).normalized() : Expr();

    auto cval = [](const Expr& e) { return e.node_->value; };
    auto is_const = [](const Expr& e) { return e.kind() == Kind::Const; };

    // walks already-normalized subtrees, so chains are left-folded
    auto flatten = [](Kind k, const Expr& e, std::vector<Expr>& out) {
        auto rec = [k, &out](auto&& self, const Expr& e) -> void {
            if (e.kind() == k) {
                self(self, Expr(e.node_->a));
                self(self, Expr(e.node_->b));
            } else {
                out.push_back(e);
            }
        };
        rec(rec, e);
    };

    switch (n.kind) {
    case Kind::Const:
    case Kind::Var:
        return *this;

    case Kind::Sub:
        return (a + Expr::constant(-1.0) * b).normalized();

    case Kind::Add: {
        std::vector<Expr> terms;
        flatten(Kind::Add, a, terms);
        flatten(Kind::Add, b, terms);
        double csum = 0.0;
        // combine like terms: split each term into (coefficient, rest)
        std::map<std::string, std::pair<double, Expr>> combined;
        for (auto& t : terms) {
            if (is_const(t)) {
                csum += cval(t);
                continue;
            }
            double coef = 1.0;
            Expr rest = t;
            if (t.kind() == Kind::Mul) {
                std::vector<Expr> factors;
                flatten(Kind::Mul, t, factors);
                if (!factors.empty() && is_const(factors.front())) {
                    coef = cval(factors.front());
                    Expr acc;
                    bool have = false;
                    for (std::size_t i = 1; i < factors.size(); ++i) {
                        acc = have ? Expr::make(Kind::Mul, acc, factors[i]) : factors[i];
                        have = true;
                    }
                    rest = have ? acc : Expr::constant(1.0);
                }
            }
            std::string key = rest.str();
            auto it = combined.find(key);
            if (it == combined.end()) {
                combined.emplace(key, std::make_pair(coef, rest));
            } else {
                it->second.first += coef;
            }
        }
        Expr acc;
        bool have = false;
        if (csum != 0.0) {
            acc = Expr::constant(csum);
            have = true;
        }
        for (auto& [key, cv] : combined) {
            if (cv.first == 0.0) continue;
            Expr term = cv.first == 1.0 ? cv.second
                                        : Expr::make(Kind::Mul, Expr::constant(cv.first), cv.second);
            acc = have ? Expr::make(Kind::Add, acc, term) : term;
            have = true;
        }
        return have ? acc : Expr();
    }

    case Kind::Mul: {
        std::vector<Expr> factors;
        flatten(Kind::Mul, a, factors);
        flatten(Kind::Mul, b, factors);
        double cprod = 1.0;
        std::vector<std::pair<std::string, Expr>> keyed;
        for (auto& f : factors) {
            if (is_const(f)) {
                cprod *= cval(f);
            } else {
                keyed.emplace_back(f.str(), f);
            }
        }
        if (cprod == 0.0) return Expr();
        std::stable_sort(keyed.begin(), keyed.end(),
                         [](const auto& x, const auto& y) { return x.first < y.first; });
        Expr acc;
        bool have = false;
        if (cprod != 1.0 || keyed.empty()) {
            acc = Expr::constant(cprod);
            have = true;
        }
        for (auto& [k, f] : keyed) {
            acc = have ? Expr::make(Kind::Mul, acc, f) : f;
            have = true;
        }
        return acc;
    }

    case Kind::Div: {
        if (is_const(b) && cval(b) != 0.0) return (a * Expr::constant(1.0 / cval(b))).normalized();
        if (a.is_zero()) return Expr();
        return Expr::make(Kind::Div, a, b);
    }

    case Kind::Pow: {
        if (n.exponent == 0) return Expr::constant(1.0);
        if (n.exponent == 1) return a;
        if (is_const(a)) {
            if (!(cval(a) == 0.0 && n.exponent < 0)) return Expr::constant(pow_int_val(cval(a), n.exponent));
        }
        return pow_int(a, n.exponent);
    }

    case Kind::Sin:
        if (is_const(a)) return Expr::constant(std::sin(cval(a)));
        return sin(a);
    case Kind::Cos:
        if (is_const(a)) return Expr::constant(std::cos(cval(a)));
        return cos(a);
    case Kind::Exp:
        if (is_const(a)) return Expr::constant(std::exp(cval(a)));
        return exp(a);
    case Kind::Log:
        if (is_const(a) && cval(a) > 0.0) return Expr::constant(std::log(cval(a)));
        return log(a);
    }
    throw std::logic_error("unreachable expr kind");
}

// ---------------------------------------------------------------------------
// substitution and polynomial coefficient extraction

Expr Expr::substituted(const std::map<std::string, Expr>& repl) const {
    const Node& n = *node_;
    switch (n.kind) {
    case Kind::Const: return *this;
    case Kind::Var: {
        auto it = repl.find(n.name);
        return it == repl.end() ? *this : it->second;
    }
    case Kind::Pow: return pow_int(Expr(n.a).substituted(repl), n.exponent);
    default: {
        Expr a = Expr(n.a).substituted(repl);
        if (n.kind == Kind::Sin) return sin(a);
        if (n.kind == Kind::Cos) return cos(a);
        if (n.kind == Kind::Exp) return exp(a);
        if (n.kind == Kind::Log) return log(a);
        Expr b = Expr(n.b).substituted(repl);
        return Expr::make(n.kind, a, b);
    }
    }
}

namespace {

using Coeffs = std::vector<Expr>;

Coeffs poly_mul(const Coeffs& x, const Coeffs& y) {
    Coeffs r(x.size() + y.size() - 1, Expr());
    for (size_t i = 0; i < x.size(); ++i)
        for (size_t j = 0; j < y.size(); ++j) r[i + j] = r[i + j] + x[i] * y[j];
    return r;
}

Coeffs poly_add(Coeffs x, const Coeffs& y) {
    if (y.size() > x.size()) x.resize(y.size(), Expr());
    for (size_t j = 0; j < y.size(); ++j) x[j] = x[j] + y[j];
    return x;
}

} // namespace

std::vector<Expr> Expr::poly_coeffs(const std::string& v) const {
    const Node& n = *node_;
    if (free_vars().count(v) == 0) return {*this};
    switch (n.kind) {
    case Kind::Var:
        return {Expr(), Expr::constant(1.0)};
    case Kind::Add:
        return poly_add(Expr(n.a).poly_coeffs(v), Expr(n.b).poly_coeffs(v));
    case Kind::Sub:
        return poly_add(Expr(n.a).poly_coeffs(v),
                        (Expr::constant(-1.0) * Expr(n.b)).poly_coeffs(v));
    case Kind::Mul:
        return poly_mul(Expr(n.a).poly_coeffs(v), Expr(n.b).poly_coeffs(v));
    case Kind::Pow: {
        if (n.exponent < 0)
            throw DomainError("expression not polynomial in " + v + " (negative power)");
        Coeffs base = Expr(n.a).poly_coeffs(v);
        Coeffs r{Expr::constant(1.0)};
        for (int i = 0; i < n.exponent; ++i) r = poly_mul(r, base);
        return r;
    }
    default:
        throw DomainError("expression not polynomial in " + v);
    }
}

// ---------------------------------------------------------------------------
// printing

namespace {

int precedence(Kind k) {
    switch (k) {
    case Kind::Add:
    case Kind::Sub: return 1;
    case Kind::Mul:
    case Kind::Div: return 2;
    case Kind::Pow: return 3;
    default: return 4;
    }
}

std::string fmt_double(double v) {
    if (almost_integer(v) && std::abs(v) < 1e15) {
        std::ostringstream os;
        os << static_cast<long long>(v);
        return os.str();
    }
    std::ostringstream os;
    os.precision(17);
    os << v;
    return os.str();
}

const std::string& node_str(const std::shared_ptr<const Expr::Node>& n);

void print_wrapped(const std::shared_ptr<const Expr::Node>& n, std::ostream& os, int parent_prec) {
    bool need = precedence(n->kind) < parent_prec;
    if (need) os << '(';
    os << node_str(n);
    if (need) os << ')';
}

void print_node(const std::shared_ptr<const Expr::Node>& n, std::ostream& os) {
    switch (n->kind) {
    case Kind::Const:
        if (n->value < 0) {
            os << '(' << fmt_double(n->value) << ')';
        } else {
            os << fmt_double(n->value);
        }
        return;
    case Kind::Var: os << n->name; return;
    case Kind::Add:
        print_wrapped(n->a, os, 1);
        os << " + ";
        print_wrapped(n->b, os, 1);
        return;
    case Kind::Sub:
        print_wrapped(n->a, os, 1);
        os << " - ";
        print_wrapped(n->b, os, 2);
        return;
    case Kind::Mul:
        print_wrapped(n->a, os, 2);
        os << "*";
        print_wrapped(n->b, os, 3);
        return;
    case Kind::Div:
        print_wrapped(n->a, os, 2);
        os << "/";
        print_wrapped(n->b, os, 3);
        return;
    case Kind::Pow:
        print_wrapped(n->a, os, 4);
        os << "^";
        if (n->exponent < 0) {
            os << '(' << n->exponent << ')';
        } else {
            os << n->exponent;
        }
        return;
    case Kind::Sin: os << "sin("; os << node_str(n->a); os << ')'; return;
    case Kind::Cos: os << "cos("; os << node_str(n->a); os << ')'; return;
    case Kind::Exp: os << "exp("; os << node_str(n->a); os << ')'; return;
    case Kind::Log: os << "log("; os << node_str(n->a); os << ')'; return;
    }
}

const std::string& node_str(const std::shared_ptr<const Expr::Node>& n) {
    if (n->cached_str.empty()) {
        std::ostringstream os;
        print_node(n, os);
        n->cached_str = os.str();
    }
    return n->cached_str;
}

} // namespace

std::string Expr::str() const { return node_str(node_); }

// ---------------------------------------------------------------------------
// parser

namespace {

struct Parser {
    const std::string& s;
    size_t pos = 0;

    explicit Parser(const std::string& text) : s(text) {}

    void skip_ws() {
        while (pos < s.size() && std::isspace(static_cast<unsigned char>(s[pos]))) ++pos;
    }
    bool eof() {
        skip_ws();
        return pos >= s.size();
    }
    char peek() {
        skip_ws();
        return pos < s.size() ? s[pos] : '\0';
    }
    bool accept(char c) {
        if (peek() == c) {
            ++pos;
            return true;
        }
        return false;
    }
    void expect(char c) {
        if (!accept(c)) throw ParseError(std::string("expected '") + c + "'", pos);
    }

    Expr parse() {
        Expr e = expr();
        if (!eof()) throw ParseError("trailing input", pos);
        return e;
    }

    Expr expr() {
        Expr e = term();
        for (;;) {
            if (accept('+')) {
                e = e + term();
            } else if (peek() == '-') {
                ++pos;
                e = e - term();
            } else {
                return e;
            }
        }
    }

    Expr term() {
        Expr e = unary();
        for (;;) {
            if (accept('*')) {
                e = e * unary();
            } else if (accept('/')) {
                e = e / unary();
            } else {
                return e;
            }
        }
    }

    Expr unary() {
        if (accept('-')) return Expr::constant(-1.0) * unary();
        if (accept('+')) return unary();
        return power();
    }

    Expr power() {
        Expr base = atom();
        if (accept('^')) {
            int e = integer_exponent();
            return pow_int(base, e);
        }
        return base;
    }

    int integer_exponent() {
        skip_ws();
        bool paren = accept('(');
        skip_ws();
        bool neg = false;
        if (pos < s.size() && (s[pos] == '-' || s[pos] == '+')) {
            neg = s[pos] == '-';
            ++pos;
        }
        skip_ws();
        size_t start = pos;
        while (pos < s.size() && std::isdigit(static_cast<unsigned char>(s[pos]))) ++pos;
        if (pos == start) throw ParseError("expected integer exponent", pos);
        long v = std::strtol(s.substr(start, pos - start).c_str(), nullptr, 10);
        if (paren) expect(')');
        return static_cast<int>(neg ? -v : v);
    }

    Expr atom() {
        skip_ws();
        if (pos >= s.size()) throw ParseError("unexpected end of input", pos);
        char c = s[pos];
        if (c == '(') {
            ++pos;
            Expr e = expr();
            expect(')');
            return e;
        }
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
            char* end = nullptr;
            double v = std::strtod(s.c_str() + pos, &end);
            if (end == s.c_str() + pos) throw ParseError("bad number", pos);
            pos = static_cast<size_t>(end - s.c_str());
            return Expr::constant(v);
        }
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
            size_t start = pos;
            while (pos < s.size() &&
                   (std::isalnum(static_cast<unsigned char>(s[pos])) || s[pos] == '_'))
                ++pos;
            std::string name = s.substr(start, pos - start);
            if (peek() == '(') {
                if (name == "sin" || name == "cos" || name == "exp" || name == "log") {
                    expect('(');
                    Expr arg = expr();
                    expect(')');
                    if (name == "sin") return sin(arg);
                    if (name == "cos") return cos(arg);
                    if (name == "exp") return exp(arg);
                    return log(arg);
                }
                throw ParseError("unknown function: " + name, start);
            }
            return Expr::var(name);
        }
        throw ParseError(std::string("unexpected character '") + c + "'", pos);
    }
};

} // namespace

Expr parse_expr(const std::string& text) {
    Parser p(text);
    return p.parse();
}

} // namespace gerbecal::symexpr
