#include "cshape/expression.hpp"

#include <cctype>
#include <cmath>
#include <cstdlib>
#include <map>
#include <sstream>
#include <vector>

#include "cshape/errors.hpp"

namespace cshape {

namespace {

enum class FnId { exp, sin, cos, sqrt, log };

const char* fn_name(FnId f) {
    switch (f) {
        case FnId::exp: return "exp";
        case FnId::sin: return "sin";
        case FnId::cos: return "cos";
        case FnId::sqrt: return "sqrt";
        case FnId::log: return "log";
    }
    return "?";
}

}  // namespace

struct ExprNode {
    enum class Kind { constant, variable, neg, add, sub, mul, div, pow, call };

    Kind kind;
    double value = 0;  // constant
    ExprVar var = ExprVar::x1;
    FnId fn = FnId::exp;
    ExprNodePtr a, b;

    static ExprNodePtr make_const(double v) {
        auto n = std::make_shared<ExprNode>();
        n->kind = Kind::constant;
        n->value = v;
        return n;
    }
    static ExprNodePtr make_var(ExprVar v) {
        auto n = std::make_shared<ExprNode>();
        n->kind = Kind::variable;
        n->var = v;
        return n;
    }
};

namespace {

using Kind = ExprNode::Kind;

bool const_value(const ExprNodePtr& n, double* v) {
    if (n->kind == Kind::constant) {
        if (v) *v = n->value;
        return true;
    }
    return false;
}

bool is_const(const ExprNodePtr& n, double v) {
    return n->kind == Kind::constant && n->value == v;
}

ExprNodePtr make_unary(Kind kind, ExprNodePtr a);
ExprNodePtr make_binary(Kind kind, ExprNodePtr a, ExprNodePtr b);
ExprNodePtr make_call(FnId fn, ExprNodePtr a);

ExprNodePtr make_unary(Kind kind, ExprNodePtr a) {
    double va;
    if (const_value(a, &va)) return ExprNode::make_const(-va);
    if (a->kind == Kind::neg) return a->a;
    auto n = std::make_shared<ExprNode>();
    n->kind = kind;
    n->a = std::move(a);
    return n;
}

ExprNodePtr make_binary(Kind kind, ExprNodePtr a, ExprNodePtr b) {
    double va, vb;
    const bool ca = const_value(a, &va), cb = const_value(b, &vb);
    switch (kind) {
        case Kind::add:
            if (ca && cb) return ExprNode::make_const(va + vb);
            if (ca && va == 0) return b;
            if (cb && vb == 0) return a;
            break;
        case Kind::sub:
            if (ca && cb) return ExprNode::make_const(va - vb);
            if (cb && vb == 0) return a;
            if (ca && va == 0) return make_unary(Kind::neg, b);
            break;
        case Kind::mul:
            if (ca && cb) return ExprNode::make_const(va * vb);
            if ((ca && va == 0) || (cb && vb == 0)) return ExprNode::make_const(0);
            if (ca && va == 1) return b;
            if (cb && vb == 1) return a;
            break;
        case Kind::div:
            if (ca && cb) return ExprNode::make_const(va / vb);
            if (cb && vb == 1) return a;
            if (ca && va == 0 && !(cb && vb == 0)) return ExprNode::make_const(0);
            break;
        case Kind::pow:
            if (ca && cb) return ExprNode::make_const(std::pow(va, vb));
            if (cb && vb == 1) return a;
            if (cb && vb == 0) return ExprNode::make_const(1);
            break;
        default:
            break;
    }
    auto n = std::make_shared<ExprNode>();
    n->kind = kind;
    n->a = std::move(a);
    n->b = std::move(b);
    return n;
}

ExprNodePtr make_call(FnId fn, ExprNodePtr a) {
    double va;
    if (const_value(a, &va)) {
        switch (fn) {
            case FnId::exp: return ExprNode::make_const(std::exp(va));
            case FnId::sin: return ExprNode::make_const(std::sin(va));
            case FnId::cos: return ExprNode::make_const(std::cos(va));
            case FnId::sqrt: return ExprNode::make_const(std::sqrt(va));
            case FnId::log: return ExprNode::make_const(std::log(va));
        }
    }
    auto n = std::make_shared<ExprNode>();
    n->kind = Kind::call;
    n->fn = fn;
    n->a = std::move(a);
    return n;
}

// ---------------------------------------------------------------------------
// Recursive-descent parser

struct Token {
    enum class Type { number, ident, op, lparen, rparen, end };
    Type type;
    double number = 0;
    std::string text;
    char op = 0;
    int pos = 0;  // 0-based offset in the input
};

class Lexer {
public:
    explicit Lexer(const std::string& text) : text_(text) { advance(); }

    const Token& current() const { return tok_; }

    void advance() {
        while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) pos_++;
        tok_.pos = static_cast<int>(pos_);
        if (pos_ >= text_.size()) {
            tok_.type = Token::Type::end;
            return;
        }
        const char c = text_[pos_];
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
            const char* start = text_.c_str() + pos_;
            char* end = nullptr;
            const double v = std::strtod(start, &end);
            if (end == start) err("invalid number");
            pos_ += static_cast<size_t>(end - start);
            tok_.type = Token::Type::number;
            tok_.number = v;
            return;
        }
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
            size_t n = pos_;
            while (n < text_.size() &&
                   (std::isalnum(static_cast<unsigned char>(text_[n])) || text_[n] == '_'))
                n++;
            tok_.type = Token::Type::ident;
            tok_.text = text_.substr(pos_, n - pos_);
            pos_ = n;
            return;
        }
        pos_++;
        switch (c) {
            case '+':
            case '-':
            case '*':
            case '/':
            case '^':
                tok_.type = Token::Type::op;
                tok_.op = c;
                return;
            case '(':
                tok_.type = Token::Type::lparen;
                return;
            case ')':
                tok_.type = Token::Type::rparen;
                return;
            default:
                err(std::string("unexpected character '") + c + "'");
        }
    }

    [[noreturn]] void err(const std::string& msg) const {
        std::ostringstream os;
        os << "expression parse error at position " << (tok_.pos + 1) << ": " << msg;
        fail(ErrorKind::parse, os.str());
    }

private:
    const std::string& text_;
    size_t pos_ = 0;
    Token tok_;
};

class Parser {
public:
    explicit Parser(const std::string& text) : lex_(text) {}

    ExprNodePtr parse() {
        ExprNodePtr e = parse_sum();
        if (lex_.current().type != Token::Type::end) lex_.err("trailing input");
        return e;
    }

private:
    bool accept_op(char c) {
        if (lex_.current().type == Token::Type::op && lex_.current().op == c) {
            lex_.advance();
            return true;
        }
        return false;
    }

    ExprNodePtr parse_sum() {
        ExprNodePtr e = parse_product();
        for (;;) {
            if (accept_op('+'))
                e = make_binary(Kind::add, e, parse_product());
            else if (accept_op('-'))
                e = make_binary(Kind::sub, e, parse_product());
            else
                return e;
        }
    }

    ExprNodePtr parse_product() {
        ExprNodePtr e = parse_factor();
        for (;;) {
            if (accept_op('*'))
                e = make_binary(Kind::mul, e, parse_factor());
            else if (accept_op('/'))
                e = make_binary(Kind::div, e, parse_factor());
            else
                return e;
        }
    }

    // factor handles unary minus, which binds looser than '^'.
    ExprNodePtr parse_factor() {
        if (accept_op('-')) return make_unary(Kind::neg, parse_factor());
        return parse_power();
    }

    ExprNodePtr parse_power() {
        ExprNodePtr base = parse_atom();
        if (accept_op('^')) return make_binary(Kind::pow, base, parse_factor());
        return base;
    }

    ExprNodePtr parse_atom() {
        const Token& t = lex_.current();
        switch (t.type) {
            case Token::Type::number: {
                const double v = t.number;
                lex_.advance();
                return ExprNode::make_const(v);
            }
            case Token::Type::lparen: {
                lex_.advance();
                ExprNodePtr e = parse_sum();
                if (lex_.current().type != Token::Type::rparen) lex_.err("expected ')'");
                lex_.advance();
                return e;
            }
            case Token::Type::ident: {
                const std::string name = t.text;
                lex_.advance();
                if (lex_.current().type == Token::Type::lparen) {
                    FnId fn;
                    if (name == "exp")
                        fn = FnId::exp;
                    else if (name == "sin")
                        fn = FnId::sin;
                    else if (name == "cos")
                        fn = FnId::cos;
                    else if (name == "sqrt")
                        fn = FnId::sqrt;
                    else
                        lex_.err("unknown function '" + name + "'");
                    lex_.advance();
                    ExprNodePtr arg = parse_sum();
                    if (lex_.current().type != Token::Type::rparen) lex_.err("expected ')'");
                    lex_.advance();
                    return make_call(fn, arg);
                }
                static const std::map<std::string, ExprVar> vars = {
                    {"x1", ExprVar::x1}, {"x2", ExprVar::x2}, {"x3", ExprVar::x3},
                    {"u", ExprVar::u},   {"g1", ExprVar::g1}, {"g2", ExprVar::g2},
                    {"g3", ExprVar::g3}};
                auto it = vars.find(name);
                if (it == vars.end()) lex_.err("unknown identifier '" + name + "'");
                return ExprNode::make_var(it->second);
            }
            default:
                lex_.err("expected number, identifier or '('");
        }
    }

    Lexer lex_;
};

// ---------------------------------------------------------------------------

double eval_node(const ExprNode& n, const ExprEvalPoint& p) {
    switch (n.kind) {
        case Kind::constant: return n.value;
        case Kind::variable: return p[n.var];
        case Kind::neg: return -eval_node(*n.a, p);
        case Kind::add: return eval_node(*n.a, p) + eval_node(*n.b, p);
        case Kind::sub: return eval_node(*n.a, p) - eval_node(*n.b, p);
        case Kind::mul: return eval_node(*n.a, p) * eval_node(*n.b, p);
        case Kind::div: return eval_node(*n.a, p) / eval_node(*n.b, p);
        case Kind::pow: return std::pow(eval_node(*n.a, p), eval_node(*n.b, p));
        case Kind::call: {
            const double a = eval_node(*n.a, p);
            switch (n.fn) {
                case FnId::exp: return std::exp(a);
                case FnId::sin: return std::sin(a);
                case FnId::cos: return std::cos(a);
                case FnId::sqrt: return std::sqrt(a);
                case FnId::log: return std::log(a);
            }
        }
    }
    return 0;
}

ExprNodePtr diff_node(const ExprNodePtr& n, ExprVar var) {
    switch (n->kind) {
        case Kind::constant: return ExprNode::make_const(0);
        case Kind::variable: return ExprNode::make_const(n->var == var ? 1 : 0);
        case Kind::neg: return make_unary(Kind::neg, diff_node(n->a, var));
        case Kind::add: return make_binary(Kind::add, diff_node(n->a, var), diff_node(n->b, var));
        case Kind::sub: return make_binary(Kind::sub, diff_node(n->a, var), diff_node(n->b, var));
        case Kind::mul:
            return make_binary(Kind::add, make_binary(Kind::mul, diff_node(n->a, var), n->b),
                               make_binary(Kind::mul, n->a, diff_node(n->b, var)));
        case Kind::div:
            return make_binary(
                Kind::div,
                make_binary(Kind::sub, make_binary(Kind::mul, diff_node(n->a, var), n->b),
                            make_binary(Kind::mul, n->a, diff_node(n->b, var))),
                make_binary(Kind::mul, n->b, n->b));
        case Kind::pow: {
            double e;
            if (const_value(n->b, &e)) {
                // d(a^c) = c a^(c-1) a'
                return make_binary(
                    Kind::mul, ExprNode::make_const(e),
                    make_binary(Kind::mul,
                                make_binary(Kind::pow, n->a, ExprNode::make_const(e - 1)),
                                diff_node(n->a, var)));
            }
            // general case: a^b (b' log a + b a'/a); log only appears through
            // differentiation, the surface grammar does not expose it
            ExprNodePtr term1 = make_binary(Kind::mul, diff_node(n->b, var), make_call(FnId::log, n->a));
            ExprNodePtr term2 =
                make_binary(Kind::div, make_binary(Kind::mul, n->b, diff_node(n->a, var)), n->a);
            return make_binary(Kind::mul, n, make_binary(Kind::add, term1, term2));
        }
        case Kind::call: {
            ExprNodePtr da = diff_node(n->a, var);
            switch (n->fn) {
                case FnId::exp: return make_binary(Kind::mul, n, da);
                case FnId::sin: return make_binary(Kind::mul, make_call(FnId::cos, n->a), da);
                case FnId::cos:
                    return make_unary(Kind::neg,
                                      make_binary(Kind::mul, make_call(FnId::sin, n->a), da));
                case FnId::sqrt:
                    return make_binary(Kind::div, da,
                                       make_binary(Kind::mul, ExprNode::make_const(2), n));
                case FnId::log: return make_binary(Kind::div, da, n->a);
            }
        }
    }
    return ExprNode::make_const(0);
}

void collect_vars(const ExprNode& n, std::set<ExprVar>& out) {
    switch (n.kind) {
        case Kind::constant: return;
        case Kind::variable: out.insert(n.var); return;
        default:
            if (n.a) collect_vars(*n.a, out);
            if (n.b) collect_vars(*n.b, out);
    }
}

void print_node(const ExprNode& n, std::ostream& os) {
    switch (n.kind) {
        case Kind::constant: {
            char buf[32];
            std::snprintf(buf, sizeof(buf), "%.17g", n.value);
            os << buf;
            return;
        }
        case Kind::variable: os << expr_var_name(n.var); return;
        case Kind::neg:
            os << "(-";
            print_node(*n.a, os);
            os << ")";
            return;
        case Kind::call:
            os << fn_name(n.fn) << "(";
            print_node(*n.a, os);
            os << ")";
            return;
        default: {
            char op = '?';
            if (n.kind == Kind::add) op = '+';
            if (n.kind == Kind::sub) op = '-';
            if (n.kind == Kind::mul) op = '*';
            if (n.kind == Kind::div) op = '/';
            if (n.kind == Kind::pow) op = '^';
            os << "(";
            print_node(*n.a, os);
            os << op;
            print_node(*n.b, os);
            os << ")";
        }
    }
}

}  // namespace

Expression Expression::parse(const std::string& text) {
    Parser p(text);
    return Expression(p.parse());
}

Expression Expression::constant(double value) {
    return Expression(ExprNode::make_const(value));
}

double Expression::eval(const ExprEvalPoint& p) const {
    if (!root_) fail(ErrorKind::invalid_argument, "evaluating empty expression");
    return eval_node(*root_, p);
}

Expression Expression::derivative(ExprVar var) const {
    if (!root_) fail(ErrorKind::invalid_argument, "differentiating empty expression");
    return Expression(diff_node(root_, var));
}

std::set<ExprVar> Expression::variables() const {
    std::set<ExprVar> out;
    if (root_) collect_vars(*root_, out);
    return out;
}

bool Expression::is_constant(double* value) const {
    return root_ && const_value(root_, value);
}

std::string Expression::str() const {
    if (!root_) return "";
    std::ostringstream os;
    print_node(*root_, os);
    return os.str();
}

const char* expr_var_name(ExprVar v) {
    switch (v) {
        case ExprVar::x1: return "x1";
        case ExprVar::x2: return "x2";
        case ExprVar::x3: return "x3";
        case ExprVar::u: return "u";
        case ExprVar::g1: return "g1";
        case ExprVar::g2: return "g2";
        case ExprVar::g3: return "g3";
    }
    return "?";
}

}  // namespace cshape
