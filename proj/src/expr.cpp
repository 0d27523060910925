/*
Copyright 2026 The umbilic authors

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

                http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
*/

#include "expr.hpp"

#include <charconv>
#include <cmath>
#include <utility>
#include <vector>

namespace umb {

namespace {

using Kind = ExprNode::Kind;

ExprPtr make_node(ExprNode n) { return std::make_shared<const ExprNode>(std::move(n)); }

ExprPtr make_number(double x) {
    ExprNode n;
    n.kind = Kind::kNumber;
    n.number = x;
    return make_node(std::move(n));
}

ExprPtr make_unary(Kind k, ExprPtr a) {
    ExprNode n;
    n.kind = k;
    n.a = std::move(a);
    return make_node(std::move(n));
}

ExprPtr make_binary(Kind k, ExprPtr a, ExprPtr b) {
    ExprNode n;
    n.kind = k;
    n.a = std::move(a);
    n.b = std::move(b);
    return make_node(std::move(n));
}

struct Token {
    enum class Type { kNumber, kIdent, kOp, kEnd };
    Type type = Type::kEnd;
    double number = 0.0;
    std::string_view ident;
    char op = 0;
    size_t offset = 0;
};

class Lexer {
public:
    explicit Lexer(std::string_view text) : _text(text) { advance(); }

    const Token& peek() const { return _tok; }

    Token take() {
        Token t = _tok;
        advance();
        return t;
    }

    [[noreturn]] void fail(const Token& at, const std::string& what) const {
        throw Error(ErrorKind::kSyntax, what + " at byte " + std::to_string(at.offset),
                    static_cast<std::ptrdiff_t>(at.offset));
    }

private:
    std::string_view _text;
    size_t _pos = 0;
    Token _tok;

    void advance() {
        while (_pos < _text.size() && (_text[_pos] == ' ' || _text[_pos] == '\t' ||
                                       _text[_pos] == '\n' || _text[_pos] == '\r'))
            ++_pos;
        _tok = Token{};
        _tok.offset = _pos;
        if (_pos >= _text.size()) {
            _tok.type = Token::Type::kEnd;
            return;
        }
        const char c = _text[_pos];
        if ((c >= '0' && c <= '9') || c == '.') {
            double value = 0.0;
            const char* begin = _text.data() + _pos;
            const char* end = _text.data() + _text.size();
            auto res = std::from_chars(begin, end, value);
            if (res.ec != std::errc() || res.ptr == begin)
                throw Error(ErrorKind::kSyntax,
                            "malformed number at byte " + std::to_string(_pos),
                            static_cast<std::ptrdiff_t>(_pos));
            _tok.type = Token::Type::kNumber;
            _tok.number = value;
            _pos += static_cast<size_t>(res.ptr - begin);
            return;
        }
        if ((c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || c == '_') {
            size_t end = _pos;
            while (end < _text.size() &&
                   ((_text[end] >= 'a' && _text[end] <= 'z') ||
                    (_text[end] >= 'A' && _text[end] <= 'Z') ||
                    (_text[end] >= '0' && _text[end] <= '9') || _text[end] == '_'))
                ++end;
            _tok.type = Token::Type::kIdent;
            _tok.ident = _text.substr(_pos, end - _pos);
            _pos = end;
            return;
        }
        if (c == '+' || c == '-' || c == '*' || c == '/' || c == '^' ||
            c == '(' || c == ')') {
            _tok.type = Token::Type::kOp;
            _tok.op = c;
            ++_pos;
            return;
        }
        throw Error(ErrorKind::kSyntax,
                    std::string("unexpected character '") + c + "' at byte " +
                        std::to_string(_pos),
                    static_cast<std::ptrdiff_t>(_pos));
    }
};

class Parser {
public:
    explicit Parser(std::string_view text) : _lex(text) {}

    ExprPtr parse() {
        ExprPtr e = expr();
        const Token& t = _lex.peek();
        if (t.type != Token::Type::kEnd)
            _lex.fail(t, "trailing input");
        return e;
    }

private:
    Lexer _lex;
    int _depth = 0;

    struct DepthGuard {
        explicit DepthGuard(Parser& p) : _p(p) {
            if (++_p._depth > 256)
                throw Error(ErrorKind::kSyntax, "expression nested too deeply");
        }
        ~DepthGuard() { --_p._depth; }
        Parser& _p;
    };

    bool peek_op(char c) const {
        const Token& t = _lex.peek();
        return t.type == Token::Type::kOp && t.op == c;
    }

    ExprPtr expr() {
        DepthGuard guard(*this);
        ExprPtr lhs = term();
        while (peek_op('+') || peek_op('-')) {
            const char op = _lex.take().op;
            ExprPtr rhs = term();
            lhs = make_binary(op == '+' ? Kind::kAdd : Kind::kSub,
                              std::move(lhs), std::move(rhs));
        }
        return lhs;
    }

    ExprPtr term() {
        DepthGuard guard(*this);
        ExprPtr lhs = factor();
        while (peek_op('*') || peek_op('/')) {
            const char op = _lex.take().op;
            ExprPtr rhs = factor();
            lhs = make_binary(op == '*' ? Kind::kMul : Kind::kDiv,
                              std::move(lhs), std::move(rhs));
        }
        return lhs;
    }

    ExprPtr factor() {
        DepthGuard guard(*this);
        ExprPtr b = base();
        if (peek_op('^')) {
            _lex.take();
            int sign = 1;
            if (peek_op('-')) {
                _lex.take();
                sign = -1;
            }
            const Token t = _lex.take();
            if (t.type != Token::Type::kNumber)
                _lex.fail(t, "expected integer exponent");
            const double rounded = std::nearbyint(t.number);
            if (t.number != rounded || std::abs(rounded) > 64)
                _lex.fail(t, "exponent must be a small integer");
            ExprNode n;
            n.kind = Kind::kPow;
            n.exponent = sign * static_cast<int>(rounded);
            n.a = std::move(b);
            return make_node(std::move(n));
        }
        return b;
    }

    ExprPtr base() {
        DepthGuard guard(*this);
        const Token t = _lex.take();
        switch (t.type) {
        case Token::Type::kNumber:
            return make_number(t.number);
        case Token::Type::kOp:
            if (t.op == '(') {
                ExprPtr e = expr();
                const Token close = _lex.take();
                if (close.type != Token::Type::kOp || close.op != ')')
                    _lex.fail(close, "expected ')'");
                return e;
            }
            if (t.op == '-')
                return make_unary(Kind::kNeg, base());
            _lex.fail(t, std::string("unexpected '") + t.op + "'");
        case Token::Type::kIdent: {
            if (t.ident == "u") return make_unary(Kind::kVarU, nullptr);
            if (t.ident == "v") return make_unary(Kind::kVarV, nullptr);
            if (t.ident == "lambda") return make_unary(Kind::kVarLambda, nullptr);
            Func1 f;
            if (t.ident == "sin") f = Func1::kSin;
            else if (t.ident == "cos") f = Func1::kCos;
            else if (t.ident == "exp") f = Func1::kExp;
            else if (t.ident == "ln") f = Func1::kLn;
            else if (t.ident == "sqrt") f = Func1::kSqrt;
            else if (t.ident == "atan") f = Func1::kAtan;
            else _lex.fail(t, "unknown identifier '" + std::string(t.ident) + "'");
            const Token open = _lex.take();
            if (open.type != Token::Type::kOp || open.op != '(')
                _lex.fail(open, "expected '(' after function name");
            ExprPtr arg = expr();
            const Token close = _lex.take();
            if (close.type != Token::Type::kOp || close.op != ')')
                _lex.fail(close, "expected ')'");
            ExprNode n;
            n.kind = Kind::kCall;
            n.func = f;
            n.a = std::move(arg);
            return make_node(std::move(n));
        }
        case Token::Type::kEnd:
        default:
            _lex.fail(t, "unexpected end of expression");
        }
    }
};

const char* func_name(Func1 f) {
    switch (f) {
    case Func1::kSin: return "sin";
    case Func1::kCos: return "cos";
    case Func1::kExp: return "exp";
    case Func1::kLn: return "ln";
    case Func1::kSqrt: return "sqrt";
    case Func1::kAtan: return "atan";
    }
    return "?";
}

std::string format_number(double x) {
    char buf[32];
    auto res = std::to_chars(buf, buf + sizeof(buf), x);
    return std::string(buf, res.ptr);
}

// Precedence levels for parenthesization: add 1, mul 2, neg 2, pow 3, atom 4.
int precedence(Kind k) {
    switch (k) {
    case Kind::kAdd:
    case Kind::kSub: return 1;
    case Kind::kMul:
    case Kind::kDiv: return 2;
    case Kind::kNeg: return 2;
    case Kind::kPow: return 3;
    default: return 4;
    }
}

void unparse_rec(const ExprPtr& t, std::string& out, int parent_prec, bool rhs) {
    const int prec = precedence(t->kind);
    const bool parens = prec < parent_prec || (prec == parent_prec && rhs);
    if (parens) out += '(';
    switch (t->kind) {
    case Kind::kNumber:
        if (t->number < 0) {
            // Negative literals only arise from programmatic trees; emit a
            // parenthesized form the grammar can read back.
            out += "(0 - " + format_number(-t->number) + ")";
        } else {
            out += format_number(t->number);
        }
        break;
    case Kind::kVarU: out += 'u'; break;
    case Kind::kVarV: out += 'v'; break;
    case Kind::kVarLambda: out += "lambda"; break;
    case Kind::kNeg:
        out += '-';
        unparse_rec(t->a, out, prec + 1, false);
        break;
    case Kind::kAdd:
    case Kind::kSub:
        unparse_rec(t->a, out, prec, false);
        out += t->kind == Kind::kAdd ? " + " : " - ";
        unparse_rec(t->b, out, prec, true);
        break;
    case Kind::kMul:
    case Kind::kDiv:
        unparse_rec(t->a, out, prec, false);
        out += t->kind == Kind::kMul ? "*" : "/";
        unparse_rec(t->b, out, prec, true);
        break;
    case Kind::kPow:
        unparse_rec(t->a, out, prec + 1, false);
        out += '^';
        if (t->exponent < 0) {
            out += '-';
            out += std::to_string(-t->exponent);
        } else {
            out += std::to_string(t->exponent);
        }
        break;
    case Kind::kCall:
        out += func_name(t->func);
        out += '(';
        unparse_rec(t->a, out, 0, false);
        out += ')';
        break;
    }
    if (parens) out += ')';
}

double ln_dispatch(double x) {
    if (x <= 0.0)
        throw Error(ErrorKind::kDomain, "ln of a non-positive value");
    return std::log(x);
}
Jet2 ln_dispatch(const Jet2& x) { return ln(x); }

double sqrt_dispatch(double x) {
    if (x < 0.0)
        throw Error(ErrorKind::kDomain, "sqrt of a negative value");
    return std::sqrt(x);
}
Jet2 sqrt_dispatch(const Jet2& x) { return sqrt(x); }

double div_dispatch(double a, double b) {
    if (b == 0.0)
        throw Error(ErrorKind::kDomain, "division by zero");
    return a / b;
}
Jet2 div_dispatch(const Jet2& a, const Jet2& b) { return a / b; }

double pow_dispatch(double base, int n) {
    if (n < 0 && base == 0.0)
        throw Error(ErrorKind::kDomain, "negative power of zero");
    return std::pow(base, n);
}
Jet2 pow_dispatch(const Jet2& base, int n) { return base.pow_int(n); }

using std::atan;
using std::cos;
using std::exp;
using std::sin;

template <class T, class LeafFn>
T eval_rec(const ExprPtr& t, const LeafFn& leaf) {
    switch (t->kind) {
    case Kind::kNumber:
    case Kind::kVarU:
    case Kind::kVarV:
    case Kind::kVarLambda:
        return leaf(*t);
    case Kind::kNeg: return -eval_rec<T>(t->a, leaf);
    case Kind::kAdd: return eval_rec<T>(t->a, leaf) + eval_rec<T>(t->b, leaf);
    case Kind::kSub: return eval_rec<T>(t->a, leaf) - eval_rec<T>(t->b, leaf);
    case Kind::kMul: return eval_rec<T>(t->a, leaf) * eval_rec<T>(t->b, leaf);
    case Kind::kDiv:
        return div_dispatch(eval_rec<T>(t->a, leaf), eval_rec<T>(t->b, leaf));
    case Kind::kPow: return pow_dispatch(eval_rec<T>(t->a, leaf), t->exponent);
    case Kind::kCall: {
        T arg = eval_rec<T>(t->a, leaf);
        switch (t->func) {
        case Func1::kSin: return sin(arg);
        case Func1::kCos: return cos(arg);
        case Func1::kExp: return exp(arg);
        case Func1::kLn: return ln_dispatch(arg);
        case Func1::kSqrt: return sqrt_dispatch(arg);
        case Func1::kAtan: return atan(arg);
        }
        break;
    }
    }
    throw Error(ErrorKind::kInternal, "corrupt expression tree");
}

} // namespace

ExprPtr parse_expression(std::string_view text) {
    return Parser(text).parse();
}

std::string unparse(const ExprPtr& tree) {
    std::string out;
    unparse_rec(tree, out, 0, false);
    return out;
}

double eval(const ExprPtr& tree, double u, double v, double lambda) {
    return eval_rec<double>(tree, [&](const ExprNode& n) -> double {
        switch (n.kind) {
        case Kind::kNumber: return n.number;
        case Kind::kVarU: return u;
        case Kind::kVarV: return v;
        default: return lambda;
        }
    });
}

Jet2 eval_jet(const ExprPtr& tree, int order, double u, double v, double lambda) {
    return eval_rec<Jet2>(tree, [&](const ExprNode& n) -> Jet2 {
        switch (n.kind) {
        case Kind::kNumber: return Jet2::constant(order, n.number);
        case Kind::kVarU: return Jet2::coordinate_u(order, u);
        case Kind::kVarV: return Jet2::coordinate_v(order, v);
        default: return Jet2::constant(order, lambda);
        }
    });
}

ExprPtr substitute(const ExprPtr& tree, const ExprPtr& for_u, const ExprPtr& for_v) {
    switch (tree->kind) {
    case Kind::kVarU: return for_u;
    case Kind::kVarV: return for_v;
    case Kind::kNumber:
    case Kind::kVarLambda:
        return tree;
    default: {
        ExprNode n;
        n.kind = tree->kind;
        n.number = tree->number;
        n.exponent = tree->exponent;
        n.func = tree->func;
        if (tree->a) n.a = substitute(tree->a, for_u, for_v);
        if (tree->b) n.b = substitute(tree->b, for_u, for_v);
        return make_node(std::move(n));
    }
    }
}

int node_count(const ExprPtr& tree) {
    if (!tree) return 0;
    return 1 + node_count(tree->a) + node_count(tree->b);
}

ExprProgram::ExprProgram(const ExprPtr& tree) {
    _text = unparse(tree);
    // Post-order flattening; operands land on the stack before operators.
    std::vector<std::pair<const ExprNode*, bool>> stack{{tree.get(), false}};
    while (!stack.empty()) {
        auto [node, expanded] = stack.back();
        stack.pop_back();
        if (expanded) {
            _code.push_back(Instr{node->kind, node->number, node->exponent, node->func});
            continue;
        }
        stack.push_back({node, true});
        if (node->b) stack.push_back({node->b.get(), false});
        if (node->a && node->kind != Kind::kVarU && node->kind != Kind::kVarV &&
            node->kind != Kind::kVarLambda)
            stack.push_back({node->a.get(), false});
    }
}

template <class T, class MakeLeaf>
T ExprProgram::run(const MakeLeaf& leaf) const {
    // Stack depth never exceeds the instruction count.
    std::vector<T> stack(_code.size());
    int top = -1;
    for (const Instr& in : _code) {
        switch (in.op) {
        case Kind::kNumber:
        case Kind::kVarU:
        case Kind::kVarV:
        case Kind::kVarLambda:
            stack[++top] = leaf(in);
            break;
        case Kind::kNeg:
            stack[top] = -stack[top];
            break;
        case Kind::kAdd:
            --top;
            stack[top] = stack[top] + stack[top + 1];
            break;
        case Kind::kSub:
            --top;
            stack[top] = stack[top] - stack[top + 1];
            break;
        case Kind::kMul:
            --top;
            stack[top] = stack[top] * stack[top + 1];
            break;
        case Kind::kDiv:
            --top;
            stack[top] = div_dispatch(stack[top], stack[top + 1]);
            break;
        case Kind::kPow:
            stack[top] = pow_dispatch(stack[top], in.exponent);
            break;
        case Kind::kCall:
            switch (in.func) {
            case Func1::kSin: stack[top] = sin(stack[top]); break;
            case Func1::kCos: stack[top] = cos(stack[top]); break;
            case Func1::kExp: stack[top] = exp(stack[top]); break;
            case Func1::kLn: stack[top] = ln_dispatch(stack[top]); break;
            case Func1::kSqrt: stack[top] = sqrt_dispatch(stack[top]); break;
            case Func1::kAtan: stack[top] = atan(stack[top]); break;
            }
            break;
        }
    }
    return stack[0];
}

double ExprProgram::eval(double u, double v, double lambda) const {
    return run<double>([&](const Instr& in) -> double {
        switch (in.op) {
        case Kind::kNumber: return in.number;
        case Kind::kVarU: return u;
        case Kind::kVarV: return v;
        default: return lambda;
        }
    });
}

Jet2 ExprProgram::eval_jet(int order, double u, double v, double lambda) const {
    return run<Jet2>([&](const Instr& in) -> Jet2 {
        switch (in.op) {
        case Kind::kNumber: return Jet2::constant(order, in.number);
        case Kind::kVarU: return Jet2::coordinate_u(order, u);
        case Kind::kVarV: return Jet2::coordinate_v(order, v);
        default: return Jet2::constant(order, lambda);
        }
    });
}

} // namespace umb
