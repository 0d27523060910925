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

#pragma once

#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "jet.hpp"

namespace umb {

/// Scalar expressions in the chart variables u, v and the family parameter
/// lambda. Grammar (whitespace insignificant):
///
///   expr   := term (('+'|'-') term)*
///   term   := factor (('*'|'/') factor)*
///   factor := base ('^' integer)?
///   base   := number | 'u' | 'v' | 'lambda'
///           | func '(' expr ')' | '(' expr ')' | '-' base
///   func   := 'sin'|'cos'|'exp'|'ln'|'sqrt'|'atan'
///
/// Unary minus and signed exponents are accepted as a superset of the
/// config grammar. Parse failures throw Error(kSyntax) carrying the byte
/// offset of the offending token.
struct ExprNode;
using ExprPtr = std::shared_ptr<const ExprNode>;

enum class Func1 { kSin, kCos, kExp, kLn, kSqrt, kAtan };

struct ExprNode {
    enum class Kind {
        kNumber, kVarU, kVarV, kVarLambda,
        kNeg, kAdd, kSub, kMul, kDiv, kPow, kCall,
    };
    Kind kind = Kind::kNumber;
    double number = 0.0;
    int exponent = 0;      // kPow only
    Func1 func = Func1::kSin; // kCall only
    ExprPtr a;             // operand / lhs
    ExprPtr b;             // rhs
};

ExprPtr parse_expression(std::string_view text);

/// Canonical text form; parse_expression(unparse(t)) reproduces t exactly.
std::string unparse(const ExprPtr& tree);

double eval(const ExprPtr& tree, double u, double v, double lambda);

/// Taylor expansion of the expression about (u, v) at the given order.
Jet2 eval_jet(const ExprPtr& tree, int order, double u, double v, double lambda);

/// Replaces every occurrence of u and v by the given subtrees. Used to
/// build reparametrized and rotated variants of a surface.
ExprPtr substitute(const ExprPtr& tree, const ExprPtr& for_u, const ExprPtr& for_v);

int node_count(const ExprPtr& tree);

/// Flat postfix program compiled from an expression, for evaluation in
/// inner loops without tree traversal.
class ExprProgram {
public:
    ExprProgram() = default;
    explicit ExprProgram(const ExprPtr& tree);
    explicit ExprProgram(std::string_view text) : ExprProgram(parse_expression(text)) {}

    bool empty() const { return _code.empty(); }
    const std::string& text() const { return _text; }

    double eval(double u, double v, double lambda) const;
    Jet2 eval_jet(int order, double u, double v, double lambda) const;

private:
    struct Instr {
        ExprNode::Kind op;
        double number;
        int exponent;
        Func1 func;
    };
    std::vector<Instr> _code;
    std::string _text;

    template <class T, class MakeLeaf>
    T run(const MakeLeaf& leaf) const;
};

} // namespace umb
