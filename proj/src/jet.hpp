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

#include <array>

#include "error.hpp"

namespace umb {

/// Truncated bivariate Taylor expansion of a smooth function about a base
/// point, up to total order 4. Coefficients are stored as raw
/// partial-derivative values d(i,j) = d^(i+j) f / du^i dv^j at the base
/// point, packed per total degree: (0,0), (1,0), (0,1), (2,0), (1,1), ...
///
/// The base point itself is not stored; a Jet2 always describes offsets
/// (du, dv) from wherever it was evaluated. Arithmetic truncates to the
/// smaller order of the two operands.
class Jet2 {
public:
    static constexpr int kMaxOrder = 4;
    static constexpr int kStorage = 15; // (kMaxOrder+1)(kMaxOrder+2)/2

    Jet2() : _order(0) { _d.fill(0.0); }

    explicit Jet2(int order);

    /// Jet of the constant function `value`.
    static Jet2 constant(int order, double value);

    /// Jet of the coordinate function u at a point where u = value.
    static Jet2 coordinate_u(int order, double value);

    /// Jet of the coordinate function v at a point where v = value.
    static Jet2 coordinate_v(int order, double value);

    int order() const { return _order; }

    double value() const { return _d[0]; }

    /// Partial-derivative value d^(i+j) f / du^i dv^j. Indices beyond the
    /// truncation order read as 0.
    double deriv(int i, int j) const;

    void set_deriv(int i, int j, double x);

    /// Derivative jets, one order lower.
    Jet2 d_du() const;
    Jet2 d_dv() const;

    /// Taylor evaluation at offset (du, dv) from the base point.
    double eval(double du, double dv) const;

    /// Copy truncated (or zero-extended) to the given order.
    Jet2 truncated(int order) const;

    Jet2 operator-() const;
    Jet2& operator+=(const Jet2& o);
    Jet2& operator-=(const Jet2& o);
    Jet2& operator+=(double s) { _d[0] += s; return *this; }
    Jet2& operator-=(double s) { _d[0] -= s; return *this; }
    Jet2& operator*=(double s);

    friend Jet2 operator+(Jet2 a, const Jet2& b) { a += b; return a; }
    friend Jet2 operator-(Jet2 a, const Jet2& b) { a -= b; return a; }
    friend Jet2 operator+(Jet2 a, double s) { a += s; return a; }
    friend Jet2 operator+(double s, Jet2 a) { a += s; return a; }
    friend Jet2 operator-(Jet2 a, double s) { a -= s; return a; }
    friend Jet2 operator-(double s, const Jet2& a) { return -a + s; }
    friend Jet2 operator*(Jet2 a, double s) { a *= s; return a; }
    friend Jet2 operator*(double s, Jet2 a) { a *= s; return a; }
    friend Jet2 operator*(const Jet2& a, const Jet2& b);
    friend Jet2 operator/(const Jet2& a, const Jet2& b);
    friend Jet2 operator/(Jet2 a, double s) { a *= 1.0 / s; return a; }
    friend Jet2 operator/(double s, const Jet2& b);

    /// Integer power. Negative exponents require a non-vanishing value.
    Jet2 pow_int(int n) const;

    /// Composition with a scalar function given its derivatives
    /// phi(f0), phi'(f0), ..., phi^(order)(f0) at the jet's value.
    Jet2 compose_scalar(const double* phi_derivs) const;

private:
    int _order;
    std::array<double, kStorage> _d;
};

Jet2 sin(const Jet2& f);
Jet2 cos(const Jet2& f);
Jet2 exp(const Jet2& f);
Jet2 ln(const Jet2& f);
Jet2 sqrt(const Jet2& f);
Jet2 atan(const Jet2& f);

/// f composed with the map (x,y) -> (U(x,y), V(x,y)). U and V must have
/// zero constant term, i.e. the map sends the new base point to f's base
/// point. Orders are truncated to the smallest of the three.
Jet2 compose(const Jet2& f, const Jet2& U, const Jet2& V);

/// Inverts the jet map (x,y) -> (X(x,y), Y(x,y)) with X(0,0)=Y(0,0)=0 and
/// invertible linear part. On return, compose(X,U,V) is the coordinate jet
/// x and compose(Y,U,V) is y, up to the common truncation order.
void invert_map(const Jet2& X, const Jet2& Y, Jet2& U, Jet2& V);

} // namespace umb
