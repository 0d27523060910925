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

#include "jet.hpp"

#include <cmath>
#include <cstdlib>

namespace umb {

namespace {

// Triangular packing: all coefficients of total degree d sit at
// offset d(d+1)/2, ordered by increasing j.
inline int pack(int i, int j) {
    const int d = i + j;
    return d * (d + 1) / 2 + j;
}

constexpr double kBinom[5][5] = {
    {1, 0, 0, 0, 0},
    {1, 1, 0, 0, 0},
    {1, 2, 1, 0, 0},
    {1, 3, 3, 1, 0},
    {1, 4, 6, 4, 1},
};

constexpr double kFactorial[5] = {1, 1, 2, 6, 24};

void check_order(int order) {
    if (order < 0 || order > Jet2::kMaxOrder)
        throw Error(ErrorKind::kInternal, "jet order out of range");
}

} // namespace

Jet2::Jet2(int order) : _order(order) {
    check_order(order);
    _d.fill(0.0);
}

Jet2 Jet2::constant(int order, double value) {
    Jet2 r(order);
    r._d[0] = value;
    return r;
}

Jet2 Jet2::coordinate_u(int order, double value) {
    Jet2 r(order);
    r._d[0] = value;
    if (order >= 1) r._d[pack(1, 0)] = 1.0;
    return r;
}

Jet2 Jet2::coordinate_v(int order, double value) {
    Jet2 r(order);
    r._d[0] = value;
    if (order >= 1) r._d[pack(0, 1)] = 1.0;
    return r;
}

double Jet2::deriv(int i, int j) const {
    if (i < 0 || j < 0) throw Error(ErrorKind::kInternal, "negative jet index");
    if (i + j > _order) return 0.0;
    return _d[pack(i, j)];
}

void Jet2::set_deriv(int i, int j, double x) {
    if (i < 0 || j < 0 || i + j > _order)
        throw Error(ErrorKind::kInternal, "jet index out of range");
    _d[pack(i, j)] = x;
}

Jet2 Jet2::d_du() const {
    if (_order == 0) return Jet2(0);
    Jet2 r(_order - 1);
    for (int d = 0; d < _order; ++d)
        for (int j = 0; j <= d; ++j)
            r._d[pack(d - j, j)] = _d[pack(d - j + 1, j)];
    return r;
}

Jet2 Jet2::d_dv() const {
    if (_order == 0) return Jet2(0);
    Jet2 r(_order - 1);
    for (int d = 0; d < _order; ++d)
        for (int j = 0; j <= d; ++j)
            r._d[pack(d - j, j)] = _d[pack(d - j, j + 1)];
    return r;
}

double Jet2::eval(double du, double dv) const {
    // Powers of the offsets; Taylor weight is 1/(i! j!).
    double pu[kMaxOrder + 1], pv[kMaxOrder + 1];
    pu[0] = pv[0] = 1.0;
    for (int i = 1; i <= _order; ++i) {
        pu[i] = pu[i - 1] * du;
        pv[i] = pv[i - 1] * dv;
    }
    double sum = 0.0;
    for (int d = _order; d >= 0; --d)
        for (int j = 0; j <= d; ++j) {
            const int i = d - j;
            sum += _d[pack(i, j)] / (kFactorial[i] * kFactorial[j]) * pu[i] * pv[j];
        }
    return sum;
}

Jet2 Jet2::truncated(int order) const {
    check_order(order);
    Jet2 r(order);
    const int n = order < _order ? order : _order;
    for (int d = 0; d <= n; ++d)
        for (int j = 0; j <= d; ++j)
            r._d[pack(d - j, j)] = _d[pack(d - j, j)];
    return r;
}

Jet2 Jet2::operator-() const {
    Jet2 r(*this);
    for (double& x : r._d) x = -x;
    return r;
}

Jet2& Jet2::operator+=(const Jet2& o) {
    if (o._order < _order) *this = truncated(o._order);
    for (int d = 0; d <= _order; ++d)
        for (int j = 0; j <= d; ++j)
            _d[pack(d - j, j)] += o._d[pack(d - j, j)];
    return *this;
}

Jet2& Jet2::operator-=(const Jet2& o) {
    if (o._order < _order) *this = truncated(o._order);
    for (int d = 0; d <= _order; ++d)
        for (int j = 0; j <= d; ++j)
            _d[pack(d - j, j)] -= o._d[pack(d - j, j)];
    return *this;
}

Jet2& Jet2::operator*=(double s) {
    for (double& x : _d) x *= s;
    return *this;
}

Jet2 operator*(const Jet2& a, const Jet2& b) {
    // Leibniz rule on derivative values:
    // d(fg)(i,j) = sum C(i,k) C(j,l) f(k,l) g(i-k, j-l).
    const int n = a._order < b._order ? a._order : b._order;
    Jet2 r(n);
    for (int d = 0; d <= n; ++d)
        for (int j = 0; j <= d; ++j) {
            const int i = d - j;
            double sum = 0.0;
            for (int k = 0; k <= i; ++k)
                for (int l = 0; l <= j; ++l)
                    sum += kBinom[i][k] * kBinom[j][l] *
                           a._d[pack(k, l)] * b._d[pack(i - k, j - l)];
            r._d[pack(i, j)] = sum;
        }
    return r;
}

Jet2 Jet2::compose_scalar(const double* phi) const {
    Jet2 g(*this);
    g._d[0] = 0.0;
    Jet2 acc = Jet2::constant(_order, phi[0]);
    Jet2 gm = Jet2::constant(_order, 1.0);
    for (int m = 1; m <= _order; ++m) {
        gm = gm * g;
        acc += gm * (phi[m] / kFactorial[m]);
    }
    return acc;
}

Jet2 operator/(const Jet2& a, const Jet2& b) {
    const double b0 = b.value();
    if (b0 == 0.0)
        throw Error(ErrorKind::kDomain, "division by a jet with vanishing value");
    const double inv = 1.0 / b0;
    const double phi[5] = {inv, -inv * inv, 2 * inv * inv * inv,
                           -6 * inv * inv * inv * inv,
                           24 * inv * inv * inv * inv * inv};
    return a * b.compose_scalar(phi);
}

Jet2 operator/(double s, const Jet2& b) {
    return Jet2::constant(b.order(), s) / b;
}

Jet2 Jet2::pow_int(int n) const {
    if (n < 0) {
        if (value() == 0.0)
            throw Error(ErrorKind::kDomain, "negative power of a jet with vanishing value");
        return Jet2::constant(_order, 1.0) / pow_int(-n);
    }
    Jet2 acc = Jet2::constant(_order, 1.0);
    Jet2 base(*this);
    while (n > 0) {
        if (n & 1) acc = acc * base;
        n >>= 1;
        if (n) base = base * base;
    }
    return acc;
}

Jet2 sin(const Jet2& f) {
    const double s = std::sin(f.value()), c = std::cos(f.value());
    const double phi[5] = {s, c, -s, -c, s};
    return f.compose_scalar(phi);
}

Jet2 cos(const Jet2& f) {
    const double s = std::sin(f.value()), c = std::cos(f.value());
    const double phi[5] = {c, -s, -c, s, c};
    return f.compose_scalar(phi);
}

Jet2 exp(const Jet2& f) {
    const double e = std::exp(f.value());
    const double phi[5] = {e, e, e, e, e};
    return f.compose_scalar(phi);
}

Jet2 ln(const Jet2& f) {
    const double x = f.value();
    if (x <= 0.0)
        throw Error(ErrorKind::kDomain, "ln of a jet with non-positive value");
    const double i1 = 1.0 / x, i2 = i1 * i1;
    const double phi[5] = {std::log(x), i1, -i2, 2 * i2 * i1, -6 * i2 * i2};
    return f.compose_scalar(phi);
}

Jet2 sqrt(const Jet2& f) {
    const double x = f.value();
    if (x <= 0.0)
        throw Error(ErrorKind::kDomain, "sqrt of a jet with non-positive value");
    const double s = std::sqrt(x);
    const double phi[5] = {s, 0.5 / s, -0.25 / (x * s), 0.375 / (x * x * s),
                           -0.9375 / (x * x * x * s)};
    return f.compose_scalar(phi);
}

Jet2 atan(const Jet2& f) {
    const double x = f.value();
    const double w = 1.0 / (1.0 + x * x);
    const double phi[5] = {std::atan(x), w, -2 * x * w * w,
                           (6 * x * x - 2) * w * w * w,
                           (24 * x - 24 * x * x * x) * w * w * w * w};
    return f.compose_scalar(phi);
}

Jet2 compose(const Jet2& f, const Jet2& U, const Jet2& V) {
    if (std::abs(U.value()) > 1e-12 || std::abs(V.value()) > 1e-12)
        throw Error(ErrorKind::kInternal, "jet composition requires zero-offset inner maps");
    int n = f.order();
    if (U.order() < n) n = U.order();
    if (V.order() < n) n = V.order();

    Jet2 up[Jet2::kMaxOrder + 1];
    Jet2 vp[Jet2::kMaxOrder + 1];
    up[0] = Jet2::constant(n, 1.0);
    vp[0] = up[0];
    for (int i = 1; i <= n; ++i) {
        up[i] = up[i - 1] * U.truncated(n);
        vp[i] = vp[i - 1] * V.truncated(n);
    }
    Jet2 acc(n);
    for (int d = 0; d <= n; ++d)
        for (int j = 0; j <= d; ++j) {
            const int i = d - j;
            const double t = f.deriv(i, j) / (kFactorial[i] * kFactorial[j]);
            if (t != 0.0) acc += up[i] * vp[j] * t;
        }
    return acc;
}

void invert_map(const Jet2& X, const Jet2& Y, Jet2& U, Jet2& V) {
    const int n = X.order() < Y.order() ? X.order() : Y.order();
    if (std::abs(X.value()) > 1e-12 || std::abs(Y.value()) > 1e-12)
        throw Error(ErrorKind::kInternal, "map inversion requires zero constant terms");
    const double xu = X.deriv(1, 0), xv = X.deriv(0, 1);
    const double yu = Y.deriv(1, 0), yv = Y.deriv(0, 1);
    const double det = xu * yv - xv * yu;
    const double scale = std::abs(xu) + std::abs(xv) + std::abs(yu) + std::abs(yv);
    if (std::abs(det) <= 1e-14 * scale * scale)
        throw Error(ErrorKind::kNumeric, "jet map has a degenerate linear part");
    const double a11 = yv / det, a12 = -xv / det;
    const double a21 = -yu / det, a22 = xu / det;

    const Jet2 xj = Jet2::coordinate_u(n, 0.0);
    const Jet2 yj = Jet2::coordinate_v(n, 0.0);
    U = xj * a11 + yj * a12;
    V = xj * a21 + yj * a22;
    // Newton with the exact linear part gains at least one correct order
    // per pass, so kMaxOrder passes close any order we store.
    for (int pass = 0; pass < Jet2::kMaxOrder; ++pass) {
        const Jet2 eu = compose(X, U, V) - xj;
        const Jet2 ev = compose(Y, U, V) - yj;
        U -= eu * a11 + ev * a12;
        V -= eu * a21 + ev * a22;
    }
}

} // namespace umb
