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

#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "jet.hpp"

using umb::Error;
using umb::ErrorKind;
using umb::Jet2;

namespace {

// Frozen symbolic-differentiation tables (see tests/oracles/gen_jet_oracle.py).
// Layout matches Jet2 storage: (0,0), (1,0), (0,1), (2,0), (1,1), (0,2), ...

// sin(u^2 + 3v) * exp(u/2) at (0.3, -0.2)
const double kOracleSinExp[] = {
    -5.67181041949380904e-01, 3.24800151506831336e-01,  3.04195336240760916e+00,
    2.69874949536769337e+00,  2.54190255671269005e+00,  5.10462937754442869e+00,
    5.55645760810216682e+00,  4.08939725734033477e+00,  -2.92320136356148241e+00,
    -2.73775802616684807e+01, 9.61489286251702069e+00,  -6.71065228107365730e+00,
    -2.42887454583092399e+01, -2.28771230104142127e+01, -4.59416643978998565e+01,
};

// atan((u - v)/(1 + u v)) at (0.4, 0.1); equals atan(u) - atan(v), so every
// mixed partial vanishes.
const double kOracleAtanDiv[] = {
    2.80837724621202878e-01,  8.62068965517241326e-01, -9.90099009900990090e-01,
    -5.94530321046373378e-01, 0.0,
    1.96059209881384172e-01,  -6.66283980483004634e-01,
    0.0,                      0.0,
    1.88294488697963014e+00,  4.45367541330814731e+00,
    0.0,                      0.0,
    0.0,                      -2.28328929849117168e+00,
};

// ln(sqrt(1 + u^2 + v^2) + u) at (0.25, -0.5)
const double kOracleLnSqrt[] = {
    3.33355902849662489e-01,  8.72871560943969560e-01,  -3.12712843905603055e-01,
    -1.66261249703613251e-01, 3.32522499407226502e-01,  4.08507662627446311e-01,
    -5.70038570412388257e-01, -1.90012856804129410e-01, -2.85019285206194128e-01,
    9.92441882169368905e-01,  1.04959482806090532e+00,  -5.79086801688775354e-01,
    1.80964625527742298e-02,  -1.55629577953858389e+00, 4.36405729764601347e-01,
};

// exp(x)cos(y) at (0.1 + U, 0.2 + V) with U = 0.3u - 0.2v + 0.5u^2 and
// V = u + 0.4v - 0.1v^2, expanded about (u,v) = (0,0).
const double kOracleCompose[] = {
    1.08314107960806316e+00,  1.05378757174166615e-01,  -3.04453642604913588e-01,
    -3.42554428602257141e-02, -4.80679811283048875e-01, -5.09340455379967416e-02,
    -4.69164487278315112e-01, -2.61007058935387115e-01, 4.00998203002494003e-01,
    3.32435663173786478e-01,  -2.70817414177559801e+00, -8.92030489348907496e-01,
    2.45182985899916106e-01,  -8.49328232074093997e-02, -3.90119591496911222e-01,
};

void check_against(const Jet2& jet, const double* table, double rel = 1e-12) {
    int idx = 0;
    for (int total = 0; total <= jet.order(); ++total) {
        for (int j = 0; j <= total; ++j) {
            int i = total - j;
            double want = table[idx++];
            double tol = rel * std::max(1.0, std::abs(want));
            INFO("deriv(", i, ",", j, ")");
            CHECK(std::abs(jet.deriv(i, j) - want) <= tol);
        }
    }
}

} // namespace

TEST_CASE("monomial jets reproduce exact derivatives") {
    Jet2 u = Jet2::coordinate_u(3, 0.0);
    Jet2 cube = u * u * u;
    CHECK(cube.deriv(3, 0) == 6.0);
    for (int i = 0; i <= 3; ++i)
        for (int j = 0; i + j <= 3; ++j)
            if (!(i == 3 && j == 0)) CHECK(cube.deriv(i, j) == 0.0);
}

TEST_CASE("polynomial jet arithmetic is exact below the cutoff") {
    // Dyadic base point, so every intermediate product is exact.
    Jet2 u = Jet2::coordinate_u(4, 0.25);
    Jet2 v = Jet2::coordinate_v(4, -0.5);
    Jet2 lhs = (u + v).pow_int(2);
    Jet2 rhs = u * u + 2.0 * u * v + v * v;
    for (int i = 0; i <= 4; ++i)
        for (int j = 0; i + j <= 4; ++j)
            CHECK(lhs.deriv(i, j) == rhs.deriv(i, j));
}

TEST_CASE("taylor evaluation of a polynomial jet is exact") {
    Jet2 u = Jet2::coordinate_u(2, 0.3);
    Jet2 v = Jet2::coordinate_v(2, 0.4);
    Jet2 h = 0.5 * (u * u + v * v);
    double got = h.eval(0.1, -0.2);
    double want = 0.5 * (0.4 * 0.4 + 0.2 * 0.2);
    CHECK(std::abs(got - want) < 1e-15);
}

TEST_CASE("transcendental jets match symbolic tables") {
    Jet2 u = Jet2::coordinate_u(4, 0.3);
    Jet2 v = Jet2::coordinate_v(4, -0.2);
    Jet2 f = sin(u * u + 3.0 * v) * exp(u * 0.5);
    check_against(f, kOracleSinExp);
}

TEST_CASE("division and atan jets match symbolic tables") {
    Jet2 u = Jet2::coordinate_u(4, 0.4);
    Jet2 v = Jet2::coordinate_v(4, 0.1);
    Jet2 f = atan((u - v) / (1.0 + u * v));
    check_against(f, kOracleAtanDiv);
}

TEST_CASE("ln and sqrt jets match symbolic tables") {
    Jet2 u = Jet2::coordinate_u(4, 0.25);
    Jet2 v = Jet2::coordinate_v(4, -0.5);
    Jet2 f = ln(sqrt(1.0 + u * u + v * v) + u);
    check_against(f, kOracleLnSqrt);
}

TEST_CASE("derivative jets shift the table") {
    Jet2 u = Jet2::coordinate_u(4, 0.3);
    Jet2 v = Jet2::coordinate_v(4, -0.2);
    Jet2 f = sin(u * u + 3.0 * v) * exp(u * 0.5);
    Jet2 fu = f.d_du();
    Jet2 fv = f.d_dv();
    CHECK(fu.order() == 3);
    for (int i = 0; i <= 3; ++i)
        for (int j = 0; i + j <= 3; ++j) {
            CHECK(fu.deriv(i, j) == f.deriv(i + 1, j));
            CHECK(fv.deriv(i, j) == f.deriv(i, j + 1));
        }
}

TEST_CASE("jet composition matches symbolic expansion") {
    Jet2 x = Jet2::coordinate_u(4, 0.1);
    Jet2 y = Jet2::coordinate_v(4, 0.2);
    Jet2 h = exp(x) * cos(y);

    Jet2 u = Jet2::coordinate_u(4, 0.0);
    Jet2 v = Jet2::coordinate_v(4, 0.0);
    Jet2 inner_u = 0.3 * u - 0.2 * v + 0.5 * u * u;
    Jet2 inner_v = u + 0.4 * v - 0.1 * v * v;
    Jet2 comp = compose(h, inner_u, inner_v);
    check_against(comp, kOracleCompose);
}

TEST_CASE("map inversion composes to the identity") {
    Jet2 u = Jet2::coordinate_u(4, 0.0);
    Jet2 v = Jet2::coordinate_v(4, 0.0);
    Jet2 X = u + 0.3 * v + 0.2 * u * u - 0.1 * u * v + 0.05 * u * u * u;
    Jet2 Y = -0.2 * u + v + 0.15 * v * v * v - 0.07 * u * u;

    Jet2 U, V;
    invert_map(X, Y, U, V);
    Jet2 round_u = compose(X, U, V);
    Jet2 round_v = compose(Y, U, V);
    for (int i = 0; i <= 4; ++i)
        for (int j = 0; i + j <= 4; ++j) {
            double want_u = (i == 1 && j == 0) ? 1.0 : 0.0;
            double want_v = (i == 0 && j == 1) ? 1.0 : 0.0;
            CHECK(std::abs(round_u.deriv(i, j) - want_u) < 1e-12);
            CHECK(std::abs(round_v.deriv(i, j) - want_v) < 1e-12);
        }
}

TEST_CASE("division by a vanishing jet is a domain error") {
    Jet2 u = Jet2::coordinate_u(2, 0.0);
    Jet2 one = Jet2::constant(2, 1.0);
    CHECK_THROWS_AS(one / u, Error);
    try {
        Jet2 q = one / u;
        (void)q;
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::kDomain);
    }
}

TEST_CASE("ln and sqrt of non-positive jets are domain errors") {
    Jet2 neg = Jet2::constant(2, -0.5);
    CHECK_THROWS_AS(ln(neg), Error);
    CHECK_THROWS_AS(sqrt(neg), Error);
    Jet2 zero = Jet2::constant(2, 0.0);
    CHECK_THROWS_AS(ln(zero), Error);
}
