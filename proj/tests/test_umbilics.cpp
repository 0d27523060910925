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

#include "umbilics.hpp"

#include <cmath>
#include <set>
#include <string>

#include <doctest.h>

#include "classify.hpp"
#include "expr.hpp"
#include "normal_form.hpp"

using umb::SurfaceSpec;

namespace {

SurfaceSpec monge(const std::string& h, double u0, double u1, double v0, double v1) {
    SurfaceSpec s;
    s.kind = SurfaceSpec::Kind::kMongeGraph;
    s.h = umb::ExprProgram(umb::parse_expression(h));
    s.domain = {u0, u1, v0, v1};
    return s;
}

// Annihilation model: a = b = 1, c = 0 with the quartic producing chi = 3,
// plus a lambda u v unfolding term.
const char* kPinchFamily =
    "(u^2 + v^2)/2 + u^3/6 + u*v^2/2 + 0.25*u^2*v^2 + lambda*u*v";

// Same cubic data with c = 1; this member genuinely folds at lambda = 0.
const char* kFoldFamily =
    "(u^2 + v^2)/2 + u^3/6 + u*v^2/2 + v^3/6 + 0.25*u^2*v^2 + lambda*u*v";

} // namespace

TEST_CASE("umbilics of the cubic model") {
    SurfaceSpec s = monge("(u^2 + v^2)/2 + 0.5*u^3 + 0.5*u*v^2", -0.4, 0.4, -0.4, 0.4);
    auto pts = umb::find_umbilics(s, 32, 32);
    REQUIRE(pts.size() == 1);
    CHECK(std::abs(pts[0].x()) <= 1e-9);
    CHECK(std::abs(pts[0].y()) <= 1e-9);

    // The graph is even in v, so the u-axis is a curvature line and carries
    // a second umbilic where the principal curvatures cross again, at the
    // root of u (1 + 1.5 u)^2 (1 + u) = 2.
    s.domain = {-1.0, 1.0, -1.0, 1.0};
    pts = umb::find_umbilics(s, 32, 32);
    REQUIRE(pts.size() == 2);
    CHECK(std::abs(pts[0].x()) <= 1e-9);
    CHECK(std::abs(pts[0].y()) <= 1e-9);
    double r = pts[1].x();
    CHECK(std::abs(pts[1].y()) <= 1e-9);
    CHECK(r * std::pow(1.0 + 1.5 * r, 2) * (1.0 + r) == doctest::Approx(2.0).epsilon(1e-9));
}

TEST_CASE("ellipsoid chart carries one umbilic in the quarter window") {
    SurfaceSpec s;
    s.kind = SurfaceSpec::Kind::kParametric;
    s.x = umb::ExprProgram(umb::parse_expression("sin(u)*cos(v)"));
    s.y = umb::ExprProgram(umb::parse_expression("1.3*sin(u)*sin(v)"));
    s.z = umb::ExprProgram(umb::parse_expression("1.7*cos(u)"));
    s.domain = {0.3, 1.2, -0.6, 0.6};
    auto pts = umb::find_umbilics(s, 32, 32);
    REQUIRE(pts.size() == 1);
    // Closed form for semiaxes 1.7 > 1.3 > 1: the umbilics sit in the plane
    // of the extreme axes, at 0.604218 along the short axis and 1.354594
    // along the long one; in this chart that is v = 0, u = asin(0.604218).
    double x = std::sqrt((1.3 * 1.3 - 1.0) / (1.7 * 1.7 - 1.0));
    CHECK(pts[0].x() == doctest::Approx(std::asin(x)).epsilon(1e-8));
    CHECK(std::abs(pts[0].y()) <= 1e-8);
    umb::UmbilicClass r = umb::classify(umb::monge_normal_form(s, pts[0].x(), pts[0].y()));
    CHECK(r.label == umb::UmbilicLabel::kD1);
}

TEST_CASE("fold family produces and removes an umbilic pair") {
    // The window stays tight around the degeneracy: the polynomial graph
    // also owns an unrelated generic umbilic near (0.43, 0.56).
    SurfaceSpec s = monge(kFoldFamily, -0.4, 0.4, -0.4, 0.4);

    s.lambda = 0.06;
    auto two = umb::find_umbilics(s, 48, 48);
    REQUIRE(two.size() == 2);
    // Leading balance u^2 ~ (2/3) lambda, skewed by the next order.
    double spread = std::sqrt(2.0 * s.lambda / 3.0);
    CHECK(two[0].x() > -2.0 * spread);
    CHECK(two[0].x() < -0.5 * spread);
    CHECK(two[1].x() > 0.5 * spread);
    CHECK(two[1].x() < 2.0 * spread);

    // The merging pair carries the two focal generic types.
    std::set<umb::UmbilicLabel> labels;
    for (const auto& p : two)
        labels.insert(umb::classify(umb::monge_normal_form(s, p.x(), p.y())).label);
    CHECK(labels == std::set<umb::UmbilicLabel>{umb::UmbilicLabel::kD2,
                                                umb::UmbilicLabel::kD3});

    s.lambda = -0.06;
    CHECK(umb::find_umbilics(s, 48, 48).empty());
}

TEST_CASE("pinch family keeps its umbilic pair on both sides") {
    // With c = 0 the lambda u v term does not unfold this degeneracy: the
    // pair (+/- lambda, -lambda) persists for either sign, so the family is
    // not a fold. The genuinely folding member needs c != 0.
    SurfaceSpec s = monge(kPinchFamily, -0.5, 0.5, -0.5, 0.5);
    for (double lambda : {0.1, -0.1}) {
        s.lambda = lambda;
        auto pts = umb::find_umbilics(s, 48, 48);
        REQUIRE(pts.size() == 2);
        for (const auto& p : pts) CHECK(std::abs(std::abs(p.x()) - 0.1) <= 0.03);
    }
}

TEST_CASE("annihilation functional vanishes at the degenerate point") {
    SurfaceSpec s = monge(kPinchFamily, -0.6, 0.6, -0.6, 0.6);
    s.lambda = 0.0;
    CHECK(std::abs(umb::bif_functional_d123(s, 0.0, 0.0, 0.4)) <= 1e-10);
}

TEST_CASE("annihilation functional has quadratic contact in lambda") {
    // Along the pinch family the critical value behaves as
    // -(chi / 2b) lambda^2 with chi = 3, b = 1.
    SurfaceSpec s = monge(kPinchFamily, -0.6, 0.6, -0.6, 0.6);
    for (double lambda : {0.02, -0.02}) {
        s.lambda = lambda;
        double value = umb::bif_functional_d123(s, 0.0, 0.0, 0.4);
        CHECK(value / (lambda * lambda) == doctest::Approx(-1.5).epsilon(0.05));
    }
}

TEST_CASE("annihilation functional crosses zero along the fold family") {
    SurfaceSpec s = monge(kFoldFamily, -0.6, 0.6, -0.6, 0.6);
    double h = 0.03;
    s.lambda = h;
    double plus = umb::bif_functional_d123(s, 0.0, 0.0, 0.4);
    s.lambda = -h;
    double minus = umb::bif_functional_d123(s, 0.0, 0.0, 0.4);
    CHECK(plus * minus < 0.0);
    CHECK((plus - minus) / (2.0 * h) == doctest::Approx(-1.0).epsilon(0.05));
}

TEST_CASE("window without a branch critical point is reported") {
    SurfaceSpec s = monge(kPinchFamily, -0.6, 0.6, -0.6, 0.6);
    s.lambda = 0.0;
    CHECK_THROWS_WITH_AS((void)umb::bif_functional_d123(s, 0.35, 0.0, 0.05),
                         doctest::Contains("no critical point"), umb::Error);
}

TEST_CASE("totally umbilic patch is rejected as non-isolated") {
    SurfaceSpec s;
    s.kind = SurfaceSpec::Kind::kParametric;
    s.x = umb::ExprProgram(umb::parse_expression("sin(u)*cos(v)"));
    s.y = umb::ExprProgram(umb::parse_expression("sin(u)*sin(v)"));
    s.z = umb::ExprProgram(umb::parse_expression("cos(u)"));
    s.domain = {0.5, 1.5, -0.5, 0.5};
    CHECK_THROWS_WITH_AS((void)umb::find_umbilics(s, 32, 32),
                         doctest::Contains("non-isolated"), umb::Error);
}

TEST_CASE("grid floor is enforced") {
    SurfaceSpec s = monge("(u^2 + v^2)/2", -1.0, 1.0, -1.0, 1.0);
    CHECK_THROWS_AS((void)umb::find_umbilics(s, 8, 64), umb::Error);
}
