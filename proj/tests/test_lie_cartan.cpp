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

#include "lie_cartan.hpp"

#include <cmath>
#include <random>
#include <string>
#include <vector>

#include <doctest.h>

#include "classify.hpp"
#include "expr.hpp"

using umb::LCChart;
using umb::LCKind;
using umb::LCSingularity;
using umb::LCState;
using umb::SurfaceSpec;

namespace {

SurfaceSpec monge(const std::string& h) {
    SurfaceSpec s;
    s.kind = SurfaceSpec::Kind::kMongeGraph;
    s.h = umb::ExprProgram(umb::parse_expression(h));
    s.domain = {-1.0, 1.0, -1.0, 1.0};
    return s;
}

umb::NormalizedJet jet(double k, double a, double b, double c, double A = 0.0,
                       double B = 0.0, double C = 0.0, double D = 0.0,
                       double E4 = 0.0) {
    umb::NormalizedJet j;
    j.k = k;
    j.a = a;
    j.b = b;
    j.c = c;
    j.A = A;
    j.B = B;
    j.C = C;
    j.D = D;
    j.E4 = E4;
    return j;
}

const char* kCubicModel = "(u^2 + v^2)/2 + 0.5*u^3 + 0.5*u*v^2";
const char* kAnnihilationModel = "(u^2 + v^2)/2 + u^3/6 + u*v^2/2 + 0.25*u^2*v^2";

// Matches a complex numeric eigenvalue against a real reference value.
bool eig_close(std::complex<double> got, double want, double rel) {
    return std::abs(got - std::complex<double>(want, 0.0)) <= rel * std::max(1.0, std::abs(want));
}

} // namespace

TEST_CASE("lifted field is tangent to the level sets of its polynomial") {
    SurfaceSpec graph = monge(kCubicModel);
    SurfaceSpec ellipsoid;
    ellipsoid.kind = SurfaceSpec::Kind::kParametric;
    ellipsoid.x = umb::ExprProgram(umb::parse_expression("sin(u)*cos(v)"));
    ellipsoid.y = umb::ExprProgram(umb::parse_expression("1.3*sin(u)*sin(v)"));
    ellipsoid.z = umb::ExprProgram(umb::parse_expression("1.7*cos(u)"));
    ellipsoid.domain = {0.3, 1.2, -0.6, 0.6};

    std::mt19937 rng(40907u);
    std::uniform_real_distribution<double> coord(-0.5, 0.5);
    std::uniform_real_distribution<double> slope(-1.0, 1.0);
    for (int i = 0; i < 50; ++i) {
        LCState st;
        st.u = coord(rng);
        st.v = coord(rng);
        st.slope = slope(rng);
        st.chart = i % 2 == 0 ? LCChart::kP : LCChart::kQ;
        umb::LCValue g = umb::lc_value(graph, st);
        CHECK(std::abs(g.velocity.dot(g.gradient)) <= 1e-10 * std::max(1.0, g.velocity.norm()));

        st.u = 0.75 + 0.4 * coord(rng);
        st.v = 0.4 * coord(rng);
        umb::LCValue e = umb::lc_value(ellipsoid, st);
        CHECK(std::abs(e.velocity.dot(e.gradient)) <= 1e-10 * std::max(1.0, e.velocity.norm()));
    }
}

TEST_CASE("fiber dynamics over the umbilic of the cubic model") {
    // Over (0,0) with (a,b,c) = (3,1,0) the third velocity component must be
    // p (b p^2 - c p + (a - 2b)) = p (p^2 + 1): no planar motion, positive
    // slope drift at p = 0.5, and equilibrium exactly at p = 0.
    SurfaceSpec graph = monge(kCubicModel);
    LCState st;
    st.u = 0.0;
    st.v = 0.0;

    st.slope = 0.0;
    umb::LCValue at_root = umb::lc_value(graph, st);
    CHECK(at_root.velocity.norm() <= 1e-12);

    st.slope = 0.5;
    umb::LCValue off_root = umb::lc_value(graph, st);
    CHECK(std::abs(off_root.velocity.x()) <= 1e-12);
    CHECK(std::abs(off_root.velocity.y()) <= 1e-12);
    CHECK(off_root.velocity.z() == doctest::Approx(0.5 * 1.25).epsilon(1e-10));
}

TEST_CASE("singularity inventory across the classification") {
    struct Want {
        double slope;
        LCKind kind;
    };
    struct Case {
        umb::NormalizedJet j;
        std::vector<Want> wants;
    };
    const double s45 = std::sqrt(4.5);
    const double s2 = std::sqrt(2.0);
    const Case cases[] = {
        {jet(1.0, 3.0, 1.0, 0.0), {{0.0, LCKind::kSaddle}}},
        {jet(1.0, 1.5, 1.0, 4.0),
         {{2.0 - s45, LCKind::kSaddle}, {0.0, LCKind::kNode}, {2.0 + s45, LCKind::kSaddle}}},
        {jet(1.0, 0.0, 1.0, 0.0),
         {{-s2, LCKind::kSaddle}, {0.0, LCKind::kSaddle}, {s2, LCKind::kSaddle}}},
        {jet(1.0, 3.0, 1.0, 2.0), {{0.0, LCKind::kSaddle}, {1.0, LCKind::kSaddleNode}}},
        {jet(1.0, 2.0, 1.0, 1.0), {{0.0, LCKind::kSaddleNode}, {1.0, LCKind::kSaddle}}},
        {jet(1.0, 1.0, 1.0, 0.0, 0.0, 0.0, 1.0),
         {{-1.0, LCKind::kConicMorse},
          {0.0, LCKind::kSaddleNode},
          {1.0, LCKind::kConicMorse}}},
    };
    for (const Case& c : cases) {
        INFO("a=", c.j.a, " b=", c.j.b, " c=", c.j.c);
        auto sings = umb::lc_singularities(c.j);
        REQUIRE(sings.size() == c.wants.size());
        for (size_t i = 0; i < sings.size(); ++i) {
            CHECK(sings[i].slope == doctest::Approx(c.wants[i].slope).epsilon(1e-12));
            CHECK(sings[i].kind == c.wants[i].kind);
        }
    }
}

TEST_CASE("saddle-node center data") {
    // Double slope root: the center manifold runs along the fiber and its
    // quadratic coefficient is 3 b p - c.
    auto case1 = umb::lc_singularities(jet(1.0, 3.0, 1.0, 2.0));
    REQUIRE(case1.size() == 2);
    CHECK(case1[1].kind == LCKind::kSaddleNode);
    CHECK(case1[1].center_along_fiber);
    CHECK(case1[1].center_quadratic == doctest::Approx(1.0).epsilon(1e-12));

    auto case2 = umb::lc_singularities(jet(1.0, 2.0, 1.0, 1.0));
    REQUIRE(case2.size() == 2);
    CHECK(case2[0].kind == LCKind::kSaddleNode);
    CHECK(case2[0].center_along_fiber);
    CHECK(case2[0].center_quadratic == doctest::Approx(-1.0).epsilon(1e-12));

    // a = b stratum: the slope root at 0 turns into a transversal
    // saddle-node whose center coefficient is chi / 2b.
    auto ann = umb::lc_singularities(jet(1.0, 1.0, 1.0, 0.0, 0.0, 0.0, 1.0));
    REQUIRE(ann.size() == 3);
    CHECK(ann[1].kind == LCKind::kSaddleNode);
    CHECK_FALSE(ann[1].center_along_fiber);
    CHECK(ann[1].center_quadratic == doctest::Approx(1.5).epsilon(1e-12));
}

TEST_CASE("numeric spectra match the analytic rates at every singularity") {
    const umb::NormalizedJet jets[] = {
        jet(1.0, 3.0, 1.0, 0.0),
        jet(1.0, 1.5, 1.0, 4.0),
        jet(1.0, 0.0, 1.0, 0.0),
        jet(1.0, 3.0, 1.0, 2.0),
        jet(1.0, 2.0, 1.0, 1.0),
        jet(1.0, 1.0, 1.0, 0.0, 0.0, 0.0, 1.0),
    };
    for (const auto& j : jets) {
        for (const LCSingularity& s : umb::lc_singularities(j)) {
            INFO("a=", j.a, " c=", j.c, " slope=", s.slope);
            // One structurally zero eigenvalue plus the transversal and
            // fiber rates, matched as a multiset.
            std::vector<std::complex<double>> eig(s.eigenvalues.begin(), s.eigenvalues.end());
            std::vector<double> want = {0.0, s.transversal_eigenvalue, s.fiber_eigenvalue};
            for (double w : want) {
                size_t best = 0;
                double best_err = 1e300;
                for (size_t i = 0; i < eig.size(); ++i) {
                    double err = std::abs(eig[i] - std::complex<double>(w, 0.0));
                    if (err < best_err) {
                        best_err = err;
                        best = i;
                    }
                }
                CHECK(best_err <= 1e-6 * std::max(1.0, std::abs(w)));
                eig.erase(eig.begin() + static_cast<std::ptrdiff_t>(best));
            }
        }
    }
}

TEST_CASE("closed-form eigenvalue pairs on the codimension-one strata") {
    // Tangent stratum, simple root at c/b: {-(b^2+c^2)/b, c^2/b} = {-2, 1}.
    auto case2 = umb::lc_singularities(jet(1.0, 2.0, 1.0, 1.0));
    REQUIRE(case2.size() == 2);
    REQUIRE(case2[1].closed_form.has_value());
    CHECK(case2[1].closed_form->first == doctest::Approx(-2.0).epsilon(1e-12));
    CHECK(case2[1].closed_form->second == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(eig_close(case2[1].eigenvalues[0], -2.0, 1e-6));
    CHECK(eig_close(case2[1].eigenvalues[2], 1.0, 1e-6));

    // Annihilation stratum, conic roots at +-1: {-b(p^2+1), +b(p^2+1)} =
    // {-2, +2} at both roots.
    auto ann = umb::lc_singularities(jet(1.0, 1.0, 1.0, 0.0, 0.0, 0.0, 1.0));
    REQUIRE(ann.size() == 3);
    for (size_t i : {size_t{0}, size_t{2}}) {
        REQUIRE(ann[i].closed_form.has_value());
        CHECK(ann[i].closed_form->first == doctest::Approx(-2.0).epsilon(1e-12));
        CHECK(ann[i].closed_form->second == doctest::Approx(2.0).epsilon(1e-12));
        CHECK(eig_close(ann[i].eigenvalues[0], -2.0, 1e-6));
        CHECK(eig_close(ann[i].eigenvalues[2], 2.0, 1e-6));
    }
}

TEST_CASE("conic Hessian determinant") {
    umb::NormalizedJet ann = jet(1.0, 1.0, 1.0, 0.0, 0.0, 0.0, 1.0);

    umb::LCHessian plus = umb::lc_hessian(ann, 1.0);
    CHECK(plus.det == doctest::Approx(-12.0).epsilon(1e-8));
    CHECK(plus.det == doctest::Approx(plus.closed_form).epsilon(1e-8));

    umb::LCHessian minus = umb::lc_hessian(ann, -1.0);
    CHECK(minus.det == doctest::Approx(12.0).epsilon(1e-8));
    CHECK(minus.det == doctest::Approx(minus.closed_form).epsilon(1e-8));

    CHECK((plus.matrix - plus.matrix.transpose()).norm() <= 1e-14);

    // Both conic roots are genuine critical points of the lift polynomial.
    SurfaceSpec graph = monge(kAnnihilationModel);
    for (double p : {1.0, -1.0}) {
        LCState st;
        st.slope = p;
        umb::LCValue v = umb::lc_value(graph, st);
        CHECK(v.gradient.norm() <= 1e-12);
        CHECK(std::abs(v.t) <= 1e-12);
    }

    CHECK_THROWS_WITH_AS(umb::lc_hessian(jet(1.0, 3.0, 1.0, 0.0), 1.0),
                         doctest::Contains("a = b"), umb::Error);
    CHECK_THROWS_WITH_AS(umb::lc_hessian(ann, 0.0), doctest::Contains("nonzero"),
                         umb::Error);
}

TEST_CASE("degenerate slope cubics are rejected") {
    CHECK_THROWS_WITH_AS(umb::lc_singularities(jet(1.0, 1.0, 0.0, 1.0)),
                         doctest::Contains("root at infinity"), umb::Error);
    CHECK_THROWS_WITH_AS(umb::lc_singularities(jet(1.0, 2.0, 1.0, 0.0)),
                         doctest::Contains("triple root"), umb::Error);
}

TEST_CASE("regularity of the lifted surface over the fiber") {
    // The lift polynomial is a regular defining equation along the whole
    // projective line over the umbilic exactly when b(b - a) != 0. Both
    // charts are sampled so the point at infinity is covered.
    auto min_gradient = [](const SurfaceSpec& s) {
        double lo = 1e300;
        for (int i = 0; i <= 49; ++i) {
            double t = -1.0 + 2.0 * i / 49.0;
            for (LCChart chart : {LCChart::kP, LCChart::kQ}) {
                LCState st;
                st.slope = t;
                st.chart = chart;
                lo = std::min(lo, umb::lc_value(s, st).gradient.norm());
            }
        }
        return lo;
    };

    CHECK(min_gradient(monge(kCubicModel)) > 0.1);
    CHECK(min_gradient(monge(kAnnihilationModel)) <= 1e-8);
}

TEST_CASE("chart switch preserves the tangent line") {
    SurfaceSpec graph = monge(kCubicModel);
    std::mt19937 rng(552211u);
    std::uniform_real_distribution<double> coord(-0.5, 0.5);
    std::uniform_real_distribution<double> big(1.0, 4.0);
    for (int i = 0; i < 25; ++i) {
        LCState st;
        st.u = coord(rng);
        st.v = coord(rng);
        st.slope = (i % 2 == 0 ? 1.0 : -1.0) * big(rng);
        st.chart = LCChart::kP;
        LCState sw = umb::lc_switch_chart(st);
        CHECK(sw.chart == LCChart::kQ);
        CHECK(sw.slope == doctest::Approx(1.0 / st.slope).epsilon(1e-15));

        umb::LCValue vp = umb::lc_value(graph, st);
        umb::LCValue vq = umb::lc_value(graph, sw);
        // Planar projections of the lifted velocities span the same line.
        Eigen::Vector2d dp(vp.velocity.x(), vp.velocity.y());
        Eigen::Vector2d dq(vq.velocity.x(), vq.velocity.y());
        if (dp.norm() > 1e-12 && dq.norm() > 1e-12) {
            dp.normalize();
            dq.normalize();
            CHECK(std::abs(dp.x() * dq.y() - dp.y() * dq.x()) <= 1e-10);
        }
        // The polynomials differ by the positive factor slope^-2.
        CHECK(vq.t == doctest::Approx(vp.t / (st.slope * st.slope)).epsilon(1e-10));
    }

    LCState origin;
    origin.slope = 0.0;
    CHECK_THROWS_AS(umb::lc_switch_chart(origin), umb::Error);
}

TEST_CASE("lifted Jacobian structure at fiber singularities") {
    for (const auto& j : {jet(1.0, 3.0, 1.0, 0.0), jet(1.0, 1.5, 1.0, 4.0),
                          jet(1.0, 0.0, 1.0, 0.0)}) {
        for (const LCSingularity& s : umb::lc_singularities(j)) {
            umb::LCLinearization lin = umb::lc_linearize(j, s.slope);
            CHECK((lin.jacobian - s.jacobian).norm() <= 1e-14);
            // Second row is slope times the first; determinant vanishes.
            CHECK((lin.jacobian.row(1) - s.slope * lin.jacobian.row(0)).norm() <= 1e-12);
            CHECK(std::abs(lin.jacobian.determinant()) <= 1e-10);
            // The transversal direction is an eigenvector.
            Eigen::Vector3d dir = s.transversal_direction;
            CHECK((lin.jacobian * dir - s.transversal_eigenvalue * dir).norm() <=
                  1e-9 * std::max(1.0, std::abs(s.transversal_eigenvalue)));
        }
    }
}
