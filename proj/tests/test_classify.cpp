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

#include "classify.hpp"

#include <cmath>
#include <cstring>
#include <random>

#include <doctest.h>

namespace {

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

} // namespace

TEST_CASE("generic and codimension-one labels with their invariants") {
    struct Case {
        umb::NormalizedJet j;
        umb::UmbilicLabel label;
        double delta;
        double chi;
    };
    const Case cases[] = {
        {jet(1.0, 3.0, 1.0, 0.0), umb::UmbilicLabel::kD1, 1.0, 2.0},
        {jet(1.0, 1.5, 1.0, 4.0), umb::UmbilicLabel::kD2, -4.5, 2.0},
        {jet(1.0, 0.0, 1.0, 0.0), umb::UmbilicLabel::kD3, -2.0, 2.0},
        {jet(1.0, 3.0, 1.0, 2.0), umb::UmbilicLabel::kD12Case1, 0.0, 2.0},
        {jet(1.0, 2.0, 1.0, 1.0), umb::UmbilicLabel::kD12Case2, -0.25, 2.0},
        {jet(1.0, 1.0, 1.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0), umb::UmbilicLabel::kD123,
         -1.0, 3.0},
    };
    for (const Case& c : cases) {
        umb::UmbilicClass r = umb::classify(c.j);
        INFO("a=", c.j.a, " b=", c.j.b, " c=", c.j.c);
        CHECK(r.label == c.label);
        CHECK(std::abs(r.delta - c.delta) <= 1e-10);
        CHECK(std::abs(r.chi - c.chi) <= 1e-10);
    }
}

TEST_CASE("label names") {
    CHECK(std::strcmp(umb::label_name(umb::UmbilicLabel::kD1), "D1") == 0);
    CHECK(std::strcmp(umb::label_name(umb::UmbilicLabel::kD2), "D2") == 0);
    CHECK(std::strcmp(umb::label_name(umb::UmbilicLabel::kD3), "D3") == 0);
    CHECK(std::strcmp(umb::label_name(umb::UmbilicLabel::kD12Case1), "D12_case1") == 0);
    CHECK(std::strcmp(umb::label_name(umb::UmbilicLabel::kD12Case2), "D12_case2") == 0);
    CHECK(std::strcmp(umb::label_name(umb::UmbilicLabel::kD123), "D123") == 0);
    CHECK(std::strcmp(umb::label_name(umb::UmbilicLabel::kDegenerate), "Degenerate") == 0);
}

TEST_CASE("stratum flags") {
    CHECK(umb::classify(jet(1.0, 3.0, 1.0, 0.0)).transversal);
    CHECK_FALSE(umb::classify(jet(1.0, 3.0, 1.0, 0.0)).tangent_stratum);
    CHECK(umb::classify(jet(1.0, 3.0, 1.0, 2.0)).transversal);
    CHECK_FALSE(umb::classify(jet(1.0, 3.0, 1.0, 2.0)).tangent_stratum);
    CHECK(umb::classify(jet(1.0, 2.0, 1.0, 1.0)).tangent_stratum);
    // a = b kills the transversality product b(b - a).
    CHECK_FALSE(umb::classify(jet(1.0, 1.0, 1.0, 0.0, 0.0, 0.0, 1.0)).transversal);
}

TEST_CASE("degenerate guards") {
    // b = 0: the cubic has a root at infinity in this chart and no finite
    // delta exists.
    umb::UmbilicClass r = umb::classify(jet(1.0, 2.0, 0.0, 1.0));
    CHECK(r.label == umb::UmbilicLabel::kDegenerate);
    CHECK(r.delta == 0.0);

    // a = b with vanishing quartic obstruction chi = b(C - A + 2k^3) - cB;
    // A = 2 cancels the 2k^3 contribution here.
    CHECK(umb::classify(jet(1.0, 1.0, 1.0, 0.0, 2.0)).label ==
          umb::UmbilicLabel::kDegenerate);
    // chi just above the threshold resolves the annihilation type.
    CHECK(umb::classify(jet(1.0, 1.0, 1.0, 0.0, 2.0, 0.0, 1e-6)).label ==
          umb::UmbilicLabel::kD123);

    // delta = 0 with c = 0 forces a = 2b: the slope polynomial has a triple
    // root, which lies beyond the codimension-one types.
    CHECK(umb::classify(jet(1.0, 2.0, 1.0, 0.0)).label ==
          umb::UmbilicLabel::kDegenerate);
}

TEST_CASE("slope quadratic roots are consistent with the D2/D3 split") {
    // The nonzero separatrix slopes solve b p^2 - c p + (a - 2b) = 0, with
    // product a/b - 2. D2 requires the product above -1 and D3 below.
    const umb::NormalizedJet d2 = jet(1.0, 1.5, 1.0, 4.0);
    const umb::NormalizedJet d3 = jet(1.0, 0.0, 1.0, 0.0);
    for (const umb::NormalizedJet& j : {d2, d3}) {
        double disc = j.c * j.c - 4.0 * j.b * (j.a - 2.0 * j.b);
        REQUIRE(disc > 0.0);
        double p1 = (j.c - std::sqrt(disc)) / (2.0 * j.b);
        double p2 = (j.c + std::sqrt(disc)) / (2.0 * j.b);
        double product = j.a / j.b - 2.0;
        CHECK(p1 * p2 == doctest::Approx(product).epsilon(1e-12));
        CHECK(p1 != p2);
        CHECK(p1 != 0.0);
        CHECK(p2 != 0.0);
        umb::UmbilicClass r = umb::classify(j);
        if (r.label == umb::UmbilicLabel::kD2) CHECK(product > -1.0);
        if (r.label == umb::UmbilicLabel::kD3) CHECK(product < -1.0);
    }
}

TEST_CASE("transition functional equals minus delta") {
    CHECK(umb::bif_functional_d12(jet(1.0, 3.0, 1.0, 2.0)) ==
          doctest::Approx(0.0).epsilon(1e-14));
    CHECK(umb::bif_functional_d12(jet(1.0, 3.0, 1.0, 0.0)) ==
          doctest::Approx(-1.0).epsilon(1e-14));
    CHECK(umb::bif_functional_d12(jet(1.0, 1.5, 1.0, 4.0)) ==
          doctest::Approx(4.5).epsilon(1e-14));

    std::mt19937 rng(911u);
    std::uniform_real_distribution<double> coeff(-3.0, 3.0);
    for (int trial = 0; trial < 50; ++trial) {
        double b = coeff(rng);
        if (std::abs(b) < 0.1) continue;
        umb::NormalizedJet j = jet(1.0, coeff(rng), b, coeff(rng));
        umb::UmbilicClass r = umb::classify(j);
        CHECK(std::abs(umb::bif_functional_d12(j) + r.delta) <= 1e-14);
    }

    CHECK_THROWS_AS((void)umb::bif_functional_d12(jet(1.0, 2.0, 0.0, 1.0)),
                    umb::Error);
}
