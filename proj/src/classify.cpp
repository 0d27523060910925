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

namespace umb {

const char* label_name(UmbilicLabel label) {
    switch (label) {
    case UmbilicLabel::kD1: return "D1";
    case UmbilicLabel::kD2: return "D2";
    case UmbilicLabel::kD3: return "D3";
    case UmbilicLabel::kD12Case1: return "D12_case1";
    case UmbilicLabel::kD12Case2: return "D12_case2";
    case UmbilicLabel::kD123: return "D123";
    case UmbilicLabel::kDegenerate: return "Degenerate";
    }
    return "Degenerate";
}

UmbilicClass classify(const NormalizedJet& jet, double tol) {
    const double a = jet.a;
    const double b = jet.b;
    const double c = jet.c;
    const double scale = std::max({1.0, std::abs(a), std::abs(b), std::abs(c)});

    UmbilicClass out;
    out.chi = b * (jet.C - jet.A + 2.0 * jet.k * jet.k * jet.k) - c * jet.B;
    if (std::abs(b) < tol * scale) return out; // Degenerate; delta has no finite value.

    double half = c / (2.0 * b);
    out.delta = -(half * half - a / b + 2.0);
    out.transversal = std::abs(b * (b - a)) > tol * scale * scale;

    if (std::abs(b - a) < tol * scale) {
        out.label = std::abs(out.chi) > tol ? UmbilicLabel::kD123 : UmbilicLabel::kDegenerate;
        return out;
    }
    if (std::abs(out.delta) <= tol) {
        if (b * (a - b) <= 0.0) return out; // Degenerate.
        if (std::abs(c) <= tol * scale) {
            // delta = 0 with c = 0 forces a = 2b: the slope polynomial has a
            // triple root, beyond the codimension-one types.
            return out;
        }
        out.label = UmbilicLabel::kD12Case1;
        return out;
    }
    double ratio = a / b;
    if (std::abs(ratio - 2.0) <= tol && std::abs(c) > tol * scale) {
        out.label = UmbilicLabel::kD12Case2;
        out.tangent_stratum = true;
        return out;
    }
    if (out.delta > 0.0) {
        out.label = UmbilicLabel::kD1;
    } else if (ratio > 1.0) {
        out.label = UmbilicLabel::kD2;
    } else {
        out.label = UmbilicLabel::kD3;
    }
    return out;
}

double bif_functional_d12(const NormalizedJet& jet) {
    if (std::abs(jet.b) < 1e-14)
        throw Error(ErrorKind::kDomain, "transition functional undefined at b = 0");
    double half = jet.c / (2.0 * jet.b);
    return half * half - jet.a / jet.b + 2.0;
}

} // namespace umb
