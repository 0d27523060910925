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

#include "normal_form.hpp"

namespace umb {

enum class UmbilicLabel {
    kD1,
    kD2,
    kD3,
    kD12Case1,
    kD12Case2,
    kD123,
    kDegenerate,
};

const char* label_name(UmbilicLabel label);

/// Classification of an umbilic from its normalized jet.
///
/// delta = -[(c/2b)^2 - a/b + 2] separates the generic types: delta > 0 is
/// D1; delta < 0 splits into D2 (a/b > 1) and D3 (a/b < 1). delta = 0 with
/// b(a-b) > 0 is the first codimension-one type, a/b = 2 with c != 0 the
/// second (tangent to the b' = 0 slice, hence flagged), and a = b with
/// chi = b(C - A + 2k^3) - cB != 0 the annihilation type. Everything at
/// higher codimension is Degenerate. delta and chi are 0 when b itself
/// vanishes (no finite value exists).
struct UmbilicClass {
    UmbilicLabel label = UmbilicLabel::kDegenerate;
    double delta = 0.0;
    double chi = 0.0;
    bool transversal = false;
    bool tangent_stratum = false;
};

UmbilicClass classify(const NormalizedJet& jet, double tol = 1e-9);

/// The codimension-one transition functional (c/2b)^2 - a/b + 2 = -delta.
/// Negative on the D1 side, positive on the D2/D3 side, zero on the
/// transition stratum. Throws ErrorKind::kDomain when |b| < 1e-14.
double bif_functional_d12(const NormalizedJet& jet);

} // namespace umb
