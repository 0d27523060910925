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

#include "surface.hpp"

namespace umb {

/// Normalized order-4 Monge jet of a surface over its tangent plane at an
/// umbilic point:
///   h = (k/2)(u^2+v^2) + (a/6)u^3 + (b/2)uv^2 + (c/6)v^3
///     + (A/24)u^4 + (B/6)u^3 v + (C/4)u^2 v^2 + (D/6)u v^3 + (E4/24)v^4
/// with the u^2 v cubic coefficient rotated away and b >= 0.
struct NormalizedJet {
    double k = 0.0;
    double a = 0.0;
    double b = 0.0;
    double c = 0.0;
    double A = 0.0;
    double B = 0.0;
    double C = 0.0;
    double D = 0.0;
    double E4 = 0.0;
    /// Residual u^2 v derivative after rotation (|b_prime| < 1e-10).
    double b_prime = 0.0;
    /// In-plane rotation applied to kill the u^2 v term, in (-pi/2, pi/2].
    double theta = 0.0;
    /// Whether the v -> -v + normal-flip move was applied to make b >= 0.
    bool flipped = false;
    /// Adapted frame after normalization; columns are (e1, e2, n), so the
    /// surface is locally origin + x e1 + y e2 + h(x,y) n.
    Eigen::Matrix3d frame = Eigen::Matrix3d::Identity();
    Eigen::Vector3d origin = Eigen::Vector3d::Zero();

    /// The height function as a jet (for downstream lifted-field assembly).
    Jet2 height() const;
};

/// Normal form at an umbilic of a surface. Builds the adapted frame,
/// re-expresses the patch as a graph over its tangent plane by jet
/// inversion/composition, rotates to kill the u^2 v coefficient (smallest
/// |theta| among the admissible angles), and enforces b >= 0. Throws
/// ErrorKind::kDomain for a flat umbilic (k ~ 0 with the higher-order data
/// giving no scale).
NormalizedJet monge_normal_form(const SurfaceSpec& s, double u, double v);

/// Same normalization applied to a Monge graph given directly as an
/// order-4 height jet at the umbilic (the graph chart of the jet need not
/// be adapted; tangent-plane regraphing is still performed).
NormalizedJet normal_form_from_height(const Jet2& h);

} // namespace umb
