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
#include <complex>
#include <optional>
#include <vector>

#include "normal_form.hpp"

namespace umb {

/// The principal-direction equation L dv^2 + M du dv + N du^2 = 0 lifts to
/// the surface T = 0 in the projective tangent bundle, covered by two
/// slope charts:
///   P: slope p = dv/du, T = L p^2 + M p + N
///   Q: slope q = du/dv, T = L + M q + N q^2
/// The lifted field is tangent to T = 0 and projects to the principal
/// foliations away from umbilics.
enum class LCChart { kP, kQ };

struct LCState {
    double u = 0.0;
    double v = 0.0;
    double slope = 0.0;
    LCChart chart = LCChart::kP;
};

/// Same tangent line in the other chart (q = 1/p). Intended at |slope| >= 1
/// so the new slope is bounded; throws ErrorKind::kNumeric on slope ~ 0.
LCState lc_switch_chart(const LCState& state);

struct LCValue {
    double t = 0.0;
    /// Lifted field: (T_slope, slope * T_slope, -(T_u + slope * T_v)) in
    /// chart P and the u <-> v symmetric formula in chart Q.
    Eigen::Vector3d velocity = Eigen::Vector3d::Zero();
    /// (T_u, T_v, T_slope); orthogonal to velocity identically.
    Eigen::Vector3d gradient = Eigen::Vector3d::Zero();
};

LCValue lc_value(const SurfaceSpec& s, const LCState& state);

/// Singularities of the lifted field sit on the fiber over an umbilic at
/// the zeros of p (b p^2 - c p + (a - 2b)).
enum class LCKind {
    kSaddle,
    kNode,
    kSaddleNode,
    /// Vertex of a cone of the variety T = 0 itself: the gradient of T
    /// vanishes there and the Hessian is non-degenerate. Dynamically still
    /// a saddle; occurs at the nonzero fiber roots on the a = b stratum.
    kConicMorse,
};

const char* lc_kind_name(LCKind kind);

struct LCSingularity {
    /// Chart-P slope of the singular point (0, 0, slope).
    double slope = 0.0;
    LCKind kind = LCKind::kSaddle;
    /// Spectrum of the 3x3 Jacobian, sorted by real part. One eigenvalue
    /// is structurally zero: the second row of the Jacobian is slope times
    /// the first.
    std::array<std::complex<double>, 3> eigenvalues{};
    /// b - a + c p - 2 b p^2: rate along the direction transverse to the
    /// fiber.
    double transversal_eigenvalue = 0.0;
    /// Phi'(p) with Phi(p) = p (b p^2 - c p + (a - 2b)): rate along the
    /// fiber.
    double fiber_eigenvalue = 0.0;
    /// Saddle-nodes: whether the center manifold runs along the fiber
    /// (double slope root) or transverse to it (a = b stratum, p = 0).
    bool center_along_fiber = false;
    /// Saddle-nodes: leading quadratic coefficient on the center manifold
    /// (3 b p - c along the fiber, chi / 2b transversally).
    double center_quadratic = 0.0;
    /// Conic points: determinant of the Hessian of T.
    double hessian_det = 0.0;
    /// Reference eigenvalue pair (transversal, fiber) where the stratum
    /// provides one: the tangent-stratum saddle carries
    /// {-(b^2+c^2)/b, c^2/b}, the conic points {-b (p^2+1), +b (p^2+1)}.
    std::optional<std::pair<double, double>> closed_form;
    Eigen::Matrix3d jacobian = Eigen::Matrix3d::Zero();
    /// Eigenvector (1, p, w) transverse to the fiber; for the transversal
    /// saddle-node this is the center direction.
    Eigen::Vector3d transversal_direction = Eigen::Vector3d::Zero();
};

/// Locate, linearize and kind-classify the lifted singularities over the
/// umbilic of a normalized jet, sorted by slope. Throws ErrorKind::kDomain
/// when b ~ 0 (a slope root sits at infinity) or when the slope cubic has
/// a triple root (beyond the codimension-one classes).
std::vector<LCSingularity> lc_singularities(const NormalizedJet& jet, double tol = 1e-9);

struct LCLinearization {
    Eigen::Matrix3d jacobian = Eigen::Matrix3d::Zero();
    std::array<std::complex<double>, 3> eigenvalues{};
};

/// Exact Jacobian of the lifted field at (0, 0, slope) over the umbilic,
/// assembled from the order-2 jets of L, M, N of the normalized graph.
LCLinearization lc_linearize(const NormalizedJet& jet, double slope);

struct LCHessian {
    Eigen::Matrix3d matrix = Eigen::Matrix3d::Zero();
    double det = 0.0;
    /// -(b/p)(p^2+1)^2 chi with chi = b(C - A + 2k^3) - cB.
    double closed_form = 0.0;
};

/// Hessian of T at the conic point (0, 0, slope). Requires the a = b
/// stratum and a nonzero slope root; throws ErrorKind::kDomain otherwise.
LCHessian lc_hessian(const NormalizedJet& jet, double slope, double tol = 1e-9);

} // namespace umb
