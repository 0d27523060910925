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

#include <algorithm>
#include <cmath>

namespace umb {

namespace {

double chi_of(const NormalizedJet& jet) {
    double k3 = jet.k * jet.k * jet.k;
    return jet.b * (jet.C - jet.A + 2.0 * k3) - jet.c * jet.B;
}

/// Jacobian of the chart-P lifted field (T_p, p T_p, -(T_u + p T_v)) at the
/// base point of order-2 L, M, N jets, at fiber coordinate p. Exact for the
/// jet data; row 2 is p times row 1 plus a T_p correction that vanishes on
/// the constraint surface, so one eigenvalue is structurally zero at
/// singular points.
Eigen::Matrix3d lifted_jacobian(const TauJets& tj, double p) {
    const Jet2& L = tj.L;
    const Jet2& M = tj.M;
    const Jet2& N = tj.N;

    double T_p = 2.0 * L.value() * p + M.value();
    double T_v = L.deriv(0, 1) * p * p + M.deriv(0, 1) * p + N.deriv(0, 1);
    double T_uu = L.deriv(2, 0) * p * p + M.deriv(2, 0) * p + N.deriv(2, 0);
    double T_uv = L.deriv(1, 1) * p * p + M.deriv(1, 1) * p + N.deriv(1, 1);
    double T_vv = L.deriv(0, 2) * p * p + M.deriv(0, 2) * p + N.deriv(0, 2);
    double T_up = 2.0 * L.deriv(1, 0) * p + M.deriv(1, 0);
    double T_vp = 2.0 * L.deriv(0, 1) * p + M.deriv(0, 1);
    double T_pp = 2.0 * L.value();

    Eigen::Matrix3d J;
    J(0, 0) = T_up;
    J(0, 1) = T_vp;
    J(0, 2) = T_pp;
    J(1, 0) = p * T_up;
    J(1, 1) = p * T_vp;
    J(1, 2) = T_p + p * T_pp;
    J(2, 0) = -(T_uu + p * T_uv);
    J(2, 1) = -(T_uv + p * T_vv);
    J(2, 2) = -(T_up + T_v + p * T_vp);
    return J;
}

std::array<std::complex<double>, 3> sorted_spectrum(const Eigen::Matrix3d& J) {
    Eigen::EigenSolver<Eigen::Matrix3d> solver(J);
    std::array<std::complex<double>, 3> eig;
    for (int i = 0; i < 3; ++i) eig[i] = solver.eigenvalues()(i);
    std::sort(eig.begin(), eig.end(), [](const auto& x, const auto& y) {
        if (x.real() != y.real()) return x.real() < y.real();
        return x.imag() < y.imag();
    });
    return eig;
}

LCHessian hessian_from_jets(const TauJets& tj, const NormalizedJet& jet, double p) {
    const Jet2& L = tj.L;
    const Jet2& M = tj.M;
    const Jet2& N = tj.N;

    LCHessian h;
    h.matrix(0, 0) = L.deriv(2, 0) * p * p + M.deriv(2, 0) * p + N.deriv(2, 0);
    h.matrix(0, 1) = L.deriv(1, 1) * p * p + M.deriv(1, 1) * p + N.deriv(1, 1);
    h.matrix(1, 1) = L.deriv(0, 2) * p * p + M.deriv(0, 2) * p + N.deriv(0, 2);
    h.matrix(0, 2) = 2.0 * L.deriv(1, 0) * p + M.deriv(1, 0);
    h.matrix(1, 2) = 2.0 * L.deriv(0, 1) * p + M.deriv(0, 1);
    h.matrix(2, 2) = 2.0 * L.value();
    h.matrix(1, 0) = h.matrix(0, 1);
    h.matrix(2, 0) = h.matrix(0, 2);
    h.matrix(2, 1) = h.matrix(1, 2);
    h.det = h.matrix.determinant();
    double p2 = p * p;
    h.closed_form = -(jet.b / p) * (p2 + 1.0) * (p2 + 1.0) * chi_of(jet);
    return h;
}

} // namespace

LCState lc_switch_chart(const LCState& state) {
    if (std::abs(state.slope) < 1e-300) {
        throw Error(ErrorKind::kNumeric, "cannot switch slope chart at slope 0");
    }
    LCState out = state;
    out.slope = 1.0 / state.slope;
    out.chart = state.chart == LCChart::kP ? LCChart::kQ : LCChart::kP;
    return out;
}

LCValue lc_value(const SurfaceSpec& s, const LCState& state) {
    TauJets tj = principal_line_jets(s, 1, state.u, state.v);
    double L = tj.L.value(), M = tj.M.value(), N = tj.N.value();
    double L_u = tj.L.deriv(1, 0), M_u = tj.M.deriv(1, 0), N_u = tj.N.deriv(1, 0);
    double L_v = tj.L.deriv(0, 1), M_v = tj.M.deriv(0, 1), N_v = tj.N.deriv(0, 1);

    LCValue out;
    if (state.chart == LCChart::kP) {
        double p = state.slope;
        out.t = (L * p + M) * p + N;
        double T_p = 2.0 * L * p + M;
        double T_u = (L_u * p + M_u) * p + N_u;
        double T_v = (L_v * p + M_v) * p + N_v;
        out.velocity = Eigen::Vector3d(T_p, p * T_p, -(T_u + p * T_v));
        out.gradient = Eigen::Vector3d(T_u, T_v, T_p);
    } else {
        double q = state.slope;
        out.t = (N * q + M) * q + L;
        double T_q = 2.0 * N * q + M;
        double T_u = (N_u * q + M_u) * q + L_u;
        double T_v = (N_v * q + M_v) * q + L_v;
        out.velocity = Eigen::Vector3d(q * T_q, T_q, -(T_v + q * T_u));
        out.gradient = Eigen::Vector3d(T_u, T_v, T_q);
    }
    return out;
}

const char* lc_kind_name(LCKind kind) {
    switch (kind) {
        case LCKind::kSaddle: return "saddle";
        case LCKind::kNode: return "node";
        case LCKind::kSaddleNode: return "saddle_node";
        case LCKind::kConicMorse: return "conic_morse";
    }
    return "unknown";
}

LCLinearization lc_linearize(const NormalizedJet& jet, double slope) {
    TauJets tj = tau_jets_from_height(jet.height());
    LCLinearization lin;
    lin.jacobian = lifted_jacobian(tj, slope);
    lin.eigenvalues = sorted_spectrum(lin.jacobian);
    return lin;
}

LCHessian lc_hessian(const NormalizedJet& jet, double slope, double tol) {
    double scale = std::max({1.0, std::abs(jet.a), std::abs(jet.b), std::abs(jet.c)});
    if (std::abs(jet.a - jet.b) > tol * scale) {
        throw Error(ErrorKind::kDomain,
                    "conic Hessian requires the a = b stratum where the gradient of the "
                    "lift polynomial vanishes");
    }
    if (std::abs(slope) <= tol) {
        throw Error(ErrorKind::kDomain,
                    "conic Hessian is taken at a nonzero root of the slope quadratic");
    }
    TauJets tj = tau_jets_from_height(jet.height());
    return hessian_from_jets(tj, jet, slope);
}

std::vector<LCSingularity> lc_singularities(const NormalizedJet& jet, double tol) {
    double a = jet.a, b = jet.b, c = jet.c;
    double scale = std::max({1.0, std::abs(a), std::abs(b), std::abs(c)});
    if (std::abs(b) <= tol * scale) {
        throw Error(ErrorKind::kDomain,
                    "slope cubic p(b p^2 - c p + (a - 2b)) is degenerate: b ~ 0 places a "
                    "root at infinity");
    }
    bool tangent_stratum = std::abs(a - 2.0 * b) <= tol * std::abs(b);
    if (tangent_stratum && std::abs(c) <= tol * scale) {
        throw Error(ErrorKind::kDomain, "slope cubic has a triple root at p = 0");
    }
    bool annihilation_stratum = std::abs(a - b) <= tol * scale;

    // Roots of the slope cubic with multiplicity. The quadratic factor's
    // discriminant is c^2 - 4b(a - 2b) = 4b^2 [(c/2b)^2 - a/b + 2], so the
    // double-root test below matches the classification threshold exactly.
    double half = c / (2.0 * b);
    double disc_like = half * half - a / b + 2.0;
    std::vector<std::pair<double, int>> roots;
    roots.emplace_back(0.0, 1);
    if (tangent_stratum) {
        roots[0].second = 2;
        roots.emplace_back(c / b, 1);
    } else if (std::abs(disc_like) <= tol) {
        roots.emplace_back(half, 2);
    } else if (disc_like > 0.0) {
        double s = 2.0 * std::abs(b) * std::sqrt(disc_like);
        double r_big, r_small;
        if (c != 0.0) {
            r_big = (c + std::copysign(s, c)) / (2.0 * b);
            r_small = (a - 2.0 * b) / (b * r_big);
        } else {
            r_big = s / (2.0 * b);
            r_small = -r_big;
        }
        roots.emplace_back(r_small, 1);
        roots.emplace_back(r_big, 1);
    }

    TauJets tj = tau_jets_from_height(jet.height());
    double chi = chi_of(jet);

    std::vector<LCSingularity> out;
    out.reserve(roots.size());
    for (auto [p, mult] : roots) {
        LCSingularity sing;
        sing.slope = p;
        sing.jacobian = lifted_jacobian(tj, p);
        sing.eigenvalues = sorted_spectrum(sing.jacobian);
        sing.transversal_eigenvalue = b - a + c * p - 2.0 * b * p * p;
        sing.fiber_eigenvalue = 3.0 * b * p * p - 2.0 * c * p + (a - 2.0 * b);

        if (mult == 2) {
            sing.kind = LCKind::kSaddleNode;
            sing.center_along_fiber = true;
            sing.center_quadratic = 3.0 * b * p - c;
        } else if (annihilation_stratum && std::abs(p) > tol) {
            sing.kind = LCKind::kConicMorse;
            sing.hessian_det = hessian_from_jets(tj, jet, p).det;
            double pair_mag = b * (p * p + 1.0);
            sing.closed_form = std::make_pair(-pair_mag, pair_mag);
        } else if (annihilation_stratum) {
            sing.kind = LCKind::kSaddleNode;
            sing.center_along_fiber = false;
            sing.center_quadratic = chi / (2.0 * b);
        } else {
            sing.kind = sing.transversal_eigenvalue * sing.fiber_eigenvalue < 0.0
                            ? LCKind::kSaddle
                            : LCKind::kNode;
        }
        if (tangent_stratum && mult == 1) {
            double c2 = c * c;
            sing.closed_form = std::make_pair(-(b * b + c2) / b, c2 / b);
        }

        double kappa = sing.jacobian(2, 0) + p * sing.jacobian(2, 1);
        double denom = sing.transversal_eigenvalue - sing.fiber_eigenvalue;
        double w = 0.0;
        if (std::abs(denom) >
            1e-12 * std::max({1.0, std::abs(sing.transversal_eigenvalue),
                              std::abs(sing.fiber_eigenvalue)})) {
            w = kappa / denom;
        }
        sing.transversal_direction = Eigen::Vector3d(1.0, p, w).normalized();
        out.push_back(sing);
    }

    std::sort(out.begin(), out.end(),
              [](const LCSingularity& x, const LCSingularity& y) { return x.slope < y.slope; });
    return out;
}

} // namespace umb
