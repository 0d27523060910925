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

#include <optional>

#include <Eigen/Dense>

#include "expr.hpp"
#include "jet.hpp"

namespace umb {

/// Rectangular chart domain [u_min,u_max] x [v_min,v_max].
struct Domain {
    double u_min = -1.0;
    double u_max = 1.0;
    double v_min = -1.0;
    double v_max = 1.0;

    bool contains(double u, double v) const {
        return u >= u_min && u <= u_max && v >= v_min && v <= v_max;
    }
    double width() const { return u_max - u_min; }
    double height() const { return v_max - v_min; }
};

/// A surface patch, either a Monge graph z = h(u,v) or a parametric
/// immersion (x,y,z)(u,v). Expressions may reference `lambda`, the current
/// value of the family parameter.
struct SurfaceSpec {
    enum class Kind { kMongeGraph, kParametric };

    Kind kind = Kind::kMongeGraph;
    std::optional<ExprProgram> h;
    std::optional<ExprProgram> x;
    std::optional<ExprProgram> y;
    std::optional<ExprProgram> z;
    Domain domain;
    /// Period of the v coordinate for charts that wrap around (tubular or
    /// rotationally symmetric parametrizations). Curves are unwrapped in v
    /// and reports record v modulo the period.
    std::optional<double> v_period;
    double lambda = 0.0;
};

/// First and second fundamental form coefficients at a point.
struct FundamentalForms {
    double E = 1.0;
    double F = 0.0;
    double G = 1.0;
    double e = 0.0;
    double f = 0.0;
    double g = 0.0;
};

/// Curvature functions at a point. `discriminant` is H^2 - K, clamped to 0
/// when rounding drives it slightly negative; it vanishes exactly at
/// umbilic points.
struct CurvatureData {
    double K = 0.0;
    double H = 0.0;
    double k1 = 0.0;
    double k2 = 0.0;
    double discriminant = 0.0;
};

/// Coefficients of the principal-line equation
///   Lc dv^2 + Mc du dv + Nc du^2 = 0
/// built from the fundamental forms. All three vanish simultaneously
/// exactly at umbilic points.
struct TauCoefficients {
    double Lc = 0.0;
    double Mc = 0.0;
    double Nc = 0.0;
};

/// Fundamental form coefficients as jets in (u,v) about a point, all
/// truncated to the same order.
struct FormJets {
    Jet2 E, F, G, e, f, g;
};

/// Jets of the principal-line coefficients about a point. For Monge graphs
/// these carry the sqrt(1+h_u^2+h_v^2) rescaling that clears the radical
/// from (e,f,g); the factor is positive, so zero sets and integral curves
/// are unchanged.
struct TauJets {
    Jet2 L, M, N;
};

/// Principal directions at a non-umbilic point, as chart vectors (du,dv)
/// normalized to unit length in the first fundamental form. `umbilic` is
/// set instead when the curvature discriminant falls below the umbilic
/// tolerance, in which case the directions are meaningless.
struct PrincipalDirections {
    bool umbilic = false;
    Eigen::Vector2d dir_min = Eigen::Vector2d::Zero();
    Eigen::Vector2d dir_max = Eigen::Vector2d::Zero();
    double kn_min = 0.0;
    double kn_max = 0.0;
};

/// Scale-aware umbilic test: discriminant < tol * max(1, H^2).
bool is_umbilic(const CurvatureData& c, double umbilic_tol);

/// Jets of the fundamental form coefficients at (u,v), truncated to
/// `order` (at most Jet2::kMaxOrder - 2, since second derivatives of the
/// immersion are consumed). Throws DegenerateImmersion (ErrorKind::kDomain)
/// for parametric surfaces where |alpha_u ^ alpha_v| < 1e-12.
FormJets form_jets(const SurfaceSpec& s, int order, double u, double v);

/// Monge-graph form jets from a height jet (order drops by 2).
FormJets form_jets_from_height(const Jet2& h);

FundamentalForms fundamental_forms(const SurfaceSpec& s, double u, double v);

CurvatureData curvature_data(const FundamentalForms& f);

TauCoefficients tau_coefficients(const FundamentalForms& f);

/// Jets of the principal-line coefficients at (u,v). Monge graphs use the
/// polynomial rescaled forms L = F h_vv - G h_uv, M = E h_vv - G h_uu,
/// N = E h_uv - F h_uu; parametric surfaces use (Lc, Mc, Nc) directly.
TauJets principal_line_jets(const SurfaceSpec& s, int order, double u, double v);

/// Rescaled principal-line jets of a Monge graph from a height jet.
TauJets tau_jets_from_height(const Jet2& h);

/// Unit normal, oriented consistently with (alpha_u, alpha_v).
Eigen::Vector3d gauss_map(const SurfaceSpec& s, double u, double v);

/// Chart position of a point on the surface in ambient space.
Eigen::Vector3d position(const SurfaceSpec& s, double u, double v);

PrincipalDirections principal_directions(const SurfaceSpec& s, double u, double v,
                                         double umbilic_tol = 1e-10);

/// Geodesic torsion along a chart direction (du,dv), following the sign of
/// the defining formula <DN(w) ^ Dalpha(w), N>. Zero exactly along
/// principal directions.
double geodesic_torsion(const SurfaceSpec& s, double u, double v,
                        const Eigen::Vector2d& direction);

} // namespace umb
