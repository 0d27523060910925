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

#include "surface.hpp"

#include <cmath>
#include <cstdio>

namespace umb {

namespace {

struct JetVec3 {
    Jet2 x, y, z;
};

JetVec3 cross(const JetVec3& a, const JetVec3& b) {
    return {a.y * b.z - a.z * b.y, a.z * b.x - a.x * b.z, a.x * b.y - a.y * b.x};
}

Jet2 dot(const JetVec3& a, const JetVec3& b) {
    return a.x * b.x + a.y * b.y + a.z * b.z;
}

std::string point_text(double u, double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "(%.17g, %.17g)", u, v);
    return buf;
}

Jet2 height_jet(const SurfaceSpec& s, int order, double u, double v) {
    if (!s.h)
        throw Error(ErrorKind::kInternal, "Monge surface without a height expression");
    return s.h->eval_jet(order, u, v, s.lambda);
}

JetVec3 position_jet(const SurfaceSpec& s, int order, double u, double v) {
    if (!s.x || !s.y || !s.z)
        throw Error(ErrorKind::kInternal, "parametric surface without x, y, z expressions");
    return {s.x->eval_jet(order, u, v, s.lambda), s.y->eval_jet(order, u, v, s.lambda),
            s.z->eval_jet(order, u, v, s.lambda)};
}

void require_form_order(int order) {
    if (order < 0 || order > Jet2::kMaxOrder - 2)
        throw Error(ErrorKind::kInternal, "form jets support orders 0 through 2");
}

FormJets parametric_form_jets(const SurfaceSpec& s, int order, double u, double v) {
    JetVec3 alpha = position_jet(s, order + 2, u, v);
    JetVec3 au{alpha.x.d_du(), alpha.y.d_du(), alpha.z.d_du()};
    JetVec3 av{alpha.x.d_dv(), alpha.y.d_dv(), alpha.z.d_dv()};
    JetVec3 auu{au.x.d_du(), au.y.d_du(), au.z.d_du()};
    JetVec3 auv{au.x.d_dv(), au.y.d_dv(), au.z.d_dv()};
    JetVec3 avv{av.x.d_dv(), av.y.d_dv(), av.z.d_dv()};
    au = {au.x.truncated(order), au.y.truncated(order), au.z.truncated(order)};
    av = {av.x.truncated(order), av.y.truncated(order), av.z.truncated(order)};

    JetVec3 c = cross(au, av);
    Jet2 norm2 = dot(c, c);
    if (norm2.value() < 1e-24)
        throw Error(ErrorKind::kDomain,
                    "degenerate immersion: |alpha_u ^ alpha_v| < 1e-12 at " + point_text(u, v));
    Jet2 inv_norm = 1.0 / sqrt(norm2);

    FormJets out;
    out.E = dot(au, au);
    out.F = dot(au, av);
    out.G = dot(av, av);
    out.e = dot(c, auu) * inv_norm;
    out.f = dot(c, auv) * inv_norm;
    out.g = dot(c, avv) * inv_norm;
    return out;
}

} // namespace

bool is_umbilic(const CurvatureData& c, double umbilic_tol) {
    return c.discriminant < umbilic_tol * std::max(1.0, c.H * c.H);
}

FormJets form_jets_from_height(const Jet2& h) {
    int order = h.order() - 2;
    require_form_order(order);
    Jet2 hu = h.d_du().truncated(order);
    Jet2 hv = h.d_dv().truncated(order);
    Jet2 huu = h.d_du().d_du().truncated(order);
    Jet2 huv = h.d_du().d_dv().truncated(order);
    Jet2 hvv = h.d_dv().d_dv().truncated(order);

    Jet2 inv_w = 1.0 / sqrt(hu * hu + hv * hv + 1.0);
    FormJets out;
    out.E = hu * hu + 1.0;
    out.F = hu * hv;
    out.G = hv * hv + 1.0;
    out.e = huu * inv_w;
    out.f = huv * inv_w;
    out.g = hvv * inv_w;
    return out;
}

FormJets form_jets(const SurfaceSpec& s, int order, double u, double v) {
    require_form_order(order);
    if (s.kind == SurfaceSpec::Kind::kMongeGraph)
        return form_jets_from_height(height_jet(s, order + 2, u, v));
    return parametric_form_jets(s, order, u, v);
}

FundamentalForms fundamental_forms(const SurfaceSpec& s, double u, double v) {
    FormJets j = form_jets(s, 0, u, v);
    return {j.E.value(), j.F.value(), j.G.value(),
            j.e.value(), j.f.value(), j.g.value()};
}

CurvatureData curvature_data(const FundamentalForms& f) {
    double det = f.E * f.G - f.F * f.F;
    if (det <= 0.0)
        throw Error(ErrorKind::kDomain, "first fundamental form is not positive definite");
    CurvatureData c;
    c.K = (f.e * f.g - f.f * f.f) / det;
    c.H = (f.E * f.g - 2.0 * f.F * f.f + f.G * f.e) / (2.0 * det);
    // H^2 - K >= 0 pointwise; rounding can push it a hair below zero.
    c.discriminant = std::max(c.H * c.H - c.K, 0.0);
    double r = std::sqrt(c.discriminant);
    c.k1 = c.H - r;
    c.k2 = c.H + r;
    return c;
}

TauCoefficients tau_coefficients(const FundamentalForms& f) {
    return {f.F * f.g - f.G * f.f, f.E * f.g - f.G * f.e, f.E * f.f - f.F * f.e};
}

TauJets tau_jets_from_height(const Jet2& h) {
    int order = h.order() - 2;
    require_form_order(order);
    Jet2 hu = h.d_du().truncated(order);
    Jet2 hv = h.d_dv().truncated(order);
    Jet2 huu = h.d_du().d_du().truncated(order);
    Jet2 huv = h.d_du().d_dv().truncated(order);
    Jet2 hvv = h.d_dv().d_dv().truncated(order);
    Jet2 E = hu * hu + 1.0;
    Jet2 F = hu * hv;
    Jet2 G = hv * hv + 1.0;

    TauJets out;
    out.L = F * hvv - G * huv;
    out.M = E * hvv - G * huu;
    out.N = E * huv - F * huu;
    return out;
}

TauJets principal_line_jets(const SurfaceSpec& s, int order, double u, double v) {
    require_form_order(order);
    if (s.kind == SurfaceSpec::Kind::kMongeGraph)
        return tau_jets_from_height(height_jet(s, order + 2, u, v));
    FormJets j = parametric_form_jets(s, order, u, v);
    TauJets out;
    out.L = j.F * j.g - j.G * j.f;
    out.M = j.E * j.g - j.G * j.e;
    out.N = j.E * j.f - j.F * j.e;
    return out;
}

Eigen::Vector3d position(const SurfaceSpec& s, double u, double v) {
    if (s.kind == SurfaceSpec::Kind::kMongeGraph)
        return {u, v, s.h->eval(u, v, s.lambda)};
    return {s.x->eval(u, v, s.lambda), s.y->eval(u, v, s.lambda), s.z->eval(u, v, s.lambda)};
}

Eigen::Vector3d gauss_map(const SurfaceSpec& s, double u, double v) {
    if (s.kind == SurfaceSpec::Kind::kMongeGraph) {
        Jet2 h = height_jet(s, 1, u, v);
        Eigen::Vector3d n{-h.deriv(1, 0), -h.deriv(0, 1), 1.0};
        return n / n.norm();
    }
    JetVec3 alpha = position_jet(s, 1, u, v);
    Eigen::Vector3d au{alpha.x.deriv(1, 0), alpha.y.deriv(1, 0), alpha.z.deriv(1, 0)};
    Eigen::Vector3d av{alpha.x.deriv(0, 1), alpha.y.deriv(0, 1), alpha.z.deriv(0, 1)};
    Eigen::Vector3d c = au.cross(av);
    double n = c.norm();
    if (n < 1e-12)
        throw Error(ErrorKind::kDomain,
                    "degenerate immersion: |alpha_u ^ alpha_v| < 1e-12 at " + point_text(u, v));
    return c / n;
}

PrincipalDirections principal_directions(const SurfaceSpec& s, double u, double v,
                                         double umbilic_tol) {
    FundamentalForms forms = fundamental_forms(s, u, v);
    CurvatureData cd = curvature_data(forms);
    PrincipalDirections out;
    if (is_umbilic(cd, umbilic_tol)) {
        out.umbilic = true;
        return out;
    }

    TauCoefficients tc = tau_coefficients(forms);
    double disc = std::max(tc.Mc * tc.Mc - 4.0 * tc.Lc * tc.Nc, 0.0);
    double r = std::sqrt(disc);
    double scale = std::max({std::abs(tc.Lc), std::abs(tc.Mc), std::abs(tc.Nc)});
    if (r <= 1e-14 * scale || scale == 0.0) {
        // Coincident roots only happen at umbilics; treat borderline points
        // the same way rather than emit a garbage direction pair.
        out.umbilic = true;
        return out;
    }

    // Roots of Lc t^2 + Mc t s + Nc s^2 = 0 in (t:s) = (dv:du), written
    // projectively so that neither root degenerates when a leading
    // coefficient vanishes: q = Mc + sign(Mc) r, roots (2 Lc, -q), (q, -2 Nc)
    // as (du, dv).
    double q = tc.Mc + std::copysign(r, tc.Mc);
    Eigen::Vector2d d1{2.0 * tc.Lc, -q};
    Eigen::Vector2d d2{q, -2.0 * tc.Nc};

    auto first_form = [&](const Eigen::Vector2d& d) {
        return forms.E * d.x() * d.x() + 2.0 * forms.F * d.x() * d.y() +
               forms.G * d.y() * d.y();
    };
    auto second_form = [&](const Eigen::Vector2d& d) {
        return forms.e * d.x() * d.x() + 2.0 * forms.f * d.x() * d.y() +
               forms.g * d.y() * d.y();
    };
    auto canonical = [](Eigen::Vector2d d) {
        if (d.x() < 0.0 || (d.x() == 0.0 && d.y() < 0.0)) d = -d;
        return d;
    };

    double i1 = first_form(d1);
    double i2 = first_form(d2);
    if (i1 <= 0.0 || i2 <= 0.0)
        throw Error(ErrorKind::kNumeric, "principal direction with non-positive first form");
    double kn1 = second_form(d1) / i1;
    double kn2 = second_form(d2) / i2;
    d1 = canonical(d1 / std::sqrt(i1));
    d2 = canonical(d2 / std::sqrt(i2));

    if (kn1 <= kn2) {
        out.dir_min = d1;
        out.dir_max = d2;
        out.kn_min = kn1;
        out.kn_max = kn2;
    } else {
        out.dir_min = d2;
        out.dir_max = d1;
        out.kn_min = kn2;
        out.kn_max = kn1;
    }
    return out;
}

double geodesic_torsion(const SurfaceSpec& s, double u, double v,
                        const Eigen::Vector2d& direction) {
    FundamentalForms forms = fundamental_forms(s, u, v);
    TauCoefficients tc = tau_coefficients(forms);
    double du = direction.x();
    double dv = direction.y();
    double first = forms.E * du * du + 2.0 * forms.F * du * dv + forms.G * dv * dv;
    if (first <= 0.0)
        throw Error(ErrorKind::kDomain, "geodesic torsion of a zero direction");
    double det = forms.E * forms.G - forms.F * forms.F;
    return (tc.Lc * dv * dv + tc.Mc * du * dv + tc.Nc * du * du) /
           (first * std::sqrt(det));
}

} // namespace umb
