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

#include <algorithm>
#include <cmath>

namespace umb {

namespace {

struct MnValue {
    double m, n;
};

MnValue mn_at(const SurfaceSpec& s, double u, double v) {
    TauJets tj = principal_line_jets(s, 0, u, v);
    return {tj.M.value(), tj.N.value()};
}

bool straddles(double c00, double c10, double c01, double c11) {
    double lo = std::min({c00, c10, c01, c11});
    double hi = std::max({c00, c10, c01, c11});
    return lo <= 0.0 && hi >= 0.0;
}

// Damped Newton on (M, N) = 0 from a cell-center seed.
bool refine(const SurfaceSpec& s, double& u, double& v, double tol, const Domain& box) {
    MnValue f = mn_at(s, u, v);
    double res = std::abs(f.m) + std::abs(f.n);
    for (int it = 0; it < 50; ++it) {
        if (res < tol) return true;
        TauJets tj = principal_line_jets(s, 1, u, v);
        Eigen::Matrix2d jac;
        jac << tj.M.deriv(1, 0), tj.M.deriv(0, 1), tj.N.deriv(1, 0), tj.N.deriv(0, 1);
        Eigen::Vector2d rhs{tj.M.value(), tj.N.value()};
        if (std::abs(jac.determinant()) < 1e-300) return false;
        Eigen::Vector2d step = jac.partialPivLu().solve(rhs);
        double damp = 1.0;
        for (int halving = 0; halving < 12; ++halving) {
            double nu = u - damp * step.x();
            double nv = v - damp * step.y();
            if (box.contains(nu, nv)) {
                MnValue fn = mn_at(s, nu, nv);
                double rn = std::abs(fn.m) + std::abs(fn.n);
                if (rn < res || damp < 1e-3) {
                    u = nu;
                    v = nv;
                    res = rn;
                    break;
                }
            }
            damp *= 0.5;
            if (halving == 11) return false;
        }
    }
    return res < tol;
}

} // namespace

std::vector<Eigen::Vector2d> find_umbilics(const SurfaceSpec& s, int n_u, int n_v,
                                           double tol) {
    if (n_u < 16 || n_v < 16)
        throw Error(ErrorKind::kConfig, "umbilic search grid must be at least 16x16");

    const Domain& d = s.domain;
    std::vector<double> mv(static_cast<size_t>(n_u + 1) * (n_v + 1));
    std::vector<double> nv(mv.size());
    double mn_scale = 0.0;
    for (int i = 0; i <= n_u; ++i)
        for (int j = 0; j <= n_v; ++j) {
            double u = d.u_min + d.width() * i / n_u;
            double v = d.v_min + d.height() * j / n_v;
            MnValue f = mn_at(s, u, v);
            mv[i * (n_v + 1) + j] = f.m;
            nv[i * (n_v + 1) + j] = f.n;
            mn_scale = std::max(mn_scale, std::abs(f.m) + std::abs(f.n));
        }
    if (mn_scale < 1e-13)
        throw Error(ErrorKind::kDomain,
                    "non-isolated umbilic locus: principal-line coefficients vanish "
                    "across the whole grid");

    int fired = 0;
    int degenerate_cells = 0;
    std::vector<std::pair<double, double>> seeds;
    for (int i = 0; i < n_u; ++i)
        for (int j = 0; j < n_v; ++j) {
            double m00 = mv[i * (n_v + 1) + j];
            double m10 = mv[(i + 1) * (n_v + 1) + j];
            double m01 = mv[i * (n_v + 1) + j + 1];
            double m11 = mv[(i + 1) * (n_v + 1) + j + 1];
            double n00 = nv[i * (n_v + 1) + j];
            double n10 = nv[(i + 1) * (n_v + 1) + j];
            double n01 = nv[i * (n_v + 1) + j + 1];
            double n11 = nv[(i + 1) * (n_v + 1) + j + 1];
            double cell_mag =
                std::max({std::abs(m00) + std::abs(n00), std::abs(m10) + std::abs(n10),
                          std::abs(m01) + std::abs(n01), std::abs(m11) + std::abs(n11)});
            if (cell_mag < 1e-8 * mn_scale) {
                ++degenerate_cells;
                continue;
            }
            if (straddles(m00, m10, m01, m11) && straddles(n00, n10, n01, n11)) {
                ++fired;
                seeds.emplace_back(d.u_min + d.width() * (i + 0.5) / n_u,
                                   d.v_min + d.height() * (j + 0.5) / n_v);
            }
        }
    if (degenerate_cells * 4 >= n_u * n_v)
        throw Error(ErrorKind::kDomain,
                    "non-isolated umbilic locus: a large fraction of grid cells is "
                    "umbilical to working precision");
    (void)fired;

    std::vector<Eigen::Vector2d> found;
    for (auto [su, sv] : seeds) {
        double u = su;
        double v = sv;
        if (!refine(s, u, v, tol, d)) continue;
        bool dup = false;
        for (const auto& p : found)
            if (std::hypot(p.x() - u, p.y() - v) < 1e-6) {
                dup = true;
                break;
            }
        if (!dup) found.emplace_back(u, v);
    }
    std::sort(found.begin(), found.end(), [](const auto& a, const auto& b) {
        return a.x() != b.x() ? a.x() < b.x() : a.y() < b.y();
    });
    return found;
}

namespace {

// Solve N(u, v) = 0 for v near guess by Newton; requires dN/dv away from 0.
double solve_branch_v(const SurfaceSpec& s, double u, double v_guess) {
    double v = v_guess;
    for (int it = 0; it < 40; ++it) {
        TauJets tj = principal_line_jets(s, 1, u, v);
        double f = tj.N.value();
        double fp = tj.N.deriv(0, 1);
        if (std::abs(fp) < 1e-14)
            throw Error(ErrorKind::kNumeric, "branch solve stalled: dN/dv ~ 0");
        double step = f / fp;
        v -= step;
        if (std::abs(step) < 1e-15 * (1.0 + std::abs(v))) break;
    }
    return v;
}

struct BranchDerivs {
    double n;      // n(u) = M(u, v(u))
    double dn;     // n'(u)
    double d2n;    // n''(u)
    double v;      // v(u)
};

BranchDerivs branch_at(const SurfaceSpec& s, double u, double v_guess) {
    BranchDerivs out;
    out.v = solve_branch_v(s, u, v_guess);
    TauJets tj = principal_line_jets(s, 2, u, out.v);
    double nu = tj.N.deriv(1, 0), nv = tj.N.deriv(0, 1);
    double nuu = tj.N.deriv(2, 0), nuv = tj.N.deriv(1, 1), nvv = tj.N.deriv(0, 2);
    double mu = tj.M.deriv(1, 0), mvd = tj.M.deriv(0, 1);
    double muu = tj.M.deriv(2, 0), muv = tj.M.deriv(1, 1), mvv = tj.M.deriv(0, 2);
    double vp = -nu / nv;
    double vpp = -(nuu + 2.0 * nuv * vp + nvv * vp * vp) / nv;
    out.n = tj.M.value();
    out.dn = mu + mvd * vp;
    out.d2n = muu + 2.0 * muv * vp + mvv * vp * vp + mvd * vpp;
    return out;
}

} // namespace

double bif_functional_d123(const SurfaceSpec& s, double center_u, double center_v,
                           double radius) {
    // March the branch outward from the center so each Newton solve starts
    // from the neighbouring solution.
    const int kSamples = 16;
    std::vector<double> us;
    std::vector<BranchDerivs> vals;
    us.reserve(2 * kSamples + 1);
    vals.reserve(2 * kSamples + 1);

    BranchDerivs centre = branch_at(s, center_u, center_v);
    us.push_back(center_u);
    vals.push_back(centre);
    double v_guess = centre.v;
    for (int i = 1; i <= kSamples; ++i) {
        double u = center_u + radius * i / kSamples;
        BranchDerivs b = branch_at(s, u, v_guess);
        v_guess = b.v;
        us.push_back(u);
        vals.push_back(b);
    }
    v_guess = centre.v;
    for (int i = 1; i <= kSamples; ++i) {
        double u = center_u - radius * i / kSamples;
        BranchDerivs b = branch_at(s, u, v_guess);
        v_guess = b.v;
        us.insert(us.begin(), u);
        vals.insert(vals.begin(), b);
    }

    int sign_changes = 0;
    int bracket = -1;
    for (size_t i = 0; i + 1 < us.size(); ++i) {
        double g0 = vals[i].dn;
        double g1 = vals[i + 1].dn;
        if (g0 == 0.0) {
            // Grid point exactly critical; treat as its own bracket.
            ++sign_changes;
            bracket = static_cast<int>(i);
        } else if (g0 * g1 < 0.0) {
            ++sign_changes;
            bracket = static_cast<int>(i);
        }
    }
    if (sign_changes == 0)
        throw Error(ErrorKind::kDomain,
                    "no critical point of the branch functional in the window");
    if (sign_changes > 1)
        throw Error(ErrorKind::kDomain,
                    "multiple critical points of the branch functional; shrink the window");

    double lo = us[bracket];
    double hi = us[bracket + 1];
    double v_lo = vals[bracket].v;
    // A few bisections to tighten, then Newton on n'.
    double u_star = 0.5 * (lo + hi);
    BranchDerivs b = branch_at(s, u_star, v_lo);
    for (int it = 0; it < 60; ++it) {
        if (std::abs(b.d2n) < 1e-300) break;
        double step = b.dn / b.d2n;
        double next = u_star - step;
        if (next < lo - (hi - lo) || next > hi + (hi - lo)) {
            // Newton left the bracket; fall back to bisection using the sign
            // of n' against the left endpoint.
            BranchDerivs left = branch_at(s, lo, v_lo);
            next = (left.dn * b.dn < 0.0) ? 0.5 * (lo + u_star) : 0.5 * (u_star + hi);
        }
        BranchDerivs nb = branch_at(s, next, b.v);
        if (nb.dn * b.dn < 0.0) {
            // Keep the bracket tight.
            if (next < u_star) { hi = u_star; } else { lo = u_star; }
        }
        double moved = std::abs(next - u_star);
        u_star = next;
        b = nb;
        if (moved < 1e-14 * (1.0 + std::abs(u_star)) || std::abs(b.dn) < 1e-14) break;
    }
    return b.n;
}

} // namespace umb
