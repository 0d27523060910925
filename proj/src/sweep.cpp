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

#include "sweep.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>

#include "error.hpp"
#include "umbilics.hpp"

namespace umb {

namespace {

constexpr double kResidualTol = 1e-11;
constexpr double kBoundaryPad = 1e-6;

double nan_value() { return std::numeric_limits<double>::quiet_NaN(); }

struct Residual {
    Eigen::Vector2d F = Eigen::Vector2d::Zero();
    Eigen::Matrix<double, 2, 3> J = Eigen::Matrix<double, 2, 3>::Zero();
};

/// (M, N) and its (u, v, lambda) Jacobian; the lambda column comes from a
/// central difference, exact for families affine in lambda.
Residual umbilic_residual(SurfaceSpec& scratch, const Eigen::Vector3d& x) {
    Residual r;
    scratch.lambda = x(2);
    TauJets tj = principal_line_jets(scratch, 1, x(0), x(1));
    r.F << tj.M.value(), tj.N.value();
    r.J(0, 0) = tj.M.deriv(1, 0);
    r.J(0, 1) = tj.M.deriv(0, 1);
    r.J(1, 0) = tj.N.deriv(1, 0);
    r.J(1, 1) = tj.N.deriv(0, 1);
    const double dl = 1e-6 * std::max(1.0, std::abs(x(2)));
    scratch.lambda = x(2) + dl;
    TauJets tp = principal_line_jets(scratch, 0, x(0), x(1));
    scratch.lambda = x(2) - dl;
    TauJets tm = principal_line_jets(scratch, 0, x(0), x(1));
    r.J(0, 2) = (tp.M.value() - tm.M.value()) / (2.0 * dl);
    r.J(1, 2) = (tp.N.value() - tm.N.value()) / (2.0 * dl);
    scratch.lambda = x(2);
    return r;
}

double det2(const Residual& r) {
    return r.J(0, 0) * r.J(1, 1) - r.J(0, 1) * r.J(1, 0);
}

Eigen::Vector3d branch_tangent(const Residual& r) {
    Eigen::Vector3d a = r.J.row(0);
    Eigen::Vector3d b = r.J.row(1);
    return a.cross(b);
}

/// Newton correction onto M = N = 0 in the plane through `pred` orthogonal
/// to `n`. `move_cap` bounds the total departure from the prediction.
bool correct_on_plane(SurfaceSpec& scratch, const Eigen::Vector3d& pred,
                      const Eigen::Vector3d& n, double move_cap, Eigen::Vector3d& out) {
    Eigen::Vector3d x = pred;
    for (int it = 0; it < 30; ++it) {
        Residual r = umbilic_residual(scratch, x);
        if (r.F.cwiseAbs().maxCoeff() < kResidualTol) {
            out = x;
            return true;
        }
        Eigen::Matrix3d A;
        A.row(0) = r.J.row(0);
        A.row(1) = r.J.row(1);
        A.row(2) = n.transpose();
        Eigen::Vector3d rhs(-r.F(0), -r.F(1), -n.dot(x - pred));
        Eigen::Vector3d dx = A.fullPivLu().solve(rhs);
        if (!dx.allFinite()) return false;
        x += dx;
        if ((x - pred).norm() > move_cap) return false;
    }
    return false;
}

/// Newton on M = N = 0 in (u, v) at fixed lambda.
bool correct_at_lambda(SurfaceSpec& scratch, double lambda, Eigen::Vector2d& uv,
                       double move_cap) {
    Eigen::Vector3d x(uv(0), uv(1), lambda);
    const Eigen::Vector2d start = uv;
    for (int it = 0; it < 30; ++it) {
        Residual r = umbilic_residual(scratch, x);
        if (r.F.cwiseAbs().maxCoeff() < kResidualTol) {
            uv = x.head<2>();
            return true;
        }
        Eigen::Matrix2d A = r.J.template leftCols<2>();
        Eigen::Vector2d dx = A.fullPivLu().solve(-r.F);
        if (!dx.allFinite()) return false;
        x(0) += dx(0);
        x(1) += dx(1);
        if ((x.head<2>() - start).norm() > move_cap) return false;
    }
    return false;
}

NormalizedJet jet_at(SurfaceSpec& scratch, const Eigen::Vector3d& x) {
    scratch.lambda = x(2);
    return monge_normal_form(scratch, x(0), x(1));
}

BranchSample make_sample(SurfaceSpec& scratch, const Eigen::Vector3d& x) {
    BranchSample smp;
    smp.lambda = x(2);
    smp.point = x.head<2>();
    try {
        NormalizedJet jet = jet_at(scratch, x);
        smp.cls = classify(jet);
        smp.delta = smp.cls.delta;
        try {
            smp.b12 = bif_functional_d12(jet);
        } catch (const Error&) {
            smp.b12 = nan_value();
        }
    } catch (const Error&) {
        smp.cls = UmbilicClass{};
        smp.b12 = nan_value();
    }
    return smp;
}

struct PassResult {
    std::vector<Eigen::Vector3d> points;
    bool lost = false;
};

PassResult run_pass(SurfaceSpec& scratch, const Eigen::Vector3d& start,
                    const Eigen::Vector3d& t_start, double lo, double hi, double ds,
                    int max_steps) {
    PassResult pass;
    Eigen::Vector3d x = start;
    Eigen::Vector3d t_prev = t_start;
    for (int step = 0; step < max_steps; ++step) {
        Residual r = umbilic_residual(scratch, x);
        Eigen::Vector3d t = branch_tangent(r);
        double tn = t.norm();
        if (tn < 1e-14) {
            t = t_prev;
        } else {
            t /= tn;
            if (t.dot(t_prev) < 0) t = -t;
        }
        bool advanced = false;
        for (double h = ds; h >= ds / 64.0; h /= 2.0) {
            Eigen::Vector3d pred = x + h * t;
            Eigen::Vector3d next;
            if (!correct_on_plane(scratch, pred, t, 3.0 * h, next)) continue;
            if ((next - x).dot(t) <= 0) continue;
            x = next;
            t_prev = t;
            advanced = true;
            break;
        }
        if (!advanced) {
            pass.lost = true;
            return pass;
        }
        if (x(2) > hi || x(2) < lo) {
            double bound = x(2) > hi ? hi : lo;
            Eigen::Vector2d uv = x.head<2>();
            if (correct_at_lambda(scratch, bound, uv, 3.0 * ds) &&
                scratch.domain.contains(uv(0), uv(1))) {
                pass.points.emplace_back(uv(0), uv(1), bound);
            }
            return pass;
        }
        if (!scratch.domain.contains(x(0), x(1))) return pass;
        pass.points.push_back(x);
    }
    return pass;
}

/// Bisect a sign change of fn along the branch arc between xa and xb. Each
/// probe re-corrects onto the branch in the hyperplane orthogonal to the
/// chord. Returns false when the bracket is invalid or a probe fails.
template <typename Fn>
bool bisect_chord(SurfaceSpec& scratch, const Eigen::Vector3d& xa, const Eigen::Vector3d& xb,
                  Fn&& fn, Eigen::Vector3d& out) {
    const Eigen::Vector3d n = (xb - xa).normalized();
    const double seg = (xb - xa).norm();
    if (!(seg > 0)) return false;
    double fa = fn(scratch, xa);
    double fb = fn(scratch, xb);
    if (!std::isfinite(fa) || !std::isfinite(fb) || fa * fb > 0) return false;
    double alo = 0.0;
    double ahi = 1.0;
    Eigen::Vector3d best = xa;
    bool have = false;
    for (int it = 0; it < 80 && (ahi - alo) * seg > 1e-14; ++it) {
        double am = 0.5 * (alo + ahi);
        Eigen::Vector3d pred = xa + am * (xb - xa);
        Eigen::Vector3d xm;
        if (!correct_on_plane(scratch, pred, n, seg, xm)) return false;
        double fm = fn(scratch, xm);
        if (!std::isfinite(fm)) return false;
        best = xm;
        have = true;
        if (fa * fm <= 0) {
            ahi = am;
        } else {
            alo = am;
            fa = fm;
        }
    }
    if (!have) return false;
    out = best;
    return true;
}

/// A sign change of a sampled functional along the branch: between samples
/// i and j (adjacent), or exactly at sample k when the value there is 0.0
/// and the flanking samples straddle (then j = i + 2).
struct Crossing {
    size_t i = 0;
    size_t j = 0;
    bool at_sample = false;
    size_t k = 0;
};

std::vector<Crossing> scan_crossings(const std::vector<double>& f) {
    std::vector<Crossing> out;
    const size_t n = f.size();
    for (size_t i = 0; i + 1 < n; ++i) {
        if (!std::isfinite(f[i]) || !std::isfinite(f[i + 1])) continue;
        if (f[i] * f[i + 1] < 0) out.push_back({i, i + 1, false, 0});
    }
    for (size_t k = 1; k + 1 < n; ++k) {
        if (!std::isfinite(f[k]) || f[k] != 0.0) continue;
        if (!std::isfinite(f[k - 1]) || !std::isfinite(f[k + 1])) continue;
        if (f[k - 1] * f[k + 1] < 0) out.push_back({k - 1, k + 1, true, k});
    }
    return out;
}

double b12_at(SurfaceSpec& scratch, const Eigen::Vector3d& x) {
    try {
        return bif_functional_d12(jet_at(scratch, x));
    } catch (const Error&) {
        return nan_value();
    }
}

double case2_at(SurfaceSpec& scratch, const Eigen::Vector3d& x) {
    try {
        NormalizedJet jet = jet_at(scratch, x);
        return jet.a - 2.0 * jet.b;
    } catch (const Error&) {
        return nan_value();
    }
}

double det2_at(SurfaceSpec& scratch, const Eigen::Vector3d& x) {
    return det2(umbilic_residual(scratch, x));
}

bool is_darbouxian(UmbilicLabel l) {
    return l == UmbilicLabel::kD1 || l == UmbilicLabel::kD2 || l == UmbilicLabel::kD3;
}

UmbilicLabel tip_label(const std::vector<BranchSample>& smp, size_t start, int dir) {
    for (int k = 0; k < 10; ++k) {
        long j = static_cast<long>(start) + dir * k;
        if (j < 0 || j >= static_cast<long>(smp.size())) break;
        UmbilicLabel l = smp[static_cast<size_t>(j)].cls.label;
        if (is_darbouxian(l)) return l;
    }
    return smp[start].cls.label;
}

void flag(EventWitness& w, const std::string& note) {
    w.flagged = true;
    if (!w.note.empty()) w.note += "; ";
    w.note += note;
}

bool near_range_end(double lambda, double lo, double hi) {
    return std::abs(lambda - lo) < kBoundaryPad || std::abs(lambda - hi) < kBoundaryPad;
}

/// Counting / annihilation window radius at a fold location: the requested
/// radius (or 0.3 * the smaller domain extent) clamped so the window stays
/// inside the chart domain.
double fold_radius(const Domain& d, const Eigen::Vector2d& loc, double requested) {
    double rad = requested > 0 ? requested : 0.3 * std::min(d.width(), d.height());
    double edge = std::min(std::min(loc(0) - d.u_min, d.u_max - loc(0)),
                           std::min(loc(1) - d.v_min, d.v_max - loc(1)));
    return std::min(rad, 0.95 * std::max(edge, 0.0));
}

} // namespace

const char* event_kind_name(EventKind k) {
    switch (k) {
        case EventKind::kD12Transition: return "D12Transition";
        case EventKind::kD123Fold: return "D123Fold";
        case EventKind::kCycleBirth: return "CycleBirth";
        case EventKind::kBoundaryTruncated: return "BoundaryTruncated";
    }
    return "unknown";
}

UmbilicBranch continue_branch(const SurfaceSpec& family, const Eigen::Vector3d& seed,
                              double lambda_lo, double lambda_hi, double ds,
                              const SweepOptions& opts) {
    if (!(lambda_hi > lambda_lo))
        throw Error(ErrorKind::kConfig, "continuation range is empty");
    if (!(ds > 0))
        throw Error(ErrorKind::kConfig, "continuation step must be positive");
    if (seed(2) < lambda_lo - 1e-12 || seed(2) > lambda_hi + 1e-12)
        throw Error(ErrorKind::kConfig, "seed lambda outside the continuation range");

    SurfaceSpec scratch = family;
    Eigen::Vector2d uv = seed.head<2>();
    double polish_cap = 0.1 * std::min(family.domain.width(), family.domain.height());
    if (!correct_at_lambda(scratch, seed(2), uv, polish_cap))
        throw Error(ErrorKind::kConfig, "seed does not converge to an umbilic");
    Eigen::Vector3d x0(uv(0), uv(1), seed(2));

    Residual r0 = umbilic_residual(scratch, x0);
    Eigen::Vector3d t0 = branch_tangent(r0);
    if (t0.norm() < 1e-14)
        throw Error(ErrorKind::kNumeric, "branch tangent undefined at the seed");
    t0.normalize();
    if (t0(2) < 0) t0 = -t0;
    if (std::abs(t0(2)) < 1e-12 && t0(0) < 0) t0 = -t0;

    PassResult plus = run_pass(scratch, x0, t0, lambda_lo, lambda_hi, ds, opts.max_steps);
    PassResult minus = run_pass(scratch, x0, -t0, lambda_lo, lambda_hi, ds, opts.max_steps);

    std::vector<Eigen::Vector3d> chain;
    chain.reserve(minus.points.size() + plus.points.size() + 1);
    for (auto it = minus.points.rbegin(); it != minus.points.rend(); ++it) chain.push_back(*it);
    chain.push_back(x0);
    for (const auto& p : plus.points) chain.push_back(p);
    chain.erase(std::unique(chain.begin(), chain.end(),
                            [](const Eigen::Vector3d& a, const Eigen::Vector3d& b) {
                                return (a - b).norm() < 1e-9;
                            }),
                chain.end());

    UmbilicBranch branch;
    branch.lambda_lo = lambda_lo;
    branch.lambda_hi = lambda_hi;
    branch.lost = plus.lost || minus.lost;
    branch.samples.reserve(chain.size());
    for (const auto& p : chain) branch.samples.push_back(make_sample(scratch, p));

    std::vector<double> dets(chain.size());
    for (size_t i = 0; i < chain.size(); ++i) dets[i] = det2_at(scratch, chain[i]);
    for (const Crossing& c : scan_crossings(dets)) {
        if (c.at_sample) {
            branch.fold_points.push_back(chain[c.k](2));
            continue;
        }
        Eigen::Vector3d xf;
        if (bisect_chord(scratch, chain[c.i], chain[c.j], det2_at, xf))
            branch.fold_points.push_back(xf(2));
    }
    return branch;
}

namespace {

/// Witness sampling for a transition: follow the branch to lambda_star
/// +- dw at fixed lambda and evaluate the transition functional there.
double transition_functional(SurfaceSpec& scratch, const Eigen::Vector2d& loc, double lambda,
                             double move_cap) {
    Eigen::Vector2d uv = loc;
    if (!correct_at_lambda(scratch, lambda, uv, move_cap)) return nan_value();
    scratch.lambda = lambda;
    try {
        return bif_functional_d12(monge_normal_form(scratch, uv(0), uv(1)));
    } catch (const Error&) {
        return nan_value();
    }
}

BifurcationEvent make_transition(SurfaceSpec& scratch, const SurfaceSpec& family,
                                 const Eigen::Vector3d& xs, size_t ia, size_t ib,
                                 const UmbilicBranch& branch, const SweepOptions& opts,
                                 bool collision) {
    BifurcationEvent ev;
    ev.lambda_star = xs(2);
    ev.location = xs.head<2>();
    if (near_range_end(xs(2), branch.lambda_lo, branch.lambda_hi)) {
        ev.kind = EventKind::kBoundaryTruncated;
        ev.witness.note = "within 1e-6 of the continuation range end";
        return ev;
    }
    ev.kind = EventKind::kD12Transition;
    // nearest Darbouxian labels flanking the event (the bracket samples
    // themselves may sit on the stratum)
    bool increasing = branch.samples[ib].lambda > branch.samples[ia].lambda;
    UmbilicLabel la = tip_label(branch.samples, ia, -1);
    UmbilicLabel lb = tip_label(branch.samples, ib, +1);
    ev.from = increasing ? la : lb;
    ev.to = increasing ? lb : la;

    try {
        UmbilicClass cls = classify(jet_at(scratch, xs));
        // Both D12 labels name the same stratum; which one appears depends on
        // the rotation branch the normal form picks at lambda_star.
        bool verified = collision ? cls.tangent_stratum
                                  : cls.label == UmbilicLabel::kD12Case1 ||
                                        cls.label == UmbilicLabel::kD12Case2;
        if (!verified)
            flag(ev.witness, std::string("classification at lambda_star is ") +
                                 label_name(cls.label));
    } catch (const Error& e) {
        flag(ev.witness, std::string("classification at lambda_star failed: ") + e.what());
    }
    if (collision) ev.witness.note += ev.witness.note.empty() ? "" : "; ";
    if (collision) ev.witness.note += "tangent-stratum crossing (slope-cubic root collision)";

    const double dw = opts.witness_offset;
    double move_cap = 0.1 * std::min(family.domain.width(), family.domain.height()) + 10.0 * dw;
    ev.witness.b_before = transition_functional(scratch, ev.location, xs(2) - dw, move_cap);
    ev.witness.b_after = transition_functional(scratch, ev.location, xs(2) + dw, move_cap);
    if (std::isfinite(ev.witness.b_before) && std::isfinite(ev.witness.b_after)) {
        ev.witness.db_dlambda = (ev.witness.b_after - ev.witness.b_before) / (2.0 * dw);
        double scale = std::max({1.0, std::abs(ev.witness.b_before),
                                 std::abs(ev.witness.b_after)});
        if (!collision && !(ev.witness.b_before * ev.witness.b_after < 0))
            flag(ev.witness, "functional does not change sign across lambda_star");
        if (std::abs(ev.witness.db_dlambda) <= 1e-3 * scale)
            flag(ev.witness, "functional derivative vanishes across lambda_star");
    } else {
        ev.witness.db_dlambda = nan_value();
        flag(ev.witness, "witness functional not finite beside lambda_star");
    }
    return ev;
}

BifurcationEvent make_fold(SurfaceSpec& scratch, const SurfaceSpec& family,
                           const Eigen::Vector3d& xs, const UmbilicBranch& branch, size_t ia,
                           size_t ib, const SweepOptions& opts) {
    BifurcationEvent ev;
    ev.lambda_star = xs(2);
    ev.location = xs.head<2>();
    if (near_range_end(xs(2), branch.lambda_lo, branch.lambda_hi)) {
        ev.kind = EventKind::kBoundaryTruncated;
        ev.witness.note = "within 1e-6 of the continuation range end";
        return ev;
    }
    ev.kind = EventKind::kD123Fold;
    ev.branches_merged = 2;
    ev.from = tip_label(branch.samples, ia, -1);
    ev.to = tip_label(branch.samples, ib, +1);

    try {
        UmbilicClass cls = classify(jet_at(scratch, xs));
        if (cls.label != UmbilicLabel::kD123)
            flag(ev.witness, std::string("classification at lambda_star is ") +
                                 label_name(cls.label));
    } catch (const Error& e) {
        flag(ev.witness, std::string("classification at lambda_star failed: ") + e.what());
    }

    // The quadratic lambda(s) relation only rises above the localization
    // noise a finite chart distance from the vertex. A sample sitting
    // nearly on the fold (an inserted seed, say) would alias that noise
    // into the check, so walk outward to comfortably distant samples.
    const double dmin = 1e-3;
    size_t ja = ia;
    while (ja > 0 && (branch.samples[ja].point - ev.location).norm() < dmin) --ja;
    size_t jb = ib;
    while (jb + 1 < branch.samples.size() &&
           (branch.samples[jb].point - ev.location).norm() < dmin)
        ++jb;
    const BranchSample& sa = branch.samples[ja];
    const BranchSample& sb = branch.samples[jb];
    Eigen::Vector3d xa(sa.point(0), sa.point(1), sa.lambda);
    Eigen::Vector3d xb(sb.point(0), sb.point(1), sb.lambda);
    double qa = (xa(2) - xs(2)) / std::max((xa - xs).squaredNorm(), 1e-30);
    double qb = (xb(2) - xs(2)) / std::max((xb - xs).squaredNorm(), 1e-30);
    if (!(qa * qb > 0) || std::min(std::abs(qa), std::abs(qb)) < 1e-8)
        flag(ev.witness, "lambda(s) second-order non-degeneracy check failed");

    const double rad = fold_radius(family.domain, ev.location, opts.count_radius);
    const double dw = opts.witness_offset;
    auto functional = [&](double lambda) {
        scratch.lambda = lambda;
        try {
            return bif_functional_d123(scratch, ev.location(0), ev.location(1), rad);
        } catch (const Error&) {
            return nan_value();
        }
    };
    ev.witness.b_before = functional(xs(2) - dw);
    ev.witness.b_after = functional(xs(2) + dw);
    if (std::isfinite(ev.witness.b_before) && std::isfinite(ev.witness.b_after)) {
        ev.witness.db_dlambda = (ev.witness.b_after - ev.witness.b_before) / (2.0 * dw);
        double scale = std::max({1.0, std::abs(ev.witness.b_before),
                                 std::abs(ev.witness.b_after)});
        if (!(ev.witness.b_before * ev.witness.b_after < 0))
            flag(ev.witness, "annihilation functional does not change sign");
        if (std::abs(ev.witness.db_dlambda) <= 1e-3 * scale)
            flag(ev.witness, "annihilation functional derivative vanishes");
    } else {
        ev.witness.db_dlambda = nan_value();
        flag(ev.witness, "annihilation functional not finite beside lambda_star");
    }

    auto count = [&](double lambda) {
        scratch.lambda = lambda;
        try {
            auto pts = find_umbilics(scratch, opts.umbilic_grid, opts.umbilic_grid);
            int n = 0;
            for (const auto& p : pts)
                if ((p - ev.location).norm() <= rad) ++n;
            return n;
        } catch (const Error&) {
            return -1;
        }
    };
    ev.witness.umbilics_before = count(xs(2) - dw);
    ev.witness.umbilics_after = count(xs(2) + dw);
    if (ev.witness.umbilics_before < 0 || ev.witness.umbilics_after < 0)
        flag(ev.witness, "umbilic count beside lambda_star failed");
    else if (std::abs(ev.witness.umbilics_before - ev.witness.umbilics_after) != 2)
        flag(ev.witness, "umbilic count does not drop by 2 across lambda_star");
    return ev;
}

} // namespace

std::vector<BifurcationEvent> detect_events(const UmbilicBranch& branch,
                                            const SurfaceSpec& family,
                                            const SweepOptions& opts) {
    if (branch.samples.size() < 2)
        throw Error(ErrorKind::kConfig, "event detection needs at least two branch samples");

    SurfaceSpec scratch = family;
    const auto& smp = branch.samples;
    const size_t n = smp.size();

    std::vector<double> a2b(n, nan_value());
    std::vector<double> cval(n, nan_value());
    std::vector<double> dets(n, nan_value());
    std::vector<Eigen::Vector3d> xs(n);
    for (size_t i = 0; i < n; ++i) {
        xs[i] = Eigen::Vector3d(smp[i].point(0), smp[i].point(1), smp[i].lambda);
        try {
            NormalizedJet jet = jet_at(scratch, xs[i]);
            a2b[i] = jet.a - 2.0 * jet.b;
            cval[i] = jet.c;
        } catch (const Error&) {
        }
        dets[i] = det2_at(scratch, xs[i]);
    }

    std::vector<double> b12s(n);
    for (size_t i = 0; i < n; ++i) b12s[i] = smp[i].b12;

    std::vector<BifurcationEvent> events;
    for (const Crossing& c : scan_crossings(b12s)) {
        if (smp[c.i].cls.tangent_stratum || smp[c.j].cls.tangent_stratum) continue;
        Eigen::Vector3d root;
        if (c.at_sample) {
            root = xs[c.k];
        } else if (!bisect_chord(scratch, xs[c.i], xs[c.j], b12_at, root)) {
            continue;
        }
        bool on_stratum = false;
        try {
            on_stratum = classify(jet_at(scratch, root)).tangent_stratum;
        } catch (const Error&) {
        }
        // A transversal crossing can land its root on the tangent chart of
        // the normal form (the rotation branches tie exactly on the
        // stratum), so a Darbouxian label change across the bracket
        // overrides the chart test. A tangential touch keeps its label.
        UmbilicLabel la = tip_label(smp, c.i, -1);
        UmbilicLabel lb = tip_label(smp, c.j, +1);
        bool darboux_change = la != lb && is_darbouxian(la) && is_darbouxian(lb);
        if (!on_stratum || darboux_change)
            events.push_back(make_transition(scratch, family, root, c.i, c.j, branch, opts,
                                             false));
    }
    for (const Crossing& c : scan_crossings(a2b)) {
        if (std::min(std::abs(cval[c.i]), std::abs(cval[c.j])) <= 1e-6) continue;
        Eigen::Vector3d root;
        if (c.at_sample) {
            root = xs[c.k];
        } else if (!bisect_chord(scratch, xs[c.i], xs[c.j], case2_at, root)) {
            continue;
        }
        bool verified = false;
        try {
            verified = classify(jet_at(scratch, root)).tangent_stratum;
        } catch (const Error&) {
        }
        if (verified)
            events.push_back(make_transition(scratch, family, root, c.i, c.j, branch, opts,
                                             true));
    }
    for (const Crossing& c : scan_crossings(dets)) {
        Eigen::Vector3d root;
        if (c.at_sample) {
            root = xs[c.k];
        } else if (!bisect_chord(scratch, xs[c.i], xs[c.j], det2_at, root)) {
            continue;
        }
        events.push_back(make_fold(scratch, family, root, branch, c.i, c.j, opts));
    }
    std::sort(events.begin(), events.end(),
              [](const BifurcationEvent& a, const BifurcationEvent& b) {
                  return a.lambda_star < b.lambda_star;
              });
    return events;
}

namespace {

double point_segment_dist(const Eigen::Vector2d& p, const Eigen::Vector2d& a,
                          const Eigen::Vector2d& b) {
    Eigen::Vector2d ab = b - a;
    double len2 = ab.squaredNorm();
    if (len2 < 1e-30) return (p - a).norm();
    double t = std::clamp((p - a).dot(ab) / len2, 0.0, 1.0);
    return (p - (a + t * ab)).norm();
}

double dist_to_polyline(const Eigen::Vector2d& p, const std::vector<Eigen::Vector2d>& poly) {
    if (poly.empty()) return nan_value();
    if (poly.size() == 1) return (p - poly[0]).norm();
    double best = std::numeric_limits<double>::infinity();
    for (size_t i = 0; i + 1 < poly.size(); ++i)
        best = std::min(best, point_segment_dist(p, poly[i], poly[i + 1]));
    return best;
}

double curve_to_polyline(const std::vector<Eigen::Vector2d>& curve,
                         const std::vector<Eigen::Vector2d>& poly) {
    double worst = 0.0;
    for (const auto& p : curve) worst = std::max(worst, dist_to_polyline(p, poly));
    return worst;
}

double wrap_angle(double a) {
    while (a > M_PI) a -= 2.0 * M_PI;
    while (a <= -M_PI) a += 2.0 * M_PI;
    return a;
}

/// Direction of the curve's departure from the umbilic: the chart angle of
/// the first sample beyond r0 (or of the last sample on short curves).
double departure_angle(const PrincipalCurve& sep, const Eigen::Vector2d& umb, double r0) {
    for (const auto& p : sep.points) {
        double d = (p - umb).norm();
        if (d >= r0) return std::atan2(p(1) - umb(1), p(0) - umb(0));
    }
    const Eigen::Vector2d& p = sep.points.back();
    return std::atan2(p(1) - umb(1), p(0) - umb(0));
}

/// Re-entry certification: the curve leaves the umbilic past a gate
/// radius, then comes back within tol of it, and the sector it re-enters
/// through is not bounded by its own departure ray. Returns the loop
/// polyline (start through the re-entry sample) when certified.
std::optional<std::vector<Eigen::Vector2d>> certify_loop(const PrincipalCurve& sep,
                                                         const Eigen::Vector2d& umb,
                                                         const std::vector<double>& rays,
                                                         double own_ray, double tol) {
    if (sep.points.size() < 4) return std::nullopt;
    double excursion = 0.0;
    for (const auto& p : sep.points) excursion = std::max(excursion, (p - umb).norm());
    if (excursion < 10.0 * tol) return std::nullopt;
    double gate = std::max(10.0 * tol, 0.2 * excursion);
    size_t out = sep.points.size();
    for (size_t i = 0; i < sep.points.size(); ++i) {
        if ((sep.points[i] - umb).norm() > gate) {
            out = i;
            break;
        }
    }
    if (out == sep.points.size()) return std::nullopt;
    size_t re = sep.points.size();
    for (size_t i = out + 1; i < sep.points.size(); ++i) {
        if ((sep.points[i] - umb).norm() <= tol) {
            re = i;
            break;
        }
    }
    if (re == sep.points.size()) return std::nullopt;

    if (rays.size() >= 2 && std::isfinite(own_ray) && re > 0) {
        const Eigen::Vector2d& q = sep.points[re - 1];
        double th = std::atan2(q(1) - umb(1), q(0) - umb(0));
        std::vector<double> sorted = rays;
        std::sort(sorted.begin(), sorted.end());
        auto it = std::upper_bound(sorted.begin(), sorted.end(), th);
        double hi = it == sorted.end() ? sorted.front() : *it;
        double lo = it == sorted.begin() ? sorted.back() : *(it - 1);
        if (std::abs(wrap_angle(lo - own_ray)) < 1e-6 ||
            std::abs(wrap_angle(hi - own_ray)) < 1e-6)
            return std::nullopt;
    }
    return std::vector<Eigen::Vector2d>(sep.points.begin(),
                                        sep.points.begin() + static_cast<long>(re) + 1);
}

Domain loop_region(const std::vector<Eigen::Vector2d>& loop, const Domain& domain) {
    double u0 = std::numeric_limits<double>::infinity(), u1 = -u0;
    double v0 = u0, v1 = -u0;
    for (const auto& p : loop) {
        u0 = std::min(u0, p(0));
        u1 = std::max(u1, p(0));
        v0 = std::min(v0, p(1));
        v1 = std::max(v1, p(1));
    }
    double pu = 0.15 * std::max(u1 - u0, 1e-3);
    double pv = 0.15 * std::max(v1 - v0, 1e-3);
    Domain r;
    r.u_min = std::max(domain.u_min, u0 - pu);
    r.u_max = std::min(domain.u_max, u1 + pu);
    r.v_min = std::max(domain.v_min, v0 - pv);
    r.v_max = std::min(domain.v_max, v1 + pv);
    return r;
}

} // namespace

std::vector<CycleBirthResult> detect_cycle_birth(const SurfaceSpec& family,
                                                 const BifurcationEvent& event,
                                                 const std::vector<double>& probe_offsets,
                                                 const SweepOptions& opts) {
    if (event.kind != EventKind::kD12Transition && event.kind != EventKind::kD123Fold)
        throw Error(ErrorKind::kConfig,
                    "cycle birth detection applies to transition and fold events only");

    SurfaceSpec star = family;
    star.lambda = event.lambda_star;
    SurfaceSpec scratch = family;

    Eigen::Vector2d umb = event.location;
    correct_at_lambda(scratch, event.lambda_star, umb,
                      0.1 * std::min(family.domain.width(), family.domain.height()));

    FlowOptions fopts = opts.flow;
    try {
        fopts.umbilics = find_umbilics(star, 64, 64);
    } catch (const Error&) {
        fopts.umbilics = {umb};
    }

    std::vector<PrincipalCurve> seps;
    std::string trace_note;
    try {
        seps = trace_separatrices(star, umb, fopts.initial_step, opts.separatrix_length, fopts);
    } catch (const Error& e) {
        trace_note = std::string("separatrix tracing failed: ") + e.what();
    }

    const SeparatrixRole wanted = event.kind == EventKind::kD12Transition
                                      ? SeparatrixRole::kIsolated
                                      : SeparatrixRole::kHyperbolic;
    const double ray_gate = std::max(0.01, 10.0 * opts.re_entry_tol);
    std::vector<double> rays;
    std::vector<double> own(seps.size(), nan_value());
    for (size_t i = 0; i < seps.size(); ++i) {
        if (seps[i].points.size() < 2) continue;
        own[i] = departure_angle(seps[i], umb, ray_gate);
        rays.push_back(own[i]);
    }

    std::vector<CycleBirthResult> results;
    for (Foliation fol : {Foliation::kMin, Foliation::kMax}) {
        CycleBirthResult res;
        res.foliation = fol;
        res.note = trace_note;
        for (size_t i = 0; i < seps.size(); ++i) {
            if (seps[i].foliation != fol || seps[i].role != wanted) continue;
            auto loop = certify_loop(seps[i], umb, rays, own[i], opts.re_entry_tol);
            if (loop) {
                res.loop_found = true;
                res.loop = std::move(*loop);
                break;
            }
        }
        if (!res.loop_found) {
            if (!res.note.empty()) res.note += "; ";
            res.note += "no certified loop";
            results.push_back(std::move(res));
            continue;
        }

        Domain region = loop_region(res.loop, family.domain);
        for (double off : probe_offsets) {
            for (int sign : {-1, +1}) {
                double lam = event.lambda_star + sign * std::abs(off);
                SurfaceSpec probe_spec = family;
                probe_spec.lambda = lam;
                FlowOptions popts = opts.flow;
                try {
                    popts.umbilics = find_umbilics(probe_spec, 64, 64);
                } catch (const Error&) {
                }
                CycleBirthProbe probe;
                probe.lambda = lam;
                auto rec = find_cycle(probe_spec, region, fol, popts, opts.seed_grid);
                if (rec && rec->curve.termination == CurveTermination::kClosed) {
                    probe.found = true;
                    probe.record = *rec;
                    probe.loop_distance = curve_to_polyline(rec->curve.points, res.loop);
                }
                res.probes.push_back(std::move(probe));
            }
        }

        bool above = false, below = false;
        for (const auto& p : res.probes) {
            if (!p.found) continue;
            (p.lambda > event.lambda_star ? above : below) = true;
        }
        if (above && !below) {
            res.side = +1;
        } else if (below && !above) {
            res.side = -1;
        } else if (above && below) {
            res.flagged = true;
            if (!res.note.empty()) res.note += "; ";
            res.note += "cycles found on both sides of lambda_star";
        } else {
            res.flagged = true;
            if (!res.note.empty()) res.note += "; ";
            res.note += "no cycle found on either side of lambda_star";
        }

        const CycleBirthProbe* nearest = nullptr;
        for (const auto& p : res.probes) {
            if (!p.found) continue;
            if (!nearest ||
                std::abs(p.lambda - event.lambda_star) <
                    std::abs(nearest->lambda - event.lambda_star))
                nearest = &p;
        }
        if (nearest) {
            SurfaceSpec probe_spec = family;
            probe_spec.lambda = nearest->lambda;
            FlowOptions popts = opts.flow;
            try {
                popts.umbilics = find_umbilics(probe_spec, 64, 64);
            } catch (const Error&) {
            }
            auto again = find_cycle(probe_spec, region, fol, popts, opts.seed_grid + 3);
            if (again && again->curve.termination == CurveTermination::kClosed &&
                !again->curve.points.empty()) {
                double sep = dist_to_polyline(again->curve.points.front(),
                                              nearest->record.curve.points);
                res.unique = sep <= 1e-6;
            }
        }
        results.push_back(std::move(res));
    }
    return results;
}

} // namespace umb
