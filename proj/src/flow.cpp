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

#include "flow.hpp"

#include <algorithm>
#include <cmath>

namespace umb {

namespace {

constexpr int kMaxSteps = 400000;

Eigen::Vector2d perp2(const Eigen::Vector2d& v) { return Eigen::Vector2d(-v.y(), v.x()); }

struct SectionSpec {
    Eigen::Vector2d base = Eigen::Vector2d::Zero();
    /// Unit flow direction at the base; the event plane has this normal,
    /// so crossings are counted when the along-flow coordinate re-enters 0.
    Eigen::Vector2d flow_dir = Eigen::Vector2d::UnitX();
    double capture = 0.05;
    double arm_distance = 0.0;
};

struct StepAttempt {
    Eigen::Vector3d y = Eigen::Vector3d::Zero();
    double err_ratio = 0.0;
    bool stalled = false;
};

/// Integrates the lifted principal-direction field. State is
/// (u, v, slope) in a slope chart with hysteresis hand-over at
/// |slope| > chart_switch; a fixed sign carries the travel sense and is
/// re-calibrated at chart changes by matching state-velocity continuity.
class LiftedTracer {
public:
    LiftedTracer(const SurfaceSpec& s, const FlowOptions& opts)
        : _s(s), _opts(opts), _period(s.v_period ? *s.v_period : 0.0) {}

    double wrap_dv(double dv) const {
        if (_period <= 0.0) return dv;
        return dv - _period * std::round(dv / _period);
    }
    Eigen::Vector2d delta(const Eigen::Vector2d& x, const Eigen::Vector2d& base) const {
        return Eigen::Vector2d(x.x() - base.x(), wrap_dv(x.y() - base.y()));
    }
    bool inside(const Eigen::Vector2d& x) const {
        if (_period > 0.0) return x.x() >= _s.domain.u_min && x.x() <= _s.domain.u_max;
        return _s.domain.contains(x.x(), x.y());
    }

    /// Seed at a chart point travelling along dir; the slope is dir's.
    bool seed_direction(const Eigen::Vector2d& x, const Eigen::Vector2d& dir) {
        if (dir.norm() < 1e-300) return false;
        Eigen::Vector2d d = dir.normalized();
        if (std::abs(d.y()) <= std::abs(d.x())) {
            _chart = LCChart::kP;
            _y = Eigen::Vector3d(x.x(), x.y(), d.y() / d.x());
        } else {
            _chart = LCChart::kQ;
            _y = Eigen::Vector3d(x.x(), x.y(), d.x() / d.y());
        }
        project(_y);
        LCValue val = lc_value(_s, state_of(_y));
        double dot = val.velocity.x() * d.x() + val.velocity.y() * d.y();
        _sigma = dot >= 0.0 ? 1.0 : -1.0;
        return true;
    }

    struct RunResult {
        CurveTermination termination = CurveTermination::kMaxLength;
        bool section_hit = false;
        Eigen::Vector2d section_point = Eigen::Vector2d::Zero();
        double section_offset = 0.0;
    };

    RunResult run(double max_len, const SectionSpec* section, bool detect_closure) {
        RunResult rr;
        _points.clear();
        _arc.clear();
        _points.push_back(planar());
        _arc.push_back(0.0);
        _drift = 0.0;
        {
            TauJets tj = principal_line_jets(_s, 0, _y(0), _y(1));
            _scale0 = std::max({1.0, std::abs(tj.L.value()), std::abs(tj.M.value()),
                                std::abs(tj.N.value())});
        }

        SectionSpec closure;
        bool has_closure = false;
        Eigen::Vector2d dir0 = Eigen::Vector2d::Zero();
        {
            Eigen::Vector3d f0;
            if (!field(_y, f0)) {
                rr.termination = CurveTermination::kStepFailure;
                return rr;
            }
            Eigen::Vector2d d(f0.x(), f0.y());
            if (d.norm() > 1e-300) dir0 = d.normalized();
            if (detect_closure && dir0.norm() > 0.5) {
                closure.base = planar();
                closure.flow_dir = dir0;
                closure.capture = _opts.closure_capture;
                closure.arm_distance = 2.0 * _opts.closure_capture;
                has_closure = true;
            }
        }
        bool sec_armed = false;
        bool clo_armed = false;
        std::vector<char> umb_armed(_opts.umbilics.size());
        for (size_t i = 0; i < _opts.umbilics.size(); ++i) {
            umb_armed[i] =
                delta(planar(), _opts.umbilics[i]).norm() > 2.0 * _opts.hit_radius ? 1 : 0;
        }

        double h = std::clamp(_opts.initial_step, _opts.min_step, _opts.max_step);
        double s_total = 0.0;
        int stall_count = 0;

        for (int iter = 0; iter < kMaxSteps; ++iter) {
            Eigen::Vector2d x_cur = planar();
            if (section && !sec_armed &&
                delta(x_cur, section->base).norm() > section->arm_distance) {
                sec_armed = true;
            }
            if (has_closure && !clo_armed &&
                delta(x_cur, closure.base).norm() > closure.arm_distance) {
                clo_armed = true;
            }
            double g_sec = section ? delta(x_cur, section->base).dot(section->flow_dir) : 0.0;
            double g_clo = has_closure ? delta(x_cur, closure.base).dot(closure.flow_dir) : 0.0;

            StepAttempt at = attempt(_y, h);
            if (at.stalled) {
                rr.termination = CurveTermination::kStepFailure;
                return rr;
            }
            if (at.err_ratio > 1.0) {
                if (h <= _opts.min_step * (1.0 + 1e-9)) {
                    rr.termination = CurveTermination::kStepFailure;
                    return rr;
                }
                h = std::max(_opts.min_step, h * std::max(0.2, 0.9 * std::pow(at.err_ratio, -0.2)));
                continue;
            }
            Eigen::Vector3d y_new = at.y;
            project(y_new);

            // Section crossing: refine, then accept only a same-direction
            // pass within the capture window.
            if (section && sec_armed) {
                double g_new = delta(Eigen::Vector2d(y_new(0), y_new(1)), section->base)
                                   .dot(section->flow_dir);
                if ((g_sec < 0.0) != (g_new < 0.0) && g_sec != 0.0) {
                    double t_star = refine_crossing(*section, g_sec, g_new, h);
                    Eigen::Vector3d y_ev = rk5(_y, t_star);
                    project(y_ev);
                    Eigen::Vector2d xe(y_ev(0), y_ev(1));
                    double off = delta(xe, section->base).dot(perp2(section->flow_dir));
                    Eigen::Vector3d fe;
                    bool alive = field(y_ev, fe);
                    double along = alive ? fe.x() * section->flow_dir.x() +
                                               fe.y() * section->flow_dir.y()
                                         : 0.0;
                    if (std::abs(off) <= section->capture && along > 0.0) {
                        _y = y_ev;
                        record(s_total);
                        rr.section_hit = true;
                        rr.section_point = xe;
                        rr.section_offset = off;
                        rr.termination = CurveTermination::kMaxLength;
                        return rr;
                    }
                }
            }

            // Closure: same refinement against the start section.
            if (has_closure && clo_armed) {
                double g_new = delta(Eigen::Vector2d(y_new(0), y_new(1)), closure.base)
                                   .dot(closure.flow_dir);
                if ((g_clo < 0.0) != (g_new < 0.0) && g_clo != 0.0) {
                    double t_star = refine_crossing(closure, g_clo, g_new, h);
                    Eigen::Vector3d y_ev = rk5(_y, t_star);
                    project(y_ev);
                    Eigen::Vector2d xe(y_ev(0), y_ev(1));
                    double dist = delta(xe, closure.base).norm();
                    if (dist <= _opts.tol_close) {
                        Eigen::Vector3d fe;
                        if (field(y_ev, fe)) {
                            Eigen::Vector2d de(fe.x(), fe.y());
                            if (de.norm() > 1e-300 &&
                                std::abs(de.normalized().dot(dir0)) >= _opts.tangent_align) {
                                _y = y_ev;
                                // Close onto the start point, keeping the v
                                // unwrapping of curves that run around the
                                // period.
                                Eigen::Vector2d endpt = closure.base;
                                if (_period > 0.0) {
                                    endpt.y() += _period * std::round((xe.y() - closure.base.y()) /
                                                                      _period);
                                }
                                _points.push_back(endpt);
                                _arc.push_back(s_total + delta(xe, x_cur).norm());
                                rr.termination = CurveTermination::kClosed;
                                return rr;
                            }
                        }
                    }
                }
            }

            // Domain exit: bisect the boundary crossing.
            if (!inside(Eigen::Vector2d(y_new(0), y_new(1)))) {
                double lo = 0.0, hi = h;
                for (int k = 0; k < 60; ++k) {
                    double mid = 0.5 * (lo + hi);
                    Eigen::Vector3d ym = rk5(_y, mid);
                    if (inside(Eigen::Vector2d(ym(0), ym(1)))) {
                        lo = mid;
                    } else {
                        hi = mid;
                    }
                }
                if (lo > 0.0) {
                    _y = rk5(_y, lo);
                    project(_y);
                    record(s_total);
                }
                rr.termination = CurveTermination::kDomainExit;
                return rr;
            }

            // Sustained lack of progress means the trace is creeping into a
            // singular point that is not on the umbilic list; give up rather
            // than grind the step size down indefinitely.
            double advance = delta(Eigen::Vector2d(y_new(0), y_new(1)), x_cur).norm() +
                             std::abs(y_new(2) - _y(2));
            if (advance < 1e-9) {
                if (++stall_count >= 2000) {
                    rr.termination = CurveTermination::kStepFailure;
                    return rr;
                }
            } else {
                stall_count = 0;
            }

            _y = y_new;
            record(s_total);
            s_total = _arc.back();

            // Umbilic hit: terminate once a previously-left umbilic ball is
            // re-entered at hit_radius.
            for (size_t i = 0; i < _opts.umbilics.size(); ++i) {
                double d = delta(planar(), _opts.umbilics[i]).norm();
                if (!umb_armed[i]) {
                    if (d > 2.0 * _opts.hit_radius) umb_armed[i] = 1;
                } else if (d <= _opts.hit_radius) {
                    rr.termination = CurveTermination::kUmbilicHit;
                    return rr;
                }
            }

            if (s_total >= max_len) {
                rr.termination = CurveTermination::kMaxLength;
                return rr;
            }

            // Chart hand-over with sense re-calibration: the planar
            // velocity flips sign with the chart when the slope is
            // positive, so the sense is re-matched against the expected
            // transformed state velocity.
            if (std::abs(_y(2)) > _opts.chart_switch) {
                LCValue v_old = lc_value(_s, state_of(_y));
                double p = _y(2);
                Eigen::Vector3d expected(_sigma * v_old.velocity.x(), _sigma * v_old.velocity.y(),
                                         -_sigma * v_old.velocity.z() / (p * p));
                _y(2) = 1.0 / p;
                _chart = _chart == LCChart::kP ? LCChart::kQ : LCChart::kP;
                LCValue v_new = lc_value(_s, state_of(_y));
                double dot = v_new.velocity.dot(expected);
                if (dot != 0.0) _sigma = dot > 0.0 ? 1.0 : -1.0;
                project(_y);
            }

            h = std::min(_opts.max_step,
                         h * std::min(5.0, std::max(0.2, 0.9 * std::pow(std::max(at.err_ratio, 1e-10),
                                                                         -0.2))));
        }
        rr.termination = CurveTermination::kStepFailure;
        return rr;
    }

    const std::vector<Eigen::Vector2d>& points() const { return _points; }
    const std::vector<double>& arclength() const { return _arc; }
    double drift() const { return _drift; }

private:
    Eigen::Vector2d planar() const { return Eigen::Vector2d(_y(0), _y(1)); }

    LCState state_of(const Eigen::Vector3d& y) const {
        LCState st;
        st.u = y(0);
        st.v = y(1);
        st.slope = y(2);
        st.chart = _chart;
        return st;
    }

    void record(double s_prev) {
        Eigen::Vector2d x = planar();
        double ds = delta(x, _points.back()).norm();
        _points.push_back(x);
        _arc.push_back(s_prev + ds);
    }

    /// Unit-speed lifted field with fiber blending: the slope component is
    /// weighted by eta so fiber transits over umbilics advance in finite
    /// parameter while planar arclength dominates elsewhere.
    bool field(const Eigen::Vector3d& y, Eigen::Vector3d& out) const {
        LCValue val = lc_value(_s, state_of(y));
        const Eigen::Vector3d& X = val.velocity;
        double planar2 = X.x() * X.x() + X.y() * X.y();
        double nu = std::sqrt(planar2 + _opts.eta * _opts.eta * X.squaredNorm());
        if (nu < 1e-300) return false;
        out = (_sigma / nu) * X;
        return true;
    }

    StepAttempt attempt(const Eigen::Vector3d& y0, double h) const {
        StepAttempt out;
        Eigen::Vector3d k1, k2, k3, k4, k5, k6, k7;
        if (!field(y0, k1) || !field(y0 + h * (0.2 * k1), k2) ||
            !field(y0 + h * (3.0 / 40 * k1 + 9.0 / 40 * k2), k3) ||
            !field(y0 + h * (44.0 / 45 * k1 - 56.0 / 15 * k2 + 32.0 / 9 * k3), k4) ||
            !field(y0 + h * (19372.0 / 6561 * k1 - 25360.0 / 2187 * k2 + 64448.0 / 6561 * k3 -
                             212.0 / 729 * k4),
                   k5) ||
            !field(y0 + h * (9017.0 / 3168 * k1 - 355.0 / 33 * k2 + 46732.0 / 5247 * k3 +
                             49.0 / 176 * k4 - 5103.0 / 18656 * k5),
                   k6)) {
            out.stalled = true;
            return out;
        }
        Eigen::Vector3d y5 = y0 + h * (35.0 / 384 * k1 + 500.0 / 1113 * k3 + 125.0 / 192 * k4 -
                                       2187.0 / 6784 * k5 + 11.0 / 84 * k6);
        if (!field(y5, k7)) {
            out.stalled = true;
            return out;
        }
        Eigen::Vector3d e =
            h * ((35.0 / 384 - 5179.0 / 57600) * k1 + (500.0 / 1113 - 7571.0 / 16695) * k3 +
                 (125.0 / 192 - 393.0 / 640) * k4 + (-2187.0 / 6784 + 92097.0 / 339200) * k5 +
                 (11.0 / 84 - 187.0 / 2100) * k6 - (1.0 / 40) * k7);
        double ratio = 0.0;
        for (int i = 0; i < 3; ++i) {
            ratio = std::max(ratio, std::abs(e(i)) / (_opts.tol * (1.0 + std::abs(y5(i)))));
        }
        out.y = y5;
        out.err_ratio = ratio;
        return out;
    }

    /// Single fifth-order step (event refinement and boundary clipping).
    Eigen::Vector3d rk5(const Eigen::Vector3d& y0, double h) const {
        Eigen::Vector3d k1, k2, k3, k4, k5, k6;
        field(y0, k1);
        field(y0 + h * (0.2 * k1), k2);
        field(y0 + h * (3.0 / 40 * k1 + 9.0 / 40 * k2), k3);
        field(y0 + h * (44.0 / 45 * k1 - 56.0 / 15 * k2 + 32.0 / 9 * k3), k4);
        field(y0 + h * (19372.0 / 6561 * k1 - 25360.0 / 2187 * k2 + 64448.0 / 6561 * k3 -
                        212.0 / 729 * k4),
              k5);
        field(y0 + h * (9017.0 / 3168 * k1 - 355.0 / 33 * k2 + 46732.0 / 5247 * k3 +
                        49.0 / 176 * k4 - 5103.0 / 18656 * k5),
              k6);
        return y0 + h * (35.0 / 384 * k1 + 500.0 / 1113 * k3 + 125.0 / 192 * k4 -
                         2187.0 / 6784 * k5 + 11.0 / 84 * k6);
    }

    /// Locate the zero of the section coordinate within (0, h] by a
    /// secant/bisection hybrid on partial steps from the current state.
    double refine_crossing(const SectionSpec& sec, double g_lo, double g_hi, double h) const {
        double lo = 0.0, hi = h;
        for (int k = 0; k < 60; ++k) {
            double t;
            if (std::abs(g_hi - g_lo) > 1e-300) {
                t = hi - g_hi * (hi - lo) / (g_hi - g_lo);
                if (!(t > lo && t < hi)) t = 0.5 * (lo + hi);
            } else {
                t = 0.5 * (lo + hi);
            }
            Eigen::Vector3d yt = rk5(_y, t);
            double g = delta(Eigen::Vector2d(yt(0), yt(1)), sec.base).dot(sec.flow_dir);
            if ((g < 0.0) == (g_lo < 0.0)) {
                lo = t;
                g_lo = g;
            } else {
                hi = t;
                g_hi = g;
            }
            if (hi - lo < 1e-16 * h) break;
        }
        return hi;
    }

    /// One-step orthogonal projection back onto T = 0, applied twice; the
    /// residual after the first correction feeds the drift record.
    void project(Eigen::Vector3d& y) {
        for (int it = 0; it < 2; ++it) {
            LCValue val = lc_value(_s, state_of(y));
            double g2 = val.gradient.squaredNorm();
            if (g2 < 1e-300) return;
            if (it == 1) _drift = std::max(_drift, std::abs(val.t) / _scale0);
            y -= (val.t / g2) * val.gradient;
        }
    }

    const SurfaceSpec& _s;
    FlowOptions _opts;
    double _period;
    Eigen::Vector3d _y = Eigen::Vector3d::Zero();
    LCChart _chart = LCChart::kP;
    double _sigma = 1.0;
    double _scale0 = 1.0;
    double _drift = 0.0;
    std::vector<Eigen::Vector2d> _points;
    std::vector<double> _arc;
};

Foliation other_foliation(Foliation f) {
    return f == Foliation::kMin ? Foliation::kMax : Foliation::kMin;
}

/// Tag a traced projection by comparing its normal curvature against the
/// principal values at a sample away from the umbilic.
Foliation tag_foliation(const SurfaceSpec& s, const std::vector<Eigen::Vector2d>& pts,
                        const std::vector<double>& arc, const Eigen::Vector2d& avoid,
                        const FlowOptions& opts) {
    double total = arc.back();
    double target = std::min(0.3 * total, std::max(0.02, 50.0 * opts.hit_radius));
    for (size_t i = 1; i + 1 < pts.size(); ++i) {
        if (arc[i] < target) continue;
        if ((pts[i] - avoid).norm() < 20.0 * opts.hit_radius) continue;
        Eigen::Vector2d t = pts[i + 1] - pts[i - 1];
        if (t.norm() < 1e-12) continue;
        PrincipalDirections pd =
            principal_directions(s, pts[i].x(), pts[i].y(), opts.umbilic_tol);
        if (pd.umbilic) continue;
        FundamentalForms f = fundamental_forms(s, pts[i].x(), pts[i].y());
        double I = f.E * t.x() * t.x() + 2.0 * f.F * t.x() * t.y() + f.G * t.y() * t.y();
        double II = f.e * t.x() * t.x() + 2.0 * f.f * t.x() * t.y() + f.g * t.y() * t.y();
        if (I <= 0.0) continue;
        double kn = II / I;
        return std::abs(kn - pd.kn_min) <= std::abs(kn - pd.kn_max) ? Foliation::kMin
                                                                    : Foliation::kMax;
    }
    return Foliation::kMin;
}

Eigen::Vector2d polyline_at(const std::vector<Eigen::Vector2d>& pts,
                            const std::vector<double>& arcs, double s) {
    if (s <= arcs.front()) return pts.front();
    if (s >= arcs.back()) return pts.back();
    auto it = std::upper_bound(arcs.begin(), arcs.end(), s);
    size_t j = static_cast<size_t>(it - arcs.begin());
    size_t i = j - 1;
    double len = arcs[j] - arcs[i];
    double t = len > 0.0 ? (s - arcs[i]) / len : 0.0;
    return pts[i] + t * (pts[j] - pts[i]);
}

double polyline_project(const std::vector<Eigen::Vector2d>& pts,
                        const std::vector<double>& arcs, const Eigen::Vector2d& x) {
    double best_d = 1e300, best_s = arcs.front();
    for (size_t i = 0; i + 1 < pts.size(); ++i) {
        Eigen::Vector2d a = pts[i], b = pts[i + 1];
        Eigen::Vector2d ab = b - a;
        double len2 = ab.squaredNorm();
        double t = len2 > 0.0 ? std::clamp((x - a).dot(ab) / len2, 0.0, 1.0) : 0.0;
        Eigen::Vector2d c = a + t * ab;
        double d = (x - c).norm();
        if (d < best_d) {
            best_d = d;
            best_s = arcs[i] + t * (arcs[i + 1] - arcs[i]);
        }
    }
    return best_s;
}

struct ThreeIntegrals {
    double b = 0.0, a1 = 0.0, a2 = 0.0;
};

} // namespace

const char* foliation_name(Foliation f) {
    return f == Foliation::kMin ? "min" : "max";
}

const char* termination_name(CurveTermination t) {
    switch (t) {
        case CurveTermination::kDomainExit: return "domain_exit";
        case CurveTermination::kUmbilicHit: return "umbilic_hit";
        case CurveTermination::kClosed: return "closed";
        case CurveTermination::kMaxLength: return "max_length";
        case CurveTermination::kStepFailure: return "step_failure";
    }
    return "unknown";
}

const char* separatrix_role_name(SeparatrixRole r) {
    switch (r) {
        case SeparatrixRole::kNone: return "none";
        case SeparatrixRole::kGeneric: return "generic";
        case SeparatrixRole::kIsolated: return "isolated";
        case SeparatrixRole::kNonIsolated: return "non_isolated";
        case SeparatrixRole::kHyperbolic: return "hyperbolic";
        case SeparatrixRole::kCenter: return "center";
    }
    return "unknown";
}

PrincipalCurve integrate_line(const SurfaceSpec& s, const Eigen::Vector2d& start,
                              Foliation foliation, int sense, const FlowOptions& opts) {
    PrincipalDirections pd = principal_directions(s, start.x(), start.y(), opts.umbilic_tol);
    if (pd.umbilic) {
        throw Error(ErrorKind::kDomain, "principal line cannot start at an umbilic point");
    }
    Eigen::Vector2d dir = foliation == Foliation::kMin ? pd.dir_min : pd.dir_max;
    if (sense < 0) dir = -dir;

    PrincipalCurve c;
    c.foliation = foliation;
    c.lifted = true;
    LiftedTracer tr(s, opts);
    if (!tr.seed_direction(start, dir)) {
        c.points = {start};
        c.arclength = {0.0};
        c.termination = CurveTermination::kStepFailure;
        return c;
    }
    auto rr = tr.run(opts.max_length, nullptr, true);
    c.points = tr.points();
    c.arclength = tr.arclength();
    c.termination = rr.termination;
    c.constraint_drift = tr.drift();
    return c;
}

std::vector<PrincipalCurve> trace_separatrices(const SurfaceSpec& s,
                                               const Eigen::Vector2d& umbilic, double step,
                                               double max_len, const FlowOptions& opts0) {
    FlowOptions opts = opts0;
    if (step > 0.0) opts.initial_step = std::min(step, opts.max_step);
    opts.max_length = max_len;
    bool listed = false;
    for (const auto& u : opts.umbilics) {
        if ((u - umbilic).norm() <= opts.hit_radius) listed = true;
    }
    if (!listed) opts.umbilics.push_back(umbilic);

    NormalizedJet jet = monge_normal_form(s, umbilic.x(), umbilic.y());
    UmbilicClass cls = classify(jet);
    if (cls.label == UmbilicLabel::kDegenerate) {
        throw Error(ErrorKind::kDomain,
                    "separatrix tracing requires an umbilic of codimension at most one");
    }
    std::vector<LCSingularity> sings = lc_singularities(jet);

    // Chart image of an ambient tangent vector at the umbilic.
    Eigen::Vector3d au, av;
    double fE = 0.0, fF = 0.0, fG = 0.0;
    if (s.kind == SurfaceSpec::Kind::kParametric) {
        double eps = 1e-6;
        au = (position(s, umbilic.x() + eps, umbilic.y()) -
              position(s, umbilic.x() - eps, umbilic.y())) /
             (2.0 * eps);
        av = (position(s, umbilic.x(), umbilic.y() + eps) -
              position(s, umbilic.x(), umbilic.y() - eps)) /
             (2.0 * eps);
        fE = au.dot(au);
        fF = au.dot(av);
        fG = av.dot(av);
    }
    auto chart_dir = [&](const Eigen::Vector3d& w) -> Eigen::Vector2d {
        if (s.kind == SurfaceSpec::Kind::kMongeGraph) return Eigen::Vector2d(w.x(), w.y());
        double pu = au.dot(w), pv = av.dot(w);
        double det = fE * fG - fF * fF;
        return Eigen::Vector2d((fG * pu - fF * pv) / det, (fE * pv - fF * pu) / det);
    };

    const Eigen::Vector3d e1 = jet.frame.col(0);
    const Eigen::Vector3d e2 = jet.frame.col(1);
    const double offset = 1e-5;

    std::vector<PrincipalCurve> out;
    auto emit = [&](const LCSingularity& sing, double side, SeparatrixRole role) {
        Eigen::Vector3d dir3 = sing.transversal_direction;
        if (std::abs(dir3(0)) < 1e-12) return;
        dir3 /= dir3(0);
        double p0 = sing.slope;
        double w_rate = dir3(2);
        double pn = std::hypot(1.0, dir3(1));
        double xm = side * offset / pn;
        double ym = side * offset * dir3(1) / pn;
        double pm = p0 + side * offset * w_rate / pn;

        Eigen::Vector2d seed = umbilic + chart_dir(xm * e1 + ym * e2);
        Eigen::Vector2d dirc = chart_dir(e1 + pm * e2);
        Eigen::Vector2d outward = chart_dir(side * (e1 + p0 * e2));
        if (dirc.dot(outward) < 0.0) dirc = -dirc;

        LiftedTracer tr(s, opts);
        if (!tr.seed_direction(seed, dirc)) return;
        auto rr = tr.run(max_len, nullptr, false);

        PrincipalCurve c;
        c.lifted = true;
        c.role = role;
        c.termination = rr.termination;
        c.constraint_drift = tr.drift();
        const auto& pts = tr.points();
        const auto& arc = tr.arclength();
        double d0 = (pts.front() - umbilic).norm();
        c.points.reserve(pts.size() + 1);
        c.arclength.reserve(arc.size() + 1);
        c.points.push_back(umbilic);
        c.arclength.push_back(0.0);
        for (size_t i = 0; i < pts.size(); ++i) {
            c.points.push_back(pts[i]);
            c.arclength.push_back(arc[i] + d0);
        }
        c.foliation = tag_foliation(s, c.points, c.arclength, umbilic, opts);
        out.push_back(std::move(c));
    };

    for (const LCSingularity& sing : sings) {
        switch (sing.kind) {
            case LCKind::kSaddle: {
                SeparatrixRole role = cls.tangent_stratum || cls.label == UmbilicLabel::kD12Case1
                                          ? SeparatrixRole::kIsolated
                                          : SeparatrixRole::kGeneric;
                emit(sing, +1.0, role);
                emit(sing, -1.0, role);
                break;
            }
            case LCKind::kSaddleNode:
                if (sing.center_along_fiber) {
                    emit(sing, +1.0, SeparatrixRole::kNonIsolated);
                    emit(sing, -1.0, SeparatrixRole::kNonIsolated);
                } else {
                    double side = sing.center_quadratic >= 0.0 ? 1.0 : -1.0;
                    emit(sing, side, SeparatrixRole::kCenter);
                }
                break;
            case LCKind::kConicMorse:
                emit(sing, +1.0, SeparatrixRole::kHyperbolic);
                emit(sing, -1.0, SeparatrixRole::kHyperbolic);
                break;
            case LCKind::kNode:
                break;
        }
    }
    return out;
}

ReturnMapData return_map(const SurfaceSpec& s, const PrincipalCurve& cycle, double halfwidth,
                         const FlowOptions& opts) {
    if (cycle.points.size() < 3 || cycle.termination != CurveTermination::kClosed) {
        throw Error(ErrorKind::kDomain, "return map requires a closed principal curve");
    }
    Eigen::Vector2d base = cycle.points.front();
    Eigen::Vector2d tau = (cycle.points[1] - cycle.points[0]).normalized();
    Eigen::Vector2d mh = perp2(tau);

    Foliation orth = other_foliation(cycle.foliation);
    FlowOptions topt = opts;
    topt.max_length = 1.5 * halfwidth + 10.0 * opts.max_step;
    topt.max_step = std::min(opts.max_step, halfwidth / 8.0);
    PrincipalDirections pd = principal_directions(s, base.x(), base.y(), opts.umbilic_tol);
    if (pd.umbilic) {
        throw Error(ErrorKind::kDomain, "return-map base point lies at an umbilic");
    }
    Eigen::Vector2d dorth = orth == Foliation::kMin ? pd.dir_min : pd.dir_max;
    int sgn = dorth.dot(mh) >= 0.0 ? 1 : -1;
    PrincipalCurve plus = integrate_line(s, base, orth, sgn, topt);
    PrincipalCurve minus = integrate_line(s, base, orth, -sgn, topt);
    if (plus.arclength.back() < halfwidth || minus.arclength.back() < halfwidth) {
        throw Error(ErrorKind::kNumeric,
                    "transversal segment could not be extended to the requested half-width");
    }

    std::vector<Eigen::Vector2d> tp;
    std::vector<double> ts;
    for (size_t i = minus.points.size(); i-- > 1;) {
        tp.push_back(minus.points[i]);
        ts.push_back(-minus.arclength[i]);
    }
    for (size_t i = 0; i < plus.points.size(); ++i) {
        tp.push_back(plus.points[i]);
        ts.push_back(plus.arclength[i]);
    }

    ReturnMapData out;
    out.base = base;
    out.transversal_dir = (plus.points[1] - base).normalized();

    SectionSpec sec;
    sec.base = base;
    sec.flow_dir = tau;
    sec.capture = std::max(8.0 * halfwidth, 4.0 * opts.closure_capture);
    sec.arm_distance = 0.5 * sec.capture;

    for (int j = -4; j <= 4; ++j) {
        double sj = j * halfwidth / 4.0;
        Eigen::Vector2d xj = polyline_at(tp, ts, sj);
        PrincipalDirections pdj = principal_directions(s, xj.x(), xj.y(), opts.umbilic_tol);
        if (pdj.umbilic) {
            throw Error(ErrorKind::kNumeric, "transversal sample fell on an umbilic");
        }
        Eigen::Vector2d dj = cycle.foliation == Foliation::kMin ? pdj.dir_min : pdj.dir_max;
        if (dj.dot(tau) < 0.0) dj = -dj;
        LiftedTracer tr(s, opts);
        if (!tr.seed_direction(xj, dj)) {
            throw Error(ErrorKind::kNumeric, "return-map sample failed to start");
        }
        auto rr = tr.run(opts.max_length, &sec, false);
        if (!rr.section_hit) {
            throw Error(ErrorKind::kNumeric,
                        "no return: principal line left the domain before returning to the "
                        "transversal section");
        }
        // Bring the landing back into the base period window before
        // measuring it against the transversal polyline.
        Eigen::Vector2d land = rr.section_point;
        if (s.v_period) {
            land.y() += *s.v_period * std::round((base.y() - land.y()) / *s.v_period);
        }
        ReturnMapSample smp;
        smp.s = sj;
        smp.pi = polyline_project(tp, ts, land);
        out.samples.push_back(smp);
    }

    double h4 = halfwidth / 4.0;
    out.pi_prime = (8.0 * (out.samples[5].pi - out.samples[3].pi) -
                    (out.samples[6].pi - out.samples[2].pi)) /
                   (12.0 * h4);
    return out;
}

HyperbolicityIntegrals hyperbolicity_integrals(const SurfaceSpec& s, const PrincipalCurve& cycle,
                                               const FlowOptions& opts) {
    const auto& P = cycle.points;
    if (P.size() < 8) {
        throw Error(ErrorKind::kDomain, "hyperbolicity integrals require a closed curve");
    }
    double period = s.v_period ? *s.v_period : 0.0;
    auto wrapped = [&](const Eigen::Vector2d& a, const Eigen::Vector2d& b) {
        double dv = a.y() - b.y();
        if (period > 0.0) dv -= period * std::round(dv / period);
        return Eigen::Vector2d(a.x() - b.x(), dv).norm();
    };
    if (cycle.termination != CurveTermination::kClosed && wrapped(P.front(), P.back()) > 1e-5) {
        throw Error(ErrorKind::kDomain, "hyperbolicity integrals require a closed curve");
    }

    size_t m = P.size();
    if (wrapped(P.front(), P.back()) < 1e-12) m -= 1;

    std::vector<double> H(m), DISC(m), K1(m), K2(m);
    for (size_t i = 0; i < m; ++i) {
        for (const auto& u : opts.umbilics) {
            if (wrapped(P[i], u) < opts.r_lift) {
                throw Error(ErrorKind::kDomain,
                            "cycle passes within the umbilic exclusion radius; the "
                            "hyperbolicity integrands are singular there");
            }
        }
        CurvatureData c = curvature_data(fundamental_forms(s, P[i].x(), P[i].y()));
        if (c.discriminant < 100.0 * opts.umbilic_tol * std::max(1.0, c.H * c.H)) {
            throw Error(ErrorKind::kDomain,
                        "cycle passes within the umbilic exclusion radius; the "
                        "hyperbolicity integrands are singular there");
        }
        H[i] = c.H;
        DISC[i] = c.discriminant;
        K1[i] = c.k1;
        K2[i] = c.k2;
    }

    auto pass = [&](size_t stride) {
        ThreeIntegrals t;
        for (size_t i = 0; i < m; i += stride) {
            size_t j = i + stride < m ? i + stride : 0;
            double fb = 0.5 * (1.0 / std::sqrt(DISC[i]) + 1.0 / std::sqrt(DISC[j]));
            double ga = 0.5 * (1.0 / (K2[i] - K1[i]) + 1.0 / (K2[j] - K1[j]));
            t.b += (H[j] - H[i]) * fb;
            t.a1 += (K1[j] - K1[i]) * ga;
            t.a2 += (K2[j] - K2[i]) * ga;
            if (j == 0) break;
        }
        return t;
    };
    ThreeIntegrals fine = pass(1);
    ThreeIntegrals coarse = pass(2);

    HyperbolicityIntegrals out;
    out.integral_b = fine.b + (fine.b - coarse.b) / 3.0;
    out.integral_a1 = fine.a1 + (fine.a1 - coarse.a1) / 3.0;
    out.integral_a2 = fine.a2 + (fine.a2 - coarse.a2) / 3.0;
    out.quadrature_error = std::max({std::abs(fine.b - coarse.b), std::abs(fine.a1 - coarse.a1),
                                     std::abs(fine.a2 - coarse.a2)}) /
                           3.0;
    return out;
}

std::optional<CycleRecord> find_cycle(const SurfaceSpec& s, const Domain& seed_region,
                                      Foliation foliation, const FlowOptions& opts,
                                      int seed_grid) {
    if (seed_grid < 1) {
        throw Error(ErrorKind::kConfig, "cycle seed grid must be at least 1x1");
    }
    double cap = 0.35 * std::max(seed_region.width(), seed_region.height());
    double conv = 0.5 * opts.tol_close;
    double period = s.v_period ? *s.v_period : 0.0;

    auto usable = [&](const Eigen::Vector2d& x) {
        if (period > 0.0) {
            if (x.x() < s.domain.u_min || x.x() > s.domain.u_max) return false;
        } else if (!s.domain.contains(x.x(), x.y())) {
            return false;
        }
        for (const auto& u : opts.umbilics) {
            double dv = x.y() - u.y();
            if (period > 0.0) dv -= period * std::round(dv / period);
            if (Eigen::Vector2d(x.x() - u.x(), dv).norm() < 2.0 * opts.r_lift) return false;
        }
        return true;
    };

    for (int i = 0; i < seed_grid; ++i) {
        for (int j = 0; j < seed_grid; ++j) {
            Eigen::Vector2d x0(seed_region.u_min + (i + 0.5) * seed_region.width() / seed_grid,
                               seed_region.v_min + (j + 0.5) * seed_region.height() / seed_grid);
            if (!usable(x0)) continue;
            PrincipalDirections pd = principal_directions(s, x0.x(), x0.y(), opts.umbilic_tol);
            if (pd.umbilic) continue;
            Eigen::Vector2d tau =
                (foliation == Foliation::kMin ? pd.dir_min : pd.dir_max).normalized();
            Eigen::Vector2d mh = perp2(tau);

            SectionSpec sec;
            sec.base = x0;
            sec.flow_dir = tau;
            sec.capture = cap;
            sec.arm_distance = std::min(0.5 * cap, 0.05);

            auto shoot = [&](double sv, double& offset) {
                Eigen::Vector2d xs = x0 + sv * mh;
                if (!usable(xs)) return false;
                PrincipalDirections pds =
                    principal_directions(s, xs.x(), xs.y(), opts.umbilic_tol);
                if (pds.umbilic) return false;
                Eigen::Vector2d d = foliation == Foliation::kMin ? pds.dir_min : pds.dir_max;
                if (d.dot(tau) < 0.0) d = -d;
                LiftedTracer tr(s, opts);
                if (!tr.seed_direction(xs, d)) return false;
                auto rr = tr.run(opts.max_length, &sec, false);
                if (!rr.section_hit) return false;
                offset = rr.section_offset;
                return true;
            };

            double off0;
            if (!shoot(0.0, off0)) continue;
            double s_star = 0.0;
            bool converged = std::abs(off0) <= conv;
            if (!converged && std::abs(off0) <= cap) {
                double s_prev = 0.0, f_prev = off0;
                double s_cur = off0;
                for (int it = 0; it < 40; ++it) {
                    double off;
                    if (!shoot(s_cur, off)) break;
                    double f_cur = off - s_cur;
                    if (std::abs(f_cur) <= conv) {
                        s_star = s_cur;
                        converged = true;
                        break;
                    }
                    double den = f_cur - f_prev;
                    if (std::abs(den) < 1e-300) break;
                    double s_next = s_cur - f_cur * (s_cur - s_prev) / den;
                    if (!std::isfinite(s_next) || std::abs(s_next) > cap) break;
                    s_prev = s_cur;
                    f_prev = f_cur;
                    s_cur = s_next;
                }
            }
            if (!converged) continue;

            Eigen::Vector2d xc = x0 + s_star * mh;
            if (!usable(xc)) continue;
            PrincipalDirections pdc = principal_directions(s, xc.x(), xc.y(), opts.umbilic_tol);
            if (pdc.umbilic) continue;
            Eigen::Vector2d raw = foliation == Foliation::kMin ? pdc.dir_min : pdc.dir_max;
            int sense = raw.dot(tau) >= 0.0 ? 1 : -1;
            PrincipalCurve cyc = integrate_line(s, xc, foliation, sense, opts);
            if (cyc.termination != CurveTermination::kClosed) continue;

            CycleRecord rec;
            rec.curve = std::move(cyc);
            try {
                HyperbolicityIntegrals hi = hyperbolicity_integrals(s, rec.curve, opts);
                rec.integral_b = hi.integral_b;
                rec.integral_a1 = hi.integral_a1;
                rec.integral_a2 = hi.integral_a2;
                rec.quadrature_error = hi.quadrature_error;
                ReturnMapData rm = return_map(s, rec.curve, opts.return_halfwidth, opts);
                rec.pi_prime = rm.pi_prime;
            } catch (const Error&) {
                continue;
            }
            rec.hyperbolic = std::abs(rec.pi_prime - 1.0) > opts.pi_prime_tol;
            bool integral_test = std::abs(rec.integral_b) > opts.integral_tol;
            rec.consistent = rec.hyperbolic == integral_test;
            return rec;
        }
    }
    return std::nullopt;
}

} // namespace umb
