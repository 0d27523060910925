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

#include "report.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <initializer_list>

#include "error.hpp"
#include "umbilics.hpp"

namespace umb {

using nlohmann::json;

const char* run_mode_name(RunMode m) {
    switch (m) {
    case RunMode::kAnalyze: return "analyze";
    case RunMode::kPortrait: return "portrait";
    case RunMode::kSweep: return "sweep";
    case RunMode::kCycles: return "cycles";
    }
    return "analyze";
}

namespace {

[[noreturn]] void bad_config(const std::string& message) {
    throw Error(ErrorKind::kConfig, message);
}

const json* find_field(const json& obj, const char* key) {
    auto it = obj.find(key);
    return it == obj.end() ? nullptr : &*it;
}

void check_keys(const json& obj, const std::string& prefix,
                std::initializer_list<const char*> allowed) {
    for (const auto& item : obj.items()) {
        bool known = false;
        for (const char* k : allowed) {
            if (item.key() == k) {
                known = true;
                break;
            }
        }
        if (!known)
            bad_config("unknown config field '" + (prefix.empty() ? item.key() : prefix + "." + item.key()) + "'");
    }
}

double need_number(const json& v, const std::string& name) {
    if (!v.is_number()) bad_config("config field '" + name + "' must be a number");
    return v.get<double>();
}

double need_positive(const json& v, const std::string& name) {
    double x = need_number(v, name);
    if (!(x > 0.0)) bad_config("config field '" + name + "' must be positive");
    return x;
}

long need_int(const json& v, const std::string& name, long lo, long hi) {
    if (!v.is_number_integer())
        bad_config("config field '" + name + "' must be an integer");
    long x = v.get<long>();
    if (x < lo || x > hi)
        bad_config("config field '" + name + "' must be in [" + std::to_string(lo) + ", " +
                   std::to_string(hi) + "]");
    return x;
}

std::string need_string(const json& v, const std::string& name) {
    if (!v.is_string()) bad_config("config field '" + name + "' must be a string");
    return v.get<std::string>();
}

bool need_bool(const json& v, const std::string& name) {
    if (!v.is_boolean()) bad_config("config field '" + name + "' must be a boolean");
    return v.get<bool>();
}

Domain need_rect(const json& v, const std::string& name) {
    if (!v.is_array() || v.size() != 4)
        bad_config("config field '" + name + "' must be an array [u_min, u_max, v_min, v_max]");
    Domain d;
    d.u_min = need_number(v[0], name);
    d.u_max = need_number(v[1], name);
    d.v_min = need_number(v[2], name);
    d.v_max = need_number(v[3], name);
    if (!(d.u_min < d.u_max) || !(d.v_min < d.v_max))
        bad_config("config field '" + name + "' must satisfy u_min < u_max and v_min < v_max");
    return d;
}

void parse_surface(const json& v, AnalysisConfig& cfg) {
    if (!v.is_object()) bad_config("config field 'surface' must be an object");
    check_keys(v, "surface", {"kind", "h", "x", "y", "z", "domain", "v_period", "lambda"});

    const json* kind = find_field(v, "kind");
    if (!kind) bad_config("config field 'surface.kind' is required");
    std::string kind_name = need_string(*kind, "surface.kind");

    auto expr_field = [&](const char* key, bool required) -> std::optional<ExprProgram> {
        const json* f = find_field(v, key);
        if (!f) {
            if (required)
                bad_config(std::string("config field 'surface.") + key + "' is required for kind '" +
                           kind_name + "'");
            return std::nullopt;
        }
        return ExprProgram(need_string(*f, std::string("surface.") + key));
    };

    if (kind_name == "monge") {
        cfg.surface.kind = SurfaceSpec::Kind::kMongeGraph;
        if (find_field(v, "x") || find_field(v, "y") || find_field(v, "z"))
            bad_config("config fields 'surface.x/y/z' are not allowed for kind 'monge'");
        cfg.surface.h = expr_field("h", true);
    } else if (kind_name == "parametric") {
        cfg.surface.kind = SurfaceSpec::Kind::kParametric;
        if (find_field(v, "h"))
            bad_config("config field 'surface.h' is not allowed for kind 'parametric'");
        cfg.surface.x = expr_field("x", true);
        cfg.surface.y = expr_field("y", true);
        cfg.surface.z = expr_field("z", true);
    } else {
        bad_config("config field 'surface.kind' must be 'monge' or 'parametric'");
    }

    const json* domain = find_field(v, "domain");
    if (!domain) bad_config("config field 'surface.domain' is required");
    cfg.surface.domain = need_rect(*domain, "surface.domain");

    if (const json* p = find_field(v, "v_period"))
        cfg.surface.v_period = need_positive(*p, "surface.v_period");
    if (const json* l = find_field(v, "lambda"))
        cfg.surface.lambda = need_number(*l, "surface.lambda");
}

json domain_json(const Domain& d) {
    return json::array({d.u_min, d.u_max, d.v_min, d.v_max});
}

json build_echo(const AnalysisConfig& cfg, const json& surface_src) {
    json echo;
    echo["mode"] = run_mode_name(cfg.mode);
    echo["surface"] = surface_src;
    if (!surface_src.contains("v_period")) echo["surface"]["v_period"] = nullptr;
    if (!surface_src.contains("lambda")) echo["surface"]["lambda"] = 0.0;
    echo["grid"] = cfg.grid;
    echo["tolerances"] = {{"umbilic", cfg.tol_umbilic},
                          {"flow", cfg.flow.tol},
                          {"close", cfg.flow.tol_close}};
    echo["line_grid"] = cfg.line_grid;
    echo["separatrix_length"] = cfg.separatrix_length;
    echo["max_length"] = cfg.flow.max_length;
    if (cfg.mode == RunMode::kSweep)
        echo["lambda_range"] = json::array({cfg.lambda_lo, cfg.lambda_hi, cfg.lambda_steps});
    else
        echo["lambda_range"] = nullptr;
    echo["ds"] = cfg.ds;
    json seeds = json::array();
    for (const auto& s : cfg.branch_seeds) seeds.push_back(json::array({s.x(), s.y(), s.z()}));
    echo["branch_seeds"] = seeds;
    echo["probe_offsets"] = cfg.probe_offsets;
    echo["region"] = domain_json(cfg.region);
    echo["seed_grid"] = cfg.seed_grid;
    echo["foliation"] = cfg.min_foliation && cfg.max_foliation ? "both"
                        : cfg.min_foliation                    ? "min"
                                                               : "max";
    echo["output"] = {{"report", cfg.output.report},
                      {"svg", cfg.output.svg},
                      {"emit_timings", cfg.output.emit_timings},
                      {"emit_polylines", cfg.output.emit_polylines}};
    return echo;
}

} // namespace

AnalysisConfig parse_config(const std::string& json_text) {
    json root;
    try {
        root = json::parse(json_text);
    } catch (const json::parse_error& e) {
        bad_config(std::string("config is not valid JSON: ") + e.what());
    }
    if (!root.is_object()) bad_config("config must be a JSON object");
    check_keys(root, "",
               {"mode", "surface", "grid", "tolerances", "line_grid", "separatrix_length",
                "max_length", "lambda_range", "ds", "branch_seeds", "probe_offsets", "region",
                "seed_grid", "foliation", "output"});

    AnalysisConfig cfg;

    const json* mode = find_field(root, "mode");
    if (!mode) bad_config("config field 'mode' is required");
    std::string mode_name = need_string(*mode, "mode");
    if (mode_name == "analyze")
        cfg.mode = RunMode::kAnalyze;
    else if (mode_name == "portrait")
        cfg.mode = RunMode::kPortrait;
    else if (mode_name == "sweep")
        cfg.mode = RunMode::kSweep;
    else if (mode_name == "cycles")
        cfg.mode = RunMode::kCycles;
    else
        bad_config("config field 'mode' must be one of analyze, portrait, sweep, cycles");

    const json* surface = find_field(root, "surface");
    if (!surface) bad_config("config field 'surface' is required");
    parse_surface(*surface, cfg);
    cfg.region = cfg.surface.domain;

    if (const json* g = find_field(root, "grid"))
        cfg.grid = static_cast<int>(need_int(*g, "grid", 16, 4096));

    if (const json* t = find_field(root, "tolerances")) {
        if (!t->is_object()) bad_config("config field 'tolerances' must be an object");
        check_keys(*t, "tolerances", {"umbilic", "flow", "close"});
        if (const json* x = find_field(*t, "umbilic"))
            cfg.tol_umbilic = need_positive(*x, "tolerances.umbilic");
        if (const json* x = find_field(*t, "flow"))
            cfg.flow.tol = need_positive(*x, "tolerances.flow");
        if (const json* x = find_field(*t, "close"))
            cfg.flow.tol_close = need_positive(*x, "tolerances.close");
    }

    if (const json* g = find_field(root, "line_grid"))
        cfg.line_grid = static_cast<int>(need_int(*g, "line_grid", 0, 64));
    if (const json* s = find_field(root, "separatrix_length"))
        cfg.separatrix_length = need_positive(*s, "separatrix_length");
    if (const json* m = find_field(root, "max_length"))
        cfg.flow.max_length = need_positive(*m, "max_length");

    if (const json* r = find_field(root, "lambda_range")) {
        if (!r->is_array() || r->size() != 3)
            bad_config("config field 'lambda_range' must be an array [lo, hi, samples]");
        cfg.lambda_lo = need_number((*r)[0], "lambda_range");
        cfg.lambda_hi = need_number((*r)[1], "lambda_range");
        cfg.lambda_steps = static_cast<int>(need_int((*r)[2], "lambda_range", 2, 10000));
        if (!(cfg.lambda_lo < cfg.lambda_hi))
            bad_config("config field 'lambda_range' must have lo < hi");
    } else if (cfg.mode == RunMode::kSweep) {
        bad_config("config field 'lambda_range' is required in sweep mode");
    }

    if (const json* d = find_field(root, "ds")) cfg.ds = need_positive(*d, "ds");

    if (const json* b = find_field(root, "branch_seeds")) {
        if (!b->is_array()) bad_config("config field 'branch_seeds' must be an array");
        for (const json& s : *b) {
            if (!s.is_array() || s.size() != 3)
                bad_config("config field 'branch_seeds' entries must be [u, v, lambda]");
            cfg.branch_seeds.emplace_back(need_number(s[0], "branch_seeds"),
                                          need_number(s[1], "branch_seeds"),
                                          need_number(s[2], "branch_seeds"));
        }
    }

    if (const json* p = find_field(root, "probe_offsets")) {
        if (!p->is_array()) bad_config("config field 'probe_offsets' must be an array");
        for (const json& x : *p) cfg.probe_offsets.push_back(need_positive(x, "probe_offsets"));
    }

    if (const json* r = find_field(root, "region")) cfg.region = need_rect(*r, "region");
    if (const json* s = find_field(root, "seed_grid"))
        cfg.seed_grid = static_cast<int>(need_int(*s, "seed_grid", 2, 64));

    if (const json* f = find_field(root, "foliation")) {
        std::string name = need_string(*f, "foliation");
        if (name == "min") {
            cfg.max_foliation = false;
        } else if (name == "max") {
            cfg.min_foliation = false;
        } else if (name != "both") {
            bad_config("config field 'foliation' must be one of min, max, both");
        }
    }

    if (const json* o = find_field(root, "output")) {
        if (!o->is_object()) bad_config("config field 'output' must be an object");
        check_keys(*o, "output", {"report", "svg", "emit_timings", "emit_polylines"});
        if (const json* x = find_field(*o, "report")) {
            cfg.output.report = need_string(*x, "output.report");
            if (cfg.output.report.empty()) bad_config("config field 'output.report' must be non-empty");
        }
        if (const json* x = find_field(*o, "svg")) cfg.output.svg = need_string(*x, "output.svg");
        if (const json* x = find_field(*o, "emit_timings"))
            cfg.output.emit_timings = need_bool(*x, "output.emit_timings");
        if (const json* x = find_field(*o, "emit_polylines"))
            cfg.output.emit_polylines = need_bool(*x, "output.emit_polylines");
    }

    cfg.echo = build_echo(cfg, *surface);
    return cfg;
}

namespace {

json finite_or_null(double x) { return std::isfinite(x) ? json(x) : json(); }

json point_json(const Eigen::Vector2d& p) { return json::array({p.x(), p.y()}); }

json polyline_json(const std::vector<Eigen::Vector2d>& pts) {
    json arr = json::array();
    for (const auto& p : pts) arr.push_back(point_json(p));
    return arr;
}

void push_error(std::vector<json>& errors, const char* stage, const std::string& message) {
    errors.push_back(json{{"stage", stage}, {"message", message}});
}

/// Umbilic positions plus their classification records. Classification
/// failures degrade to a Degenerate record with null invariants and an
/// error entry; the position is still reported.
struct UmbilicTable {
    std::vector<Eigen::Vector2d> points;
    std::vector<std::string> labels;
    json records = json::array();
};

UmbilicTable analyze_umbilics(const SurfaceSpec& spec, const AnalysisConfig& cfg,
                              std::vector<json>& errors) {
    UmbilicTable table;
    try {
        table.points = find_umbilics(spec, cfg.grid, cfg.grid, cfg.tol_umbilic);
    } catch (const Error& e) {
        push_error(errors, "umbilics", e.what());
        return table;
    }
    for (const auto& p : table.points) {
        json rec;
        rec["u"] = p.x();
        rec["v"] = p.y();
        try {
            NormalizedJet jet = monge_normal_form(spec, p.x(), p.y());
            UmbilicClass cls = classify(jet);
            rec["label"] = label_name(cls.label);
            rec["delta"] = finite_or_null(cls.delta);
            rec["chi"] = finite_or_null(cls.chi);
            rec["curvature"] = finite_or_null(jet.k);
            rec["transversal"] = cls.transversal;
            rec["tangent_stratum"] = cls.tangent_stratum;
        } catch (const Error& e) {
            push_error(errors, "classify", e.what());
            rec["label"] = label_name(UmbilicLabel::kDegenerate);
            rec["delta"] = nullptr;
            rec["chi"] = nullptr;
            rec["curvature"] = nullptr;
            rec["transversal"] = false;
            rec["tangent_stratum"] = false;
        }
        table.labels.push_back(rec["label"].get<std::string>());
        table.records.push_back(std::move(rec));
    }
    return table;
}

json curve_record(const PrincipalCurve& c, const char* kind, int umbilic_index,
                  bool emit_polyline) {
    json rec;
    rec["foliation"] = foliation_name(c.foliation);
    rec["kind"] = kind;
    rec["role"] = separatrix_role_name(c.role);
    rec["termination"] = termination_name(c.termination);
    rec["points"] = c.points.size();
    rec["arclength"] = c.arclength.empty() ? 0.0 : c.arclength.back();
    rec["start"] = c.points.empty() ? json() : point_json(c.points.front());
    rec["end"] = c.points.empty() ? json() : point_json(c.points.back());
    rec["constraint_drift"] = finite_or_null(c.constraint_drift);
    rec["umbilic"] = umbilic_index < 0 ? json() : json(umbilic_index);
    if (emit_polyline) rec["polyline"] = polyline_json(c.points);
    return rec;
}

json cycle_json(const CycleRecord& r, bool emit_polyline) {
    json rec;
    rec["foliation"] = foliation_name(r.curve.foliation);
    rec["base"] = r.curve.points.empty() ? json() : point_json(r.curve.points.front());
    rec["arclength"] = r.curve.arclength.empty() ? 0.0 : r.curve.arclength.back();
    rec["points"] = r.curve.points.size();
    rec["integral_b"] = finite_or_null(r.integral_b);
    rec["integral_a1"] = finite_or_null(r.integral_a1);
    rec["integral_a2"] = finite_or_null(r.integral_a2);
    rec["pi_prime"] = finite_or_null(r.pi_prime);
    rec["hyperbolic"] = r.hyperbolic;
    rec["consistent"] = r.consistent;
    rec["quadrature_error"] = finite_or_null(r.quadrature_error);
    rec["constraint_drift"] = finite_or_null(r.curve.constraint_drift);
    if (emit_polyline) rec["polyline"] = polyline_json(r.curve.points);
    return rec;
}

/// Merge the two integration senses of one seed into a single polyline
/// (reversed negative half, then the positive half). A closed positive
/// half stands alone.
PrincipalCurve merge_senses(const PrincipalCurve& plus, const PrincipalCurve& minus) {
    if (plus.termination == CurveTermination::kClosed || minus.points.size() < 2) return plus;
    PrincipalCurve out;
    out.foliation = plus.foliation;
    out.lifted = plus.lifted || minus.lifted;
    out.role = SeparatrixRole::kNone;
    out.termination = plus.termination;
    out.constraint_drift = std::max(plus.constraint_drift, minus.constraint_drift);
    double minus_len = minus.arclength.empty() ? 0.0 : minus.arclength.back();
    for (size_t i = minus.points.size(); i-- > 1;) {
        out.points.push_back(minus.points[i]);
        out.arclength.push_back(minus_len - minus.arclength[i]);
    }
    for (size_t i = 0; i < plus.points.size(); ++i) {
        out.points.push_back(plus.points[i]);
        out.arclength.push_back(minus_len + plus.arclength[i]);
    }
    return out;
}

/// Regular principal lines on an interior lattice, both foliations, the
/// two senses of each seed merged. Seeds too close to an umbilic are
/// skipped (separatrices cover those neighborhoods).
std::vector<PrincipalCurve> grid_lines(const SurfaceSpec& spec, const AnalysisConfig& cfg,
                                       const std::vector<Eigen::Vector2d>& umbilics,
                                       std::vector<json>& errors) {
    std::vector<PrincipalCurve> curves;
    if (cfg.line_grid <= 0) return curves;
    FlowOptions fopts = cfg.flow;
    fopts.umbilics = umbilics;
    const Domain& d = spec.domain;
    double skip = 0.03 * std::min(d.width(), d.height());
    for (int i = 1; i <= cfg.line_grid; ++i) {
        for (int j = 1; j <= cfg.line_grid; ++j) {
            Eigen::Vector2d seed(d.u_min + d.width() * i / (cfg.line_grid + 1),
                                 d.v_min + d.height() * j / (cfg.line_grid + 1));
            bool near = false;
            for (const auto& q : umbilics)
                if ((q - seed).norm() < skip) near = true;
            if (near) continue;
            for (Foliation fol : {Foliation::kMin, Foliation::kMax}) {
                try {
                    PrincipalCurve plus = integrate_line(spec, seed, fol, +1, fopts);
                    PrincipalCurve minus = integrate_line(spec, seed, fol, -1, fopts);
                    curves.push_back(merge_senses(plus, minus));
                } catch (const Error& e) {
                    push_error(errors, "lines", e.what());
                }
            }
        }
    }
    return curves;
}

struct PortraitData {
    std::vector<PrincipalCurve> lines;
    std::vector<PrincipalCurve> separatrices;
    /// Owning umbilic index of each separatrix.
    std::vector<int> separatrix_umbilic;
};

PortraitData portrait_curves(const SurfaceSpec& spec, const AnalysisConfig& cfg,
                             const std::vector<Eigen::Vector2d>& umbilics,
                             std::vector<json>& errors) {
    PortraitData data;
    data.lines = grid_lines(spec, cfg, umbilics, errors);
    FlowOptions fopts = cfg.flow;
    fopts.umbilics = umbilics;
    for (size_t i = 0; i < umbilics.size(); ++i) {
        try {
            std::vector<PrincipalCurve> seps = trace_separatrices(
                spec, umbilics[i], cfg.flow.initial_step, cfg.separatrix_length, fopts);
            for (auto& c : seps) {
                data.separatrices.push_back(std::move(c));
                data.separatrix_umbilic.push_back(static_cast<int>(i));
            }
        } catch (const Error& e) {
            push_error(errors, "separatrices", e.what());
        }
    }
    return data;
}

std::vector<PortraitGlyph> make_glyphs(const UmbilicTable& table) {
    std::vector<PortraitGlyph> glyphs;
    for (size_t i = 0; i < table.points.size(); ++i)
        glyphs.push_back({table.points[i].x(), table.points[i].y(), table.labels[i]});
    return glyphs;
}

std::vector<PrincipalCurve> concat_curves(const PortraitData& data) {
    std::vector<PrincipalCurve> all = data.lines;
    all.insert(all.end(), data.separatrices.begin(), data.separatrices.end());
    return all;
}

/// Insert "_<index>" before the file extension (or append when there is
/// none): sweep series artifacts are one file per parameter sample.
std::string indexed_name(const std::string& name, int index) {
    std::string suffix = "_" + std::to_string(index);
    size_t dot = name.rfind('.');
    if (dot == std::string::npos || dot == 0) return name + suffix;
    return name.substr(0, dot) + suffix + name.substr(dot);
}

/// True when the seed point lies on the sampled branch (within a small
/// multiple of the sampling step): such a seed would retrace it.
bool branch_covers(const UmbilicBranch& branch, const Eigen::Vector3d& seed, double ds) {
    double tol = 0.05 * ds;
    for (size_t i = 0; i + 1 < branch.samples.size(); ++i) {
        Eigen::Vector3d a(branch.samples[i].point.x(), branch.samples[i].point.y(),
                          branch.samples[i].lambda);
        Eigen::Vector3d b(branch.samples[i + 1].point.x(), branch.samples[i + 1].point.y(),
                          branch.samples[i + 1].lambda);
        Eigen::Vector3d ab = b - a;
        double len2 = ab.squaredNorm();
        double t = len2 > 0.0 ? std::clamp((seed - a).dot(ab) / len2, 0.0, 1.0) : 0.0;
        if ((seed - (a + t * ab)).norm() < tol) return true;
    }
    return false;
}

json branch_json(const UmbilicBranch& branch, const Eigen::Vector3d& seed) {
    json rec;
    rec["seed"] = json::array({seed.x(), seed.y(), seed.z()});
    rec["lambda_lo"] = branch.lambda_lo;
    rec["lambda_hi"] = branch.lambda_hi;
    rec["lost"] = branch.lost;
    rec["fold_points"] = branch.fold_points;
    json samples = json::array();
    for (const auto& s : branch.samples) {
        samples.push_back(json{{"lambda", s.lambda},
                               {"u", s.point.x()},
                               {"v", s.point.y()},
                               {"label", label_name(s.cls.label)},
                               {"delta", finite_or_null(s.delta)},
                               {"b12", finite_or_null(s.b12)}});
    }
    rec["samples"] = std::move(samples);
    return rec;
}

json event_json(const BifurcationEvent& ev, int branch_index) {
    json rec;
    rec["branch"] = branch_index;
    rec["kind"] = event_kind_name(ev.kind);
    rec["lambda_star"] = ev.lambda_star;
    rec["location"] = point_json(ev.location);
    rec["from"] = label_name(ev.from);
    rec["to"] = label_name(ev.to);
    rec["branches_merged"] = ev.branches_merged;
    rec["witness"] = json{{"b_before", finite_or_null(ev.witness.b_before)},
                          {"b_after", finite_or_null(ev.witness.b_after)},
                          {"db_dlambda", finite_or_null(ev.witness.db_dlambda)},
                          {"umbilics_before", ev.witness.umbilics_before < 0
                                                  ? json()
                                                  : json(ev.witness.umbilics_before)},
                          {"umbilics_after", ev.witness.umbilics_after < 0
                                                 ? json()
                                                 : json(ev.witness.umbilics_after)},
                          {"flagged", ev.witness.flagged},
                          {"note", ev.witness.note}};
    return rec;
}

json cycle_birth_json(const CycleBirthResult& r, int event_index) {
    json rec;
    rec["event"] = event_index;
    rec["foliation"] = foliation_name(r.foliation);
    rec["loop_found"] = r.loop_found;
    rec["side"] = r.side;
    rec["unique"] = r.unique;
    rec["flagged"] = r.flagged;
    rec["note"] = r.note;
    json probes = json::array();
    for (const auto& p : r.probes) {
        probes.push_back(json{{"lambda", p.lambda},
                              {"found", p.found},
                              {"loop_distance", finite_or_null(p.loop_distance)}});
    }
    rec["probes"] = std::move(probes);
    return rec;
}

double elapsed_ms(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0)
        .count();
}

} // namespace

RunResult run(const AnalysisConfig& cfg) {
    auto t_total = std::chrono::steady_clock::now();
    json doc;
    doc["schema_version"] = kSchemaVersion;
    doc["tool"] = json{{"name", "umbilic"}, {"version", kToolVersion}};
    doc["config"] = cfg.echo;
    doc["umbilics"] = json::array();
    doc["curves"] = json::array();
    doc["cycles"] = json::array();
    doc["branches"] = json::array();
    doc["events"] = json::array();
    doc["cycle_births"] = json::array();

    std::vector<json> errors;
    json timings;
    RunResult result;
    SurfaceSpec spec = cfg.surface;
    bool polylines = cfg.output.emit_polylines;

    auto t_stage = std::chrono::steady_clock::now();
    UmbilicTable table = analyze_umbilics(spec, cfg, errors);
    doc["umbilics"] = table.records;
    timings["umbilics"] = elapsed_ms(t_stage);

    if (cfg.mode == RunMode::kPortrait || cfg.mode == RunMode::kCycles) {
        t_stage = std::chrono::steady_clock::now();
        PortraitData data = portrait_curves(spec, cfg, table.points, errors);
        for (const auto& c : data.lines) doc["curves"].push_back(curve_record(c, "line", -1, polylines));
        for (size_t i = 0; i < data.separatrices.size(); ++i)
            doc["curves"].push_back(curve_record(data.separatrices[i], "separatrix",
                                                 data.separatrix_umbilic[i], polylines));
        timings["curves"] = elapsed_ms(t_stage);

        std::vector<PrincipalCurve> cycle_curves;
        if (cfg.mode == RunMode::kCycles) {
            t_stage = std::chrono::steady_clock::now();
            FlowOptions fopts = cfg.flow;
            fopts.umbilics = table.points;
            std::vector<Foliation> wanted;
            if (cfg.min_foliation) wanted.push_back(Foliation::kMin);
            if (cfg.max_foliation) wanted.push_back(Foliation::kMax);
            for (Foliation fol : wanted) {
                try {
                    std::optional<CycleRecord> rec =
                        find_cycle(spec, cfg.region, fol, fopts, cfg.seed_grid);
                    if (rec) {
                        doc["cycles"].push_back(cycle_json(*rec, polylines));
                        cycle_curves.push_back(rec->curve);
                    }
                } catch (const Error& e) {
                    push_error(errors, "cycles", e.what());
                }
            }
            timings["cycles"] = elapsed_ms(t_stage);
        }

        if (!cfg.output.svg.empty()) {
            t_stage = std::chrono::steady_clock::now();
            result.artifacts.push_back(
                {cfg.output.svg, render_portrait(spec.domain, spec.v_period, make_glyphs(table),
                                                 concat_curves(data), cycle_curves)});
            timings["render"] = elapsed_ms(t_stage);
        }
    }

    if (cfg.mode == RunMode::kSweep) {
        t_stage = std::chrono::steady_clock::now();
        SweepOptions sopts = cfg.sweep;
        sopts.flow = cfg.flow;
        sopts.umbilic_grid = cfg.grid;
        sopts.seed_grid = cfg.seed_grid;
        sopts.separatrix_length = cfg.separatrix_length;

        std::vector<Eigen::Vector3d> seeds = cfg.branch_seeds;
        if (seeds.empty()) {
            double mid = 0.5 * (cfg.lambda_lo + cfg.lambda_hi);
            for (double cand : {mid, cfg.lambda_lo, cfg.lambda_hi}) {
                SurfaceSpec probe = spec;
                probe.lambda = cand;
                try {
                    for (const auto& p : find_umbilics(probe, cfg.grid, cfg.grid, cfg.tol_umbilic))
                        seeds.emplace_back(p.x(), p.y(), cand);
                } catch (const Error&) {
                }
                if (!seeds.empty()) break;
            }
            if (seeds.empty())
                push_error(errors, "sweep", "no umbilics found to seed the continuation");
        }

        std::vector<UmbilicBranch> branches;
        std::vector<BifurcationEvent> all_events;
        std::vector<int> event_branch;
        for (const auto& seed : seeds) {
            bool covered = false;
            for (const auto& b : branches)
                if (branch_covers(b, seed, cfg.ds)) covered = true;
            if (covered) continue;
            try {
                UmbilicBranch branch =
                    continue_branch(spec, seed, cfg.lambda_lo, cfg.lambda_hi, cfg.ds, sopts);
                doc["branches"].push_back(branch_json(branch, seed));
                int branch_index = static_cast<int>(branches.size());
                branches.push_back(std::move(branch));
                try {
                    for (auto& ev : detect_events(branches.back(), spec, sopts)) {
                        doc["events"].push_back(event_json(ev, branch_index));
                        all_events.push_back(std::move(ev));
                        event_branch.push_back(branch_index);
                    }
                } catch (const Error& e) {
                    push_error(errors, "events", e.what());
                }
            } catch (const Error& e) {
                push_error(errors, "sweep", e.what());
            }
        }
        timings["sweep"] = elapsed_ms(t_stage);

        if (!cfg.probe_offsets.empty()) {
            t_stage = std::chrono::steady_clock::now();
            for (size_t i = 0; i < all_events.size(); ++i) {
                if (all_events[i].kind != EventKind::kD12Transition &&
                    all_events[i].kind != EventKind::kD123Fold)
                    continue;
                try {
                    for (const auto& r :
                         detect_cycle_birth(spec, all_events[i], cfg.probe_offsets, sopts))
                        doc["cycle_births"].push_back(cycle_birth_json(r, static_cast<int>(i)));
                } catch (const Error& e) {
                    push_error(errors, "cycle_birth", e.what());
                }
            }
            timings["cycle_birth"] = elapsed_ms(t_stage);
        }

        if (!cfg.output.svg.empty()) {
            t_stage = std::chrono::steady_clock::now();
            for (int i = 0; i < cfg.lambda_steps; ++i) {
                SurfaceSpec sample = spec;
                sample.lambda = cfg.lambda_lo + (cfg.lambda_hi - cfg.lambda_lo) * i /
                                                    (cfg.lambda_steps - 1);
                UmbilicTable sample_table = analyze_umbilics(sample, cfg, errors);
                PortraitData data = portrait_curves(sample, cfg, sample_table.points, errors);
                result.artifacts.push_back(
                    {indexed_name(cfg.output.svg, i),
                     render_portrait(sample.domain, sample.v_period, make_glyphs(sample_table),
                                     concat_curves(data))});
            }
            timings["render"] = elapsed_ms(t_stage);
        }
    }

    doc["errors"] = errors;
    if (cfg.output.emit_timings) {
        timings["total"] = elapsed_ms(t_total);
        doc["timings"] = timings;
    }

    result.report_json = doc.dump(2) + "\n";
    result.report_name = cfg.output.report;
    result.compute_error = !errors.empty();
    return result;
}

namespace {

std::string fmt6(double x) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.6f", x);
    return buf;
}

struct CurveStyle {
    std::string classes;
    std::string stroke;
    double width = 1.0;
    bool dashed = false;
};

void append_polyline(std::string& svg, const std::vector<Eigen::Vector2d>& pts, size_t lo,
                     size_t hi, const CurveStyle& style, double sw) {
    if (hi - lo < 2) return;
    svg += "  <polyline class=\"" + style.classes + "\" points=\"";
    for (size_t i = lo; i < hi; ++i) {
        if (i > lo) svg += ' ';
        svg += fmt6(pts[i].x()) + "," + fmt6(pts[i].y());
    }
    svg += "\" fill=\"none\" stroke=\"" + style.stroke + "\" stroke-width=\"" +
           fmt6(style.width * sw) + "\"";
    if (style.dashed)
        svg += " stroke-dasharray=\"" + fmt6(4.0 * sw) + " " + fmt6(3.0 * sw) + "\"";
    svg += "/>\n";
}

/// Draw one curve, wrapping v into the domain on periodic charts and
/// splitting the polyline at the seam.
void append_curve(std::string& svg, const Domain& domain, std::optional<double> v_period,
                  const PrincipalCurve& curve, const CurveStyle& style, double sw) {
    if (curve.points.size() < 2) return;
    if (!v_period) {
        append_polyline(svg, curve.points, 0, curve.points.size(), style, sw);
        return;
    }
    double period = *v_period;
    std::vector<Eigen::Vector2d> wrapped;
    wrapped.reserve(curve.points.size());
    for (const auto& p : curve.points) {
        double v = std::fmod(p.y() - domain.v_min, period);
        if (v < 0.0) v += period;
        wrapped.emplace_back(p.x(), domain.v_min + v);
    }
    size_t lo = 0;
    for (size_t i = 1; i < wrapped.size(); ++i) {
        if (std::abs(wrapped[i].y() - wrapped[i - 1].y()) > 0.5 * period) {
            append_polyline(svg, wrapped, lo, i, style, sw);
            lo = i;
        }
    }
    append_polyline(svg, wrapped, lo, wrapped.size(), style, sw);
}

CurveStyle style_for(const PrincipalCurve& curve, const char* kind, double width) {
    CurveStyle style;
    bool minimal = curve.foliation == Foliation::kMin;
    style.classes = std::string(foliation_name(curve.foliation)) + " " + kind;
    style.stroke = minimal ? "#20558a" : "#a63a2e";
    style.width = width;
    style.dashed = !minimal;
    return style;
}

} // namespace

std::string render_portrait(const Domain& domain, std::optional<double> v_period,
                            const std::vector<PortraitGlyph>& umbilics,
                            const std::vector<PrincipalCurve>& curves,
                            const std::vector<PrincipalCurve>& cycles) {
    double w = domain.width();
    double h = domain.height();
    double sw = std::max(w, h) / 400.0;
    int px_w = 640;
    int px_h = std::max(1, static_cast<int>(std::lround(640.0 * h / w)));

    std::string svg;
    svg += "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" viewBox=\"" +
           fmt6(domain.u_min) + " " + fmt6(domain.v_min) + " " + fmt6(w) + " " + fmt6(h) +
           "\" width=\"" + std::to_string(px_w) + "\" height=\"" + std::to_string(px_h) + "\">\n";
    svg += " <g transform=\"matrix(1 0 0 -1 0 " + fmt6(domain.v_min + domain.v_max) +
           ")\" stroke-linecap=\"round\" stroke-linejoin=\"round\">\n";
    svg += "  <rect x=\"" + fmt6(domain.u_min) + "\" y=\"" + fmt6(domain.v_min) + "\" width=\"" +
           fmt6(w) + "\" height=\"" + fmt6(h) +
           "\" fill=\"none\" stroke=\"#808080\" stroke-width=\"" + fmt6(0.5 * sw) + "\"/>\n";

    for (const auto& c : curves) {
        const char* kind = c.role == SeparatrixRole::kNone ? "line" : "separatrix";
        double width = c.role == SeparatrixRole::kNone ? 1.0 : 2.0;
        append_curve(svg, domain, v_period, c, style_for(c, kind, width), sw);
    }
    for (const auto& c : cycles) {
        CurveStyle style = style_for(c, "cycle", 2.5);
        style.stroke = "#1d7a33";
        append_curve(svg, domain, v_period, c, style, sw);
    }

    for (const auto& g : umbilics) {
        svg += "  <circle cx=\"" + fmt6(g.u) + "\" cy=\"" + fmt6(g.v) + "\" r=\"" +
               fmt6(2.5 * sw) + "\" fill=\"#1c1c1c\" stroke=\"#ffffff\" stroke-width=\"" +
               fmt6(0.5 * sw) + "\"/>\n";
        svg += "  <text x=\"" + fmt6(g.u + 3.5 * sw) + "\" y=\"" + fmt6(-(g.v + 3.5 * sw)) +
               "\" transform=\"scale(1,-1)\" font-family=\"sans-serif\" font-size=\"" +
               fmt6(10.0 * sw) + "\" fill=\"#1c1c1c\">" + g.label + "</text>\n";
    }

    svg += " </g>\n</svg>\n";
    return svg;
}

} // namespace umb
