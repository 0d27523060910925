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

#include <string>
#include <vector>

#include <json.hpp>

#include "sweep.hpp"

namespace umb {

inline constexpr const char* kToolVersion = "0.1.0";
inline constexpr const char* kSchemaVersion = "1.0.0";

enum class RunMode { kAnalyze, kPortrait, kSweep, kCycles };
const char* run_mode_name(RunMode m);

struct OutputOptions {
    /// File name of the JSON report, relative to the output directory.
    std::string report = "report.json";
    /// File name for rendered portraits; empty suppresses rendering. Sweep
    /// runs append the sample index before the extension.
    std::string svg;
    /// Wall-clock timings per stage. Off by default: reports are
    /// byte-identical across reruns only without them.
    bool emit_timings = false;
    /// Include full curve polylines in the report (the SVG always carries
    /// the geometry; reports carry summaries unless asked).
    bool emit_polylines = false;
};

/// A validated analysis request. Produced from JSON text by parse_config;
/// unknown fields, non-positive tolerances, and mode/field mismatches are
/// rejected there. All lengths and coordinates are in chart units.
struct AnalysisConfig {
    SurfaceSpec surface;
    RunMode mode = RunMode::kAnalyze;

    /// Umbilic scan resolution (cells per axis) and Newton tolerance.
    int grid = 64;
    double tol_umbilic = 1e-12;
    /// Integration options assembled from the tolerance block; the umbilic
    /// list is filled per run.
    FlowOptions flow;

    /// Portrait: regular principal lines seeded on a line_grid x line_grid
    /// lattice (0 disables), plus separatrices of every umbilic.
    int line_grid = 6;
    double separatrix_length = 30.0;

    /// Sweep: family parameter range [lambda_lo, lambda_hi] sampled at
    /// lambda_steps points for the portrait series; continuation runs over
    /// the whole range with arclength step ds. Empty branch_seeds means
    /// seeding from the umbilics found at the range midpoint (falling back
    /// to the endpoints when the midpoint has none).
    double lambda_lo = 0.0;
    double lambda_hi = 0.0;
    int lambda_steps = 0;
    double ds = 0.005;
    std::vector<Eigen::Vector3d> branch_seeds;
    /// When non-empty, probe each detected event for a cycle birth at
    /// these parameter offsets.
    std::vector<double> probe_offsets;
    SweepOptions sweep;

    /// Cycles: search region (defaults to the chart domain), seed lattice,
    /// and which foliations to search.
    Domain region;
    int seed_grid = 5;
    bool min_foliation = true;
    bool max_foliation = true;

    OutputOptions output;

    /// Normalized echo of the parsed configuration, embedded in the report.
    nlohmann::json echo;
};

/// Parse and validate a JSON configuration. Throws ErrorKind::kConfig for
/// structural problems (unknown fields, missing requirements, out-of-range
/// values) and ErrorKind::kSyntax for malformed expression text.
AnalysisConfig parse_config(const std::string& json_text);

/// A rendered file produced by a run, named relative to the output
/// directory chosen by the caller.
struct ReportArtifact {
    std::string name;
    std::string content;
};

struct RunResult {
    /// Serialized report document: UTF-8, two-space indent, keys sorted.
    /// Identical configurations produce byte-identical reports unless
    /// timings are enabled.
    std::string report_json;
    std::string report_name;
    std::vector<ReportArtifact> artifacts;
    /// Whether any stage failed; the report then carries error entries and
    /// the process exit code is 3. Configuration errors throw instead.
    bool compute_error = false;
};

/// Execute the configured analysis and assemble the report document.
/// Stage failures are recorded under "errors" and the run continues with
/// whatever later stages remain meaningful.
RunResult run(const AnalysisConfig& cfg);

/// An umbilic glyph for rendering: chart position and class label.
struct PortraitGlyph {
    double u = 0.0;
    double v = 0.0;
    std::string label;
};

/// Render a principal-curvature portrait as SVG 1.1. The viewBox equals
/// the chart domain (y flipped for display only; emitted coordinates are
/// chart values with 6 decimal places). Minimal-foliation curves are
/// solid, maximal dashed; separatrices are drawn at twice the stroke
/// width, cycles heavier still; umbilics are labeled circles. Curves on a
/// v-periodic chart are wrapped into the domain and split at the seam.
std::string render_portrait(const Domain& domain, std::optional<double> v_period,
                            const std::vector<PortraitGlyph>& umbilics,
                            const std::vector<PrincipalCurve>& curves,
                            const std::vector<PrincipalCurve>& cycles = {});

} // namespace umb
