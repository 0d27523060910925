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
#include <vector>

#include "classify.hpp"
#include "lie_cartan.hpp"

namespace umb {

enum class Foliation { kMin, kMax };
const char* foliation_name(Foliation f);

enum class CurveTermination {
    kDomainExit,
    kUmbilicHit,
    kClosed,
    kMaxLength,
    kStepFailure,
};
const char* termination_name(CurveTermination t);

enum class SeparatrixRole {
    /// Not a separatrix (plain integrated line).
    kNone,
    /// Separatrix of a generic Darbouxian umbilic.
    kGeneric,
    /// The lone tangency-isolated separatrix of a tangent-stratum umbilic:
    /// no other principal line reaching the point is tangent to it.
    kIsolated,
    /// Strong-manifold separatrix of the saddle-node; the parabolic sector
    /// carries a family of lines tangent to it.
    kNonIsolated,
    /// Boundary of a hyperbolic sector at a conic point of the lift.
    kHyperbolic,
    /// Escaping center-manifold branch of the transversal saddle-node.
    kCenter,
};
const char* separatrix_role_name(SeparatrixRole r);

struct FlowOptions {
    double initial_step = 1e-3;
    /// Also the output sampling density (chart arclength per recorded point).
    double max_step = 0.02;
    double min_step = 1e-14;
    double max_length = 50.0;
    /// Local error tolerance of the embedded pair, per step component.
    double tol = 1e-10;
    /// Blending weight of the fiber coordinate in the speed normalization;
    /// keeps steps finite where the planar speed vanishes over umbilics.
    double eta = 1e-3;
    /// Chart hand-over threshold on |slope| (hysteresis: the new slope is
    /// its reciprocal, well inside the other chart).
    double chart_switch = 2.0;
    double umbilic_tol = 1e-10;
    /// Radius around a listed umbilic treated as part of the singular
    /// locus: curves terminate (UmbilicHit) at hit_radius, quadrature and
    /// cycle seeding keep r_lift away.
    double r_lift = 1e-4;
    double hit_radius = 1e-5;
    /// Closure: chart distance and unoriented tangent alignment.
    double tol_close = 1e-7;
    double tangent_align = 1.0 - 1e-8;
    double closure_capture = 1e-3;
    /// Transversal half-width used by find_cycle when sampling the return
    /// map of a refined cycle.
    double return_halfwidth = 5e-3;
    /// Hyperbolicity thresholds: |pi' - 1| and |integral_b|.
    double pi_prime_tol = 1e-4;
    double integral_tol = 1e-6;
    /// Known umbilic positions (chart coordinates).
    std::vector<Eigen::Vector2d> umbilics;
};

struct PrincipalCurve {
    Foliation foliation = Foliation::kMin;
    std::vector<Eigen::Vector2d> points;
    /// Chart arclength at each point, from the first.
    std::vector<double> arclength;
    CurveTermination termination = CurveTermination::kMaxLength;
    /// Whether any segment was integrated on the lifted surface. True for
    /// every integrated curve here: integration always follows the lift.
    bool lifted = false;
    SeparatrixRole role = SeparatrixRole::kNone;
    /// Max |T| along the curve after projection, relative to the scale of
    /// the principal-line coefficients at the seed.
    double constraint_drift = 0.0;
};

/// Integrate the principal line of the given foliation from a non-umbilic
/// start. The integration state lives on the lifted surface T = 0 (slope
/// chart with hysteresis hand-over); sense picks the initial direction
/// along +-the principal direction. Closure is declared when the curve
/// re-enters tol_close of the start with matching unoriented tangent.
/// Throws ErrorKind::kDomain for an umbilic start.
PrincipalCurve integrate_line(const SurfaceSpec& s, const Eigen::Vector2d& start,
                              Foliation foliation, int sense, const FlowOptions& opts = {});

/// Separatrices of the umbilic at the given chart position: for each
/// saddle, saddle-node strong manifold, conic point, and escaping center
/// branch of the lifted field, seed 1e-5 along the eigen-direction and
/// integrate outward to max_len or domain exit. Curves are tagged with
/// foliation (by normal-curvature comparison along the projection) and
/// separatrix role. `step` overrides the initial integration step. Throws
/// ErrorKind::kDomain for degenerate umbilics.
std::vector<PrincipalCurve> trace_separatrices(const SurfaceSpec& s,
                                               const Eigen::Vector2d& umbilic, double step,
                                               double max_len, const FlowOptions& opts = {});

struct ReturnMapSample {
    double s = 0.0;
    double pi = 0.0;
};

struct ReturnMapData {
    Eigen::Vector2d base = Eigen::Vector2d::Zero();
    /// Unit chart direction of the transversal at the base point.
    Eigen::Vector2d transversal_dir = Eigen::Vector2d::Zero();
    /// Samples (s, pi(s)) of the first-return map, s in [-w, w].
    std::vector<ReturnMapSample> samples;
    /// Five-point central estimate of pi'(0).
    double pi_prime = 1.0;
};

/// First-return map of a closed principal curve on a transversal segment
/// of the orthogonal foliation through its base point, arclength
/// parametrized with s = 0 on the cycle. Nine samples across [-w, w].
/// Throws ErrorKind::kNumeric when a sample fails to return (NoReturn).
ReturnMapData return_map(const SurfaceSpec& s, const PrincipalCurve& cycle, double halfwidth,
                         const FlowOptions& opts = {});

struct HyperbolicityIntegrals {
    /// Circulation of dH / sqrt(H^2 - K); nonzero iff the cycle is
    /// hyperbolic.
    double integral_b = 0.0;
    /// Circulations of dk1 / (k2 - k1) and dk2 / (k2 - k1); their
    /// difference is the exact form d ln(k2 - k1), so they agree on a
    /// closed curve.
    double integral_a1 = 0.0;
    double integral_a2 = 0.0;
    /// Richardson error estimate of the quadrature.
    double quadrature_error = 0.0;
};

/// Stieltjes trapezoid quadrature of the hyperbolicity integrands along a
/// closed curve, Richardson-extrapolated against a half-resolution pass.
/// Throws ErrorKind::kDomain when the cycle passes within r_lift of an
/// umbilic (the integrands are singular there).
HyperbolicityIntegrals hyperbolicity_integrals(const SurfaceSpec& s, const PrincipalCurve& cycle,
                                               const FlowOptions& opts = {});

struct CycleRecord {
    PrincipalCurve curve;
    double integral_b = 0.0;
    double integral_a1 = 0.0;
    double integral_a2 = 0.0;
    double pi_prime = 1.0;
    bool hyperbolic = false;
    /// Whether the return-map test |pi' - 1| > pi_prime_tol and the
    /// integral test |integral_b| > integral_tol agree.
    bool consistent = true;
    double quadrature_error = 0.0;
};

/// Shoot principal lines from a grid of seeds over seed_region, detect a
/// first return to the section through each seed, refine the fixed point
/// of the return map by secant iteration, and certify the resulting cycle
/// (closure, integrals, return-map derivative). Seeds are scanned in row
/// order and the first success wins. Returns nullopt when no seed closes.
std::optional<CycleRecord> find_cycle(const SurfaceSpec& s, const Domain& seed_region,
                                      Foliation foliation, const FlowOptions& opts = {},
                                      int seed_grid = 5);

} // namespace umb
