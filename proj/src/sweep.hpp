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

#include "flow.hpp"

namespace umb {

/// One point of a continued umbilic branch. b12 is the transition
/// functional -delta; it is NaN where the normalized jet has b ~ 0 and the
/// functional has no finite value.
struct BranchSample {
    double lambda = 0.0;
    Eigen::Vector2d point = Eigen::Vector2d::Zero();
    UmbilicClass cls;
    double b12 = 0.0;
    double delta = 0.0;
};

/// An umbilic branch of a one-parameter family: the solution curve of
/// M = N = 0 through a seed in (u, v, lambda), sampled at fixed
/// pseudo-arclength steps and ordered by traversal (lambda need not be
/// monotone: the branch may fold).
struct UmbilicBranch {
    std::vector<BranchSample> samples;
    /// lambda values where dlambda/ds changes sign along the branch.
    std::vector<double> fold_points;
    /// The continuation range; samples never leave [lambda_lo, lambda_hi].
    double lambda_lo = 0.0;
    double lambda_hi = 0.0;
    /// Newton stopped converging before the range or domain was exhausted
    /// and the branch was truncated.
    bool lost = false;
};

enum class EventKind {
    kD12Transition,
    kD123Fold,
    kCycleBirth,
    /// A sign change whose bisected root lies within 1e-6 of a range
    /// endpoint; too close to bracket, left unclassified.
    kBoundaryTruncated,
};
const char* event_kind_name(EventKind k);

/// Diagnostics attached to a localized event. b_before / b_after are the
/// governing functional sampled at lambda_star -/+ witness_offset: the
/// transition functional for D12 events, the annihilation functional for
/// folds. Umbilic counts are within count_radius of the event location
/// (folds only; -1 means not computed).
struct EventWitness {
    double b_before = 0.0;
    double b_after = 0.0;
    double db_dlambda = 0.0;
    int umbilics_before = -1;
    int umbilics_after = -1;
    bool flagged = false;
    std::string note;
};

struct BifurcationEvent {
    EventKind kind = EventKind::kD12Transition;
    double lambda_star = 0.0;
    Eigen::Vector2d location = Eigen::Vector2d::Zero();
    /// Labels on the lambda < lambda_star / lambda > lambda_star sides for
    /// transitions; the two merging tip labels (branch order) for folds.
    UmbilicLabel from = UmbilicLabel::kDegenerate;
    UmbilicLabel to = UmbilicLabel::kDegenerate;
    int branches_merged = 0;
    EventWitness witness;
};

struct SweepOptions {
    /// Cap on continuation steps per traversal direction.
    int max_steps = 20000;
    /// lambda offset used to sample the witness functionals and their
    /// derivative across an event.
    double witness_offset = 1e-3;
    /// find_umbilics grid used for fold-side umbilic counts.
    int umbilic_grid = 48;
    /// Counting / annihilation-functional window radius around the event
    /// location; 0 picks 0.3 * the smaller domain extent.
    double count_radius = 0.0;
    /// Loop certification: re-entry distance at the umbilic.
    double re_entry_tol = 1e-3;
    /// Trace budget for loop detection separatrices.
    double separatrix_length = 30.0;
    /// find_cycle seed grid for the bifurcated-side probes.
    int seed_grid = 4;
    /// Base flow options for separatrix tracing and cycle probes.
    FlowOptions flow;
};

/// Continue the umbilic branch of `family` through the seed across
/// [lambda_lo, lambda_hi] with pseudo-arclength step ds. The seed is
/// Newton-polished at lambda0 first and must converge to an umbilic
/// (ErrorKind::kConfig otherwise). Continuation runs in both directions
/// from the seed and passes through folds; it stops at the range ends
/// (landing a sample exactly on the boundary), at the domain boundary, or
/// when the corrector diverges (branch marked lost). Each sample carries
/// the classification of the umbilic at its parameter value.
UmbilicBranch continue_branch(const SurfaceSpec& family, const Eigen::Vector3d& seed,
                              double lambda_lo, double lambda_hi, double ds,
                              const SweepOptions& opts = {});

/// Localize codimension-one events along a continued branch.
///
/// Transitions: sign changes of b12 between consecutive samples are
/// bisected along the branch to |lambda - lambda_star| well under 1e-8 and
/// emitted as kD12Transition; candidates whose refined point sits on the
/// tangent stratum are skipped (those are found by the root-collision rule
/// instead: a - 2b crossing zero with c != 0, re-verified as case 2).
/// Folds: sign changes of det d(M,N)/d(u,v) are bisected to the critical
/// point of lambda(s), checked for second-order non-degeneracy, and
/// emitted as kD123Fold with umbilic counts on both sides. Every event is
/// re-verified by classification at lambda_star; mismatches and failed
/// side-checks set witness.flagged rather than raising. Events within
/// 1e-6 of the continuation range ends are emitted as kBoundaryTruncated.
/// Results are sorted by lambda_star.
std::vector<BifurcationEvent> detect_events(const UmbilicBranch& branch,
                                            const SurfaceSpec& family,
                                            const SweepOptions& opts = {});

struct CycleBirthProbe {
    double lambda = 0.0;
    bool found = false;
    CycleRecord record;
    /// One-sided Hausdorff distance from the cycle to the certified loop.
    double loop_distance = 0.0;
};

/// Loop-born cycle search for one foliation at one event.
struct CycleBirthResult {
    Foliation foliation = Foliation::kMin;
    bool loop_found = false;
    /// Certified loop polyline at lambda_star (umbilic to re-entry).
    std::vector<Eigen::Vector2d> loop;
    std::vector<CycleBirthProbe> probes;
    /// +1 when cycles appear at lambda > lambda_star, -1 below, 0 when no
    /// probe found one (or the sides disagree; see flagged).
    int side = 0;
    /// Nearest found probe re-run from a denser seed grid converged to the
    /// same cycle within 1e-6.
    bool unique = false;
    bool flagged = false;
    std::string note;
};

/// Detect a principal-cycle birth at a D12 transition or D123 fold. At
/// lambda_star the separatrices of the event umbilic are traced and a loop
/// is certified geometrically: the curve leaves the umbilic, returns
/// within re_entry_tol of it, and re-enters through a sector not bounded
/// by its own departure ray (transition events use the tangency-isolated
/// separatrix, folds the hyperbolic-sector boundaries). For each certified
/// loop, find_cycle is seeded over the loop's bounding box at
/// lambda_star +- each probe offset; the side carrying the cycles, the
/// cycle-to-loop distances, and multi-seed uniqueness are recorded.
/// Returns one entry per foliation; loop_found false on both means no
/// loop (not an error). Throws ErrorKind::kConfig when the event is not a
/// transition or fold.
std::vector<CycleBirthResult> detect_cycle_birth(const SurfaceSpec& family,
                                                 const BifurcationEvent& event,
                                                 const std::vector<double>& probe_offsets,
                                                 const SweepOptions& opts = {});

} // namespace umb
