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

#include <vector>

#include "surface.hpp"

namespace umb {

/// Locate umbilic points by scanning an n_u x n_v cell grid for cells where
/// both principal-line coefficients M and N straddle zero, then refining
/// each seed with damped Newton on (M, N) = 0. Converged points satisfy
/// |M| + |N| < tol; duplicates within 1e-6 chart distance are merged and
/// results are sorted by (u, v). Non-convergent seeds are dropped.
///
/// Throws ErrorKind::kConfig when the grid is coarser than 16x16, and
/// ErrorKind::kDomain when the umbilic locus is non-isolated (a totally
/// umbilic patch fires on a large fraction of cells).
std::vector<Eigen::Vector2d> find_umbilics(const SurfaceSpec& s, int n_u, int n_v,
                                           double tol = 1e-12);

/// The annihilation functional for a near-degenerate umbilic cluster inside
/// [center_u - radius, center_u + radius]: solves N(u, v(u)) = 0 for the
/// branch through (center_u, center_v), forms n(u) = M(u, v(u)), and
/// returns the critical value n(u*). Its sign separates the zero-umbilic
/// side of the family from the two-umbilic side; it vanishes where a fold
/// point sits. Throws ErrorKind::kDomain when n' has no zero in the window
/// or more than one.
double bif_functional_d123(const SurfaceSpec& s, double center_u, double center_v,
                           double radius);

} // namespace umb
