// This file is part of stepcert, a conservative validity checker for
// deforming finite elements. Distributed under the MIT license.
//
// Mesh-level step queries: the largest time step every element of a mesh
// survives. Elements are sorted so the ones most likely to constrain the
// answer run first, and each later element reuses the running minimum as an
// early-out cutoff. Sorting and pruning are heuristics only; the reported
// global bound never depends on them.

#pragma once

#include <memory>
#include <vector>

#include "stepcert/checker.hpp"

namespace stepcert {

// A batch of elements checked against one shared time step.
struct MeshQuery {
  std::vector<ElementSpec> elements;
  // Per-element search options; t_cutoff is combined with (not replaced by)
  // the running minimum when pruning is on.
  CheckOptions options;
  int workers = 1;
  // Give up on an element once its certified bound reaches the smallest
  // bound seen so far; its report stays conservative.
  bool prune = true;
  // Let workers read each other's running minima (a relaxed atomic). Only
  // prunes harder; the global bound and argmin are unaffected.
  bool share_cutoff = false;
};

struct ElementReport {
  long id = -1;
  DynamicVerdict verdict = DynamicVerdict::GaveUp;
  double t_lower = 0.0;
  std::optional<Witness> witness;
  std::vector<int> quad_seq;
  int depth = 0;
  // True when the search stopped because of the running minimum rather
  // than its own accuracy or depth limits.
  bool pruned = false;
};

struct MeshResult {
  // Every element is certified valid on [0, t_global]; 1 when the whole
  // mesh survives the step.
  double t_global = 1.0;
  // Id of the element that pinned t_global: the first, in processing
  // order, whose bound equals it. -1 when the whole mesh is valid.
  long argmin_id = -1;
  // One report per input element, in input order. Elements with a negative
  // id are reported under their input position instead.
  std::vector<ElementReport> reports;
};

// Checks every element and folds the per-element bounds into the mesh-wide
// step bound. Elements are processed in ascending order of the exact
// determinant value at the origin corner at t = 0 (ties by id), split into
// contiguous batches when workers > 1; batch minima merge at the end, so
// the parallel result matches the serial one.
// Throws on an empty query, and rethrows the checker's InvalidAtStart for
// the earliest affected element in processing order.
MeshResult max_valid_step_mesh(const MeshQuery& query,
                               MatrixCache& cache = default_matrix_cache());

}  // namespace stepcert
