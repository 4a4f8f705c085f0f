// This file is part of stepcert, a conservative validity checker for
// deforming finite elements. Distributed under the MIT license.
//
// Persistence and memoization for transform sets.
//
// Building a transform set is pure but not cheap (exact rational inverses of
// collocation factors), so batch runs precompute them once per (class,
// order, dynamic) key. The cache file is a line-oriented text format holding
// only the rational factors; interval mirrors and identity flags are derived
// on load. A format fingerprint plus a whole-payload checksum guard against
// version skew and truncation; any mismatch raises CorruptCache rather than
// silently rebuilding, so misconfigured deployments are visible.

#pragma once

#include <map>
#include <memory>
#include <mutex>
#include <shared_mutex>
#include <string>
#include <vector>

#include "stepcert/transforms.hpp"

namespace stepcert {

// Writes the sets to `path` (atomically: temp file + rename). IoFailure on
// filesystem trouble.
void cache_save(const std::string& path,
                const std::vector<TransformSet>& sets);

// Reads a cache file. CorruptCache on header/checksum/content mismatch,
// IoFailure if the file cannot be read.
std::vector<TransformSet> cache_load(const std::string& path);

// Thread-safe registry of transform sets. get() builds missing entries on
// demand with single-flight (concurrent requests for one key wait for the
// first builder instead of duplicating work).
class MatrixCache {
public:
  MatrixCache();

  // Injectable builder (tests count invocations); defaults to
  // build_transform.
  using Builder = TransformSet (*)(ElementClass, int, bool);
  explicit MatrixCache(Builder builder);

  // Loads every set from the file into the registry.
  void preload(const std::string& path);

  // Returns the transform set for the key, building it if needed.
  std::shared_ptr<const TransformSet> get(ElementClass cls, int p,
                                          bool dynamic);

  // Returns the set only if already resident; throws CacheMiss otherwise.
  std::shared_ptr<const TransformSet> get_resident(ElementClass cls, int p,
                                                   bool dynamic) const;

  // Snapshot of every resident set (for cache_save from the CLI).
  std::vector<TransformSet> snapshot() const;

private:
  struct Key {
    ElementClass cls;
    int order;
    bool dynamic;
    auto operator<=>(const Key&) const = default;
  };
  struct Entry {
    std::shared_ptr<const TransformSet> ready;
    std::shared_ptr<std::once_flag> building;
  };

  Builder builder_;
  mutable std::shared_mutex mu_;
  std::map<Key, Entry> entries_;
};

}  // namespace stepcert
