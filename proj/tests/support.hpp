#pragma once

// Shared, lazily computed fixtures; atlases and surveys are expensive enough to reuse.

#include <map>
#include <mutex>
#include <string>

#include "lorenzlab/foliation.hpp"
#include "lorenzlab/search.hpp"

namespace test_support {

inline const lorenzlab::FoliationAtlas& atlas(const lorenzlab::SurfaceModel& m) {
  static std::map<std::string, lorenzlab::FoliationAtlas> cache;
  static std::mutex mutex;
  std::lock_guard lock(mutex);
  auto it = cache.find(m.name());
  if (it == cache.end()) it = cache.emplace(m.name(), lorenzlab::build_atlas(m)).first;
  return it->second;
}

// Default survey over the default atlas.
inline const lorenzlab::SurveyResult& survey(const lorenzlab::SurfaceModel& m) {
  static std::map<std::string, lorenzlab::SurveyResult> cache;
  static std::mutex mutex;
  const auto& a = atlas(m);
  std::lock_guard lock(mutex);
  auto it = cache.find(m.name());
  if (it == cache.end()) it = cache.emplace(m.name(), lorenzlab::survey(m, a)).first;
  return it->second;
}

}  // namespace test_support
