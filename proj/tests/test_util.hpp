#pragma once

#include <cstdlib>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "wdw/temporal.hpp"

namespace testutil {

inline std::string fixture_dir() {
  const char* env = std::getenv("WDW_FIXTURES");
  return env ? env : "fixtures";
}

inline std::string fixture_path(const std::string& rel) { return fixture_dir() + "/" + rel; }

// Grain-set oracle over bounded domains: the set of covered ticks.
inline std::set<std::int64_t> grains(const wdw::temporal::TemporalDomain& d) {
  std::set<std::int64_t> out;
  for (const auto& iv : d.intervals()) {
    REQUIRE(!iv.open_ended());
    for (std::int64_t t = iv.start.ticks; t <= iv.end->ticks; ++t) out.insert(t);
  }
  return out;
}

inline std::set<std::int64_t> grains_of(const std::vector<wdw::temporal::Interval>& ivs) {
  std::set<std::int64_t> out;
  for (const auto& iv : ivs)
    for (std::int64_t t = iv.start.ticks; t <= iv.end->ticks; ++t) out.insert(t);
  return out;
}

inline wdw::temporal::Interval iv(std::int64_t a, std::int64_t b,
                                  wdw::temporal::Unit u = wdw::temporal::Unit::Jour) {
  return wdw::temporal::make_interval({u, a}, {u, b});
}

inline wdw::temporal::TemporalDomain dom(std::vector<wdw::temporal::Interval> ivs) {
  return wdw::temporal::TemporalDomain::normalize(std::move(ivs));
}

/// Random bounded interval list with grains in [0, 100].
inline std::vector<wdw::temporal::Interval> random_intervals(std::mt19937& rng,
                                                             wdw::temporal::Unit u) {
  std::uniform_int_distribution<int> count(0, 20);
  std::uniform_int_distribution<std::int64_t> lo(0, 100);
  std::uniform_int_distribution<std::int64_t> len(0, 15);
  std::vector<wdw::temporal::Interval> out;
  const int n = count(rng);
  for (int i = 0; i < n; ++i) {
    const std::int64_t a = lo(rng);
    const std::int64_t b = std::min<std::int64_t>(100, a + len(rng));
    out.push_back(iv(a, b, u));
  }
  return out;
}

}  // namespace testutil
