#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "wdw/errors.hpp"

namespace wdw::temporal {

// The fixed, closed set of temporal units. The discrete time line of each
// unit is indexed by integer ticks counted from 1970-01-01T00:00:00
// (proleptic Gregorian). `JourSemaine` ticks are opaque day-of-week codes;
// the unit is incomparable with every other unit.
enum class Unit : int {
  Seconde,
  Minute,
  Heure,
  Jour,
  Semaine,
  Mois,
  Trimestre,
  Semestre,
  Annee,
  JourSemaine,
};

inline constexpr int kUnitCount = 10;

const char* unit_name(Unit u);
std::optional<Unit> unit_from_name(std::string_view name);

/// Strict partial order "est-plus-fine": true iff every `coarse` grain is an
/// exact concatenation of `fine` grains.
bool finer_than(Unit fine, Unit coarse);

struct Instant {
  Unit unit{Unit::Jour};
  std::int64_t ticks{0};

  friend bool operator==(const Instant&, const Instant&) = default;
};

// Comparisons require identical units and throw MixedUnits otherwise.
int compare(const Instant& a, const Instant& b);
inline bool before(const Instant& a, const Instant& b) { return compare(a, b) < 0; }

/// The coarse grain containing `i`, calendar-aware. Requires
/// finer_than(i.unit, coarse); throws NotCoarser otherwise.
Instant coarsen_instant(const Instant& i, Unit coarse);

/// First fine-unit tick inside the grain of `i`. Requires finer_than(fine, i.unit).
std::int64_t first_fine_tick(const Instant& i, Unit fine);
/// Last fine-unit tick inside the grain of `i`.
std::int64_t last_fine_tick(const Instant& i, Unit fine);

std::string format_instant(const Instant& i);
Instant parse_instant(std::string_view text);  // throws SyntaxError

// Closed interval of grains [start, end]; an absent end is the open NOW
// marker used by current states. Single-grain intervals (start == end) are
// legal; an interval is empty (and rejected) only when start > end.
struct Interval {
  Instant start;
  std::optional<Instant> end;  // nullopt = NOW

  Unit unit() const { return start.unit; }
  bool open_ended() const { return !end.has_value(); }

  friend bool operator==(const Interval&, const Interval&) = default;
};

Interval make_interval(Instant start, Instant end);
Interval make_open_interval(Instant start);

// Ordered list of pairwise disjoint, non-contiguous closed intervals sharing
// one unit. The empty domain is a legal value. At most the last interval may
// end in NOW.
class TemporalDomain {
 public:
  TemporalDomain() = default;

  /// Sorts, merges overlapping and adjacent intervals, and validates the
  /// result. Throws MixedUnits / EmptyInterval.
  static TemporalDomain normalize(std::vector<Interval> intervals);

  const std::vector<Interval>& intervals() const { return intervals_; }
  bool empty() const { return intervals_.empty(); }
  Unit unit() const;  // throws EmptyInput on the empty domain

  bool open_ended() const;
  bool contains(const Instant& t) const;  // throws MixedUnits
  /// Total number of grains covered; throws on open-ended domains.
  std::int64_t grain_count() const;

  friend bool operator==(const TemporalDomain&, const TemporalDomain&) = default;

 private:
  std::vector<Interval> intervals_;
};

TemporalDomain domain_union(const TemporalDomain& a, const TemporalDomain& b);
TemporalDomain domain_intersection(const TemporalDomain& a, const TemporalDomain& b);
TemporalDomain domain_difference(const TemporalDomain& a, const TemporalDomain& b);

std::string format_domain(const TemporalDomain& d);
TemporalDomain parse_domain(std::string_view text);  // throws SyntaxError

/// Grains of `d` coarsened to `coarse`: every coarse grain the domain
/// intersects, ascending. Requires a bounded domain.
std::vector<Instant> coarse_grains(const TemporalDomain& d, Unit coarse);

/// Groups payload indices by coarse grain: index i appears under every
/// `coarse` grain domains[i] intersects. Throws NotCoarser if some domain's
/// unit is not strictly finer than `coarse`.
std::vector<std::pair<Instant, std::vector<std::size_t>>> group_by_grain(
    const std::vector<TemporalDomain>& domains, Unit coarse);

// Calendar helpers (proleptic Gregorian, epoch 1970-01-01 = day 0).
std::int64_t days_from_civil(int y, unsigned m, unsigned d);
void civil_from_days(std::int64_t z, int& y, unsigned& m, unsigned& d);

}  // namespace wdw::temporal
