#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <random>

#include "test_util.hpp"
#include "wdw/temporal.hpp"

using namespace wdw;
using namespace wdw::temporal;
using testutil::dom;
using testutil::grains;
using testutil::grains_of;
using testutil::iv;

namespace {

const Unit kAllUnits[] = {Unit::Seconde, Unit::Minute,   Unit::Heure,  Unit::Jour,
                          Unit::Semaine, Unit::Mois,     Unit::Trimestre, Unit::Semestre,
                          Unit::Annee,   Unit::JourSemaine};

// Calendar brute force: true iff every coarse grain in the probe range is an
// exact run of fine grains.
bool tiles_exactly(Unit fine, Unit coarse, std::int64_t from, std::int64_t to) {
  for (std::int64_t c = from; c <= to; ++c) {
    const std::int64_t first = first_fine_tick({coarse, c}, fine);
    const std::int64_t next = first_fine_tick({coarse, c + 1}, fine);
    if (next <= first) return false;
    for (std::int64_t f = first; f < next; ++f)
      if (coarsen_instant({fine, f}, coarse).ticks != c) return false;
  }
  return true;
}

}  // namespace

TEST_CASE("finer_than order edges") {
  CHECK(finer_than(Unit::Mois, Unit::Annee));
  CHECK_FALSE(finer_than(Unit::Annee, Unit::Annee));  // irreflexive
  CHECK_FALSE(finer_than(Unit::Semaine, Unit::Mois));
  CHECK_FALSE(finer_than(Unit::Mois, Unit::Semaine));
  CHECK(finer_than(Unit::Seconde, Unit::Annee));
  CHECK(finer_than(Unit::Jour, Unit::Semaine));
  CHECK(finer_than(Unit::Jour, Unit::Mois));
  CHECK_FALSE(finer_than(Unit::Semaine, Unit::Annee));
  for (Unit u : kAllUnits) {
    CHECK_FALSE(finer_than(u, Unit::JourSemaine));
    if (u != Unit::JourSemaine) CHECK_FALSE(finer_than(Unit::JourSemaine, u));
  }
}

TEST_CASE("finer_than matches the calendar tiling oracle over 1970-2030") {
  // Months are whole runs of days, years whole runs of months; weeks tile
  // days but no month is a whole number of weeks.
  CHECK(tiles_exactly(Unit::Jour, Unit::Mois, 0, 12 * 60));
  CHECK(tiles_exactly(Unit::Mois, Unit::Annee, 0, 60));
  CHECK(tiles_exactly(Unit::Jour, Unit::Semaine, 0, 52 * 60));
  CHECK(tiles_exactly(Unit::Mois, Unit::Trimestre, 0, 4 * 60));
  // A month is not a whole number of weeks: some week straddles two months.
  bool straddles = false;
  for (std::int64_t w = 0; w < 52 * 60 && !straddles; ++w) {
    const std::int64_t d0 = first_fine_tick({Unit::Semaine, w}, Unit::Jour);
    const std::int64_t d6 = d0 + 6;
    straddles = coarsen_instant({Unit::Jour, d0}, Unit::Mois).ticks !=
                coarsen_instant({Unit::Jour, d6}, Unit::Mois).ticks;
  }
  CHECK(straddles);
}

TEST_CASE("finer_than is a strict partial order (exhaustive over the 10 units)") {
  for (Unit a : kAllUnits) {
    CHECK_FALSE(finer_than(a, a));
    for (Unit b : kAllUnits) {
      if (finer_than(a, b)) CHECK_FALSE(finer_than(b, a));  // antisymmetric
      for (Unit c : kAllUnits)
        if (finer_than(a, b) && finer_than(b, c)) CHECK(finer_than(a, c));  // transitive
    }
  }
}

TEST_CASE("instant text syntax round-trips") {
  const char* samples[] = {
      "annee:2000",          "semestre:1998-S2",           "trimestre:1998-Q1",
      "mois:2000-03",        "jour:2000-03-14",            "semaine:1484",
      "jour_semaine:3",      "heure:2000-03-14T07",        "minute:2000-03-14T07:30",
      "seconde:2000-03-14T07:30:05",
  };
  for (const char* s : samples) CHECK(format_instant(parse_instant(s)) == s);
  CHECK(parse_instant("annee:1970").ticks == 0);
  CHECK(parse_instant("mois:1970-01").ticks == 0);
  CHECK(parse_instant("jour:1970-01-01").ticks == 0);
  CHECK(parse_instant("mois:2000-03").ticks == 30 * 12 + 2);
  CHECK_THROWS_AS(parse_instant("mois:2000-13"), Error);
  CHECK_THROWS_AS(parse_instant("bogus:12"), Error);
  CHECK_THROWS_AS(parse_instant("mois"), Error);
}

TEST_CASE("coarsen_instant is calendar-aware") {
  CHECK(coarsen_instant(parse_instant("mois:2000-03"), Unit::Annee) == parse_instant("annee:2000"));
  CHECK(coarsen_instant(parse_instant("jour:1999-12-31"), Unit::Annee) == parse_instant("annee:1999"));
  CHECK(coarsen_instant(parse_instant("mois:1998-01"), Unit::Trimestre) ==
        parse_instant("trimestre:1998-Q1"));
  CHECK(coarsen_instant(parse_instant("mois:1998-04"), Unit::Trimestre) ==
        parse_instant("trimestre:1998-Q2"));
  CHECK(coarsen_instant(parse_instant("jour:1969-12-31"), Unit::Annee) == parse_instant("annee:1969"));
  CHECK(coarsen_instant(parse_instant("seconde:2000-03-14T07:30:05"), Unit::Jour) ==
        parse_instant("jour:2000-03-14"));
  CHECK_THROWS_AS(coarsen_instant(parse_instant("annee:2000"), Unit::Mois), Error);
  CHECK_THROWS_AS(coarsen_instant(parse_instant("mois:2000-01"), Unit::Mois), Error);

  // Calendar oracle: coarsening a day agrees with civil conversion for a
  // whole decade around the epoch.
  for (std::int64_t d = -3653; d <= 3653; ++d) {
    int y;
    unsigned m, dd;
    civil_from_days(d, y, m, dd);
    CHECK(coarsen_instant({Unit::Jour, d}, Unit::Mois).ticks ==
          static_cast<std::int64_t>(y - 1970) * 12 + (m - 1));
  }
}

TEST_CASE("normalize merges overlaps and adjacency, keeps gaps") {
  CHECK(format_domain(dom({iv(1, 3), iv(3, 5)})) == "<[jour:1970-01-02,jour:1970-01-06]>");
  CHECK(dom({iv(1, 3), iv(3, 5)}) == dom({iv(1, 5)}));
  CHECK(dom({iv(1, 2), iv(3, 5)}) == dom({iv(1, 5)}));  // adjacency merge
  const auto sorted = dom({iv(5, 7), iv(1, 2)});
  REQUIRE(sorted.intervals().size() == 2);
  CHECK(sorted.intervals()[0].start.ticks == 1);
  CHECK(sorted.intervals()[1].start.ticks == 5);
  CHECK_THROWS_AS(dom({make_interval({Unit::Jour, 1}, {Unit::Jour, 1}),
                       {{Unit::Mois, 0}, Instant{Unit::Mois, 1}}}),
                  Error);
  CHECK_THROWS_AS(make_interval({Unit::Jour, 5}, {Unit::Jour, 4}), Error);
  // Single-grain intervals are legal values.
  CHECK(dom({iv(4, 4)}).grain_count() == 1);
}

TEST_CASE("normalize properties on random interval lists") {
  std::mt19937 rng(42);
  int checked = 0;
  for (int round = 0; round < 600; ++round) {
    auto ivs = testutil::random_intervals(rng, Unit::Jour);
    const auto d = dom(ivs);
    // Idempotent.
    CHECK(TemporalDomain::normalize(d.intervals()) == d);
    // Grain-set preserving.
    CHECK(grains(d) == grains_of(ivs));
    // Invariants: sorted, disjoint, non-contiguous.
    for (std::size_t i = 1; i < d.intervals().size(); ++i)
      CHECK(d.intervals()[i].start.ticks > d.intervals()[i - 1].end->ticks + 1);
    ++checked;
  }
  CHECK(checked == 600);
}

TEST_CASE("set operations match the grain-set oracles") {
  using std::set;
  CHECK(domain_union(dom({iv(1, 3)}), dom({iv(2, 6)})) == dom({iv(1, 6)}));
  CHECK(domain_intersection(dom({iv(1, 3)}), dom({iv(5, 9)})).empty());
  CHECK(domain_difference(dom({iv(1, 9)}), dom({iv(4, 5)})) == dom({iv(1, 3), iv(6, 9)}));

  std::mt19937 rng(7);
  for (int round = 0; round < 500; ++round) {
    const auto a = dom(testutil::random_intervals(rng, Unit::Mois));
    const auto b = dom(testutil::random_intervals(rng, Unit::Mois));
    const auto ga = grains(a), gb = grains(b);
    set<std::int64_t> u, n, d;
    std::set_union(ga.begin(), ga.end(), gb.begin(), gb.end(), std::inserter(u, u.end()));
    std::set_intersection(ga.begin(), ga.end(), gb.begin(), gb.end(), std::inserter(n, n.end()));
    std::set_difference(ga.begin(), ga.end(), gb.begin(), gb.end(), std::inserter(d, d.end()));
    CHECK(grains(domain_union(a, b)) == u);
    CHECK(grains(domain_intersection(a, b)) == n);
    CHECK(grains(domain_difference(a, b)) == d);
  }
}

TEST_CASE("open-ended domains") {
  auto d = TemporalDomain::normalize({make_open_interval({Unit::Mois, 360})});
  CHECK(d.open_ended());
  CHECK(d.contains({Unit::Mois, 360}));
  CHECK(d.contains({Unit::Mois, 4000}));
  CHECK_FALSE(d.contains({Unit::Mois, 359}));
  CHECK_THROWS_AS(d.grain_count(), Error);
  CHECK(format_domain(d) == "<[mois:2000-01,NOW]>");
  CHECK(parse_domain("<[mois:2000-01,NOW]>") == d);
  // NOW absorbs later intervals.
  auto merged = TemporalDomain::normalize(
      {make_open_interval({Unit::Mois, 5}), iv(8, 9, Unit::Mois)});
  CHECK(merged.intervals().size() == 1);
  CHECK(merged.open_ended());
  // Difference with a bounded domain keeps the open tail.
  auto diff = domain_difference(d, dom({iv(365, 370, Unit::Mois)}));
  REQUIRE(diff.intervals().size() == 2);
  CHECK(diff.intervals()[1].open_ended());
  CHECK(diff.intervals()[1].start.ticks == 371);
}

TEST_CASE("domain text syntax") {
  CHECK(parse_domain("<>").empty());
  const auto d = parse_domain("<[mois:1998-01,mois:1998-12];[mois:2000-02,NOW]>");
  CHECK(format_domain(d) == "<[mois:1998-01,mois:1998-12];[mois:2000-02,NOW]>");
  CHECK_THROWS_AS(parse_domain("[1,2]"), Error);
  CHECK_THROWS_AS(parse_domain("<[mois:1998-01]>"), Error);
}

TEST_CASE("group_by_grain groups by containing coarse grain") {
  // 36 monthly domains for 1998-2000 group into 3 years of 12.
  std::vector<TemporalDomain> domains;
  const std::int64_t base = parse_instant("mois:1998-01").ticks;
  for (int m = 0; m < 36; ++m) domains.push_back(dom({iv(base + m, base + m, Unit::Mois)}));
  auto groups = group_by_grain(domains, Unit::Annee);
  REQUIRE(groups.size() == 3);
  for (const auto& [grain, members] : groups) CHECK(members.size() == 12);
  CHECK(groups[0].first == parse_instant("annee:1998"));
  CHECK(groups[2].first == parse_instant("annee:2000"));

  // Same unit as the domain: rejected.
  CHECK_THROWS_AS(group_by_grain(domains, Unit::Mois), Error);

  // A domain straddling two years appears in both groups.
  std::vector<TemporalDomain> straddle{dom({iv(parse_instant("mois:1998-11").ticks,
                                              parse_instant("mois:1999-02").ticks, Unit::Mois)})};
  auto two = group_by_grain(straddle, Unit::Annee);
  REQUIRE(two.size() == 2);
  CHECK(two[0].first == parse_instant("annee:1998"));
  CHECK(two[1].first == parse_instant("annee:1999"));
}

TEST_CASE("first and last fine ticks bound coarse grains") {
  CHECK(first_fine_tick(parse_instant("annee:2000"), Unit::Mois) ==
        parse_instant("mois:2000-01").ticks);
  CHECK(last_fine_tick(parse_instant("annee:2000"), Unit::Mois) ==
        parse_instant("mois:2000-12").ticks);
  CHECK(first_fine_tick(parse_instant("mois:2000-02"), Unit::Jour) ==
        parse_instant("jour:2000-02-01").ticks);
  CHECK(last_fine_tick(parse_instant("mois:2000-02"), Unit::Jour) ==
        parse_instant("jour:2000-02-29").ticks);  // leap year
  CHECK(last_fine_tick(parse_instant("mois:2001-02"), Unit::Jour) ==
        parse_instant("jour:2001-02-28").ticks);
}
