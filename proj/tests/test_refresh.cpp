#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "test_util.hpp"
#include "wdw/dsl.hpp"
#include "wdw/refresh.hpp"
#include "wdw/store_io.hpp"

using namespace wdw;
using namespace wdw::refresh;
using temporal::parse_instant;
using testutil::fixture_path;

namespace {

struct Annex {
  dsl::CompiledSchema compiled;
  SourceSnapshot snap;

  Annex() {
    compiled = dsl::load_schema_file(fixture_path("annex.wdl"));
    REQUIRE(compiled.diagnostics.empty());
    snap = io::load_snapshot(fixture_path("snapshots/src_2000_01.json"), compiled.source);
  }
};

struct Histo {
  dsl::CompiledSchema compiled;

  Histo() {
    compiled = dsl::load_schema_file(fixture_path("histo/histo.wdl"));
    REQUIRE(compiled.diagnostics.empty());
  }

  SourceSnapshot snap(int month) {
    char name[32];
    std::snprintf(name, sizeof name, "histo/snap_%02d.json", month);
    return io::load_snapshot(fixture_path(name), compiled.source);
  }
};

}  // namespace

TEST_CASE("initial build populates every class in dependency order") {
  Annex fx;
  auto store = refresh::initial_build(fx.compiled.warehouse, fx.snap, fx.snap.at,
                                      fx.compiled.canonical_text);
  CHECK(store.classes.at("Praticien").objects.size() == 3);
  CHECK(store.classes.at("Personne").objects.size() == 3);
  CHECK(store.classes.at("Jeune_Praticien").objects.size() == 2);
  CHECK(store.classes.at("Prescription").objects.size() == 3);

  // Hierarchy extensions share the operand's objects.
  for (const auto& member : store.classes.at("Jeune_Praticien").objects) {
    CHECK(member->oid.rfind("Praticien#", 0) == 0);
    CHECK(store.find_object("Praticien", member->oid) == member);
  }
  for (const auto& obj : store.classes.at("Praticien").objects) {
    REQUIRE(obj->current.has_value());
    CHECK(obj->current->domain.open_ended());
    CHECK(obj->current->domain.intervals().front().start == fx.snap.at);
    CHECK(obj->past.empty());
    CHECK(obj->archived.empty());
  }

  // Determinism: building twice gives byte-identical stores.
  auto store2 = refresh::initial_build(fx.compiled.warehouse, fx.snap, fx.snap.at,
                                       fx.compiled.canonical_text);
  CHECK(io::store_to_json(store) == io::store_to_json(store2));

  // Empty snapshot: empty extensions, schema intact.
  SourceSnapshot empty;
  empty.at = fx.snap.at;
  empty.schema = &fx.compiled.source;
  auto none = refresh::initial_build(fx.compiled.warehouse, empty, empty.at,
                                     fx.compiled.canonical_text);
  for (const auto& [cls, ext] : none.classes) CHECK(ext.objects.empty());
}

TEST_CASE("refreshing the same snapshot is a no-op on state counts") {
  Annex fx;
  auto store = refresh::initial_build(fx.compiled.warehouse, fx.snap, fx.snap.at,
                                      fx.compiled.canonical_text);
  auto report = refresh::refresh(store, fx.compiled.warehouse, fx.snap,
                                 parse_instant("mois:2000-02"));
  for (const auto& [cls, counts] : report.per_class) {
    CHECK(counts.created == 0);
    CHECK(counts.historized == 0);
    CHECK(counts.retired == 0);
  }
  for (const auto& obj : store.classes.at("Praticien").objects) {
    CHECK(obj->past.empty());
    CHECK(obj->current->domain.open_ended());
  }
}

TEST_CASE("ticks must advance and respect the refresh period") {
  Annex fx;
  auto store = refresh::initial_build(fx.compiled.warehouse, fx.snap, fx.snap.at,
                                      fx.compiled.canonical_text);
  CHECK_THROWS_AS(
      refresh::refresh(store, fx.compiled.warehouse, fx.snap, parse_instant("mois:2000-01")),
      Error);
  // A schedule violating the 1-month period.
  std::vector<Tick> ticks{{parse_instant("mois:2000-01"), "unused", "Suivi", false}};
  auto loader = [&](const std::string&) { return fx.snap; };
  try {
    refresh::run_schedule(store, fx.compiled.warehouse, ticks, loader);
    FAIL("expected ScheduleViolation");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::ScheduleViolation);
  }
  // Unit mismatch with the class state unit.
  CHECK_THROWS_AS(
      refresh::refresh(store, fx.compiled.warehouse, fx.snap, parse_instant("annee:2001")),
      Error);
}

TEST_CASE("the scripted five-tick sequence yields exactly four past states") {
  Histo fx;
  auto s1 = fx.snap(1);
  auto store = refresh::initial_build(fx.compiled.warehouse, s1, s1.at,
                                      fx.compiled.canonical_text);
  auto ticks = io::load_tickscript(fixture_path("histo/ticks.json"));
  auto loader = [&](const std::string& path) {
    return io::load_snapshot(fixture_path("histo/" + path), fx.compiled.source);
  };
  auto run = refresh::run_schedule(store, fx.compiled.warehouse, ticks, loader);
  REQUIRE(run.refreshes.size() == 5);

  const auto& ext = store.classes.at("Personne");
  REQUIRE(ext.objects.size() == 1);
  const auto& obj = *ext.objects.front();
  CHECK(obj.past.size() == 4);
  REQUIRE(obj.current.has_value());
  CHECK(obj.current->value.field("nom")->as_text() == "Dupont");

  // The scripted value timelines replay exactly through history().
  const auto* cls = fx.compiled.warehouse.find_class("Personne");
  const char* ville_script[] = {"Toulouse", "Albi", "Albi", "Blagnac", "Blagnac", "Blagnac"};
  const int nb_script[] = {1, 1, 2, 3, 4, 4};
  auto ville_hist = model::history(obj, *cls, "ville");
  auto nb_hist = model::history(obj, *cls, "nb_enfants");
  const std::int64_t base = parse_instant("mois:2000-01").ticks;
  for (int m = 0; m < 6; ++m) {
    const temporal::Instant t{temporal::Unit::Mois, base + m};
    bool seen_ville = false, seen_nb = false;
    for (const auto& [dom, v] : ville_hist)
      if (dom.contains(t)) {
        CHECK(v.as_text() == ville_script[m]);
        seen_ville = true;
      }
    for (const auto& [dom, v] : nb_hist)
      if (dom.contains(t)) {
        CHECK(v.as_int() == nb_script[m]);
        seen_nb = true;
      }
    CHECK(seen_ville);
    CHECK(seen_nb);
  }

  // Non-temporal nom changed on the last tick without a new past state, and
  // the per-tick reports agree with the script.
  CHECK(run.refreshes[0].second.per_class.at("Personne").historized == 1);  // ville
  CHECK(run.refreshes[1].second.per_class.at("Personne").historized == 1);  // nb
  CHECK(run.refreshes[2].second.per_class.at("Personne").historized == 1);  // both
  CHECK(run.refreshes[3].second.per_class.at("Personne").historized == 1);  // nb
  CHECK(run.refreshes[4].second.per_class.at("Personne").historized == 0);
  CHECK(run.refreshes[4].second.per_class.at("Personne").updated == 1);     // nom only

  // Past states hold only the temporal-filter properties over closed domains.
  for (const auto& s : obj.past) {
    CHECK(s.value.fields().size() == 2);
    CHECK(s.value.field("ville") != nullptr);
    CHECK(s.value.field("nb_enfants") != nullptr);
    CHECK_FALSE(s.domain.open_ended());
  }
  CHECK(model::check_object(obj, *cls).empty());

  // Structural invariant from the scripts: the object's past count equals the
  // number of ticks where some temporal value changed.
  CHECK(model::history(obj, *cls, "nom").size() == 1);  // non-temporal: current only
}

TEST_CASE("disappearing and returning source objects retire and resume") {
  Histo fx;
  auto s1 = fx.snap(1);
  auto store = refresh::initial_build(fx.compiled.warehouse, s1, s1.at,
                                      fx.compiled.canonical_text);

  // Tick 2: the object disappears.
  SourceSnapshot gone;
  gone.at = parse_instant("mois:2000-02");
  gone.schema = &fx.compiled.source;
  auto r1 = refresh::refresh(store, fx.compiled.warehouse, gone, gone.at);
  CHECK(r1.per_class.at("Personne").retired == 1);
  const auto& obj = *store.classes.at("Personne").objects.front();
  CHECK(obj.retired());
  REQUIRE(obj.past.size() == 1);
  CHECK_FALSE(obj.past.front().domain.open_ended());

  // Tick 3: it reappears with the same lineage and resumes.
  auto s3 = fx.snap(3);
  auto r2 = refresh::refresh(store, fx.compiled.warehouse, s3, s3.at);
  CHECK(r2.per_class.at("Personne").created == 1);
  CHECK(store.classes.at("Personne").objects.size() == 1);  // same object, not a duplicate
  CHECK_FALSE(obj.retired());
  CHECK(obj.current->domain.intervals().front().start == s3.at);
  CHECK(model::check_object(obj, *fx.compiled.warehouse.find_class("Personne")).empty());
}

TEST_CASE("hierarchy memberships follow their operands across refreshes") {
  Annex fx;
  auto store = refresh::initial_build(fx.compiled.warehouse, fx.snap, fx.snap.at,
                                      fx.compiled.canonical_text);
  CHECK(store.classes.at("Jeune_Praticien").objects.size() == 2);

  // pr2's build year slides to 1950: it leaves the young practitioners.
  std::string text = io::read_file(fixture_path("snapshots/src_2000_01.json"));
  const auto pos = text.find("\"annee_n\": 1961");
  REQUIRE(pos != std::string::npos);
  text.replace(pos, 15, "\"annee_n\": 1950");
  auto moved = io::parse_snapshot(text, fx.compiled.source);
  auto report = refresh::refresh(store, fx.compiled.warehouse, moved, parse_instant("mois:2000-02"));
  CHECK(store.classes.at("Jeune_Praticien").objects.size() == 1);
  CHECK(report.per_class.at("Jeune_Praticien").retired == 1);
  // annee_n is not in the temporal filter, so the base object just updates.
  CHECK(report.per_class.at("Praticien").updated == 1);
}

TEST_CASE("subclass extensions stay contained in their supers") {
  Annex fx;
  auto store = refresh::initial_build(fx.compiled.warehouse, fx.snap, fx.snap.at,
                                      fx.compiled.canonical_text);
  for (const auto& cls : fx.compiled.warehouse.classes) {
    auto it = store.classes.find(cls.name);
    if (it == store.classes.end()) continue;
    for (const auto& super : cls.supers) {
      for (const auto& obj : it->second.objects) {
        bool found = false;
        for (const auto& so : store.classes.at(super).objects)
          if (so->oid == obj->oid) found = true;
        CHECK(found);
      }
    }
  }
}

TEST_CASE("a value change on every tick accumulates one past state per tick") {
  Histo fx;
  auto make_snap = [&](std::int64_t month_tick, int nb) {
    SourceSnapshot s;
    s.at = temporal::Instant{temporal::Unit::Mois, month_tick};
    s.schema = &fx.compiled.source;
    StructFields f;
    f.emplace_back("nom", Value::text("Durand"));
    f.emplace_back("ville", Value::text("Toulouse"));
    f.emplace_back("nb_enfants", Value::integer(nb));
    s.objects["PERSONNE"].push_back({"p1", Value::structure(std::move(f))});
    return s;
  };
  const std::int64_t base = parse_instant("mois:1998-01").ticks;
  auto store = refresh::initial_build(fx.compiled.warehouse, make_snap(base, 0),
                                      {temporal::Unit::Mois, base}, fx.compiled.canonical_text);
  // 35 further ticks, each changing the temporal property.
  for (int m = 1; m < 36; ++m)
    refresh::refresh(store, fx.compiled.warehouse, make_snap(base + m, m),
                     {temporal::Unit::Mois, base + m});
  const auto& obj = *store.classes.at("Personne").objects.front();
  CHECK(obj.past.size() == 35);
  CHECK(obj.current->value.field("nb_enfants")->as_int() == 35);
  // Past domains tile the 35 closed months without gaps or overlaps.
  std::set<std::int64_t> covered;
  for (const auto& s : obj.past)
    for (const auto& g : testutil::grains(s.domain)) covered.insert(g);
  CHECK(covered.size() == 35);
  CHECK(*covered.begin() == base);
  CHECK(*covered.rbegin() == base + 34);
  CHECK(model::check_object(obj, *fx.compiled.warehouse.find_class("Personne")).empty());
}
