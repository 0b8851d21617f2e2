#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <random>

#include "test_util.hpp"
#include "wdw/dsl.hpp"
#include "wdw/refresh.hpp"
#include "wdw/store_io.hpp"

using namespace wdw;
using testutil::fixture_path;

namespace {

const char* kPersonneListing = R"(
interface Personne {
    attribute String nom;
    attribute String prenom;
    attribute Short annee_n;
    attribute String ville;
    attribute Short nb_enfants;
}
with temporal filter {ville, nb_enfants},
archive filter {avg(nb_enfants)}
)";

}  // namespace

TEST_CASE("the warehouse-class listing parses verbatim") {
  auto doc = dsl::parse_schema(kPersonneListing);
  REQUIRE(doc.warehouse_interfaces.size() == 1);
  const auto& itf = doc.warehouse_interfaces.front();
  CHECK(itf.name == "Personne");
  CHECK(itf.tempo_filter == std::vector<std::string>{"ville", "nb_enfants"});
  REQUIRE(itf.archive_filter.size() == 1);
  CHECK(itf.archive_filter.front().first == "avg");
  CHECK(itf.archive_filter.front().second == "nb_enfants");
  CHECK(itf.members.size() == 5);
  auto compiled = dsl::compile(doc);
  CHECK(compiled.diagnostics.empty());
  const auto* cls = compiled.warehouse.find_class("Personne");
  REQUIRE(cls != nullptr);
  CHECK(property_names(cls->structure) ==
        std::vector<std::string>{"nom", "prenom", "annee_n", "ville", "nb_enfants"});
}

TEST_CASE("syntax errors carry a location and never crash") {
  try {
    dsl::parse_schema("interface Broken {\n    attribute String nom;\n");
    FAIL("expected a syntax error");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::SyntaxError);
    CHECK(std::string(e.what()).find("line") != std::string::npos);
  }
}

TEST_CASE("annex fixture compiles with six source interfaces and no diagnostics") {
  auto compiled = dsl::load_schema_file(fixture_path("annex.wdl"));
  for (const auto& d : compiled.diagnostics) MESSAGE(d.where, ": ", d.message);
  CHECK(compiled.diagnostics.empty());
  CHECK(compiled.source.classes().size() == 6);
  CHECK(compiled.warehouse.classes.size() == 4);

  const auto* praticien = compiled.warehouse.find_class("Praticien");
  REQUIRE(praticien != nullptr);
  CHECK(property_names(praticien->structure) ==
        std::vector<std::string>{"nom", "prenom", "annee_n", "categorie", "specialite", "ville",
                                 "densite", "departement", "consultations", "nb_enfants"});
  CHECK(praticien->supers == std::vector<std::string>{"Personne"});

  const auto* prescription = compiled.warehouse.find_class("Prescription");
  REQUIRE(prescription != nullptr);
  CHECK(property_names(prescription->structure) ==
        std::vector<std::string>{"honoraire", "prescripteur", "tension", "poids", "taille",
                                 "medicament"});
  const Property* medicament = find_property(prescription->structure, "medicament");
  REQUIRE(medicament != nullptr);
  REQUIRE(medicament->type.kind == SemType::Kind::Set);
  std::vector<std::string> member_fields;
  for (const auto& [k, t] : medicament->type.element->struct_fields) member_fields.push_back(k);
  CHECK(member_fields == std::vector<std::string>{"code", "generique", "categorie_molecule",
                                                  "type_molecule", "quantite", "tarif"});

  const auto* jeune = compiled.warehouse.find_class("Jeune_Praticien");
  REQUIRE(jeune != nullptr);
  CHECK(jeune->supers == std::vector<std::string>{"Praticien"});
  CHECK(property_names(jeune->structure) == property_names(praticien->structure));

  const auto* personne = compiled.warehouse.find_class("Personne");
  REQUIRE(personne != nullptr);
  CHECK(property_names(personne->structure) ==
        std::vector<std::string>{"nom", "prenom", "ville", "densite", "departement", "annee_n",
                                 "nb_enfants"});
}

TEST_CASE("parse-print-parse reaches a fixpoint on the annex fixture") {
  const std::string text = io::read_file(fixture_path("annex.wdl"));
  const std::string once = dsl::print_schema(dsl::parse_schema(text));
  const std::string twice = dsl::print_schema(dsl::parse_schema(once));
  CHECK(once == twice);
  auto a = dsl::compile(dsl::parse_schema(text));
  auto b = dsl::compile(dsl::parse_schema(once));
  CHECK(a.diagnostics.empty());
  CHECK(b.diagnostics.empty());
  CHECK(a.canonical_text == b.canonical_text);
}

TEST_CASE("parser survives arbitrary bytes") {
  const std::string annex = io::read_file(fixture_path("annex.wdl"));
  std::mt19937 rng(99);
  std::uniform_int_distribution<int> byte(0, 255);
  std::uniform_int_distribution<std::size_t> cut(0, annex.size());
  for (int round = 0; round < 300; ++round) {
    std::string garbage;
    const int len = round % 60;
    for (int i = 0; i < len; ++i) garbage += static_cast<char>(byte(rng));
    try {
      dsl::parse_schema(garbage);
    } catch (const Error& e) {
      CHECK(e.code() == Errc::SyntaxError);
    }
    std::string trunc = annex.substr(0, cut(rng));
    try {
      dsl::parse_schema(trunc);
    } catch (const Error& e) {
      CHECK(e.code() == Errc::SyntaxError);
    }
  }
}

TEST_CASE("snapshot loading checks references") {
  auto compiled = dsl::load_schema_file(fixture_path("annex.wdl"));
  auto snap = io::load_snapshot(fixture_path("snapshots/src_2000_01.json"), compiled.source);
  CHECK(snap.at == temporal::parse_instant("mois:2000-01"));
  CHECK(snap.objects.at("PRATICIEN").size() == 4);
  CHECK(snap.extension_of("PERSONNE").size() == 9);

  const char* dangling = R"({
    "at": "mois:2000-01",
    "classes": {"PERSONNE": [
      {"oid": "p1", "nom": "X", "prenom": "Y", "annee_n": 1980, "marie": null,
       "enfants": ["ghost"], "parents": []}
    ]}
  })";
  try {
    io::parse_snapshot(dangling, compiled.source);
    FAIL("expected DanglingRef");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::DanglingRef);
    CHECK(std::string(e.what()).find("ghost") != std::string::npos);
  }

  const char* unknown_prop = R"({
    "at": "mois:2000-01",
    "classes": {"PERSONNE": [{"oid": "p1", "bogus": 1}]}
  })";
  CHECK_THROWS_AS(io::parse_snapshot(unknown_prop, compiled.source), Error);
}

TEST_CASE("store round-trips byte-identically and checks its hash") {
  auto compiled = dsl::load_schema_file(fixture_path("annex.wdl"));
  REQUIRE(compiled.diagnostics.empty());
  auto snap = io::load_snapshot(fixture_path("snapshots/src_2000_01.json"), compiled.source);
  auto store = refresh::initial_build(compiled.warehouse, snap, snap.at, compiled.canonical_text);

  const std::string json = io::store_to_json(store);
  auto loaded = io::parse_store(json);
  CHECK(io::store_to_json(loaded) == json);

  std::string tampered = json;
  const auto pos = tampered.find("\"schema_hash\": \"");
  REQUIRE(pos != std::string::npos);
  tampered[pos + 16] = tampered[pos + 16] == '0' ? '1' : '0';
  try {
    io::parse_store(tampered);
    FAIL("expected SchemaMismatch");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::SchemaMismatch);
  }
}

TEST_CASE("tick scripts parse") {
  auto ticks = io::load_tickscript(fixture_path("histo/ticks.json"));
  REQUIRE(ticks.size() == 5);
  CHECK(ticks.front().at == temporal::parse_instant("mois:2000-02"));
  CHECK(ticks.front().environment == "Base");
  CHECK_FALSE(ticks.front().archive);
  CHECK(ticks.front().snapshot_path == "snap_02.json");
  CHECK_THROWS_AS(io::parse_tickscript("{}"), Error);
}

TEST_CASE("every mapping operator parses, prints and compiles") {
  const char* text = R"(
source {
    interface S {
        attribute String nom;
        attribute Short x;
        attribute Short y;
        attribute Set<Short> vals;
        Boolean ok();
        method ok() uses properties {x};
    }
}

interface Masked {
}
mapping mask [o.nom] (o S)

interface Flat {
}
mapping unnest [u.grp] (u nest [g.x]::grp (g mask [o.vals] (o S)))

interface Either {
}
mapping union (a select [s.x > 3] (s S), b select [s.y > 3] (s S))

interface Both {
}
mapping intersect (a select [s.x > 3] (s S), b select [s.y > 3] (s S))

interface OnlyLeft {
}
mapping diff (a select [s.x > 3] (s S), b select [s.y > 3] (s S))

interface Rich {
}
mapping augment [total:sum(o.vals), top:max(o.vals), low:min(o.vals),
                 verdict:S::ok(), note:String] (o S)

interface Phrase {
}
mapping select [s.x >= 1 and s.nom != "zut" or s.y < 2] (s S)
)";
  auto doc = dsl::parse_schema(text);
  const std::string once = dsl::print_schema(doc);
  CHECK(dsl::print_schema(dsl::parse_schema(once)) == once);
  auto compiled = dsl::compile(doc);
  for (const auto& d : compiled.diagnostics) MESSAGE(d.where, ": ", d.message);
  CHECK(compiled.diagnostics.empty());
  CHECK(property_names(compiled.warehouse.find_class("Masked")->structure) ==
        std::vector<std::string>{"x", "y", "vals"});
  CHECK(property_names(compiled.warehouse.find_class("Flat")->structure) ==
        std::vector<std::string>{"x", "nom", "y"});
  CHECK(property_names(compiled.warehouse.find_class("Rich")->structure) ==
        std::vector<std::string>{"nom", "x", "y", "vals", "total", "top", "low", "verdict",
                                 "note"});
  const auto* phrase = compiled.warehouse.find_class("Phrase");
  REQUIRE(phrase->mapping != nullptr);
  CHECK(phrase->mapping->pred.disjuncts.size() == 2);
}

TEST_CASE("a mapping dependency cycle is diagnosed") {
  const char* text = R"(
source {
    interface S {
        attribute Short x;
    }
}

interface A {
}
mapping specialize [o.x > 1] (o B)

interface B {
}
mapping specialize [o.x > 2] (o A)
)";
  auto compiled = dsl::compile(dsl::parse_schema(text));
  bool cycle = false;
  for (const auto& d : compiled.diagnostics)
    if (d.message.find("dependency cycle") != std::string::npos) cycle = true;
  CHECK(cycle);
}

TEST_CASE("augmented method calls must be derivable") {
  const char* base = R"(
source {
    interface S {
        attribute Short x;
        attribute Short hidden;
        Short f();
        method f() uses properties {%s};
    }
}

interface W {
}
mapping augment [fx:S::f()] (o project [s.x] (s S))
)";
  char ok_text[1024], bad_text[1024];
  std::snprintf(ok_text, sizeof ok_text, base, "x");
  std::snprintf(bad_text, sizeof bad_text, base, "hidden");

  auto ok = dsl::compile(dsl::parse_schema(ok_text));
  for (const auto& d : ok.diagnostics) MESSAGE(d.where, ": ", d.message);
  CHECK(ok.diagnostics.empty());
  const Property* fx = find_property(ok.warehouse.find_class("W")->structure, "fx");
  REQUIRE(fx != nullptr);
  CHECK(fx->type.kind == SemType::Kind::Integer);  // the method's return type

  auto bad = dsl::compile(dsl::parse_schema(bad_text));
  bool flagged = false;
  for (const auto& d : bad.diagnostics)
    if (d.message.find("non-derivable method S::f") != std::string::npos) flagged = true;
  CHECK(flagged);
}
