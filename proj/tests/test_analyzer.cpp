#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <random>

#include "test_util.hpp"
#include "wdw/analyzer.hpp"
#include "wdw/dsl.hpp"
#include "wdw/store_io.hpp"

using namespace wdw;
using namespace wdw::analyzer;
using testutil::fixture_path;

namespace {

dsl::CompiledSchema annex() {
  auto compiled = dsl::load_schema_file(fixture_path("annex.wdl"));
  REQUIRE(compiled.diagnostics.empty());
  return compiled;
}

const LocalMatrices& local_for(const BehaviorAnalysis& a, const std::string& owner) {
  for (const auto& lm : a.locals)
    if (lm.mup.owner == owner) return lm;
  REQUIRE(false);
  static LocalMatrices none;
  return none;
}

}  // namespace

TEST_CASE("annex derivability matches the published analysis exactly") {
  auto compiled = annex();
  auto a = analyze_behavior(compiled.warehouse, compiled.source);

  const std::set<std::string> expected_derivable{"age",          "est_urbain",       "est_interne",
                                                 "est_generaliste", "montant_euro",
                                                 "montant_prescrit", "affiche_tension", "est_obese"};
  CHECK(a.derivable() == expected_derivable);

  const std::map<std::string, std::set<std::string>> expected_missing{
      {"est_rural", {"PERSONNEadresse.code"}}, {"taux_remb", {"type_convention"}},
      {"nb_symptomes", {"symptomes"}},         {"montant_remb", {"taux_secu"}},
      {"cout_secu", {"montant_remb"}},
  };
  for (const auto& [name, missing] : expected_missing) {
    const MethodVerdict* v = a.find(name);
    REQUIRE(v != nullptr);
    CHECK_FALSE(v->derivable);
    CHECK(v->missing == missing);
  }
  CHECK(a.verdicts.size() == 13);
  CHECK(a.cycles.empty());
}

TEST_CASE("practitioner property matrix matches the figure cells") {
  auto compiled = annex();
  auto a = analyze_behavior(compiled.warehouse, compiled.source);
  const auto& mup = local_for(a, "Praticien").mup;

  // Two extraction mappings exist, one per construction function.
  CHECK(a.locals.size() == 2);
  CHECK(a.locals[0].mup.owner == "Praticien");
  CHECK(a.locals[1].mup.owner == "Prescription");

  const int age = mup.row_index("PERSONNE::age");
  const int annee_n = mup.col_index("annee_n");
  REQUIRE(age >= 0);
  REQUIRE(annee_n >= 0);
  CHECK(mup.cells[age][annee_n] == 1);
  CHECK(mup.derived_row[annee_n] == 1);

  const int taux = mup.row_index("PRATICIEN::taux_remb");
  const int conv = mup.col_index("type_convention");
  REQUIRE(taux >= 0);
  REQUIRE(conv >= 0);
  CHECK(mup.cells[taux][conv] == 1);
  CHECK(mup.derived_row[conv] == 0);

  // Address columns carry the declaring-class prefix.
  const int code = mup.col_index("PERSONNEadresse.code");
  REQUIRE(code >= 0);
  CHECK(mup.derived_row[code] == 0);
  const int ville = mup.col_index("PERSONNEadresse.ville");
  REQUIRE(ville >= 0);
  CHECK(mup.derived_row[ville] == 1);
  const int rural = mup.row_index("PERSONNE::est_rural");
  REQUIRE(rural >= 0);
  CHECK(mup.cells[rural][code] == 1);
  CHECK(mup.derivable_col[rural] == 0);
  CHECK(mup.derivable_col[age] == 1);
}

TEST_CASE("the prescription Derive row marks the join-fused relationship") {
  auto compiled = annex();
  auto a = analyze_behavior(compiled.warehouse, compiled.source);
  const auto& mup = local_for(a, "Prescription").mup;
  const int prescription = mup.col_index("prescription");
  REQUIRE(prescription >= 0);
  CHECK(mup.derived_row[prescription] == 1);
  // Tuple-valued attributes expand to leaf columns.
  CHECK(mup.col_index("tension.max") >= 0);
  CHECK(mup.col_index("tension.min") >= 0);
  CHECK(mup.derived_row[mup.col_index("tension.max")] == 1);
  // Optimization removed never-used underived columns.
  CHECK(mup.col_index("posologie") < 0);
  CHECK(mup.col_index("fabriquant") < 0);
  CHECK(mup.col_index("taux_secu") >= 0);  // used by montant_remb, kept
}

TEST_CASE("local analysis returns the missing criteria") {
  auto compiled = annex();
  auto a = analyze_behavior(compiled.warehouse, compiled.source);
  auto prescription = local_for(a, "Prescription");
  auto& mup = prescription.mup;
  const int remb = mup.row_index("MEDICAMENT::montant_remb");
  REQUIRE(remb >= 0);
  CHECK(analyse_locale(remb, mup) == std::set<std::string>{"taux_secu"});
  const int nbs = mup.row_index("VISITE::nb_symptomes");
  REQUIRE(nbs >= 0);
  CHECK(analyse_locale(nbs, mup) == std::set<std::string>{"symptomes"});
  const int euro = mup.row_index("VISITE::montant_euro");
  REQUIRE(euro >= 0);
  CHECK(analyse_locale(euro, mup).empty());
  CHECK(mup.derivable_col[euro] == 1);
}

TEST_CASE("the global method matrix mirrors the published example") {
  auto compiled = annex();
  auto a = analyze_behavior(compiled.warehouse, compiled.source);
  const auto& mum = a.mum;
  CHECK(mum.rows.size() == 13);
  const int cout = mum.row_index("VISITE::cout_secu");
  const int remb = mum.col_index("MEDICAMENT::montant_remb");
  REQUIRE(cout >= 0);
  REQUIRE(remb >= 0);
  CHECK(mum.cells[cout][remb] == 1);
  // A method using no other methods has an all-zero row.
  const int age = mum.row_index("PERSONNE::age");
  for (std::size_t j = 0; j < mum.cols.size(); ++j) CHECK(mum.cells[age][j] == 0);
  // montant_remb is locally non-derivable: its Derive entry stays 0, its own
  // method analysis is clean.
  CHECK(mum.derived_row[remb] == 0);
  CHECK(mum.derivable_col[remb] == 1);
  CHECK(mum.derivable_col[cout] == 0);
}

TEST_CASE("object-usage coverage follows the selection predicates") {
  const char* text = R"(
source {
    interface CABINET {
        attribute String intitule;
        attribute Struct T_Adresse{
            String region,
            String ville} adresse;
        Boolean locaux();
        Boolean ailleurs();
        Boolean partout();
        method locaux() uses properties {intitule}
            objects where adresse.region = "Midi-Pyrenees";
        method ailleurs() uses properties {intitule}
            objects where adresse.region = "Aquitaine";
        method partout() uses properties {intitule};
    }
}

interface Cab {
}
mapping project [o.intitule] (o select [cc.adresse.region = "Midi-Pyrenees"] (cc CABINET))
)";
  auto compiled = dsl::compile(dsl::parse_schema(text));
  REQUIRE(compiled.diagnostics.empty());
  auto a = analyze_behavior(compiled.warehouse, compiled.source);
  CHECK(a.find("locaux")->derivable);
  CHECK_FALSE(a.find("ailleurs")->derivable);
  CHECK(a.find("partout")->derivable);  // no object predicate: vacuously fine

  const auto& muo = local_for(a, "Cab").muo;
  REQUIRE(muo.cols.size() == 2);
  const int loc = muo.row_index("CABINET::locaux");
  REQUIRE(loc >= 0);
  CHECK(muo.derivable_col[loc] == 1);
}

TEST_CASE("coverage implication is sound against a brute-force oracle") {
  using algebra::PropKey;
  using algebra::QualifiedAtom;
  using algebra::QualifiedConjunction;
  using algebra::QualifiedDnf;
  std::mt19937 rng(5150);
  std::uniform_int_distribution<int> val(0, 4);
  std::uniform_int_distribution<int> nkeys(1, 2);
  std::uniform_int_distribution<int> natoms(0, 3);
  std::uniform_int_distribution<int> opi(0, 5);
  const PredAtom::Op ops[] = {PredAtom::Op::Eq, PredAtom::Op::Ne, PredAtom::Op::Lt,
                              PredAtom::Op::Le, PredAtom::Op::Gt, PredAtom::Op::Ge};
  const PropKey keys[] = {{"K", "a"}, {"K", "b"}};

  auto holds = [](const QualifiedAtom& atom, int a, int b) {
    const int x = atom.key.path == "a" ? a : b;
    const int lit = static_cast<int>(atom.literal.as_int());
    switch (atom.op) {
      case PredAtom::Op::Eq: return x == lit;
      case PredAtom::Op::Ne: return x != lit;
      case PredAtom::Op::Lt: return x < lit;
      case PredAtom::Op::Le: return x <= lit;
      case PredAtom::Op::Gt: return x > lit;
      case PredAtom::Op::Ge: return x >= lit;
      default: return false;
    }
  };
  auto conj_holds = [&](const QualifiedConjunction& c, int a, int b) {
    for (const auto& atom : c.atoms)
      if (!holds(atom, a, b)) return false;
    return true;
  };

  int covered_count = 0;
  for (int round = 0; round < 2000; ++round) {
    auto random_conj = [&]() {
      QualifiedConjunction c;
      const int n = natoms(rng);
      for (int i = 0; i < n; ++i)
        c.atoms.push_back(QualifiedAtom{ops[opi(rng)], keys[nkeys(rng) - 1],
                                        Value::integer(val(rng))});
      return c;
    };
    const QualifiedConjunction j = random_conj();
    const QualifiedConjunction sel = random_conj();
    QualifiedDnf dnf;
    dnf.disjuncts.push_back(sel);
    const bool checker = conjunction_covered(j, {dnf});
    bool oracle = true;
    for (int x = 0; x <= 4 && oracle; ++x)
      for (int y = 0; y <= 4 && oracle; ++y)
        if (conj_holds(j, x, y) && !conj_holds(sel, x, y)) oracle = false;
    if (checker) {
      CHECK(oracle);  // sound: the checker never over-approximates coverage
      ++covered_count;
    }
  }
  CHECK(covered_count > 50);  // the conservative checker still fires often
}

TEST_CASE("cycles terminate, are reported, and can be overridden") {
  const char* text = R"(
source {
    interface X {
        attribute Short v;
        Boolean f();
        Boolean g();
        Boolean h();
        Boolean k();
        Boolean m();
        method f() uses properties {v} methods {X::g};
        method g() uses properties {v} methods {X::f};
        method h() uses properties {v} methods {X::k};
        method k() uses properties {v} methods {X::m};
        method m() uses properties {v} methods {X::h};
    }
}

interface W {
}
mapping project [o.v] (o X)
)";
  auto compiled = dsl::compile(dsl::parse_schema(text));
  REQUIRE(compiled.diagnostics.empty());
  auto a = analyze_behavior(compiled.warehouse, compiled.source);
  // Two- and three-cycles: every member locally fine yet none derivable.
  for (const char* name : {"f", "g", "h", "k", "m"}) {
    const MethodVerdict* v = a.find(name);
    REQUIRE(v != nullptr);
    CHECK_FALSE(v->derivable);
  }
  CHECK_FALSE(a.cycles.empty());
  bool fg_cycle = false;
  for (const auto& c : a.cycles)
    if ((c.a == "X::f" && c.b == "X::g") || (c.a == "X::g" && c.b == "X::f")) fg_cycle = true;
  CHECK(fg_cycle);
  const MethodVerdict* f = a.find("f");
  CHECK((f->missing == std::set<std::string>{"g"}));

  // The administrator override breaks the two-cycle.
  auto forced = analyze_behavior(compiled.warehouse, compiled.source, {"g"});
  CHECK(forced.find("f")->derivable);
  CHECK(forced.find("g")->derivable);
  CHECK_FALSE(forced.find("h")->derivable);
}

namespace {

UsageMatrix random_matrix(std::mt19937& rng) {
  std::uniform_int_distribution<int> nrows(1, 15);
  std::uniform_int_distribution<int> ncols(1, 25);
  std::uniform_int_distribution<int> bit(0, 9);
  UsageMatrix m;
  m.kind = UsageMatrix::Kind::MUP;
  const int r = nrows(rng), c = ncols(rng);
  for (int i = 0; i < r; ++i) m.rows.push_back("m" + std::to_string(i));
  for (int j = 0; j < c; ++j) m.cols.push_back("p" + std::to_string(j));
  m.cells.assign(r, std::vector<int>(c, 0));
  for (auto& row : m.cells)
    for (auto& cell : row) cell = bit(rng) < 3 ? 1 : 0;
  for (int j = 0; j < c; ++j) m.derived_row.push_back(bit(rng) < 5 ? 1 : 0);
  m.derivable_col.assign(r, -1);
  return m;
}

}  // namespace

TEST_CASE("optimization never changes a local verdict (120 random matrices)") {
  std::mt19937 rng(808);
  for (int round = 0; round < 120; ++round) {
    UsageMatrix before = random_matrix(rng);
    UsageMatrix after = optimize(before);
    for (std::size_t i = 0; i < before.rows.size(); ++i) {
      auto missing_before = analyse_locale(i, before);
      auto missing_after = analyse_locale(i, after);
      REQUIRE(before.derivable_col[i] == after.derivable_col[i]);
      REQUIRE(missing_before == missing_after);
    }
  }
}

TEST_CASE("derivability is monotone in the Derive row (120 random flips)") {
  std::mt19937 rng(4242);
  for (int round = 0; round < 120; ++round) {
    UsageMatrix m = random_matrix(rng);
    UsageMatrix more = m;
    std::uniform_int_distribution<std::size_t> pick(0, m.cols.size() - 1);
    more.derived_row[pick(rng)] = 1;
    for (std::size_t i = 0; i < m.rows.size(); ++i) {
      auto missing = analyse_locale(i, m);
      auto missing_more = analyse_locale(i, more);
      for (const auto& x : missing_more) REQUIRE(missing.count(x) == 1);
      REQUIRE(more.derivable_col[i] >= m.derivable_col[i]);
    }
  }
}

TEST_CASE("global analysis terminates on random call graphs") {
  std::mt19937 rng(31337);
  std::uniform_int_distribution<int> n_dist(1, 12);
  std::uniform_int_distribution<int> bit(0, 9);
  for (int round = 0; round < 100; ++round) {
    const int n = n_dist(rng);
    UsageMatrix mum;
    mum.kind = UsageMatrix::Kind::MUM;
    for (int i = 0; i < n; ++i) {
      mum.rows.push_back("m" + std::to_string(i));
      mum.cols.push_back("m" + std::to_string(i));
    }
    mum.cells.assign(n, std::vector<int>(n, 0));
    for (auto& row : mum.cells)
      for (auto& cell : row) cell = bit(rng) < 3 ? 1 : 0;
    for (int j = 0; j < n; ++j) mum.derived_row.push_back(bit(rng) < 2 ? 0 : -1);
    mum.derivable_col.assign(n, -1);
    std::vector<CycleNote> cycles;
    for (int i = 0; i < n; ++i) {
      std::vector<int> visite(n, 0);
      analyse_globale(i, mum, visite, cycles);
    }
    for (int i = 0; i < n; ++i) {
      REQUIRE(mum.derivable_col[i] >= 0);
      REQUIRE(mum.derived_row[i] >= 0);
    }
    // Consistency: a derivable row only uses methods whose Derive entry is 1.
    for (int i = 0; i < n; ++i) {
      if (mum.derivable_col[i] != 1) continue;
      for (int j = 0; j < n; ++j)
        if (mum.cells[i][j] == 1) REQUIRE(mum.derived_row[j] == 1);
    }
  }
}

TEST_CASE("matrix CSV emit and re-parse is exact") {
  auto compiled = annex();
  auto a = analyze_behavior(compiled.warehouse, compiled.source);
  for (const auto& lm : a.locals) {
    for (const UsageMatrix* m : {&lm.mup, &lm.muo}) {
      const std::string csv = matrix_to_csv(*m);
      UsageMatrix parsed = matrix_from_csv(csv);
      CHECK(parsed.rows == m->rows);
      CHECK(parsed.cols == m->cols);
      CHECK(parsed.cells == m->cells);
      CHECK(parsed.derived_row == m->derived_row);
      CHECK(parsed.derivable_col == m->derivable_col);
      CHECK(matrix_to_csv(parsed) == csv);
    }
  }
  const std::string csv = matrix_to_csv(a.mum);
  CHECK(matrix_to_csv(matrix_from_csv(csv)) == csv);
  CHECK_THROWS_AS(matrix_from_csv("not,a,matrix"), Error);
}

TEST_CASE("the report names verdicts and missing sets") {
  auto compiled = annex();
  auto a = analyze_behavior(compiled.warehouse, compiled.source);
  const std::string report = format_report(a, false);
  CHECK(report.find("cout_secu: MISSING {montant_remb}") != std::string::npos);
  CHECK(report.find("age: DERIVABLE") != std::string::npos);
  CHECK(report.find("est_rural: MISSING {PERSONNEadresse.code}") != std::string::npos);
  CHECK(report.find("derivable: 8/13") != std::string::npos);
}
