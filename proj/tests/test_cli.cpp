// End-to-end checks of the command-line driver: exit codes, report content,
// CSV emission, and the store lifecycle.
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <string>

#include "test_util.hpp"
#include "wdw/analyzer.hpp"
#include "wdw/store_io.hpp"

using testutil::fixture_path;

namespace {

struct CliResult {
  int exit_code = -1;
  std::string output;
};

CliResult run_cli(const std::string& args) {
  const char* cli = std::getenv("WDW_CLI");
  REQUIRE(cli != nullptr);
  const std::string cmd = std::string(cli) + " " + args + " 2>&1";
  FILE* pipe = popen(cmd.c_str(), "r");
  REQUIRE(pipe != nullptr);
  CliResult r;
  char buf[512];
  while (std::fgets(buf, sizeof buf, pipe)) r.output += buf;
  const int status = pclose(pipe);
  r.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

struct TempDir {
  std::filesystem::path path;
  TempDir() {
    path = std::filesystem::temp_directory_path() /
           ("wdw_cli_test_" + std::to_string(::getpid()));
    std::filesystem::create_directories(path);
  }
  ~TempDir() { std::filesystem::remove_all(path); }
  std::string file(const std::string& name) const { return (path / name).string(); }
};

}  // namespace

TEST_CASE("validate exits 0 on the annex schema and 1 on diagnostics") {
  CHECK(run_cli("validate " + fixture_path("annex.wdl")).exit_code == 0);

  TempDir tmp;
  wdw::io::write_file(tmp.file("bad.wdl"), R"(
source {
    interface P {
        attribute String nom;
        attribute Short n;
    }
}
interface W {
}
with temporal filter {n},
archive filter {avg(nom)}
mapping project [o.nom, o.n] (o P)
)");
  auto bad = run_cli("validate " + tmp.file("bad.wdl"));
  CHECK(bad.exit_code == 1);
  CHECK(bad.output.find("archive filter not within temporal filter") != std::string::npos);

  auto syntax = run_cli("validate " + fixture_path("histo/ticks.json"));
  CHECK(syntax.exit_code == 2);
}

TEST_CASE("analyze reports the derivability verdicts and writes matrices") {
  TempDir tmp;
  auto r = run_cli("analyze " + fixture_path("annex.wdl") + " --csv " + tmp.file("csv"));
  CHECK(r.exit_code == 0);
  CHECK(r.output.find("cout_secu: MISSING {montant_remb}") != std::string::npos);
  CHECK(r.output.find("age: DERIVABLE") != std::string::npos);
  for (const char* f : {"MUP_Praticien.csv", "MUO_Praticien.csv", "MUP_Prescription.csv",
                        "MUO_Prescription.csv", "MUM.csv"})
    CHECK(std::filesystem::exists(tmp.path / "csv" / f));
  auto mup = wdw::analyzer::matrix_from_csv(
      wdw::io::read_file((tmp.path / "csv" / "MUP_Praticien.csv").string()));
  CHECK(mup.row_index("PERSONNE::age") >= 0);
  CHECK(mup.col_index("annee_n") >= 0);

  // The override resolves nothing here but must be accepted.
  CHECK(run_cli("analyze " + fixture_path("annex.wdl") + " --assume-derivable montant_remb")
            .exit_code == 0);
}

TEST_CASE("build, refresh, archive and inspect round the store lifecycle") {
  TempDir tmp;
  const std::string store = tmp.file("store.json");
  auto built = run_cli("build " + fixture_path("histo/histo.wdl") + " " +
                       fixture_path("histo/snap_01.json") + " --at mois:2000-01 -o " + store);
  CHECK(built.exit_code == 0);

  auto run = run_cli("run " + store + " " + fixture_path("histo/ticks.json"));
  CHECK(run.exit_code == 0);
  CHECK(run.output.find("historized 1") != std::string::npos);

  auto hist = run_cli("inspect " + store + " --class Personne --property ville");
  CHECK(hist.exit_code == 0);
  CHECK(hist.output.find("\"Toulouse\"") != std::string::npos);
  CHECK(hist.output.find("\"Blagnac\"") != std::string::npos);

  auto arch = run_cli("archive " + store + " --env Base");
  CHECK(arch.exit_code == 0);
  CHECK(arch.output.find("consumed 4, produced 1") != std::string::npos);

  // A refresh that does not advance the tick is an error.
  auto stale = run_cli("refresh " + store + " " + fixture_path("histo/snap_06.json") +
                       " --at mois:2000-06");
  CHECK(stale.exit_code == 2);

  auto unknown = run_cli("inspect " + store + " --class Nope");
  CHECK(unknown.exit_code == 2);

  auto usage = run_cli("frobnicate");
  CHECK(usage.exit_code == 2);
}

TEST_CASE("the report honors WDW_COLOR") {
  const char* cli = std::getenv("WDW_CLI");
  REQUIRE(cli != nullptr);
  const std::string plain_cmd = "WDW_COLOR=0 " + std::string(cli) + " analyze " +
                                fixture_path("annex.wdl") + " 2>&1";
  const std::string color_cmd = "WDW_COLOR=1 " + std::string(cli) + " analyze " +
                                fixture_path("annex.wdl") + " 2>&1";
  auto read_all = [](const std::string& cmd) {
    FILE* pipe = popen(cmd.c_str(), "r");
    REQUIRE(pipe != nullptr);
    std::string out;
    char buf[512];
    while (std::fgets(buf, sizeof buf, pipe)) out += buf;
    pclose(pipe);
    return out;
  };
  CHECK(read_all(plain_cmd).find("\x1b[") == std::string::npos);
  CHECK(read_all(color_cmd).find("\x1b[") != std::string::npos);
}

TEST_CASE("identical inputs produce byte-identical reports") {
  const std::string a = run_cli("analyze " + fixture_path("annex.wdl")).output;
  const std::string b = run_cli("analyze " + fixture_path("annex.wdl")).output;
  CHECK(a == b);
  CHECK_FALSE(a.empty());
}
