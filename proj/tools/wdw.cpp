#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <set>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "wdw/analyzer.hpp"
#include "wdw/archive.hpp"
#include "wdw/dsl.hpp"
#include "wdw/model.hpp"
#include "wdw/refresh.hpp"
#include "wdw/store_io.hpp"

namespace {

bool color_enabled() {
  const char* v = std::getenv("WDW_COLOR");
  return v != nullptr && std::string(v) == "1";
}

int print_diagnostics(const std::vector<wdw::model::Diagnostic>& diags) {
  for (const auto& d : diags) std::cout << d.where << ": " << d.message << "\n";
  return diags.empty() ? 0 : 1;
}

wdw::dsl::CompiledSchema schema_from_store(const wdw::model::Store& store) {
  auto compiled = wdw::dsl::compile(wdw::dsl::parse_schema(store.schema_text));
  if (!compiled.diagnostics.empty())
    wdw::raise(wdw::Errc::SchemaMismatch, "store schema no longer compiles cleanly");
  return compiled;
}

void print_refresh_report(const wdw::refresh::RefreshReport& report) {
  for (const auto& [cls, c] : report.per_class)
    std::cout << cls << ": created " << c.created << ", historized " << c.historized
              << ", updated " << c.updated << ", unchanged " << c.unchanged << ", retired "
              << c.retired << "\n";
}

void print_archive_report(const std::string& env, const wdw::archive::ArchiveReport& report) {
  for (const auto& p : report.per_class)
    std::cout << env << "/" << p.cls << ": consumed " << p.consumed << ", produced " << p.produced
              << "\n";
}

int cmd_validate(const std::string& schema_path) {
  auto compiled = wdw::dsl::load_schema_file(schema_path);
  if (compiled.diagnostics.empty()) {
    std::cout << "ok: " << compiled.warehouse.classes.size() << " warehouse classes, "
              << compiled.source.classes().size() << " source classes\n";
    return 0;
  }
  return print_diagnostics(compiled.diagnostics);
}

int cmd_build(const std::string& schema_path, const std::string& snapshot_path,
              const std::string& at, const std::string& out_path) {
  auto compiled = wdw::dsl::load_schema_file(schema_path);
  if (!compiled.diagnostics.empty()) return print_diagnostics(compiled.diagnostics);
  auto snapshot = wdw::io::load_snapshot(snapshot_path, compiled.source);
  const auto t0 = at.empty() ? snapshot.at : wdw::temporal::parse_instant(at);
  auto store = wdw::refresh::initial_build(compiled.warehouse, snapshot, t0, compiled.canonical_text);
  wdw::io::save_store(store, out_path);
  std::int64_t n = 0;
  for (const auto& [cls, ext] : store.classes) n += static_cast<std::int64_t>(ext.objects.size());
  std::cout << "built " << out_path << " at " << wdw::temporal::format_instant(t0) << " ("
            << n << " extension entries)\n";
  return 0;
}

int cmd_refresh(const std::string& store_path, const std::string& snapshot_path,
                const std::string& at, const std::string& env) {
  auto store = wdw::io::load_store(store_path);
  auto compiled = schema_from_store(store);
  auto snapshot = wdw::io::load_snapshot(snapshot_path, compiled.source);
  const auto t = at.empty() ? snapshot.at : wdw::temporal::parse_instant(at);
  const std::string* env_filter = env.empty() ? nullptr : &env;
  auto report = wdw::refresh::refresh(store, compiled.warehouse, snapshot, t, env_filter);
  wdw::io::save_store(store, store_path);
  print_refresh_report(report);
  return 0;
}

int cmd_run(const std::string& store_path, const std::string& ticks_path) {
  auto store = wdw::io::load_store(store_path);
  auto compiled = schema_from_store(store);
  auto ticks = wdw::io::load_tickscript(ticks_path);
  const auto base = std::filesystem::path(ticks_path).parent_path();
  auto loader = [&](const std::string& path) {
    std::filesystem::path p(path);
    if (p.is_relative()) p = base / p;
    return wdw::io::load_snapshot(p.string(), compiled.source);
  };
  auto run = wdw::refresh::run_schedule(store, compiled.warehouse, ticks, loader);
  wdw::io::save_store(store, store_path);
  for (const auto& [tick, report] : run.refreshes) {
    std::cout << "tick " << wdw::temporal::format_instant(tick.at) << "\n";
    print_refresh_report(report);
  }
  for (const auto& [env, report] : run.archives) print_archive_report(env, report);
  return 0;
}

int cmd_archive(const std::string& store_path, const std::string& env_name) {
  auto store = wdw::io::load_store(store_path);
  auto compiled = schema_from_store(store);
  const wdw::model::Environment* env = compiled.warehouse.find_environment(env_name);
  if (!env) wdw::raise(wdw::Errc::Usage, "unknown environment " + env_name);
  auto report = wdw::archive::apply_archive(*env, compiled.warehouse, store);
  wdw::io::save_store(store, store_path);
  print_archive_report(env_name, report);
  return 0;
}

int cmd_analyze(const std::string& schema_path, const std::string& csv_dir,
                const std::vector<std::string>& assume) {
  auto compiled = wdw::dsl::load_schema_file(schema_path);
  if (!compiled.diagnostics.empty()) return print_diagnostics(compiled.diagnostics);
  std::set<std::string> assumed(assume.begin(), assume.end());
  auto analysis = wdw::analyzer::analyze_behavior(compiled.warehouse, compiled.source, assumed);
  std::cout << wdw::analyzer::format_report(analysis, color_enabled());
  if (!csv_dir.empty()) {
    std::filesystem::create_directories(csv_dir);
    const std::filesystem::path dir(csv_dir);
    for (const auto& lm : analysis.locals) {
      wdw::io::write_file((dir / ("MUP_" + lm.mup.owner + ".csv")).string(),
                          wdw::analyzer::matrix_to_csv(lm.mup));
      wdw::io::write_file((dir / ("MUO_" + lm.muo.owner + ".csv")).string(),
                          wdw::analyzer::matrix_to_csv(lm.muo));
    }
    wdw::io::write_file((dir / "MUM.csv").string(), wdw::analyzer::matrix_to_csv(analysis.mum));
    std::cout << "matrices written to " << csv_dir << "\n";
  }
  return analysis.cycles.empty() ? 0 : 1;
}

int cmd_inspect(const std::string& store_path, const std::string& cls_name, const std::string& oid,
                const std::string& prop) {
  auto store = wdw::io::load_store(store_path);
  auto compiled = schema_from_store(store);
  const wdw::model::WarehouseClass* cls = compiled.warehouse.find_class(cls_name);
  if (!cls) wdw::raise(wdw::Errc::Usage, "unknown class " + cls_name);
  auto it = store.classes.find(cls_name);
  if (it == store.classes.end()) {
    std::cout << cls_name << ": empty extension\n";
    return 0;
  }
  for (const auto& obj : it->second.objects) {
    if (!oid.empty() && obj->oid != oid) continue;
    std::cout << obj->oid << (obj->retired() ? " (retired)" : "") << " lineage "
              << obj->lineage.to_string() << "\n";
    if (!prop.empty()) {
      for (const auto& [domain, value] : wdw::model::history(*obj, *cls, prop))
        std::cout << "  " << prop << " " << wdw::temporal::format_domain(domain) << " = "
                  << value.to_string() << "\n";
      continue;
    }
    if (obj->current)
      std::cout << "  current " << wdw::temporal::format_domain(obj->current->domain) << " = "
                << obj->current->value.to_string() << "\n";
    for (const auto& s : obj->past)
      std::cout << "  past    " << wdw::temporal::format_domain(s.domain) << " = "
                << s.value.to_string() << "\n";
    for (const auto& s : obj->archived)
      std::cout << "  archive " << wdw::temporal::format_domain(s.domain) << " = "
                << s.value.to_string() << "\n";
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"temporal object warehouse engine"};
  app.require_subcommand(1);

  std::string schema_path, snapshot_path, store_path, out_path, at, env, ticks_path, csv_dir;
  std::string cls_name, oid, prop;
  std::vector<std::string> assume;

  auto* validate = app.add_subcommand("validate", "check a schema document");
  validate->add_option("schema", schema_path)->required();

  auto* build = app.add_subcommand("build", "build a warehouse store from a snapshot");
  build->add_option("schema", schema_path)->required();
  build->add_option("snapshot", snapshot_path)->required();
  build->add_option("--at", at, "build instant (defaults to the snapshot's)");
  build->add_option("-o,--out", out_path)->required();

  auto* refresh_cmd = app.add_subcommand("refresh", "apply one refresh tick");
  refresh_cmd->add_option("store", store_path)->required();
  refresh_cmd->add_option("snapshot", snapshot_path)->required();
  refresh_cmd->add_option("--at", at);
  refresh_cmd->add_option("--env", env);

  auto* run = app.add_subcommand("run", "apply a tick script");
  run->add_option("store", store_path)->required();
  run->add_option("ticks", ticks_path)->required();

  auto* archive_cmd = app.add_subcommand("archive", "fold past states into archived states");
  archive_cmd->add_option("store", store_path)->required();
  archive_cmd->add_option("--env", env)->required();

  auto* analyze = app.add_subcommand("analyze", "usage-matrix derivability analysis");
  analyze->add_option("schema", schema_path)->required();
  analyze->add_option("--csv", csv_dir, "directory for MUP/MUO/MUM CSV files");
  analyze->add_option("--assume-derivable", assume, "treat a method as derivable (cycle override)");

  auto* inspect = app.add_subcommand("inspect", "print state histories");
  inspect->add_option("store", store_path)->required();
  inspect->add_option("--class", cls_name)->required();
  inspect->add_option("--oid", oid);
  inspect->add_option("--property", prop);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);  // --help
    app.exit(e);
    return 2;
  }

  try {
    if (validate->parsed()) return cmd_validate(schema_path);
    if (build->parsed()) return cmd_build(schema_path, snapshot_path, at, out_path);
    if (refresh_cmd->parsed()) return cmd_refresh(store_path, snapshot_path, at, env);
    if (run->parsed()) return cmd_run(store_path, ticks_path);
    if (archive_cmd->parsed()) return cmd_archive(store_path, env);
    if (analyze->parsed()) return cmd_analyze(schema_path, csv_dir, assume);
    if (inspect->parsed()) return cmd_inspect(store_path, cls_name, oid, prop);
  } catch (const wdw::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 2;
}
