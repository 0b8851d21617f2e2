#include "wdw/refresh.hpp"

#include <algorithm>
#include <set>

namespace wdw::refresh {

using model::State;
using model::Store;
using model::WarehouseClass;
using model::WarehouseObject;
using temporal::Instant;
using temporal::TemporalDomain;

namespace {

TemporalDomain open_domain(const Instant& from) {
  return TemporalDomain::normalize({temporal::make_open_interval(from)});
}

/// Current domain with its NOW end closed at `t_minus_1`.
TemporalDomain close_domain(const TemporalDomain& d, const Instant& t_minus_1) {
  std::vector<temporal::Interval> ivs = d.intervals();
  if (ivs.empty() || !ivs.back().open_ended())
    raise(Errc::OpenEnded, "cannot close a domain that does not end in NOW");
  ivs.back() = temporal::make_interval(ivs.back().start, t_minus_1);
  return TemporalDomain::normalize(std::move(ivs));
}

Value project_tempo(const Value& full, const std::vector<std::string>& tempo) {
  StructFields fields;
  for (const auto& p : tempo) {
    const Value* v = full.field(p);
    fields.emplace_back(p, v ? *v : Value::null());
  }
  return Value::structure(std::move(fields));
}

/// Registers a class's live extension for hierarchy operands.
algebra::EvalResult extension_view(const WarehouseClass& cls, const Store& store) {
  algebra::EvalResult r;
  r.info = cls.info;
  r.info.structure = cls.structure;
  auto it = store.classes.find(cls.name);
  if (it == store.classes.end()) return r;
  for (const auto& obj : it->second.objects) {
    if (obj->retired()) continue;
    r.objects.push_back({obj->lineage, obj->oid, obj->current->value});
  }
  return r;
}

std::string lineage_id(const Value& lineage) { return lineage.to_string(); }

void rebuild_hierarchy_extension(const WarehouseClass& cls, const algebra::EvalResult& result,
                                 Store& store, RefreshCounts& counts) {
  auto& ext = store.classes[cls.name];
  std::set<std::string> before;
  for (const auto& o : ext.objects) before.insert(o->oid);
  std::vector<std::shared_ptr<WarehouseObject>> members;
  std::set<std::string> now;
  for (const auto& eo : result.objects) {
    if (!eo.self_oid) continue;  // hierarchy members keep their operand identity
    for (const auto& opname : cls.info.warehouse_operands) {
      if (auto owner = store.find_object(opname, *eo.self_oid)) {
        members.push_back(owner);
        now.insert(owner->oid);
        break;
      }
    }
  }
  for (const auto& oid : now)
    if (!before.count(oid)) ++counts.created;
  for (const auto& oid : before)
    if (!now.count(oid)) ++counts.retired;
  counts.unchanged += static_cast<std::int64_t>(now.size()) - counts.created;
  ext.objects = std::move(members);
}

}  // namespace

model::Store initial_build(const model::WarehouseSchema& schema, const SourceSnapshot& snapshot,
                           const Instant& t0, const std::string& schema_text) {
  Store store;
  store.schema_text = schema_text;
  store.schema_hash = model::fnv1a_hash(schema_text);
  algebra::WarehouseExtensions exts;
  for (const auto& name : schema.evaluation_order()) {
    const WarehouseClass* cls = schema.find_class(name);
    if (!cls || !cls->mapping) continue;
    if (schema.state_unit_for(name) != t0.unit)
      raise(Errc::MixedUnits, "build instant unit differs from the state unit of " + name);
    algebra::EvalResult result = algebra::eval(cls->mapping, snapshot, &exts);
    auto& ext = store.classes[name];
    if (cls->hierarchy_class()) {
      RefreshCounts scratch;
      rebuild_hierarchy_extension(*cls, result, store, scratch);
    } else {
      for (const auto& eo : result.objects) {
        auto obj = std::make_shared<WarehouseObject>();
        obj->oid = store.fresh_oid(name);
        obj->lineage = eo.lineage;
        obj->current = State{eo.value, open_domain(t0)};
        ext.objects.push_back(std::move(obj));
      }
    }
    exts[name] = extension_view(*cls, store);
  }
  store.last_ticks[""] = t0;
  for (const auto& env : schema.environments) store.last_ticks[env.name] = t0;
  return store;
}

RefreshReport refresh(Store& store, const model::WarehouseSchema& schema,
                      const SourceSnapshot& snapshot, const Instant& t,
                      const std::string* env_filter) {
  RefreshReport report;
  // Monotonicity against recorded ticks.
  for (const auto& [env, last] : store.last_ticks) {
    if (env_filter && *env_filter != env) continue;
    if (last.unit == t.unit && last.ticks >= t.ticks)
      raise(Errc::NonMonotonicTick, "tick " + temporal::format_instant(t) +
                                        " does not advance past " + temporal::format_instant(last));
  }
  std::set<std::string> in_scope;
  if (env_filter) {
    const model::Environment* env = schema.find_environment(*env_filter);
    if (!env) raise(Errc::UnknownClass, "unknown environment " + *env_filter);
    in_scope.insert(env->classes.begin(), env->classes.end());
  } else {
    for (const auto& c : schema.classes) in_scope.insert(c.name);
  }

  algebra::WarehouseExtensions exts;
  for (const auto& name : schema.evaluation_order()) {
    const WarehouseClass* cls = schema.find_class(name);
    if (!cls || !cls->mapping) continue;
    if (!in_scope.count(name)) {
      exts[name] = extension_view(*cls, store);
      continue;
    }
    if (schema.state_unit_for(name) != t.unit)
      raise(Errc::MixedUnits, "tick unit differs from the state unit of " + name);
    const Instant t_minus_1{t.unit, t.ticks - 1};
    algebra::EvalResult result = algebra::eval(cls->mapping, snapshot, &exts);
    RefreshCounts& counts = report.per_class[name];
    auto& ext = store.classes[name];
    if (cls->hierarchy_class()) {
      rebuild_hierarchy_extension(*cls, result, store, counts);
      exts[name] = extension_view(*cls, store);
      continue;
    }
    std::map<std::string, const algebra::EvalObject*> incoming;
    for (const auto& eo : result.objects) incoming.emplace(lineage_id(eo.lineage), &eo);
    std::set<std::string> matched;
    for (auto& obj : ext.objects) {
      auto hit = incoming.find(lineage_id(obj->lineage));
      if (hit == incoming.end()) {
        if (!obj->retired()) {
          obj->past.push_back(State{project_tempo(obj->current->value, cls->tempo_filter),
                                    close_domain(obj->current->domain, t_minus_1)});
          obj->current.reset();
          ++counts.retired;
        }
        continue;
      }
      matched.insert(hit->first);
      const Value& fresh = hit->second->value;
      if (obj->retired()) {
        // The source identity reappeared: the object resumes with a new
        // current state; its history stays.
        obj->current = State{fresh, open_domain(t)};
        ++counts.created;
        continue;
      }
      const Value old_tempo = project_tempo(obj->current->value, cls->tempo_filter);
      const Value new_tempo = project_tempo(fresh, cls->tempo_filter);
      if (!cls->tempo_filter.empty() && old_tempo != new_tempo) {
        obj->past.push_back(State{old_tempo, close_domain(obj->current->domain, t_minus_1)});
        obj->current = State{fresh, open_domain(t)};
        ++counts.historized;
      } else if (obj->current->value != fresh) {
        obj->current->value = fresh;
        ++counts.updated;
      } else {
        ++counts.unchanged;
      }
    }
    for (const auto& eo : result.objects) {
      if (matched.count(lineage_id(eo.lineage))) continue;
      auto obj = std::make_shared<WarehouseObject>();
      obj->oid = store.fresh_oid(name);
      obj->lineage = eo.lineage;
      obj->current = State{eo.value, open_domain(t)};
      ext.objects.push_back(std::move(obj));
      ++counts.created;
    }
    exts[name] = extension_view(*cls, store);
  }

  if (env_filter) {
    store.last_ticks[*env_filter] = t;
  } else {
    for (auto& [env, last] : store.last_ticks) last = t;
    store.last_ticks[""] = t;
  }
  return report;
}

RunReport run_schedule(Store& store, const model::WarehouseSchema& schema,
                       const std::vector<Tick>& ticks, const SnapshotLoader& load) {
  RunReport run;
  for (const auto& tick : ticks) {
    // Spacing check against the environment's refresh period.
    std::vector<const model::Environment*> envs;
    if (tick.environment.empty()) {
      for (const auto& e : schema.environments) envs.push_back(&e);
    } else {
      const model::Environment* env = schema.find_environment(tick.environment);
      if (!env) raise(Errc::UnknownClass, "unknown environment " + tick.environment);
      envs.push_back(env);
    }
    for (const auto* env : envs) {
      auto period = schema.default_refresh;
      if (env->config.refresh_period) period = *env->config.refresh_period;
      auto last = store.last_ticks.find(env->name);
      if (last == store.last_ticks.end()) continue;
      const Instant prev = last->second;
      std::int64_t spacing = 0;
      if (prev.unit == period.second && tick.at.unit == period.second) {
        spacing = tick.at.ticks - prev.ticks;
      } else if (temporal::finer_than(tick.at.unit, period.second)) {
        spacing = temporal::coarsen_instant(tick.at, period.second).ticks -
                  temporal::coarsen_instant(prev, period.second).ticks;
      } else {
        raise(Errc::MixedUnits, "tick unit incompatible with the refresh period of " + env->name);
      }
      if (spacing < period.first)
        raise(Errc::ScheduleViolation,
              "tick " + temporal::format_instant(tick.at) + " violates the " +
                  std::to_string(period.first) + " " + temporal::unit_name(period.second) +
                  " refresh period of " + env->name);
    }
    const SourceSnapshot snapshot = load(tick.snapshot_path);
    const std::string* env_filter = tick.environment.empty() ? nullptr : &tick.environment;
    run.refreshes.emplace_back(tick, refresh(store, schema, snapshot, tick.at, env_filter));
    if (tick.archive) {
      for (const auto* env : envs)
        run.archives.emplace_back(env->name, archive::apply_archive(*env, schema, store));
    }
  }
  return run;
}

}  // namespace wdw::refresh
