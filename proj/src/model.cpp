#include "wdw/model.hpp"

#include <algorithm>
#include <cstdio>
#include <functional>
#include <set>

namespace wdw::model {

using temporal::Instant;
using temporal::TemporalDomain;
using temporal::Unit;

const char* agg_fn_name(AggFn fn) {
  switch (fn) {
    case AggFn::Avg: return "avg";
    case AggFn::Sum: return "sum";
    case AggFn::Count: return "count";
    case AggFn::Max: return "max";
    case AggFn::Min: return "min";
  }
  return "?";
}

std::optional<AggFn> agg_fn_from_name(std::string_view name) {
  if (name == "avg") return AggFn::Avg;
  if (name == "sum") return AggFn::Sum;
  if (name == "count") return AggFn::Count;
  if (name == "max") return AggFn::Max;
  if (name == "min") return AggFn::Min;
  return std::nullopt;
}

bool WarehouseClass::is_temporal(const std::string& prop) const {
  return std::find(tempo_filter.begin(), tempo_filter.end(), prop) != tempo_filter.end();
}

bool WarehouseClass::hierarchy_class() const {
  return mapping && (mapping->kind == algebra::MappingExpr::Kind::Generalize ||
                     mapping->kind == algebra::MappingExpr::Kind::Specialize);
}

bool predicate_holds(const ArchivePredicate& pred, const TemporalDomain& domain) {
  if (domain.empty()) return false;
  const Unit u = domain.unit();
  for (const auto& term : pred.terms) {
    TemporalDomain cover;
    if (term.instant.unit == u) {
      cover = TemporalDomain::normalize({temporal::make_interval(term.instant, term.instant)});
    } else if (temporal::finer_than(u, term.instant.unit)) {
      const Instant lo{u, temporal::first_fine_tick(term.instant, u)};
      const Instant hi{u, temporal::last_fine_tick(term.instant, u)};
      cover = TemporalDomain::normalize({temporal::make_interval(lo, hi)});
    } else {
      raise(Errc::MixedUnits, "archive predicate instant unit " +
                                  std::string(temporal::unit_name(term.instant.unit)) +
                                  " is finer than the state unit");
    }
    switch (term.kind) {
      case ArchivePredicate::Term::Kind::Within:
        if (!(domain_difference(domain, cover).empty())) return false;
        break;
      case ArchivePredicate::Term::Kind::NotWithin:
        if (!domain_intersection(domain, cover).empty()) return false;
        break;
      case ArchivePredicate::Term::Kind::Before:
        if (domain.open_ended()) return false;
        if (!(domain.intervals().back().end->ticks < cover.intervals().front().start.ticks))
          return false;
        break;
    }
  }
  return true;
}

std::string format_archive_predicate(const ArchivePredicate& pred) {
  std::string out;
  for (const auto& term : pred.terms) {
    if (!out.empty()) out += " and ";
    switch (term.kind) {
      case ArchivePredicate::Term::Kind::Within: out += "within "; break;
      case ArchivePredicate::Term::Kind::NotWithin: out += "not within "; break;
      case ArchivePredicate::Term::Kind::Before: out += "before "; break;
    }
    out += temporal::format_instant(term.instant);
  }
  return out;
}

const WarehouseClass* WarehouseSchema::find_class(const std::string& name) const {
  for (const auto& c : classes)
    if (c.name == name) return &c;
  return nullptr;
}

WarehouseClass* WarehouseSchema::find_class(const std::string& name) {
  for (auto& c : classes)
    if (c.name == name) return &c;
  return nullptr;
}

const Environment* WarehouseSchema::find_environment(const std::string& name) const {
  for (const auto& e : environments)
    if (e.name == name) return &e;
  return nullptr;
}

const Environment* WarehouseSchema::environment_of(const std::string& cls) const {
  for (const auto& e : environments)
    if (std::find(e.classes.begin(), e.classes.end(), cls) != e.classes.end()) return &e;
  return nullptr;
}

std::pair<std::int64_t, Unit> WarehouseSchema::refresh_period_for(const std::string& cls) const {
  if (const Environment* env = environment_of(cls))
    if (env->config.refresh_period) return *env->config.refresh_period;
  return default_refresh;
}

Unit WarehouseSchema::state_unit_for(const std::string& cls) const {
  return refresh_period_for(cls).second;
}

std::vector<std::string> WarehouseSchema::evaluation_order() const {
  // Topological order over hierarchy operand references.
  std::map<std::string, std::vector<std::string>> deps;
  for (const auto& c : classes) deps[c.name] = c.info.warehouse_operands;
  std::vector<std::string> order;
  std::set<std::string> done, visiting;
  std::function<void(const std::string&)> visit = [&](const std::string& name) {
    if (done.count(name)) return;
    if (visiting.count(name))
      raise(Errc::DependencyCycle, "mapping dependency cycle through " + name);
    visiting.insert(name);
    for (const auto& d : deps[name])
      if (find_class(d)) visit(d);
    visiting.erase(name);
    done.insert(name);
    order.push_back(name);
  };
  for (const auto& c : classes) visit(c.name);
  return order;
}

std::shared_ptr<WarehouseObject> Store::find_object(const std::string& cls,
                                                    const std::string& oid) const {
  auto it = classes.find(cls);
  if (it == classes.end()) return nullptr;
  for (const auto& o : it->second.objects)
    if (o->oid == oid) return o;
  return nullptr;
}

std::string Store::fresh_oid(const std::string& cls) {
  auto& ext = classes[cls];
  return cls + "#" + std::to_string(ext.next_oid++);
}

const State* state_at(const WarehouseObject& o, const Instant& t) {
  if (o.current && o.current->domain.contains(t)) return &*o.current;
  for (const auto& s : o.past)
    if (s.domain.contains(t)) return &s;
  return nullptr;
}

std::vector<std::pair<TemporalDomain, Value>> history(const WarehouseObject& o,
                                                      const WarehouseClass& cls,
                                                      const std::string& prop) {
  if (!find_property(cls.structure, prop))
    raise(Errc::UnknownProperty, "property '" + prop + "' not in class " + cls.name);
  std::vector<std::pair<TemporalDomain, Value>> out;
  if (cls.is_temporal(prop)) {
    for (const auto& s : o.past) {
      const Value* v = s.value.field(prop);
      out.emplace_back(s.domain, v ? *v : Value::null());
    }
  }
  if (o.current) {
    const Value* v = o.current->value.field(prop);
    out.emplace_back(o.current->domain, v ? *v : Value::null());
  }
  return out;
}

namespace {

void check_state_shape(const State& s, const std::vector<std::string>& expect,
                       const std::string& what, const std::string& oid,
                       std::vector<Diagnostic>& out) {
  std::set<std::string> have;
  for (const auto& [k, v] : s.value.fields()) have.insert(k);
  std::set<std::string> want(expect.begin(), expect.end());
  if (have != want)
    out.push_back({oid, what + " state structure differs from its filter"});
}

}  // namespace

std::vector<Diagnostic> check_object(const WarehouseObject& o, const WarehouseClass& cls) {
  std::vector<Diagnostic> out;
  if (o.current && !o.current->domain.open_ended())
    out.push_back({o.oid, "current state domain does not end in NOW"});
  // Pairwise disjoint non-archived domains.
  TemporalDomain seen;
  for (const auto* states : {&o.past}) {
    for (const auto& s : *states) {
      if (s.domain.empty()) {
        out.push_back({o.oid, "past state with empty domain"});
        continue;
      }
      if (!domain_intersection(seen, s.domain).empty())
        out.push_back({o.oid, "overlapping past state domains"});
      seen = domain_union(seen, s.domain);
    }
  }
  if (o.current) {
    if (!domain_intersection(seen, o.current->domain).empty())
      out.push_back({o.oid, "current domain overlaps past states"});
  }
  TemporalDomain archived_seen;
  for (const auto& s : o.archived) {
    if (s.domain.empty()) {
      out.push_back({o.oid, "archived state with empty domain"});
      continue;
    }
    if (!archived_seen.empty() && archived_seen.unit() == s.domain.unit() &&
        !domain_intersection(archived_seen, s.domain).empty())
      out.push_back({o.oid, "overlapping archived state domains"});
    if (archived_seen.empty() || archived_seen.unit() == s.domain.unit())
      archived_seen = domain_union(archived_seen, s.domain);
  }
  std::vector<std::string> tempo = cls.tempo_filter;
  for (const auto& s : o.past) check_state_shape(s, tempo, "past", o.oid, out);
  std::vector<std::string> archi;
  for (const auto& [p, fn] : cls.archive_filter) archi.push_back(p);
  for (const auto& s : o.archived) check_state_shape(s, archi, "archived", o.oid, out);
  return out;
}

namespace {

bool has_cycle(const WarehouseSchema& schema, const std::string& start) {
  std::set<std::string> visiting, done;
  std::function<bool(const std::string&)> visit = [&](const std::string& name) -> bool {
    if (done.count(name)) return false;
    if (visiting.count(name)) return true;
    visiting.insert(name);
    if (const WarehouseClass* c = schema.find_class(name))
      for (const auto& s : c->supers)
        if (visit(s)) return true;
    visiting.erase(name);
    done.insert(name);
    return false;
  };
  return visit(start);
}

bool numeric_or_any(SemType::Kind k) {
  return k == SemType::Kind::Integer || k == SemType::Kind::Float || k == SemType::Kind::Any;
}

void contains_inner_hierarchy(const algebra::ExprPtr& e, bool outermost, bool& bad) {
  const bool fh = e->kind == algebra::MappingExpr::Kind::Generalize ||
                  e->kind == algebra::MappingExpr::Kind::Specialize;
  if (fh && !outermost) bad = true;
  for (const auto& op : e->operands) contains_inner_hierarchy(op.expr, false, bad);
}

}  // namespace

std::vector<Diagnostic> validate_schema(const WarehouseSchema& schema, const SourceSchema& source) {
  std::vector<Diagnostic> out;
  std::set<std::string> names;
  for (const auto& c : schema.classes) {
    if (!names.insert(c.name).second)
      out.push_back({c.name, "duplicate warehouse class declaration"});
  }
  // Inheritance graph must be acyclic and closed.
  for (const auto& c : schema.classes) {
    for (const auto& s : c.supers)
      if (!schema.find_class(s)) out.push_back({c.name, "unknown super class " + s});
    if (has_cycle(schema, c.name)) out.push_back({c.name, "inheritance cycle"});
  }
  for (const auto& c : schema.classes) {
    const auto prop_names = property_names(c.structure);
    for (const auto& p : c.tempo_filter)
      if (std::find(prop_names.begin(), prop_names.end(), p) == prop_names.end())
        out.push_back({c.name, "temporal filter names unknown property " + p});
    for (const auto& [p, fn] : c.archive_filter) {
      if (!c.is_temporal(p))
        out.push_back({c.name, "archive filter not within temporal filter: " + p});
      if (const Property* prop = find_property(c.structure, p)) {
        if ((fn == AggFn::Avg || fn == AggFn::Sum) && !numeric_or_any(prop->type.kind))
          out.push_back({c.name, std::string(agg_fn_name(fn)) + "(" + p + ") needs a numeric property"});
      }
    }
    if (c.mapping) {
      bool inner = false;
      contains_inner_hierarchy(c.mapping, true, inner);
      if (inner)
        out.push_back({c.name, "generalize/specialize allowed only outermost in a mapping"});
    }
    // Super containment on structure.
    for (const auto& s : c.supers) {
      if (const WarehouseClass* sc = schema.find_class(s)) {
        for (const auto& sp : sc->structure)
          if (!find_property(c.structure, sp.name))
            out.push_back({c.name, "missing inherited property " + sp.name + " from " + s});
      }
    }
  }
  // Environments.
  std::map<std::string, std::string> assigned;
  for (const auto& env : schema.environments) {
    for (const auto& cls : env.classes) {
      if (!schema.find_class(cls)) {
        out.push_back({env.name, "environment names unknown class " + cls});
        continue;
      }
      auto [it, fresh] = assigned.emplace(cls, env.name);
      if (!fresh && it->second != env.name)
        out.push_back({env.name, "class " + cls + " already belongs to environment " + it->second});
    }
    if (env.config.archive_mode == ArchiveMode::Temporal) {
      if (!env.config.target_unit) {
        out.push_back({env.name, "temporal archive mode needs a target unit"});
      } else {
        for (const auto& cls : env.classes) {
          if (!schema.find_class(cls)) continue;
          const Unit su = schema.state_unit_for(cls);
          if (!temporal::finer_than(su, *env.config.target_unit))
            out.push_back({env.name, "state unit of " + cls + " is not finer than the archive target unit"});
        }
      }
    }
  }
  // Source method usage metadata must resolve.
  for (const auto& sc : source.classes()) {
    for (const auto& m : sc.own_methods) {
      if (!m.has_usage) continue;
      for (const auto& path : m.uses_properties) {
        std::string cls, sub;
        if (!source.qualify_path(sc.name, path, cls, sub))
          out.push_back({sc.name + "::" + m.name, "usage names unknown property " + path});
      }
      for (const auto& qm : m.uses_methods) {
        const std::size_t sep = qm.find("::");
        if (sep == std::string::npos || !source.find_method(qm.substr(0, sep), qm.substr(sep + 2)))
          out.push_back({sc.name + "::" + m.name, "usage names unknown method " + qm});
      }
    }
  }
  return out;
}

std::string fnv1a_hash(std::string_view text) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : text) {
    h ^= c;
    h *= 1099511628211ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace wdw::model
