#include "wdw/archive.hpp"

#include <algorithm>

namespace wdw::archive {

using model::AggFn;
using model::State;
using temporal::TemporalDomain;

std::vector<std::size_t> select_for_archive(const model::WarehouseObject& o,
                                            const model::ArchivePredicate& pred) {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < o.past.size(); ++i)
    if (model::predicate_holds(pred, o.past[i].domain)) out.push_back(i);
  return out;
}

namespace {

Value fold(AggFn fn, const std::string& prop, const std::vector<const State*>& states) {
  if (fn == AggFn::Count) return Value::integer(static_cast<std::int64_t>(states.size()));
  bool all_int = true;
  double acc = 0;
  double best = 0;
  std::int64_t acc_int = 0;
  for (std::size_t i = 0; i < states.size(); ++i) {
    const Value* v = states[i]->value.field(prop);
    if (!v || !v->is_numeric())
      raise(Errc::NonNumericAgg, "archived property '" + prop + "' has a non-numeric sample");
    if (v->kind() != Value::Kind::Integer) all_int = false;
    const double x = v->as_number();
    if (i == 0) best = x;
    acc += x;
    if (v->kind() == Value::Kind::Integer) acc_int += v->as_int();
    if (fn == AggFn::Max) best = std::max(best, x);
    if (fn == AggFn::Min) best = std::min(best, x);
  }
  switch (fn) {
    case AggFn::Sum:
      return all_int ? Value::integer(acc_int) : Value::real(acc);
    case AggFn::Avg:
      return Value::real(acc / static_cast<double>(states.size()));
    case AggFn::Max:
    case AggFn::Min:
      return all_int ? Value::integer(static_cast<std::int64_t>(best)) : Value::real(best);
    default:
      return Value::null();
  }
}

Value folded_value(const std::vector<std::pair<std::string, AggFn>>& filter,
                   const std::vector<const State*>& states) {
  StructFields fields;
  for (const auto& [prop, fn] : filter) fields.emplace_back(prop, fold(fn, prop, states));
  return Value::structure(std::move(fields));
}

}  // namespace

State archive_classical(const std::vector<State>& states,
                        const std::vector<std::pair<std::string, AggFn>>& filter) {
  if (states.empty()) raise(Errc::EmptyInput, "classical archiving needs at least one state");
  std::vector<const State*> ptrs;
  std::vector<temporal::Interval> intervals;
  for (const auto& s : states) {
    ptrs.push_back(&s);
    intervals.insert(intervals.end(), s.domain.intervals().begin(), s.domain.intervals().end());
  }
  return State{folded_value(filter, ptrs), TemporalDomain::normalize(std::move(intervals))};
}

std::vector<State> archive_temporal(const std::vector<State>& states,
                                    const std::vector<std::pair<std::string, AggFn>>& filter,
                                    temporal::Unit target_unit) {
  if (states.empty()) raise(Errc::EmptyInput, "temporal archiving needs at least one state");
  std::vector<TemporalDomain> domains;
  for (const auto& s : states) domains.push_back(s.domain);
  std::vector<State> out;
  for (const auto& [grain, members] : temporal::group_by_grain(domains, target_unit)) {
    std::vector<const State*> ptrs;
    for (std::size_t i : members) ptrs.push_back(&states[i]);
    out.push_back(State{folded_value(filter, ptrs),
                        TemporalDomain::normalize({temporal::make_interval(grain, grain)})});
  }
  return out;
}

std::int64_t ArchiveReport::total_consumed() const {
  std::int64_t n = 0;
  for (const auto& p : per_class) n += p.consumed;
  return n;
}

std::int64_t ArchiveReport::total_produced() const {
  std::int64_t n = 0;
  for (const auto& p : per_class) n += p.produced;
  return n;
}

ArchiveReport apply_archive(const model::Environment& env, const model::WarehouseSchema& schema,
                            model::Store& store) {
  ArchiveReport report;
  if (!env.config.archive_predicate) return report;
  const auto& pred = *env.config.archive_predicate;
  for (const auto& cls_name : env.classes) {
    ArchiveReport::PerClass entry{cls_name, 0, 0};
    const model::WarehouseClass* cls = schema.find_class(cls_name);
    if (!cls || cls->hierarchy_class() || cls->archive_filter.empty()) {
      report.per_class.push_back(entry);
      continue;
    }
    auto it = store.classes.find(cls_name);
    if (it == store.classes.end()) {
      report.per_class.push_back(entry);
      continue;
    }
    for (auto& obj : it->second.objects) {
      const auto selected = select_for_archive(*obj, pred);
      if (selected.empty()) continue;
      std::vector<State> chosen;
      for (std::size_t i : selected) chosen.push_back(obj->past[i]);
      std::vector<State> produced;
      if (env.config.archive_mode == model::ArchiveMode::Temporal) {
        if (!env.config.target_unit)
          raise(Errc::NotCoarser, "temporal archive mode without a target unit");
        produced = archive_temporal(chosen, cls->archive_filter, *env.config.target_unit);
      } else {
        produced.push_back(archive_classical(chosen, cls->archive_filter));
      }
      // Remove the consumed states, back to front.
      for (auto r = selected.rbegin(); r != selected.rend(); ++r)
        obj->past.erase(obj->past.begin() + static_cast<std::ptrdiff_t>(*r));
      for (auto& s : produced) obj->archived.push_back(std::move(s));
      entry.consumed += static_cast<std::int64_t>(selected.size());
      entry.produced += static_cast<std::int64_t>(produced.size());
    }
    report.per_class.push_back(entry);
  }
  return report;
}

}  // namespace wdw::archive
