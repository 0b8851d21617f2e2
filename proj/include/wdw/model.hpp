#pragma once

#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "wdw/algebra.hpp"
#include "wdw/temporal.hpp"
#include "wdw/value.hpp"

namespace wdw::model {

/// A value together with the instants during which it was current.
struct State {
  Value value;
  temporal::TemporalDomain domain;

  friend bool operator==(const State&, const State&) = default;
};

// Historized unit of extraction: current state, detailed past states and
// summarized archived states. A retired object (its source counterpart
// disappeared) has no current state; its history is kept.
struct WarehouseObject {
  std::string oid;
  Value lineage;
  std::optional<State> current;
  std::vector<State> past;
  std::vector<State> archived;

  bool retired() const { return !current.has_value(); }
};

enum class AggFn { Avg, Sum, Count, Max, Min };
const char* agg_fn_name(AggFn fn);
std::optional<AggFn> agg_fn_from_name(std::string_view name);

struct WarehouseClass {
  std::string name;
  algebra::ExprPtr mapping;
  std::vector<Property> structure;  // computed from the mapping
  std::vector<std::string> supers;  // computed hierarchy edges
  std::vector<std::string> tempo_filter;
  std::vector<std::pair<std::string, AggFn>> archive_filter;
  algebra::MappingInfo info;  // cached structural analysis

  bool is_temporal(const std::string& prop) const;
  bool hierarchy_class() const;  // outermost Generalize/Specialize mapping
};

// Archive predicates hold on a state's WHOLE temporal domain:
//   within i      every grain inside i's cover
//   not within i  no grain inside i's cover
//   before i      every grain before i's cover
struct ArchivePredicate {
  struct Term {
    enum class Kind { Within, NotWithin, Before };
    Kind kind{Kind::Within};
    temporal::Instant instant;
    friend bool operator==(const Term&, const Term&) = default;
  };
  std::vector<Term> terms;  // conjunction

  friend bool operator==(const ArchivePredicate&, const ArchivePredicate&) = default;
};

bool predicate_holds(const ArchivePredicate& pred, const temporal::TemporalDomain& domain);
std::string format_archive_predicate(const ArchivePredicate& pred);

enum class ArchiveMode { Classical, Temporal };

struct EnvironmentConfig {
  std::optional<std::pair<std::int64_t, temporal::Unit>> refresh_period;
  std::optional<ArchivePredicate> archive_predicate;
  ArchiveMode archive_mode = ArchiveMode::Classical;
  std::optional<temporal::Unit> target_unit;  // temporal mode
};

struct Environment {
  std::string name;
  std::vector<std::string> classes;
  EnvironmentConfig config;
};

struct WarehouseSchema {
  std::string name = "warehouse";
  std::vector<WarehouseClass> classes;      // declaration order
  std::vector<Environment> environments;
  std::pair<std::int64_t, temporal::Unit> default_refresh{1, temporal::Unit::Mois};

  const WarehouseClass* find_class(const std::string& name) const;
  WarehouseClass* find_class(const std::string& name);
  const Environment* find_environment(const std::string& name) const;
  const Environment* environment_of(const std::string& cls) const;
  std::pair<std::int64_t, temporal::Unit> refresh_period_for(const std::string& cls) const;
  temporal::Unit state_unit_for(const std::string& cls) const;

  /// Class names in mapping dependency order (hierarchy operands first).
  /// Throws DependencyCycle.
  std::vector<std::string> evaluation_order() const;
};

struct Diagnostic {
  std::string where;
  std::string message;
};

std::vector<Diagnostic> validate_schema(const WarehouseSchema& schema, const SourceSchema& source);

// --- object store -------------------------------------------------------------

struct ClassExtension {
  // Hierarchy classes share the owning class's objects; ordinary classes own
  // theirs.
  std::vector<std::shared_ptr<WarehouseObject>> objects;
  std::int64_t next_oid = 1;
};

struct Store {
  std::string schema_text;  // canonical schema document
  std::string schema_hash;
  std::map<std::string, ClassExtension> classes;
  std::map<std::string, temporal::Instant> last_ticks;  // per environment

  std::shared_ptr<WarehouseObject> find_object(const std::string& cls, const std::string& oid) const;
  std::string fresh_oid(const std::string& cls);
};

/// The unique non-archived state containing t, else null. Unit-checked.
const State* state_at(const WarehouseObject& o, const temporal::Instant& t);

/// Chronological (domain, value-of-p) pairs, past states first, then current.
/// Non-temporal properties yield the current pair only.
std::vector<std::pair<temporal::TemporalDomain, Value>> history(const WarehouseObject& o,
                                                                const WarehouseClass& cls,
                                                                const std::string& prop);

/// Structural invariants of one object (domain disjointness, state shapes).
std::vector<Diagnostic> check_object(const WarehouseObject& o, const WarehouseClass& cls);

std::string fnv1a_hash(std::string_view text);

}  // namespace wdw::model
