#pragma once

#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "wdw/predicate.hpp"
#include "wdw/source_schema.hpp"

namespace wdw::algebra {

struct MappingExpr;
using ExprPtr = std::shared_ptr<const MappingExpr>;

struct AugmentBinding {
  enum class Source { AggCall, MethodCall, SpecificType };
  enum class AggFn { Count, Sum, Avg, Max, Min };

  std::string new_prop;
  Source source{Source::SpecificType};
  AggFn fn{AggFn::Count};
  std::string path;    // AggCall: collection path inside the operand object
  std::string method;  // MethodCall: "CLASS::method"
  SemType type;        // SpecificType

  friend bool operator==(const AugmentBinding&, const AugmentBinding&) = default;
};

const char* agg_fn_name(AugmentBinding::AggFn fn);

struct Binding {
  std::string var;
  ExprPtr expr;
};

// AST over the twelve construction functions. ClassRef leaves name source
// classes, except as operands of Generalize/Specialize, which reference
// already-built warehouse classes and may only appear outermost.
struct MappingExpr {
  enum class Kind {
    ClassRef,
    Project,
    Mask,
    Augment,
    Select,
    Join,
    Nest,
    Unnest,
    Union,
    Intersect,
    Diff,
    Generalize,
    Specialize,
  };

  Kind kind{Kind::ClassRef};
  std::string class_name;                 // ClassRef
  std::vector<std::string> props;         // Project/Mask/Unnest/Nest group/Generalize
  std::string attr_name;                  // Nest
  std::vector<AugmentBinding> bindings;   // Augment
  Dnf pred;                               // Select/Join/Specialize
  std::vector<Binding> operands;
};

ExprPtr class_ref(std::string name);
ExprPtr project(std::vector<std::string> props, Binding in);
ExprPtr mask(std::vector<std::string> props, Binding in);
ExprPtr augment(std::vector<AugmentBinding> bindings, Binding in);
ExprPtr select(Dnf pred, Binding in);
ExprPtr join(Dnf pred, Binding left, Binding right);
ExprPtr nest(std::vector<std::string> group_props, std::string attr_name, Binding in);
ExprPtr unnest(std::vector<std::string> props, Binding in);
ExprPtr set_union(Binding a, Binding b);
ExprPtr set_intersect(Binding a, Binding b);
ExprPtr set_diff(Binding a, Binding b);
ExprPtr generalize(std::vector<std::string> props, std::vector<Binding> operands);
ExprPtr specialize(Dnf pred, std::vector<Binding> operands);

/// Qualified source property: declaring class plus dotted path.
struct PropKey {
  std::string cls;
  std::string path;
  friend auto operator<=>(const PropKey&, const PropKey&) = default;
};

/// Selection constraint kept for the object-usage analysis: a DNF whose atom
/// paths are qualified source properties. A conjunction is opaque when some
/// of its atoms could not be reduced to (path op literal) form.
struct QualifiedAtom {
  PredAtom::Op op{PredAtom::Op::Eq};
  PropKey key;
  Value literal;
  friend bool operator==(const QualifiedAtom&, const QualifiedAtom&) = default;
};
struct QualifiedConjunction {
  std::vector<QualifiedAtom> atoms;
  bool opaque = false;
};
struct QualifiedDnf {
  std::vector<QualifiedConjunction> disjuncts;
};

// Structural outcome of a mapping: the warehouse class structure, the
// qualified properties available in the warehouse ("Derive" row input),
// the involved source classes, and the selection constraints.
struct MappingInfo {
  std::vector<Property> structure;
  std::set<PropKey> derived_struct;   // structurally extracted properties
  std::set<PropKey> fused_rels;       // relationships fused away by joins
  std::set<std::string> new_props;    // synthesized property names
  std::set<std::string> involved;     // source classes, transitive supers included
  std::vector<QualifiedDnf> selections;
  bool source_extracting = false;
  std::vector<std::string> warehouse_operands;  // Generalize/Specialize refs

  std::set<PropKey> derived() const;
  /// True when `key` or a struct prefix of it is derived.
  bool is_derived(const PropKey& key) const;
};

struct EvalObject {
  Value lineage;
  std::optional<std::string> self_oid;  // source identity, when still traceable
  Value value;                          // Struct over the result structure
};

struct EvalResult {
  MappingInfo info;
  std::vector<EvalObject> objects;
};

/// Already-evaluated warehouse classes, for Generalize/Specialize operands.
using WarehouseExtensions = std::map<std::string, EvalResult>;

/// Structure-only evaluation: no object data needed.
MappingInfo analyze_mapping(const ExprPtr& expr, const SourceSchema& schema,
                            const WarehouseExtensions* warehouse = nullptr);

/// Full evaluation over a snapshot. `warehouse` supplies the extensions of
/// previously built classes for hierarchy operands.
EvalResult eval(const ExprPtr& expr, const SourceSnapshot& snapshot,
                const WarehouseExtensions* warehouse = nullptr);

/// Source classes a mapping reads, plus their transitive superclasses.
std::set<std::string> involved_source_classes(const ExprPtr& expr, const SourceSchema& schema);

std::string format_expr(const ExprPtr& expr);

}  // namespace wdw::algebra
