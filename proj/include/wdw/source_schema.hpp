#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "wdw/predicate.hpp"
#include "wdw/temporal.hpp"
#include "wdw/value.hpp"

namespace wdw {

// One property of a class structure. `declared_in` / `source_path` keep the
// provenance of extracted properties through renaming and projection, which
// the usage-matrix builder aligns on; both are empty for synthesized
// properties (augmented attributes, nest collections).
struct Property {
  std::string name;
  SemType type;
  std::string declared_in;
  std::string source_path;
  bool is_relationship = false;
  std::string inverse;  // "CLASS::prop" or ""

  static Property attribute(std::string name, SemType type, std::string cls) {
    Property p;
    p.name = name;
    p.type = std::move(type);
    p.declared_in = std::move(cls);
    p.source_path = std::move(name);
    return p;
  }
  static Property synthesized(std::string name, SemType type) {
    Property p;
    p.name = std::move(name);
    p.type = std::move(type);
    return p;
  }
};

const Property* find_property(const std::vector<Property>& props, const std::string& name);
std::vector<std::string> property_names(const std::vector<Property>& props);

/// Declared method usage facts: the analyzer's input, kept as metadata.
struct MethodMeta {
  std::string name;
  SemType return_type = SemType::real();
  bool has_usage = false;
  std::vector<std::string> uses_properties;  // dotted paths within the class
  Dnf objects_where;                         // empty = no object predicate
  std::vector<std::string> uses_methods;     // "CLASS::method"
};

struct SourceClass {
  std::string name;
  std::vector<std::string> supers;  // direct
  std::vector<Property> own_properties;
  std::vector<MethodMeta> own_methods;
};

class SourceSchema {
 public:
  void add_class(SourceClass cls);

  const std::vector<SourceClass>& classes() const { return classes_; }
  const SourceClass* find_class(const std::string& name) const;
  bool has_class(const std::string& name) const { return find_class(name) != nullptr; }

  /// Transitive superclasses, nearest first. Throws UnknownClass.
  std::vector<std::string> all_supers(const std::string& name) const;
  /// Direct and transitive subclasses.
  std::vector<std::string> subclasses(const std::string& name) const;

  /// Inherited-first flattened structure of a class.
  std::vector<Property> flattened_properties(const std::string& name) const;

  /// Resolves a dotted usage path against a class (walking its supers) to the
  /// declaring class. Returns false when the root property does not exist.
  bool qualify_path(const std::string& cls, const std::string& dotted_path, std::string& declared_in,
                    std::string& source_path) const;

  const MethodMeta* find_method(const std::string& cls, const std::string& method) const;
  /// All methods of a class, inherited included, as (declaring class, meta).
  std::vector<std::pair<std::string, const MethodMeta*>> methods_of(const std::string& cls) const;

 private:
  std::vector<SourceClass> classes_;
};

struct SourceObject {
  std::string oid;
  Value value;  // Struct over the object's own class flattened structure
};

struct SourceSnapshot {
  temporal::Instant at;
  const SourceSchema* schema = nullptr;
  std::map<std::string, std::vector<SourceObject>> objects;  // by most-specific class

  /// Extension of a class including subclass objects, each projected onto the
  /// class's flattened structure. Deterministic: declaration order, then
  /// object order.
  std::vector<SourceObject> extension_of(const std::string& cls) const;

  const SourceObject* find_object(const std::string& oid) const;
};

}  // namespace wdw
