#pragma once

#include <optional>
#include <string>
#include <vector>

#include "wdw/algebra.hpp"
#include "wdw/model.hpp"
#include "wdw/source_schema.hpp"

namespace wdw::dsl {

// Schema document AST. The parser keeps declaration order and member order;
// the printer regenerates a canonical layout, so parse-print-parse is a
// fixpoint.
struct DocMember {
  enum class Kind { Attribute, Relationship, MethodSig, MethodUsage };

  Kind kind{Kind::Attribute};
  std::string name;
  SemType type;  // attribute / relationship type, or method return type
  std::string inverse;
  bool has_properties = false;
  std::vector<std::string> uses_properties;
  bool has_methods = false;
  std::vector<std::string> uses_methods;
  bool has_objects = false;
  Dnf objects_where;
};

struct DocInterface {
  std::string name;
  std::vector<std::string> extends;
  std::vector<DocMember> members;
  bool is_source = false;
  bool has_tempo = false;
  std::vector<std::string> tempo_filter;
  bool has_archive = false;
  std::vector<std::pair<std::string, std::string>> archive_filter;  // (fn, prop)
  algebra::ExprPtr mapping;  // null when the interface declares no mapping
};

struct DocEnvironment {
  std::string name;
  std::vector<std::string> classes;
  std::optional<std::pair<std::int64_t, temporal::Unit>> refresh;
  std::optional<model::ArchivePredicate> archive_predicate;
  model::ArchiveMode archive_mode = model::ArchiveMode::Classical;
  std::optional<temporal::Unit> target_unit;
};

struct SchemaDocument {
  std::string warehouse_name;
  bool has_warehouse_block = false;
  std::optional<std::pair<std::int64_t, temporal::Unit>> default_refresh;
  std::vector<DocInterface> source_interfaces;
  std::vector<DocInterface> warehouse_interfaces;
  std::vector<DocEnvironment> environments;
};

/// Parses a schema document; throws SyntaxError with line/column on malformed
/// input. Never crashes on arbitrary bytes.
SchemaDocument parse_schema(const std::string& text);

/// Canonical printer: parse(print(doc)) == doc up to layout.
std::string print_schema(const SchemaDocument& doc);

struct CompiledSchema {
  SourceSchema source;
  model::WarehouseSchema warehouse;
  std::vector<model::Diagnostic> diagnostics;  // resolution problems
  std::string canonical_text;
};

/// Resolves the document into the source schema and the warehouse schema,
/// computing each warehouse class's structure from its mapping.
CompiledSchema compile(const SchemaDocument& doc);

CompiledSchema load_schema_file(const std::string& path);

}  // namespace wdw::dsl
