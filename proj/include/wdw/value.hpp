#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "wdw/errors.hpp"

namespace wdw {

class Value;

/// Object identity reference; the oid is opaque text.
struct Ref {
  std::string oid;
  friend auto operator<=>(const Ref&, const Ref&) = default;
};

using StructFields = std::vector<std::pair<std::string, Value>>;

// Structural values: Null, Boolean, Integer, Float, Text, Struct (ordered
// fields), SetOf (canonically sorted, duplicate-free), ListOf, Ref.
// Copies are cheap: composite payloads are shared and copied on write.
class Value {
 public:
  enum class Kind { Null, Boolean, Integer, Float, Text, Struct, Set, List, Ref };

  Value() : data_(std::monostate{}) {}
  static Value null() { return Value(); }
  static Value boolean(bool b) { return Value(Data{b}); }
  static Value integer(std::int64_t i) { return Value(Data{i}); }
  static Value real(double d) { return Value(Data{d}); }
  static Value text(std::string s) { return Value(Data{std::move(s)}); }
  static Value ref(std::string oid) { return Value(Data{Ref{std::move(oid)}}); }
  static Value structure(StructFields fields);
  static Value set(std::vector<Value> members);  // sorts and dedups
  static Value list(std::vector<Value> members);

  Kind kind() const { return static_cast<Kind>(data_.index()); }
  bool is_null() const { return kind() == Kind::Null; }
  bool is_numeric() const { return kind() == Kind::Integer || kind() == Kind::Float; }
  bool is_collection() const { return kind() == Kind::Set || kind() == Kind::List; }

  bool as_bool() const { return std::get<bool>(data_); }
  std::int64_t as_int() const { return std::get<std::int64_t>(data_); }
  double as_float() const { return std::get<double>(data_); }
  /// Integer or Float, widened to double. Throws TypeMismatch otherwise.
  double as_number() const;
  const std::string& as_text() const { return std::get<std::string>(data_); }
  const Ref& as_ref() const { return std::get<Ref>(data_); }
  const StructFields& fields() const;
  const std::vector<Value>& members() const;

  /// Struct field lookup; nullptr when absent (or not a Struct).
  const Value* field(const std::string& name) const;
  /// Adds or replaces a Struct field (copy-on-write).
  void set_field(const std::string& name, Value v);

  friend bool operator==(const Value& a, const Value& b) { return compare(a, b) == 0; }
  friend bool operator!=(const Value& a, const Value& b) { return compare(a, b) != 0; }
  friend bool operator<(const Value& a, const Value& b) { return compare(a, b) < 0; }

  /// Total order: by kind rank, then content. Used for canonical sets.
  static int compare(const Value& a, const Value& b);

  std::string to_string() const;

 private:
  struct StructV {
    StructFields fields;
  };
  struct SetV {
    std::vector<Value> members;
  };
  struct ListV {
    std::vector<Value> members;
  };
  using Data = std::variant<std::monostate, bool, std::int64_t, double, std::string,
                            std::shared_ptr<const StructV>, std::shared_ptr<const SetV>,
                            std::shared_ptr<const ListV>, Ref>;
  explicit Value(Data d) : data_(std::move(d)) {}
  Data data_;
};

/// Semantic types for class structures.
struct SemType {
  enum class Kind { Boolean, Integer, Float, Text, Struct, Set, List, Ref, Any };

  Kind kind{Kind::Any};
  std::string class_name;  // Ref target class, or a Struct's type tag
  std::vector<std::pair<std::string, SemType>> struct_fields;
  std::shared_ptr<SemType> element;  // Set / List

  static SemType boolean() { return {Kind::Boolean, {}, {}, nullptr}; }
  static SemType integer() { return {Kind::Integer, {}, {}, nullptr}; }
  static SemType real() { return {Kind::Float, {}, {}, nullptr}; }
  static SemType text() { return {Kind::Text, {}, {}, nullptr}; }
  static SemType any() { return {Kind::Any, {}, {}, nullptr}; }
  static SemType ref(std::string cls) { return {Kind::Ref, std::move(cls), {}, nullptr}; }
  static SemType structure(std::string tag, std::vector<std::pair<std::string, SemType>> fields) {
    return {Kind::Struct, std::move(tag), std::move(fields), nullptr};
  }
  static SemType set_of(SemType elem) {
    return {Kind::Set, {}, {}, std::make_shared<SemType>(std::move(elem))};
  }
  static SemType list_of(SemType elem) {
    return {Kind::List, {}, {}, std::make_shared<SemType>(std::move(elem))};
  }

  bool is_collection() const { return kind == Kind::Set || kind == Kind::List; }

  const SemType* field_type(const std::string& name) const;
  std::string to_string() const;
};

bool same_type(const SemType& a, const SemType& b);

}  // namespace wdw
