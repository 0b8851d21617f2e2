#include "wdw/value.hpp"

#include <algorithm>
#include <cstdio>

namespace wdw {

namespace {

const StructFields kNoFields{};
const std::vector<Value> kNoMembers{};

std::string format_double(double d) {
  char buf[64];
  // Shortest representation that round-trips.
  std::snprintf(buf, sizeof buf, "%.17g", d);
  double back = 0;
  std::sscanf(buf, "%lf", &back);
  for (int prec = 1; prec < 17; ++prec) {
    char probe[64];
    std::snprintf(probe, sizeof probe, "%.*g", prec, d);
    std::sscanf(probe, "%lf", &back);
    if (back == d) return probe;
  }
  return buf;
}

}  // namespace

Value Value::structure(StructFields fields) {
  auto v = std::make_shared<StructV>();
  v->fields = std::move(fields);
  return Value(Data{std::shared_ptr<const StructV>(std::move(v))});
}

Value Value::set(std::vector<Value> members) {
  std::sort(members.begin(), members.end(),
            [](const Value& a, const Value& b) { return compare(a, b) < 0; });
  members.erase(std::unique(members.begin(), members.end(),
                            [](const Value& a, const Value& b) { return compare(a, b) == 0; }),
                members.end());
  auto v = std::make_shared<SetV>();
  v->members = std::move(members);
  return Value(Data{std::shared_ptr<const SetV>(std::move(v))});
}

Value Value::list(std::vector<Value> members) {
  auto v = std::make_shared<ListV>();
  v->members = std::move(members);
  return Value(Data{std::shared_ptr<const ListV>(std::move(v))});
}

double Value::as_number() const {
  if (kind() == Kind::Integer) return static_cast<double>(as_int());
  if (kind() == Kind::Float) return as_float();
  raise(Errc::TypeMismatch, "value " + to_string() + " is not numeric");
}

const StructFields& Value::fields() const {
  if (kind() != Kind::Struct) return kNoFields;
  return std::get<std::shared_ptr<const StructV>>(data_)->fields;
}

const std::vector<Value>& Value::members() const {
  if (kind() == Kind::Set) return std::get<std::shared_ptr<const SetV>>(data_)->members;
  if (kind() == Kind::List) return std::get<std::shared_ptr<const ListV>>(data_)->members;
  return kNoMembers;
}

const Value* Value::field(const std::string& name) const {
  if (kind() != Kind::Struct) return nullptr;
  for (const auto& [k, v] : fields())
    if (k == name) return &v;
  return nullptr;
}

void Value::set_field(const std::string& name, Value v) {
  StructFields copy = fields();
  bool found = false;
  for (auto& [k, old] : copy) {
    if (k == name) {
      old = std::move(v);
      found = true;
      break;
    }
  }
  if (!found) copy.emplace_back(name, std::move(v));
  *this = structure(std::move(copy));
}

int Value::compare(const Value& a, const Value& b) {
  const int ka = static_cast<int>(a.kind());
  const int kb = static_cast<int>(b.kind());
  if (ka != kb) return ka < kb ? -1 : 1;
  switch (a.kind()) {
    case Kind::Null:
      return 0;
    case Kind::Boolean:
      return a.as_bool() == b.as_bool() ? 0 : (a.as_bool() < b.as_bool() ? -1 : 1);
    case Kind::Integer:
      return a.as_int() == b.as_int() ? 0 : (a.as_int() < b.as_int() ? -1 : 1);
    case Kind::Float:
      return a.as_float() == b.as_float() ? 0 : (a.as_float() < b.as_float() ? -1 : 1);
    case Kind::Text:
      return a.as_text().compare(b.as_text()) < 0 ? -1 : (a.as_text() == b.as_text() ? 0 : 1);
    case Kind::Ref:
      return a.as_ref().oid.compare(b.as_ref().oid) < 0 ? -1
                                                        : (a.as_ref() == b.as_ref() ? 0 : 1);
    case Kind::Struct: {
      const auto& fa = a.fields();
      const auto& fb = b.fields();
      const std::size_t n = std::min(fa.size(), fb.size());
      for (std::size_t i = 0; i < n; ++i) {
        if (int c = fa[i].first.compare(fb[i].first); c != 0) return c < 0 ? -1 : 1;
        if (int c = compare(fa[i].second, fb[i].second); c != 0) return c;
      }
      return fa.size() == fb.size() ? 0 : (fa.size() < fb.size() ? -1 : 1);
    }
    case Kind::Set:
    case Kind::List: {
      const auto& ma = a.members();
      const auto& mb = b.members();
      const std::size_t n = std::min(ma.size(), mb.size());
      for (std::size_t i = 0; i < n; ++i)
        if (int c = compare(ma[i], mb[i]); c != 0) return c;
      return ma.size() == mb.size() ? 0 : (ma.size() < mb.size() ? -1 : 1);
    }
  }
  return 0;
}

std::string Value::to_string() const {
  switch (kind()) {
    case Kind::Null:
      return "null";
    case Kind::Boolean:
      return as_bool() ? "true" : "false";
    case Kind::Integer:
      return std::to_string(as_int());
    case Kind::Float:
      return format_double(as_float());
    case Kind::Text:
      return "\"" + as_text() + "\"";
    case Kind::Ref:
      return "@" + as_ref().oid;
    case Kind::Struct: {
      std::string out = "{";
      bool first = true;
      for (const auto& [k, v] : fields()) {
        if (!first) out += ", ";
        first = false;
        out += k + ": " + v.to_string();
      }
      return out + "}";
    }
    case Kind::Set:
    case Kind::List: {
      std::string out = kind() == Kind::Set ? "set(" : "list(";
      bool first = true;
      for (const auto& v : members()) {
        if (!first) out += ", ";
        first = false;
        out += v.to_string();
      }
      return out + ")";
    }
  }
  return "?";
}

const SemType* SemType::field_type(const std::string& name) const {
  if (kind != Kind::Struct) return nullptr;
  for (const auto& [k, t] : struct_fields)
    if (k == name) return &t;
  return nullptr;
}

std::string SemType::to_string() const {
  switch (kind) {
    case Kind::Boolean: return "Boolean";
    case Kind::Integer: return "Short";
    case Kind::Float: return "Double";
    case Kind::Text: return "String";
    case Kind::Any: return "Any";
    case Kind::Ref: return class_name;
    case Kind::Set: return "Set<" + (element ? element->to_string() : "Any") + ">";
    case Kind::List: return "List<" + (element ? element->to_string() : "Any") + ">";
    case Kind::Struct: {
      std::string out = "Struct " + class_name + "{";
      bool first = true;
      for (const auto& [k, t] : struct_fields) {
        if (!first) out += ", ";
        first = false;
        out += t.to_string() + " " + k;
      }
      return out + "}";
    }
  }
  return "?";
}

bool same_type(const SemType& a, const SemType& b) {
  if (a.kind != b.kind) return false;
  switch (a.kind) {
    case SemType::Kind::Ref:
      return a.class_name == b.class_name;
    case SemType::Kind::Set:
    case SemType::Kind::List:
      if (!a.element || !b.element) return !a.element == !b.element;
      return same_type(*a.element, *b.element);
    case SemType::Kind::Struct: {
      if (a.struct_fields.size() != b.struct_fields.size()) return false;
      for (std::size_t i = 0; i < a.struct_fields.size(); ++i) {
        if (a.struct_fields[i].first != b.struct_fields[i].first) return false;
        if (!same_type(a.struct_fields[i].second, b.struct_fields[i].second)) return false;
      }
      return true;
    }
    default:
      return true;
  }
}

}  // namespace wdw
