#include "wdw/source_schema.hpp"

#include <algorithm>

namespace wdw {

const Property* find_property(const std::vector<Property>& props, const std::string& name) {
  for (const auto& p : props)
    if (p.name == name) return &p;
  return nullptr;
}

std::vector<std::string> property_names(const std::vector<Property>& props) {
  std::vector<std::string> names;
  names.reserve(props.size());
  for (const auto& p : props) names.push_back(p.name);
  return names;
}

void SourceSchema::add_class(SourceClass cls) {
  if (find_class(cls.name)) raise(Errc::DuplicateDeclaration, "class " + cls.name + " declared twice");
  classes_.push_back(std::move(cls));
}

const SourceClass* SourceSchema::find_class(const std::string& name) const {
  for (const auto& c : classes_)
    if (c.name == name) return &c;
  return nullptr;
}

std::vector<std::string> SourceSchema::all_supers(const std::string& name) const {
  const SourceClass* cls = find_class(name);
  if (!cls) raise(Errc::UnknownClass, "source class " + name);
  std::vector<std::string> out;
  std::vector<std::string> frontier = cls->supers;
  while (!frontier.empty()) {
    std::string next = frontier.front();
    frontier.erase(frontier.begin());
    if (std::find(out.begin(), out.end(), next) != out.end()) continue;
    out.push_back(next);
    if (const SourceClass* sc = find_class(next)) {
      frontier.insert(frontier.end(), sc->supers.begin(), sc->supers.end());
    }
  }
  return out;
}

std::vector<std::string> SourceSchema::subclasses(const std::string& name) const {
  std::vector<std::string> out;
  for (const auto& c : classes_) {
    if (c.name == name) continue;
    auto sup = all_supers(c.name);
    if (std::find(sup.begin(), sup.end(), name) != sup.end()) out.push_back(c.name);
  }
  return out;
}

std::vector<Property> SourceSchema::flattened_properties(const std::string& name) const {
  const SourceClass* cls = find_class(name);
  if (!cls) raise(Errc::UnknownClass, "source class " + name);
  std::vector<Property> out;
  auto supers = all_supers(name);
  // Root-most supers first, so inherited attributes lead, as in the source
  // listings.
  for (auto it = supers.rbegin(); it != supers.rend(); ++it) {
    const SourceClass* sc = find_class(*it);
    if (!sc) continue;
    for (const auto& p : sc->own_properties)
      if (!find_property(out, p.name)) out.push_back(p);
  }
  for (const auto& p : cls->own_properties)
    if (!find_property(out, p.name)) out.push_back(p);
  return out;
}

bool SourceSchema::qualify_path(const std::string& cls, const std::string& dotted_path,
                                std::string& declared_in, std::string& source_path) const {
  const std::size_t dot = dotted_path.find('.');
  const std::string root = dot == std::string::npos ? dotted_path : dotted_path.substr(0, dot);
  const SourceClass* c = find_class(cls);
  if (!c) return false;
  for (const auto& p : c->own_properties) {
    if (p.name == root) {
      declared_in = cls;
      source_path = dotted_path;
      return true;
    }
  }
  for (const auto& super : all_supers(cls)) {
    const SourceClass* sc = find_class(super);
    if (!sc) continue;
    for (const auto& p : sc->own_properties) {
      if (p.name == root) {
        declared_in = super;
        source_path = dotted_path;
        return true;
      }
    }
  }
  return false;
}

const MethodMeta* SourceSchema::find_method(const std::string& cls, const std::string& method) const {
  const SourceClass* c = find_class(cls);
  if (!c) return nullptr;
  for (const auto& m : c->own_methods)
    if (m.name == method) return &m;
  return nullptr;
}

std::vector<std::pair<std::string, const MethodMeta*>> SourceSchema::methods_of(
    const std::string& cls) const {
  std::vector<std::pair<std::string, const MethodMeta*>> out;
  auto supers = all_supers(cls);
  for (auto it = supers.rbegin(); it != supers.rend(); ++it) {
    if (const SourceClass* sc = find_class(*it))
      for (const auto& m : sc->own_methods) out.emplace_back(*it, &m);
  }
  if (const SourceClass* c = find_class(cls))
    for (const auto& m : c->own_methods) out.emplace_back(cls, &m);
  return out;
}

namespace {

Value project_onto(const Value& full, const std::vector<Property>& props) {
  StructFields fields;
  fields.reserve(props.size());
  for (const auto& p : props) {
    const Value* v = full.field(p.name);
    fields.emplace_back(p.name, v ? *v : Value::null());
  }
  return Value::structure(std::move(fields));
}

}  // namespace

std::vector<SourceObject> SourceSnapshot::extension_of(const std::string& cls) const {
  std::vector<SourceObject> out;
  if (!schema) return out;
  const auto props = schema->flattened_properties(cls);
  std::vector<std::string> members{cls};
  for (const auto& sub : schema->subclasses(cls)) members.push_back(sub);
  // Keep schema declaration order for determinism.
  for (const auto& declared : schema->classes()) {
    if (std::find(members.begin(), members.end(), declared.name) == members.end()) continue;
    auto it = objects.find(declared.name);
    if (it == objects.end()) continue;
    for (const auto& o : it->second) out.push_back({o.oid, project_onto(o.value, props)});
  }
  return out;
}

const SourceObject* SourceSnapshot::find_object(const std::string& oid) const {
  for (const auto& [cls, objs] : objects)
    for (const auto& o : objs)
      if (o.oid == oid) return &o;
  return nullptr;
}

}  // namespace wdw
