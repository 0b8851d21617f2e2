#include "wdw/store_io.hpp"

#include <fstream>
#include <sstream>

#include "json.hpp"

namespace wdw::io {

using nlohmann::ordered_json;
using temporal::TemporalDomain;

namespace {

ordered_json value_to_json(const Value& v) {
  switch (v.kind()) {
    case Value::Kind::Null: return nullptr;
    case Value::Kind::Boolean: return v.as_bool();
    case Value::Kind::Integer: return v.as_int();
    case Value::Kind::Float: return v.as_float();
    case Value::Kind::Text: return v.as_text();
    case Value::Kind::Ref: return ordered_json{{"$ref", v.as_ref().oid}};
    case Value::Kind::Struct: {
      ordered_json out = ordered_json::object();
      for (const auto& [k, f] : v.fields()) out[k] = value_to_json(f);
      return out;
    }
    case Value::Kind::Set: {
      ordered_json members = ordered_json::array();
      for (const auto& m : v.members()) members.push_back(value_to_json(m));
      return ordered_json{{"$set", members}};
    }
    case Value::Kind::List: {
      ordered_json out = ordered_json::array();
      for (const auto& m : v.members()) out.push_back(value_to_json(m));
      return out;
    }
  }
  return nullptr;
}

Value value_from_json(const ordered_json& j) {
  if (j.is_null()) return Value::null();
  if (j.is_boolean()) return Value::boolean(j.get<bool>());
  if (j.is_number_integer() || j.is_number_unsigned()) return Value::integer(j.get<std::int64_t>());
  if (j.is_number_float()) return Value::real(j.get<double>());
  if (j.is_string()) return Value::text(j.get<std::string>());
  if (j.is_array()) {
    std::vector<Value> members;
    for (const auto& m : j) members.push_back(value_from_json(m));
    return Value::list(std::move(members));
  }
  if (j.is_object()) {
    if (j.size() == 1 && j.contains("$ref")) return Value::ref(j["$ref"].get<std::string>());
    if (j.size() == 1 && j.contains("$set")) {
      std::vector<Value> members;
      for (const auto& m : j["$set"]) members.push_back(value_from_json(m));
      return Value::set(std::move(members));
    }
    StructFields fields;
    for (const auto& [k, f] : j.items()) fields.emplace_back(k, value_from_json(f));
    return Value::structure(std::move(fields));
  }
  raise(Errc::IoError, "unsupported JSON value");
}

ordered_json parse_json(const std::string& text, const char* what) {
  ordered_json j = ordered_json::parse(text, nullptr, false);
  if (j.is_discarded()) raise(Errc::IoError, std::string("malformed JSON in ") + what);
  return j;
}

// --- snapshot decoding ---

Value decode_attr(const ordered_json& j, const SemType& type, const std::string& where);

Value decode_struct(const ordered_json& j, const SemType& type, const std::string& where) {
  if (!j.is_object()) raise(Errc::IoError, where + ": expected an object");
  StructFields fields;
  for (const auto& [fname, ftype] : type.struct_fields) {
    if (j.contains(fname))
      fields.emplace_back(fname, decode_attr(j[fname], ftype, where + "." + fname));
    else
      fields.emplace_back(fname, Value::null());
  }
  for (const auto& [k, unused] : j.items()) {
    (void)unused;
    if (!type.field_type(k)) raise(Errc::IoError, where + ": unknown struct field '" + k + "'");
  }
  return Value::structure(std::move(fields));
}

Value decode_attr(const ordered_json& j, const SemType& type, const std::string& where) {
  if (j.is_null()) return Value::null();
  switch (type.kind) {
    case SemType::Kind::Boolean:
      if (!j.is_boolean()) raise(Errc::IoError, where + ": expected a boolean");
      return Value::boolean(j.get<bool>());
    case SemType::Kind::Integer:
      if (!j.is_number_integer() && !j.is_number_unsigned())
        raise(Errc::IoError, where + ": expected an integer");
      return Value::integer(j.get<std::int64_t>());
    case SemType::Kind::Float:
      if (!j.is_number()) raise(Errc::IoError, where + ": expected a number");
      return Value::real(j.get<double>());
    case SemType::Kind::Text:
      if (!j.is_string()) raise(Errc::IoError, where + ": expected a string");
      return Value::text(j.get<std::string>());
    case SemType::Kind::Ref:
      if (!j.is_string()) raise(Errc::IoError, where + ": expected an oid string");
      return Value::ref(j.get<std::string>());
    case SemType::Kind::Struct:
      return decode_struct(j, type, where);
    case SemType::Kind::Set:
    case SemType::Kind::List: {
      if (!j.is_array()) raise(Errc::IoError, where + ": expected an array");
      std::vector<Value> members;
      const SemType elem = type.element ? *type.element : SemType::any();
      for (const auto& m : j) members.push_back(decode_attr(m, elem, where + "[]"));
      return type.kind == SemType::Kind::Set ? Value::set(std::move(members))
                                             : Value::list(std::move(members));
    }
    case SemType::Kind::Any:
      return value_from_json(j);
  }
  return Value::null();
}

void check_references(const SourceSnapshot& snap, const SourceSchema& schema) {
  for (const auto& [cls_name, objs] : snap.objects) {
    const auto props = schema.flattened_properties(cls_name);
    for (const auto& o : objs) {
      for (const auto& p : props) {
        if (!p.is_relationship) continue;
        const Value* v = o.value.field(p.name);
        if (!v || v->is_null()) continue;
        auto check_oid = [&](const Value& ref) {
          if (ref.kind() != Value::Kind::Ref) return;
          const SourceObject* target = snap.find_object(ref.as_ref().oid);
          if (!target)
            raise(Errc::DanglingRef, o.oid + "." + p.name + " references unknown oid '" +
                                         ref.as_ref().oid + "'");
          // Declared inverse must point back.
          if (p.inverse.empty()) return;
          const std::string inv_prop = p.inverse.substr(p.inverse.find("::") + 2);
          const Value* back = target->value.field(inv_prop);
          bool ok = false;
          if (back) {
            if (back->kind() == Value::Kind::Ref) ok = back->as_ref().oid == o.oid;
            if (back->is_collection())
              for (const auto& m : back->members())
                if (m.kind() == Value::Kind::Ref && m.as_ref().oid == o.oid) ok = true;
          }
          if (!ok)
            raise(Errc::DanglingRef, o.oid + "." + p.name + " -> " + ref.as_ref().oid +
                                         " has no consistent inverse " + p.inverse);
        };
        if (v->kind() == Value::Kind::Ref) check_oid(*v);
        if (v->is_collection())
          for (const auto& m : v->members()) check_oid(m);
      }
    }
  }
}

}  // namespace

SourceSnapshot parse_snapshot(const std::string& json_text, const SourceSchema& schema) {
  const ordered_json j = parse_json(json_text, "snapshot");
  SourceSnapshot snap;
  snap.schema = &schema;
  if (!j.contains("at") || !j["at"].is_string())
    raise(Errc::IoError, "snapshot needs an 'at' instant");
  snap.at = temporal::parse_instant(j["at"].get<std::string>());
  if (j.contains("classes")) {
    for (const auto& [cls_name, arr] : j["classes"].items()) {
      const SourceClass* cls = schema.find_class(cls_name);
      if (!cls) raise(Errc::UnknownClass, "snapshot class " + cls_name + " not in the source schema");
      const auto props = schema.flattened_properties(cls_name);
      auto& bucket = snap.objects[cls_name];
      for (const auto& obj : arr) {
        if (!obj.is_object() || !obj.contains("oid"))
          raise(Errc::IoError, "snapshot object of " + cls_name + " lacks an oid");
        SourceObject so;
        so.oid = obj["oid"].get<std::string>();
        StructFields fields;
        for (const auto& p : props) {
          if (obj.contains(p.name))
            fields.emplace_back(p.name, decode_attr(obj[p.name], p.type, so.oid + "." + p.name));
          else
            fields.emplace_back(p.name, Value::null());
        }
        for (const auto& [k, unused] : obj.items()) {
          (void)unused;
          if (k != "oid" && !find_property(props, k))
            raise(Errc::IoError, so.oid + ": unknown property '" + k + "'");
        }
        so.value = Value::structure(std::move(fields));
        bucket.push_back(std::move(so));
      }
    }
  }
  check_references(snap, schema);
  return snap;
}

SourceSnapshot load_snapshot(const std::string& path, const SourceSchema& schema) {
  return parse_snapshot(read_file(path), schema);
}

namespace {

ordered_json state_to_json(const model::State& s) {
  return ordered_json{{"value", value_to_json(s.value)}, {"domain", temporal::format_domain(s.domain)}};
}

model::State state_from_json(const ordered_json& j) {
  model::State s;
  s.value = value_from_json(j.at("value"));
  s.domain = temporal::parse_domain(j.at("domain").get<std::string>());
  return s;
}

}  // namespace

std::string store_to_json(const model::Store& store) {
  ordered_json j;
  j["schema_hash"] = store.schema_hash;
  j["schema"] = store.schema_text;
  ordered_json ticks = ordered_json::object();
  for (const auto& [env, at] : store.last_ticks) ticks[env] = temporal::format_instant(at);
  j["last_ticks"] = ticks;
  ordered_json classes = ordered_json::object();
  for (const auto& [name, ext] : store.classes) {
    ordered_json cj;
    // Hierarchy extensions only reference their owners' objects.
    bool shared = false;
    for (const auto& o : ext.objects)
      if (o->oid.rfind(name + "#", 0) != 0) shared = true;
    if (shared) {
      ordered_json members = ordered_json::array();
      for (const auto& o : ext.objects) members.push_back(o->oid);
      cj["members"] = members;
    } else {
      cj["next_oid"] = ext.next_oid;
      ordered_json objects = ordered_json::array();
      for (const auto& o : ext.objects) {
        ordered_json oj;
        oj["oid"] = o->oid;
        oj["lineage_key"] = value_to_json(o->lineage);
        oj["current"] = o->current ? state_to_json(*o->current) : ordered_json(nullptr);
        ordered_json past = ordered_json::array();
        for (const auto& s : o->past) past.push_back(state_to_json(s));
        oj["past"] = past;
        ordered_json archived = ordered_json::array();
        for (const auto& s : o->archived) archived.push_back(state_to_json(s));
        oj["archived"] = archived;
        objects.push_back(std::move(oj));
      }
      cj["objects"] = objects;
    }
    classes[name] = std::move(cj);
  }
  j["classes"] = classes;
  return j.dump(2) + "\n";
}

model::Store parse_store(const std::string& json_text) {
  const ordered_json j = parse_json(json_text, "store");
  model::Store store;
  store.schema_hash = j.value("schema_hash", "");
  store.schema_text = j.value("schema", "");
  if (model::fnv1a_hash(store.schema_text) != store.schema_hash)
    raise(Errc::SchemaMismatch, "store schema hash does not match its embedded schema");
  if (j.contains("last_ticks"))
    for (const auto& [env, at] : j["last_ticks"].items())
      store.last_ticks[env] = temporal::parse_instant(at.get<std::string>());
  std::vector<std::pair<std::string, std::vector<std::string>>> pending_members;
  if (j.contains("classes")) {
    for (const auto& [name, cj] : j["classes"].items()) {
      auto& ext = store.classes[name];
      if (cj.contains("members")) {
        std::vector<std::string> oids;
        for (const auto& m : cj["members"]) oids.push_back(m.get<std::string>());
        pending_members.emplace_back(name, std::move(oids));
        continue;
      }
      ext.next_oid = cj.value("next_oid", 1);
      if (!cj.contains("objects")) continue;
      for (const auto& oj : cj["objects"]) {
        auto obj = std::make_shared<model::WarehouseObject>();
        obj->oid = oj.at("oid").get<std::string>();
        obj->lineage = value_from_json(oj.at("lineage_key"));
        if (!oj.at("current").is_null()) obj->current = state_from_json(oj.at("current"));
        for (const auto& sj : oj.at("past")) obj->past.push_back(state_from_json(sj));
        for (const auto& sj : oj.at("archived")) obj->archived.push_back(state_from_json(sj));
        ext.objects.push_back(std::move(obj));
      }
    }
  }
  for (auto& [name, oids] : pending_members) {
    auto& ext = store.classes[name];
    for (const auto& oid : oids) {
      std::shared_ptr<model::WarehouseObject> found;
      for (const auto& [other, other_ext] : store.classes) {
        if (other == name) continue;
        for (const auto& o : other_ext.objects)
          if (o->oid == oid) found = o;
        if (found) break;
      }
      if (!found) raise(Errc::DanglingRef, "store member '" + oid + "' of " + name + " not found");
      ext.objects.push_back(std::move(found));
    }
  }
  return store;
}

model::Store load_store(const std::string& path) { return parse_store(read_file(path)); }

void save_store(const model::Store& store, const std::string& path) {
  write_file(path, store_to_json(store));
}

std::vector<refresh::Tick> parse_tickscript(const std::string& json_text) {
  const ordered_json j = parse_json(json_text, "tick script");
  if (!j.is_array()) raise(Errc::IoError, "tick script must be a JSON array");
  std::vector<refresh::Tick> ticks;
  for (const auto& tj : j) {
    refresh::Tick t;
    if (!tj.contains("at") || !tj.contains("snapshot_path"))
      raise(Errc::IoError, "tick needs 'at' and 'snapshot_path'");
    t.at = temporal::parse_instant(tj["at"].get<std::string>());
    t.snapshot_path = tj["snapshot_path"].get<std::string>();
    t.environment = tj.value("environment", "");
    t.archive = tj.value("archive", false);
    ticks.push_back(std::move(t));
  }
  return ticks;
}

std::vector<refresh::Tick> load_tickscript(const std::string& path) {
  return parse_tickscript(read_file(path));
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) raise(Errc::IoError, "cannot read " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) raise(Errc::IoError, "cannot write " + path);
  out << content;
  if (!out) raise(Errc::IoError, "write failed for " + path);
}

}  // namespace wdw::io
