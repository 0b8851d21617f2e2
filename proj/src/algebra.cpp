#include "wdw/algebra.hpp"

#include <algorithm>
#include <map>

namespace wdw::algebra {

namespace {

ExprPtr make(MappingExpr e) { return std::make_shared<const MappingExpr>(std::move(e)); }

}  // namespace

ExprPtr class_ref(std::string name) {
  MappingExpr e;
  e.kind = MappingExpr::Kind::ClassRef;
  e.class_name = std::move(name);
  return make(std::move(e));
}

ExprPtr project(std::vector<std::string> props, Binding in) {
  MappingExpr e;
  e.kind = MappingExpr::Kind::Project;
  e.props = std::move(props);
  e.operands.push_back(std::move(in));
  return make(std::move(e));
}

ExprPtr mask(std::vector<std::string> props, Binding in) {
  MappingExpr e;
  e.kind = MappingExpr::Kind::Mask;
  e.props = std::move(props);
  e.operands.push_back(std::move(in));
  return make(std::move(e));
}

ExprPtr augment(std::vector<AugmentBinding> bindings, Binding in) {
  MappingExpr e;
  e.kind = MappingExpr::Kind::Augment;
  e.bindings = std::move(bindings);
  e.operands.push_back(std::move(in));
  return make(std::move(e));
}

ExprPtr select(Dnf pred, Binding in) {
  MappingExpr e;
  e.kind = MappingExpr::Kind::Select;
  e.pred = std::move(pred);
  e.operands.push_back(std::move(in));
  return make(std::move(e));
}

ExprPtr join(Dnf pred, Binding left, Binding right) {
  MappingExpr e;
  e.kind = MappingExpr::Kind::Join;
  e.pred = std::move(pred);
  e.operands.push_back(std::move(left));
  e.operands.push_back(std::move(right));
  return make(std::move(e));
}

ExprPtr nest(std::vector<std::string> group_props, std::string attr_name, Binding in) {
  MappingExpr e;
  e.kind = MappingExpr::Kind::Nest;
  e.props = std::move(group_props);
  e.attr_name = std::move(attr_name);
  e.operands.push_back(std::move(in));
  return make(std::move(e));
}

ExprPtr unnest(std::vector<std::string> props, Binding in) {
  MappingExpr e;
  e.kind = MappingExpr::Kind::Unnest;
  e.props = std::move(props);
  e.operands.push_back(std::move(in));
  return make(std::move(e));
}

namespace {

ExprPtr make_setop(MappingExpr::Kind k, Binding a, Binding b) {
  MappingExpr e;
  e.kind = k;
  e.operands.push_back(std::move(a));
  e.operands.push_back(std::move(b));
  return make(std::move(e));
}

}  // namespace

ExprPtr set_union(Binding a, Binding b) { return make_setop(MappingExpr::Kind::Union, std::move(a), std::move(b)); }
ExprPtr set_intersect(Binding a, Binding b) { return make_setop(MappingExpr::Kind::Intersect, std::move(a), std::move(b)); }
ExprPtr set_diff(Binding a, Binding b) { return make_setop(MappingExpr::Kind::Diff, std::move(a), std::move(b)); }

ExprPtr generalize(std::vector<std::string> props, std::vector<Binding> operands) {
  MappingExpr e;
  e.kind = MappingExpr::Kind::Generalize;
  e.props = std::move(props);
  e.operands = std::move(operands);
  return make(std::move(e));
}

ExprPtr specialize(Dnf pred, std::vector<Binding> operands) {
  MappingExpr e;
  e.kind = MappingExpr::Kind::Specialize;
  e.pred = std::move(pred);
  e.operands = std::move(operands);
  return make(std::move(e));
}

const char* agg_fn_name(AugmentBinding::AggFn fn) {
  switch (fn) {
    case AugmentBinding::AggFn::Count: return "count";
    case AugmentBinding::AggFn::Sum: return "sum";
    case AugmentBinding::AggFn::Avg: return "avg";
    case AugmentBinding::AggFn::Max: return "max";
    case AugmentBinding::AggFn::Min: return "min";
  }
  return "?";
}

std::set<PropKey> MappingInfo::derived() const {
  std::set<PropKey> all = derived_struct;
  all.insert(fused_rels.begin(), fused_rels.end());
  return all;
}

bool MappingInfo::is_derived(const PropKey& key) const {
  auto match = [&](const std::set<PropKey>& s) {
    for (const auto& d : s) {
      if (d.cls != key.cls) continue;
      if (d.path == key.path) return true;
      if (key.path.size() > d.path.size() && key.path.compare(0, d.path.size(), d.path) == 0 &&
          key.path[d.path.size()] == '.')
        return true;
    }
    return false;
  };
  return match(derived_struct) || match(fused_rels);
}

// --- evaluation --------------------------------------------------------------

namespace {

struct Ctx {
  const SourceSchema& schema;
  const SourceSnapshot* snapshot;          // null: structure-only
  const WarehouseExtensions* warehouse;
};

struct PathHit {
  const Property* root = nullptr;
  SemType leaf_type;
  std::string leaf_name;
  std::string sub_path;  // path below the root, "" when the root itself
};

std::vector<std::string> split_path(const std::string& dotted) {
  std::vector<std::string> segs;
  std::size_t pos = 0;
  while (true) {
    std::size_t dot = dotted.find('.', pos);
    if (dot == std::string::npos) {
      segs.push_back(dotted.substr(pos));
      break;
    }
    segs.push_back(dotted.substr(pos, dot - pos));
    pos = dot + 1;
  }
  return segs;
}

std::string join_path(const std::vector<std::string>& segs, std::size_t from) {
  std::string out;
  for (std::size_t i = from; i < segs.size(); ++i) {
    if (!out.empty()) out += '.';
    out += segs[i];
  }
  return out;
}

PathHit resolve_path(const std::vector<Property>& structure, const std::string& dotted,
                     const std::string& where) {
  auto segs = split_path(dotted);
  const Property* root = find_property(structure, segs.front());
  if (!root)
    raise(Errc::UnknownProperty, "property '" + segs.front() + "' not found in " + where);
  PathHit hit;
  hit.root = root;
  const SemType* t = &root->type;
  for (std::size_t i = 1; i < segs.size(); ++i) {
    const SemType* next = t->field_type(segs[i]);
    if (!next)
      raise(Errc::UnknownProperty, "path '" + dotted + "' has no field '" + segs[i] + "' in " + where);
    t = next;
  }
  hit.leaf_type = *t;
  hit.leaf_name = segs.back();
  hit.sub_path = join_path(segs, 1);
  return hit;
}

/// Provenance key of a path rooted at `p`; nullopt for synthesized roots.
std::optional<PropKey> provenance(const Property& p, const std::string& sub_path) {
  if (p.declared_in.empty()) return std::nullopt;
  PropKey key{p.declared_in, p.source_path};
  if (!sub_path.empty()) key.path += "." + sub_path;
  return key;
}

Value value_at(const Value& object, const std::string& dotted) {
  auto segs = split_path(dotted);
  const Value* v = &object;
  for (const auto& seg : segs) {
    if (v->kind() != Value::Kind::Struct) return Value::null();
    const Value* next = v->field(seg);
    if (!next) return Value::null();
    v = next;
  }
  return *v;
}

// --- predicate machinery ---

struct OperandScope {
  std::string var;
  const std::vector<Property>* structure;
  const EvalObject* object = nullptr;
};

const OperandScope* find_scope(const std::vector<OperandScope>& scopes, const std::string& binder,
                               const char* what) {
  if (binder.empty()) {
    if (scopes.size() == 1) return &scopes.front();
    raise(Errc::UnresolvedName, std::string("ambiguous unbound path in ") + what);
  }
  for (const auto& s : scopes)
    if (s.var == binder) return &s;
  raise(Errc::UnresolvedName, "unknown binder '" + binder + "' in " + what);
}

SemType operand_type(const PredOperand& o, const std::vector<OperandScope>& scopes) {
  switch (o.kind) {
    case PredOperand::Kind::Literal:
      switch (o.literal.kind()) {
        case Value::Kind::Boolean: return SemType::boolean();
        case Value::Kind::Integer: return SemType::integer();
        case Value::Kind::Float: return SemType::real();
        case Value::Kind::Text: return SemType::text();
        default: return SemType::any();
      }
    case PredOperand::Kind::Binder:
      find_scope(scopes, o.binder, "predicate");
      return SemType::ref("");
    case PredOperand::Kind::Path: {
      const OperandScope* s = find_scope(scopes, o.binder, "predicate");
      return resolve_path(*s->structure, join_path(o.path, 0), "predicate operand").leaf_type;
    }
  }
  return SemType::any();
}

bool numeric_kind(SemType::Kind k) { return k == SemType::Kind::Integer || k == SemType::Kind::Float; }

void typecheck_atom(const PredAtom& a, const std::vector<OperandScope>& scopes) {
  const SemType lt = operand_type(a.lhs, scopes);
  const SemType rt = operand_type(a.rhs, scopes);
  if (a.op == PredAtom::Op::In) {
    if (rt.kind != SemType::Kind::Set && rt.kind != SemType::Kind::List && rt.kind != SemType::Kind::Any)
      raise(Errc::TypeMismatch, "membership atom needs a collection right side: " + format_atom(a));
    return;
  }
  if (lt.kind == SemType::Kind::Any || rt.kind == SemType::Kind::Any) return;
  if (numeric_kind(lt.kind) && numeric_kind(rt.kind)) return;
  const bool ordered = a.op != PredAtom::Op::Eq && a.op != PredAtom::Op::Ne;
  if (lt.kind != rt.kind)
    raise(Errc::TypeMismatch, "incomparable operands in atom: " + format_atom(a));
  if (ordered && lt.kind != SemType::Kind::Text)
    raise(Errc::TypeMismatch, "ordered comparison over non-ordered values: " + format_atom(a));
}

void typecheck_dnf(const Dnf& d, const std::vector<OperandScope>& scopes) {
  for (const auto& conj : d.disjuncts)
    for (const auto& atom : conj) typecheck_atom(atom, scopes);
}

Value runtime_operand(const PredOperand& o, const std::vector<OperandScope>& scopes) {
  switch (o.kind) {
    case PredOperand::Kind::Literal:
      return o.literal;
    case PredOperand::Kind::Binder: {
      const OperandScope* s = find_scope(scopes, o.binder, "predicate");
      if (!s->object->self_oid) return Value::null();
      return Value::ref(*s->object->self_oid);
    }
    case PredOperand::Kind::Path: {
      const OperandScope* s = find_scope(scopes, o.binder, "predicate");
      return value_at(s->object->value, join_path(o.path, 0));
    }
  }
  return Value::null();
}

// Comparisons against Null are false; incomparable kinds raise TypeMismatch.
bool atom_holds(const PredAtom& a, const std::vector<OperandScope>& scopes) {
  const Value lhs = runtime_operand(a.lhs, scopes);
  const Value rhs = runtime_operand(a.rhs, scopes);
  if (a.op == PredAtom::Op::In) {
    if (lhs.is_null() || rhs.is_null()) return false;
    if (!rhs.is_collection())
      raise(Errc::TypeMismatch, "membership over non-collection: " + format_atom(a));
    for (const auto& m : rhs.members())
      if (m == lhs) return true;
    return false;
  }
  if (lhs.is_null() || rhs.is_null()) return false;
  int cmp = 0;
  if (lhs.is_numeric() && rhs.is_numeric()) {
    const double l = lhs.as_number(), r = rhs.as_number();
    cmp = l < r ? -1 : (l > r ? 1 : 0);
  } else if (lhs.kind() == rhs.kind()) {
    cmp = Value::compare(lhs, rhs);
  } else {
    raise(Errc::TypeMismatch, "incomparable values in atom: " + format_atom(a));
  }
  switch (a.op) {
    case PredAtom::Op::Eq: return cmp == 0;
    case PredAtom::Op::Ne: return cmp != 0;
    case PredAtom::Op::Lt: return cmp < 0;
    case PredAtom::Op::Le: return cmp <= 0;
    case PredAtom::Op::Gt: return cmp > 0;
    case PredAtom::Op::Ge: return cmp >= 0;
    default: return false;
  }
}

bool dnf_holds(const Dnf& d, const std::vector<OperandScope>& scopes) {
  for (const auto& conj : d.disjuncts) {
    bool all = true;
    for (const auto& atom : conj) {
      if (!atom_holds(atom, scopes)) {
        all = false;
        break;
      }
    }
    if (all) return true;
  }
  return false;
}

// Qualifies a selection predicate for the object-usage analysis. Atoms that
// are not (path op literal) over a source-rooted property make the enclosing
// conjunction opaque (never considered covered).
QualifiedDnf qualify_dnf(const Dnf& d, const std::vector<OperandScope>& scopes) {
  QualifiedDnf out;
  for (const auto& conj : d.disjuncts) {
    QualifiedConjunction qc;
    for (const auto& atom : conj) {
      const PredOperand* path_side = nullptr;
      const PredOperand* lit_side = nullptr;
      PredAtom::Op op = atom.op;
      if (atom.lhs.kind == PredOperand::Kind::Path && atom.rhs.kind == PredOperand::Kind::Literal) {
        path_side = &atom.lhs;
        lit_side = &atom.rhs;
      } else if (atom.rhs.kind == PredOperand::Kind::Path &&
                 atom.lhs.kind == PredOperand::Kind::Literal) {
        path_side = &atom.rhs;
        lit_side = &atom.lhs;
        switch (atom.op) {  // mirror the comparison
          case PredAtom::Op::Lt: op = PredAtom::Op::Gt; break;
          case PredAtom::Op::Le: op = PredAtom::Op::Ge; break;
          case PredAtom::Op::Gt: op = PredAtom::Op::Lt; break;
          case PredAtom::Op::Ge: op = PredAtom::Op::Le; break;
          default: break;
        }
      }
      if (!path_side || atom.op == PredAtom::Op::In) {
        qc.opaque = true;
        continue;
      }
      const OperandScope* s = find_scope(scopes, path_side->binder, "selection");
      const auto segs_joined = join_path(path_side->path, 0);
      const PathHit hit = resolve_path(*s->structure, segs_joined, "selection");
      auto key = provenance(*hit.root, hit.sub_path);
      if (!key) {
        qc.opaque = true;
        continue;
      }
      qc.atoms.push_back(QualifiedAtom{op, *key, lit_side->literal});
    }
    out.disjuncts.push_back(std::move(qc));
  }
  return out;
}

// --- node evaluation ---

EvalResult eval_node(const ExprPtr& expr, const Ctx& ctx);

Value struct_over(const std::vector<Property>& structure, std::vector<Value> values) {
  StructFields fields;
  fields.reserve(structure.size());
  for (std::size_t i = 0; i < structure.size(); ++i)
    fields.emplace_back(structure[i].name, std::move(values[i]));
  return Value::structure(std::move(fields));
}

EvalResult eval_class_ref(const MappingExpr& e, const Ctx& ctx) {
  const SourceClass* cls = ctx.schema.find_class(e.class_name);
  if (!cls) raise(Errc::UnknownClass, "source class " + e.class_name);
  EvalResult r;
  r.info.structure = ctx.schema.flattened_properties(e.class_name);
  r.info.source_extracting = true;
  r.info.involved.insert(e.class_name);
  for (const auto& s : ctx.schema.all_supers(e.class_name)) r.info.involved.insert(s);
  for (const auto& p : r.info.structure) r.info.derived_struct.insert({p.declared_in, p.source_path});
  if (ctx.snapshot) {
    for (const auto& o : ctx.snapshot->extension_of(e.class_name))
      r.objects.push_back({Value::ref(o.oid), o.oid, o.value});
  }
  return r;
}

void carry_context(MappingInfo& out, const MappingInfo& in) {
  out.fused_rels.insert(in.fused_rels.begin(), in.fused_rels.end());
  out.involved.insert(in.involved.begin(), in.involved.end());
  out.selections.insert(out.selections.end(), in.selections.begin(), in.selections.end());
  out.source_extracting = out.source_extracting || in.source_extracting;
  for (const auto& w : in.warehouse_operands)
    if (std::find(out.warehouse_operands.begin(), out.warehouse_operands.end(), w) ==
        out.warehouse_operands.end())
      out.warehouse_operands.push_back(w);
}

EvalResult eval_project(const MappingExpr& e, const Ctx& ctx) {
  EvalResult in = eval_node(e.operands.front().expr, ctx);
  if (e.props.empty()) raise(Errc::EmptyStructure, "projection over an empty property list");
  struct Out {
    PathHit hit;
    std::string dotted;
  };
  std::vector<Out> outs;
  std::map<std::string, int> leaf_counts;
  for (const auto& dotted : e.props) {
    Out o{resolve_path(in.info.structure, dotted, "projection"), dotted};
    ++leaf_counts[o.hit.leaf_name];
    outs.push_back(std::move(o));
  }
  EvalResult r;
  carry_context(r.info, in.info);
  for (const auto& o : outs) {
    Property p;
    p.type = o.hit.leaf_type;
    p.declared_in = o.hit.root->declared_in;
    if (!p.declared_in.empty()) {
      p.source_path = o.hit.root->source_path;
      if (!o.hit.sub_path.empty()) p.source_path += "." + o.hit.sub_path;
    }
    p.name = leaf_counts[o.hit.leaf_name] > 1 && !p.declared_in.empty()
                 ? p.declared_in + o.hit.leaf_name
                 : o.hit.leaf_name;
    if (o.hit.sub_path.empty()) {
      p.is_relationship = o.hit.root->is_relationship;
      p.inverse = o.hit.root->inverse;
    }
    if (find_property(r.info.structure, p.name))
      raise(Errc::NameCollision, "projection yields duplicate property '" + p.name + "'");
    if (auto key = provenance(*o.hit.root, o.hit.sub_path))
      r.info.derived_struct.insert(*key);
    else
      r.info.new_props.insert(p.name);
    r.info.structure.push_back(std::move(p));
  }
  for (const auto& obj : in.objects) {
    std::vector<Value> vals;
    vals.reserve(outs.size());
    for (const auto& o : outs) vals.push_back(value_at(obj.value, o.dotted));
    r.objects.push_back({obj.lineage, obj.self_oid, struct_over(r.info.structure, std::move(vals))});
  }
  return r;
}

EvalResult eval_mask(const MappingExpr& e, const Ctx& ctx) {
  // mask = project of the complement, per definition.
  EvalResult in = eval_node(e.operands.front().expr, ctx);
  for (const auto& p : e.props)
    if (!find_property(in.info.structure, p))
      raise(Errc::UnknownProperty, "masked property '" + p + "' not in structure");
  std::vector<std::string> keep;
  for (const auto& p : in.info.structure)
    if (std::find(e.props.begin(), e.props.end(), p.name) == e.props.end()) keep.push_back(p.name);
  if (keep.empty()) raise(Errc::EmptyStructure, "masking removes every property");
  MappingExpr proj;
  proj.kind = MappingExpr::Kind::Project;
  proj.props = std::move(keep);
  proj.operands = e.operands;
  return eval_node(make(std::move(proj)), ctx);
}

Value aggregate(AugmentBinding::AggFn fn, const Value& collection, const std::string& path) {
  if (!collection.is_collection()) {
    if (fn == AugmentBinding::AggFn::Count && collection.is_null()) return Value::integer(0);
    raise(Errc::NonCollectionPath, "aggregation path '" + path + "' is not a collection");
  }
  const auto& members = collection.members();
  if (fn == AugmentBinding::AggFn::Count) return Value::integer(static_cast<std::int64_t>(members.size()));
  if (members.empty()) {
    if (fn == AugmentBinding::AggFn::Sum) return Value::integer(0);
    return Value::null();
  }
  bool all_int = true;
  double acc = 0;
  double best = 0;
  std::int64_t acc_int = 0;
  for (std::size_t i = 0; i < members.size(); ++i) {
    const Value& m = members[i];
    if (!m.is_numeric())
      raise(Errc::NonNumericAgg, "aggregation over non-numeric member at '" + path + "'");
    if (m.kind() != Value::Kind::Integer) all_int = false;
    const double x = m.as_number();
    if (i == 0) best = x;
    acc += x;
    if (m.kind() == Value::Kind::Integer) acc_int += m.as_int();
    if (fn == AugmentBinding::AggFn::Max) best = std::max(best, x);
    if (fn == AugmentBinding::AggFn::Min) best = std::min(best, x);
  }
  switch (fn) {
    case AugmentBinding::AggFn::Sum:
      return all_int ? Value::integer(acc_int) : Value::real(acc);
    case AugmentBinding::AggFn::Avg:
      return Value::real(acc / static_cast<double>(members.size()));
    case AugmentBinding::AggFn::Max:
    case AugmentBinding::AggFn::Min:
      return all_int ? Value::integer(static_cast<std::int64_t>(best)) : Value::real(best);
    default:
      return Value::null();
  }
}

EvalResult eval_augment(const MappingExpr& e, const Ctx& ctx) {
  EvalResult r = eval_node(e.operands.front().expr, ctx);
  struct Plan {
    const AugmentBinding* b;
  };
  std::vector<Plan> plans;
  for (const auto& b : e.bindings) {
    if (find_property(r.info.structure, b.new_prop))
      raise(Errc::NameCollision, "augmented property '" + b.new_prop + "' already exists");
    Property p = Property::synthesized(b.new_prop, SemType::any());
    switch (b.source) {
      case AugmentBinding::Source::AggCall: {
        const PathHit hit = resolve_path(r.info.structure, b.path, "augmentation");
        if (!hit.leaf_type.is_collection())
          raise(Errc::NonCollectionPath, "augmentation path '" + b.path + "' is not a collection");
        const SemType elem = hit.leaf_type.element ? *hit.leaf_type.element : SemType::any();
        switch (b.fn) {
          case AugmentBinding::AggFn::Count:
            p.type = SemType::integer();
            break;
          case AugmentBinding::AggFn::Avg:
            p.type = SemType::real();
            break;
          case AugmentBinding::AggFn::Sum:
          case AugmentBinding::AggFn::Max:
          case AugmentBinding::AggFn::Min:
            if (elem.kind != SemType::Kind::Integer && elem.kind != SemType::Kind::Float &&
                elem.kind != SemType::Kind::Any)
              raise(Errc::NonNumericAgg, "aggregation over non-numeric collection '" + b.path + "'");
            p.type = elem;
            break;
        }
        break;
      }
      case AugmentBinding::Source::MethodCall: {
        const std::size_t sep = b.method.find("::");
        if (sep == std::string::npos)
          raise(Errc::UnresolvedName, "method call '" + b.method + "' must be CLASS::method");
        const MethodMeta* m = ctx.schema.find_method(b.method.substr(0, sep), b.method.substr(sep + 2));
        if (!m) raise(Errc::UnresolvedName, "unknown source method '" + b.method + "'");
        p.type = m->return_type;
        break;
      }
      case AugmentBinding::Source::SpecificType:
        p.type = b.type;
        break;
    }
    r.info.structure.push_back(std::move(p));
    r.info.new_props.insert(b.new_prop);
    plans.push_back({&b});
  }
  for (auto& obj : r.objects) {
    for (const auto& plan : plans) {
      Value v = Value::null();
      if (plan.b->source == AugmentBinding::Source::AggCall)
        v = aggregate(plan.b->fn, value_at(obj.value, plan.b->path), plan.b->path);
      obj.value.set_field(plan.b->new_prop, std::move(v));
    }
  }
  return r;
}

EvalResult eval_select(const MappingExpr& e, const Ctx& ctx) {
  EvalResult r = eval_node(e.operands.front().expr, ctx);
  std::vector<OperandScope> scopes{{e.operands.front().var, &r.info.structure, nullptr}};
  typecheck_dnf(e.pred, scopes);
  if (!e.pred.is_true()) r.info.selections.push_back(qualify_dnf(e.pred, scopes));
  std::vector<EvalObject> kept;
  for (const auto& obj : r.objects) {
    scopes.front().object = &obj;
    if (dnf_holds(e.pred, scopes)) kept.push_back(obj);
  }
  r.objects = std::move(kept);
  return r;
}

/// Merges two structures, renaming root-name collisions with the declaring
/// class prefix that the extraction convention uses.
std::vector<Property> merge_structures(const std::vector<Property>& a, const std::vector<Property>& b) {
  auto collides = [&](const std::string& n) {
    return find_property(a, n) != nullptr && find_property(b, n) != nullptr;
  };
  std::vector<Property> out;
  auto push_side = [&](const std::vector<Property>& side) {
    for (const auto& p : side) {
      Property q = p;
      if (collides(p.name)) {
        if (p.declared_in.empty())
          raise(Errc::NameCollision, "join collision on synthesized property '" + p.name + "'");
        q.name = p.declared_in + p.name;
      }
      if (find_property(out, q.name))
        raise(Errc::NameCollision, "join still collides on '" + q.name + "' after renaming");
      out.push_back(std::move(q));
    }
  };
  push_side(a);
  push_side(b);
  return out;
}

void record_fused_relationships(const Dnf& pred, const std::vector<OperandScope>& scopes,
                                MappingInfo& info) {
  for (const auto& conj : pred.disjuncts) {
    for (const auto& atom : conj) {
      const PredOperand* path_side = nullptr;
      bool binder_involved = false;
      if (atom.lhs.kind == PredOperand::Kind::Path && atom.rhs.kind == PredOperand::Kind::Binder) {
        path_side = &atom.lhs;
        binder_involved = true;
      } else if (atom.rhs.kind == PredOperand::Kind::Path &&
                 atom.lhs.kind == PredOperand::Kind::Binder) {
        path_side = &atom.rhs;
        binder_involved = true;
      }
      if (!binder_involved || !path_side) continue;
      if (atom.op != PredAtom::Op::Eq && atom.op != PredAtom::Op::In) continue;
      const OperandScope* s = find_scope(scopes, path_side->binder, "join predicate");
      const PathHit hit = resolve_path(*s->structure, join_path(path_side->path, 0), "join predicate");
      if (!hit.root->is_relationship || !hit.sub_path.empty()) continue;
      if (auto key = provenance(*hit.root, "")) info.fused_rels.insert(*key);
    }
  }
}

EvalResult eval_join(const MappingExpr& e, const Ctx& ctx) {
  EvalResult a = eval_node(e.operands[0].expr, ctx);
  EvalResult b = eval_node(e.operands[1].expr, ctx);
  std::vector<OperandScope> scopes{{e.operands[0].var, &a.info.structure, nullptr},
                                   {e.operands[1].var, &b.info.structure, nullptr}};
  typecheck_dnf(e.pred, scopes);
  EvalResult r;
  r.info.structure = merge_structures(a.info.structure, b.info.structure);
  r.info.derived_struct = a.info.derived_struct;
  r.info.derived_struct.insert(b.info.derived_struct.begin(), b.info.derived_struct.end());
  r.info.new_props = a.info.new_props;
  r.info.new_props.insert(b.info.new_props.begin(), b.info.new_props.end());
  carry_context(r.info, a.info);
  carry_context(r.info, b.info);
  record_fused_relationships(e.pred, scopes, r.info);
  const std::size_t na = a.info.structure.size();
  for (const auto& oa : a.objects) {
    for (const auto& ob : b.objects) {
      scopes[0].object = &oa;
      scopes[1].object = &ob;
      if (!dnf_holds(e.pred, scopes)) continue;
      std::vector<Value> vals;
      vals.reserve(r.info.structure.size());
      for (std::size_t i = 0; i < r.info.structure.size(); ++i) {
        const Value& side = i < na ? oa.value : ob.value;
        const std::size_t idx = i < na ? i : i - na;
        vals.push_back(side.fields()[idx].second);
      }
      r.objects.push_back({Value::list({oa.lineage, ob.lineage}), std::nullopt,
                           struct_over(r.info.structure, std::move(vals))});
    }
  }
  return r;
}

EvalResult eval_nest(const MappingExpr& e, const Ctx& ctx) {
  EvalResult in = eval_node(e.operands.front().expr, ctx);
  for (const auto& g : e.props)
    if (!find_property(in.info.structure, g))
      raise(Errc::UnknownProperty, "grouping property '" + g + "' not in structure");
  if (find_property(in.info.structure, e.attr_name) ||
      std::find(e.props.begin(), e.props.end(), e.attr_name) != e.props.end())
    raise(Errc::NameCollision, "nest attribute '" + e.attr_name + "' already exists");
  EvalResult r;
  carry_context(r.info, in.info);
  r.info.derived_struct = in.info.derived_struct;
  r.info.new_props = in.info.new_props;
  r.info.new_props.insert(e.attr_name);
  std::vector<const Property*> rest;
  for (const auto& p : in.info.structure) {
    if (std::find(e.props.begin(), e.props.end(), p.name) != e.props.end()) continue;
    rest.push_back(&p);
  }
  std::vector<std::pair<std::string, SemType>> member_fields;
  for (const Property* p : rest) member_fields.emplace_back(p->name, p->type);
  for (const auto& g : e.props) r.info.structure.push_back(*find_property(in.info.structure, g));
  r.info.structure.push_back(
      Property::synthesized(e.attr_name, SemType::set_of(SemType::structure("", member_fields))));

  std::map<Value, std::vector<Value>> groups;  // group tuple -> member structs
  for (const auto& obj : in.objects) {
    std::vector<Value> key_vals;
    for (const auto& g : e.props) key_vals.push_back(value_at(obj.value, g));
    StructFields member;
    for (const Property* p : rest) member.emplace_back(p->name, value_at(obj.value, p->name));
    groups[Value::list(std::move(key_vals))].push_back(Value::structure(std::move(member)));
  }
  for (auto& [key, members] : groups) {
    std::vector<Value> vals;
    const auto& key_vals = key.members();
    vals.insert(vals.end(), key_vals.begin(), key_vals.end());
    vals.push_back(Value::set(members));
    r.objects.push_back({key, std::nullopt, struct_over(r.info.structure, std::move(vals))});
  }
  return r;
}

EvalResult eval_unnest(const MappingExpr& e, const Ctx& ctx) {
  EvalResult in = eval_node(e.operands.front().expr, ctx);
  std::vector<const Property*> named;
  for (const auto& n : e.props) {
    const Property* p = find_property(in.info.structure, n);
    if (!p) raise(Errc::UnknownProperty, "unnest property '" + n + "' not in structure");
    if (!p->type.is_collection() ||
        (p->type.element && p->type.element->kind != SemType::Kind::Struct &&
         p->type.element->kind != SemType::Kind::Any))
      raise(Errc::NotACollection, "unnest property '" + n + "' is not a collection of tuples");
    named.push_back(p);
  }
  EvalResult r;
  carry_context(r.info, in.info);
  r.info.derived_struct = in.info.derived_struct;
  r.info.new_props = in.info.new_props;
  for (const auto& p : in.info.structure) {
    if (std::find(e.props.begin(), e.props.end(), p.name) != e.props.end()) continue;
    r.info.structure.push_back(p);
  }
  for (const Property* p : named) {
    const SemType elem = p->type.element ? *p->type.element : SemType::any();
    for (const auto& [fname, ftype] : elem.struct_fields) {
      if (find_property(r.info.structure, fname))
        raise(Errc::NameCollision, "unnest member field '" + fname + "' collides");
      r.info.structure.push_back(Property::synthesized(fname, ftype));
      r.info.new_props.insert(fname);
    }
  }
  // Cross product over the named collections, one output row per combination.
  for (const auto& obj : in.objects) {
    std::vector<std::vector<Value>> pools;
    bool any_empty = false;
    for (const Property* p : named) {
      const Value v = value_at(obj.value, p->name);
      if (!v.is_collection())
        raise(Errc::NotACollection, "value of '" + p->name + "' is not a collection");
      pools.push_back(v.members());
      if (pools.back().empty()) any_empty = true;
    }
    if (any_empty) continue;
    std::vector<std::size_t> idx(pools.size(), 0);
    while (true) {
      StructFields fields;
      std::vector<Value> lineage_parts{obj.lineage};
      for (const auto& p : in.info.structure) {
        if (std::find(e.props.begin(), e.props.end(), p.name) != e.props.end()) continue;
        fields.emplace_back(p.name, value_at(obj.value, p.name));
      }
      for (std::size_t k = 0; k < pools.size(); ++k) {
        const Value& member = pools[k][idx[k]];
        if (member.kind() != Value::Kind::Struct)
          raise(Errc::NotACollection, "unnest member of '" + named[k]->name + "' is not a tuple");
        for (const auto& [fk, fv] : member.fields()) fields.emplace_back(fk, fv);
        lineage_parts.push_back(member);
      }
      r.objects.push_back({Value::list(std::move(lineage_parts)), std::nullopt,
                           Value::structure(std::move(fields))});
      std::size_t k = 0;
      for (; k < pools.size(); ++k) {
        if (++idx[k] < pools[k].size()) break;
        idx[k] = 0;
      }
      if (k == pools.size()) break;
    }
  }
  return r;
}

EvalResult eval_set_op(const MappingExpr& e, const Ctx& ctx) {
  EvalResult a = eval_node(e.operands[0].expr, ctx);
  EvalResult b = eval_node(e.operands[1].expr, ctx);
  if (property_names(a.info.structure) != property_names(b.info.structure))
    raise(Errc::StructureMismatch, "set operation over different structures");
  for (std::size_t i = 0; i < a.info.structure.size(); ++i)
    if (!same_type(a.info.structure[i].type, b.info.structure[i].type))
      raise(Errc::StructureMismatch,
            "set operation operand types differ on '" + a.info.structure[i].name + "'");
  EvalResult r;
  r.info.structure = a.info.structure;
  r.info.derived_struct = a.info.derived_struct;
  r.info.derived_struct.insert(b.info.derived_struct.begin(), b.info.derived_struct.end());
  r.info.new_props = a.info.new_props;
  r.info.new_props.insert(b.info.new_props.begin(), b.info.new_props.end());
  carry_context(r.info, a.info);
  carry_context(r.info, b.info);
  // Set semantics over object values; identity is the value itself.
  std::map<Value, bool> in_b;
  for (const auto& ob : b.objects) in_b[ob.value] = true;
  std::map<Value, EvalObject> out;
  auto add = [&](const EvalObject& o) {
    if (!out.count(o.value)) out.emplace(o.value, EvalObject{o.value, std::nullopt, o.value});
  };
  switch (e.kind) {
    case MappingExpr::Kind::Union:
      for (const auto& o : a.objects) add(o);
      for (const auto& o : b.objects) add(o);
      break;
    case MappingExpr::Kind::Intersect:
      for (const auto& o : a.objects)
        if (in_b.count(o.value)) add(o);
      break;
    default:
      for (const auto& o : a.objects)
        if (!in_b.count(o.value)) add(o);
      break;
  }
  for (auto& [v, o] : out) r.objects.push_back(std::move(o));
  return r;
}

const EvalResult& warehouse_operand(const MappingExpr& e, std::size_t i, const Ctx& ctx) {
  const Binding& op = e.operands[i];
  if (op.expr->kind != MappingExpr::Kind::ClassRef)
    raise(Errc::UnresolvedName, "hierarchy operands must reference warehouse classes");
  if (!ctx.warehouse || !ctx.warehouse->count(op.expr->class_name))
    raise(Errc::UnknownClass, "warehouse class '" + op.expr->class_name + "' is not built yet");
  return ctx.warehouse->at(op.expr->class_name);
}

EvalResult eval_generalize(const MappingExpr& e, const Ctx& ctx) {
  EvalResult r;
  std::vector<const EvalResult*> ops;
  for (std::size_t i = 0; i < e.operands.size(); ++i) {
    const EvalResult& o = warehouse_operand(e, i, ctx);
    ops.push_back(&o);
    r.info.derived_struct.insert(o.info.derived_struct.begin(), o.info.derived_struct.end());
    carry_context(r.info, o.info);
    r.info.warehouse_operands.push_back(e.operands[i].expr->class_name);
  }
  r.info.source_extracting = false;
  r.info.derived_struct.clear();
  for (const auto& name : e.props) {
    const Property* first = find_property(ops.front()->info.structure, name);
    if (!first)
      raise(Errc::UnknownProperty, "generalized property '" + name + "' missing in " +
                                       e.operands.front().expr->class_name);
    for (std::size_t i = 1; i < ops.size(); ++i) {
      const Property* p = find_property(ops[i]->info.structure, name);
      if (!p)
        raise(Errc::UnknownProperty, "generalized property '" + name + "' missing in " +
                                         e.operands[i].expr->class_name);
      if (!same_type(p->type, first->type))
        raise(Errc::TypeMismatch, "generalized property '" + name + "' has differing types");
    }
    r.info.structure.push_back(*first);
    if (auto key = provenance(*first, ""))
      r.info.derived_struct.insert(*key);
    else
      r.info.new_props.insert(name);
  }
  std::set<std::string> seen;
  for (const EvalResult* o : ops) {
    for (const auto& obj : o->objects) {
      if (obj.self_oid && !seen.insert(*obj.self_oid).second) continue;
      std::vector<Value> vals;
      for (const auto& name : e.props) vals.push_back(value_at(obj.value, name));
      r.objects.push_back({obj.lineage, obj.self_oid, struct_over(r.info.structure, std::move(vals))});
    }
  }
  return r;
}

EvalResult eval_specialize(const MappingExpr& e, const Ctx& ctx) {
  EvalResult r;
  std::vector<const EvalResult*> ops;
  for (std::size_t i = 0; i < e.operands.size(); ++i) {
    const EvalResult& o = warehouse_operand(e, i, ctx);
    ops.push_back(&o);
    r.info.derived_struct.insert(o.info.derived_struct.begin(), o.info.derived_struct.end());
    r.info.new_props.insert(o.info.new_props.begin(), o.info.new_props.end());
    carry_context(r.info, o.info);
    r.info.warehouse_operands.push_back(e.operands[i].expr->class_name);
  }
  r.info.source_extracting = false;
  for (const EvalResult* o : ops)
    for (const auto& p : o->info.structure) {
      const Property* have = find_property(r.info.structure, p.name);
      if (!have) {
        r.info.structure.push_back(p);
      } else if (!same_type(have->type, p.type)) {
        raise(Errc::StructureMismatch, "specialized operands disagree on '" + p.name + "'");
      }
    }
  std::vector<OperandScope> scopes;
  for (std::size_t i = 0; i < e.operands.size(); ++i)
    scopes.push_back({e.operands[i].var, &ops[i]->info.structure, nullptr});
  typecheck_dnf(e.pred, scopes);
  if (!e.pred.is_true()) r.info.selections.push_back(qualify_dnf(e.pred, scopes));

  auto identity = [](const EvalObject& o) {
    return o.self_oid ? Value::ref(*o.self_oid) : o.lineage;
  };
  for (const auto& first : ops.front()->objects) {
    std::vector<const EvalObject*> matched{&first};
    bool everywhere = true;
    for (std::size_t i = 1; i < ops.size(); ++i) {
      const EvalObject* hit = nullptr;
      for (const auto& cand : ops[i]->objects)
        if (identity(cand) == identity(first)) {
          hit = &cand;
          break;
        }
      if (!hit) {
        everywhere = false;
        break;
      }
      matched.push_back(hit);
    }
    if (!everywhere) continue;
    for (std::size_t i = 0; i < scopes.size(); ++i) scopes[i].object = matched[i];
    if (!dnf_holds(e.pred, scopes)) continue;
    std::vector<Value> vals;
    for (const auto& p : r.info.structure) {
      Value v = Value::null();
      for (const EvalObject* m : matched) {
        Value cand = value_at(m->value, p.name);
        if (!cand.is_null()) {
          v = std::move(cand);
          break;
        }
      }
      vals.push_back(std::move(v));
    }
    r.objects.push_back({first.lineage, first.self_oid, struct_over(r.info.structure, std::move(vals))});
  }
  return r;
}

EvalResult eval_node(const ExprPtr& expr, const Ctx& ctx) {
  switch (expr->kind) {
    case MappingExpr::Kind::ClassRef: return eval_class_ref(*expr, ctx);
    case MappingExpr::Kind::Project: return eval_project(*expr, ctx);
    case MappingExpr::Kind::Mask: return eval_mask(*expr, ctx);
    case MappingExpr::Kind::Augment: return eval_augment(*expr, ctx);
    case MappingExpr::Kind::Select: return eval_select(*expr, ctx);
    case MappingExpr::Kind::Join: return eval_join(*expr, ctx);
    case MappingExpr::Kind::Nest: return eval_nest(*expr, ctx);
    case MappingExpr::Kind::Unnest: return eval_unnest(*expr, ctx);
    case MappingExpr::Kind::Union:
    case MappingExpr::Kind::Intersect:
    case MappingExpr::Kind::Diff:
      return eval_set_op(*expr, ctx);
    case MappingExpr::Kind::Generalize: return eval_generalize(*expr, ctx);
    case MappingExpr::Kind::Specialize: return eval_specialize(*expr, ctx);
  }
  raise(Errc::UnresolvedName, "unknown mapping node");
}

}  // namespace

MappingInfo analyze_mapping(const ExprPtr& expr, const SourceSchema& schema,
                            const WarehouseExtensions* warehouse) {
  Ctx ctx{schema, nullptr, warehouse};
  return eval_node(expr, ctx).info;
}

EvalResult eval(const ExprPtr& expr, const SourceSnapshot& snapshot,
                const WarehouseExtensions* warehouse) {
  if (!snapshot.schema) raise(Errc::EmptyInput, "snapshot has no schema");
  Ctx ctx{*snapshot.schema, &snapshot, warehouse};
  return eval_node(expr, ctx);
}

std::set<std::string> involved_source_classes(const ExprPtr& expr, const SourceSchema& schema) {
  std::set<std::string> out;
  if (expr->kind == MappingExpr::Kind::Generalize || expr->kind == MappingExpr::Kind::Specialize)
    return out;  // hierarchy operands reference warehouse classes
  if (expr->kind == MappingExpr::Kind::ClassRef) {
    out.insert(expr->class_name);
    for (const auto& s : schema.all_supers(expr->class_name)) out.insert(s);
    return out;
  }
  for (const auto& op : expr->operands) {
    auto sub = involved_source_classes(op.expr, schema);
    out.insert(sub.begin(), sub.end());
  }
  return out;
}

namespace {

std::string format_props(const std::string& var, const std::vector<std::string>& props) {
  std::string out = "[";
  bool first = true;
  for (const auto& p : props) {
    if (!first) out += ", ";
    first = false;
    out += var.empty() ? p : var + "." + p;
  }
  return out + "]";
}

std::string format_binding(const Binding& b) { return b.var + " " + format_expr(b.expr); }

std::string format_operands(const MappingExpr& e) {
  std::string out = "(";
  bool first = true;
  for (const auto& op : e.operands) {
    if (!first) out += ", ";
    first = false;
    out += format_binding(op);
  }
  return out + ")";
}

}  // namespace

std::string format_expr(const ExprPtr& expr) {
  const MappingExpr& e = *expr;
  const std::string var = e.operands.empty() ? "" : e.operands.front().var;
  switch (e.kind) {
    case MappingExpr::Kind::ClassRef:
      return e.class_name;
    case MappingExpr::Kind::Project:
      return "project " + format_props(var, e.props) + " " + format_operands(e);
    case MappingExpr::Kind::Mask:
      return "mask " + format_props(var, e.props) + " " + format_operands(e);
    case MappingExpr::Kind::Augment: {
      std::string out = "augment [";
      bool first = true;
      for (const auto& b : e.bindings) {
        if (!first) out += ", ";
        first = false;
        out += b.new_prop + ":";
        switch (b.source) {
          case AugmentBinding::Source::AggCall:
            out += std::string(agg_fn_name(b.fn)) + "(" + var + "." + b.path + ")";
            break;
          case AugmentBinding::Source::MethodCall:
            out += b.method + "()";
            break;
          case AugmentBinding::Source::SpecificType:
            out += b.type.to_string();
            break;
        }
      }
      return out + "] " + format_operands(e);
    }
    case MappingExpr::Kind::Select:
      return "select [" + format_dnf(e.pred) + "] " + format_operands(e);
    case MappingExpr::Kind::Join:
      return "join [" + format_dnf(e.pred) + "] " + format_operands(e);
    case MappingExpr::Kind::Nest:
      return "nest " + format_props(var, e.props) + "::" + e.attr_name + " " + format_operands(e);
    case MappingExpr::Kind::Unnest:
      return "unnest " + format_props(var, e.props) + " " + format_operands(e);
    case MappingExpr::Kind::Union:
      return "union " + format_operands(e);
    case MappingExpr::Kind::Intersect:
      return "intersect " + format_operands(e);
    case MappingExpr::Kind::Diff:
      return "diff " + format_operands(e);
    case MappingExpr::Kind::Generalize:
      return "generalize " + format_props(var, e.props) + " " + format_operands(e);
    case MappingExpr::Kind::Specialize:
      return "specialize [" + format_dnf(e.pred) + "] " + format_operands(e);
  }
  return "?";
}

}  // namespace wdw::algebra
