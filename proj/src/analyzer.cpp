#include "wdw/analyzer.hpp"

#include <algorithm>
#include <cmath>
#include <functional>

namespace wdw::analyzer {

using algebra::PropKey;
using algebra::QualifiedAtom;
using algebra::QualifiedConjunction;
using algebra::QualifiedDnf;

int UsageMatrix::row_index(const std::string& id) const {
  for (std::size_t i = 0; i < rows.size(); ++i)
    if (rows[i] == id) return static_cast<int>(i);
  return -1;
}

int UsageMatrix::col_index(const std::string& id) const {
  for (std::size_t i = 0; i < cols.size(); ++i)
    if (cols[i] == id) return static_cast<int>(i);
  return -1;
}

UsageMatrix optimize(const UsageMatrix& m) {
  UsageMatrix out = m;
  std::vector<std::size_t> keep;
  for (std::size_t j = 0; j < m.cols.size(); ++j) {
    bool used = m.derived_row[j] != 0;
    for (std::size_t i = 0; i < m.rows.size() && !used; ++i) used = m.cells[i][j] != 0;
    if (used) keep.push_back(j);
  }
  out.cols.clear();
  out.derived_row.clear();
  for (auto& row : out.cells) row.clear();
  for (std::size_t j : keep) {
    out.cols.push_back(m.cols[j]);
    out.derived_row.push_back(m.derived_row[j]);
    for (std::size_t i = 0; i < m.rows.size(); ++i) out.cells[i].push_back(m.cells[i][j]);
  }
  return out;
}

std::set<std::string> analyse_locale(std::size_t row, UsageMatrix& m) {
  std::set<std::string> missing;
  for (std::size_t j = 0; j < m.cols.size(); ++j)
    if (m.cells[row][j] == 1 && m.derived_row[j] == 0) missing.insert(m.cols[j]);
  m.derivable_col[row] = missing.empty() ? 1 : 0;
  return missing;
}

// --- implication of selection predicates --------------------------------------

namespace {

bool as_numeric(const Value& v, double& out) {
  if (!v.is_numeric()) return false;
  out = v.as_number();
  return true;
}

// Accumulated single-path constraint of a conjunction.
struct PathConstraint {
  bool unsat = false;
  bool has_eq = false;
  Value eq;
  std::vector<Value> ne;
  double lo = -HUGE_VAL;
  bool lo_strict = false;
  double hi = HUGE_VAL;
  bool hi_strict = false;

  void add(const QualifiedAtom& a) {
    double x = 0;
    switch (a.op) {
      case PredAtom::Op::Eq:
        if (has_eq && !(eq == a.literal)) unsat = true;
        has_eq = true;
        eq = a.literal;
        break;
      case PredAtom::Op::Ne:
        ne.push_back(a.literal);
        break;
      case PredAtom::Op::Lt:
      case PredAtom::Op::Le:
        if (!as_numeric(a.literal, x)) break;
        if (x < hi || (x == hi && a.op == PredAtom::Op::Lt)) {
          hi = x;
          hi_strict = a.op == PredAtom::Op::Lt;
        }
        break;
      case PredAtom::Op::Gt:
      case PredAtom::Op::Ge:
        if (!as_numeric(a.literal, x)) break;
        if (x > lo || (x == lo && a.op == PredAtom::Op::Gt)) {
          lo = x;
          lo_strict = a.op == PredAtom::Op::Gt;
        }
        break;
      default:
        break;
    }
  }

  void settle() {
    if (has_eq) {
      double x;
      if (as_numeric(eq, x)) {
        if (x < lo || (x == lo && lo_strict) || x > hi || (x == hi && hi_strict)) unsat = true;
      }
      for (const auto& v : ne)
        if (v == eq) unsat = true;
    }
    if (lo > hi || (lo == hi && (lo_strict || hi_strict))) unsat = true;
  }

  bool satisfies(const QualifiedAtom& a) const {
    if (unsat) return true;  // vacuous: no object matches the conjunction
    double av = 0;
    const bool a_num = as_numeric(a.literal, av);
    if (has_eq) {
      // The path is pinned to one value; evaluate the atom on it.
      double ev = 0;
      const bool e_num = as_numeric(eq, ev);
      switch (a.op) {
        case PredAtom::Op::Eq: return eq == a.literal || (e_num && a_num && ev == av);
        case PredAtom::Op::Ne: return e_num && a_num ? ev != av : !(eq == a.literal);
        case PredAtom::Op::Lt: return e_num && a_num && ev < av;
        case PredAtom::Op::Le: return e_num && a_num && ev <= av;
        case PredAtom::Op::Gt: return e_num && a_num && ev > av;
        case PredAtom::Op::Ge: return e_num && a_num && ev >= av;
        default: return false;
      }
    }
    switch (a.op) {
      case PredAtom::Op::Eq:
        return false;  // an unpinned path can always take another value
      case PredAtom::Op::Ne: {
        for (const auto& v : ne)
          if (v == a.literal) return true;
        if (!a_num) return false;
        return av < lo || (av == lo && lo_strict) || av > hi || (av == hi && hi_strict);
      }
      case PredAtom::Op::Lt:
        return a_num && (hi < av || (hi == av && hi_strict));
      case PredAtom::Op::Le:
        return a_num && hi <= av;
      case PredAtom::Op::Gt:
        return a_num && (lo > av || (lo == av && lo_strict));
      case PredAtom::Op::Ge:
        return a_num && lo >= av;
      default:
        return false;
    }
  }
};

bool conj_implies_atom(const QualifiedConjunction& j, const QualifiedAtom& a) {
  PathConstraint pc;
  for (const auto& atom : j.atoms)
    if (atom.key == a.key) pc.add(atom);
  pc.settle();
  return pc.satisfies(a);
}

bool conj_implies_conjunction(const QualifiedConjunction& j, const QualifiedConjunction& sel) {
  if (sel.opaque) return false;
  for (const auto& atom : sel.atoms)
    if (!conj_implies_atom(j, atom)) return false;
  return true;
}

}  // namespace

bool conjunction_covered(const QualifiedConjunction& conj,
                         const std::vector<QualifiedDnf>& selections) {
  for (const auto& sel : selections) {
    bool implied = false;
    for (const auto& disjunct : sel.disjuncts) {
      if (conj_implies_conjunction(conj, disjunct)) {
        implied = true;
        break;
      }
    }
    if (!implied) return false;
  }
  return true;
}

// --- matrix construction -------------------------------------------------------

namespace {

struct ColumnSpec {
  std::string display;
  PropKey key;
};

void expand_leaves(const std::string& cls, const std::string& display_root, const std::string& path,
                   const SemType& type, std::vector<ColumnSpec>& out) {
  if (type.kind == SemType::Kind::Struct) {
    for (const auto& [fname, ftype] : type.struct_fields)
      expand_leaves(cls, display_root + "." + fname, path + "." + fname, ftype, out);
    return;
  }
  out.push_back({display_root, PropKey{cls, path}});
}

std::vector<ColumnSpec> property_columns(const std::set<std::string>& involved,
                                         const SourceSchema& source) {
  // Root names colliding across involved classes get the declaring-class
  // prefix.
  std::map<std::string, int> root_owners;
  for (const auto& cls : involved) {
    const SourceClass* c = source.find_class(cls);
    if (!c) raise(Errc::UnknownClass, "involved source class " + cls);
    for (const auto& p : c->own_properties) ++root_owners[p.name];
  }
  std::vector<ColumnSpec> cols;
  for (const auto& cls : involved) {
    const SourceClass* c = source.find_class(cls);
    for (const auto& p : c->own_properties) {
      const std::string display_root = root_owners[p.name] > 1 ? cls + p.name : p.name;
      expand_leaves(cls, display_root, p.name, p.type, cols);
    }
  }
  std::sort(cols.begin(), cols.end(),
            [](const ColumnSpec& a, const ColumnSpec& b) { return a.display < b.display; });
  return cols;
}

struct RowSpec {
  std::string id;  // CLASS::method
  std::string cls;
  const MethodMeta* meta;
};

std::vector<RowSpec> method_rows(const std::set<std::string>& involved, const SourceSchema& source) {
  std::vector<RowSpec> rows;
  for (const auto& cls : involved) {
    const SourceClass* c = source.find_class(cls);
    if (!c) continue;
    for (const auto& m : c->own_methods) rows.push_back({cls + "::" + m.name, cls, &m});
  }
  std::sort(rows.begin(), rows.end(), [](const RowSpec& a, const RowSpec& b) { return a.id < b.id; });
  return rows;
}

bool path_covers(const std::string& usage, const std::string& column) {
  if (usage == column) return true;
  return column.size() > usage.size() && column.compare(0, usage.size(), usage) == 0 &&
         column[usage.size()] == '.';
}

QualifiedConjunction qualify_method_conjunction(const Conjunction& conj, const std::string& cls,
                                                const SourceSchema& source) {
  QualifiedConjunction out;
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
      switch (atom.op) {
        case PredAtom::Op::Lt: op = PredAtom::Op::Gt; break;
        case PredAtom::Op::Le: op = PredAtom::Op::Ge; break;
        case PredAtom::Op::Gt: op = PredAtom::Op::Lt; break;
        case PredAtom::Op::Ge: op = PredAtom::Op::Le; break;
        default: break;
      }
    }
    if (!path_side || atom.op == PredAtom::Op::In) {
      out.opaque = true;
      continue;
    }
    std::string dotted;
    for (const auto& seg : path_side->path) {
      if (!dotted.empty()) dotted += '.';
      dotted += seg;
    }
    std::string decl, sub;
    if (!source.qualify_path(cls, dotted, decl, sub)) {
      out.opaque = true;
      continue;
    }
    out.atoms.push_back({op, PropKey{decl, sub}, lit_side->literal});
  }
  return out;
}

std::string conjunction_display(const QualifiedConjunction& qc) {
  if (qc.atoms.empty() && !qc.opaque) return "true";
  std::string out;
  for (const auto& a : qc.atoms) {
    if (!out.empty()) out += " and ";
    out += a.key.cls + "::" + a.key.path + " " + pred_op_text(a.op) + " " + a.literal.to_string();
  }
  if (qc.opaque) out += out.empty() ? "<opaque>" : " and <opaque>";
  return out;
}

}  // namespace

LocalMatrices build_local_matrices(const model::WarehouseClass& cls, const SourceSchema& source) {
  LocalMatrices out;
  const auto& info = cls.info;
  const auto columns = property_columns(info.involved, source);
  const auto rows = method_rows(info.involved, source);

  out.mup.kind = UsageMatrix::Kind::MUP;
  out.mup.owner = cls.name;
  for (const auto& c : columns) out.mup.cols.push_back(c.display);
  for (const auto& r : rows) out.mup.rows.push_back(r.id);
  out.mup.cells.assign(rows.size(), std::vector<int>(columns.size(), 0));
  out.mup.derivable_col.assign(rows.size(), -1);
  for (std::size_t j = 0; j < columns.size(); ++j)
    out.mup.derived_row.push_back(info.is_derived(columns[j].key) ? 1 : 0);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const RowSpec& r = rows[i];
    if (!r.meta->has_usage)
      raise(Errc::UnknownMethodMeta, "method " + r.id + " lacks usage metadata");
    for (const auto& usage : r.meta->uses_properties) {
      std::string decl, sub;
      if (!source.qualify_path(r.cls, usage, decl, sub))
        raise(Errc::UnknownMethodMeta, "method " + r.id + " uses unknown property " + usage);
      for (std::size_t j = 0; j < columns.size(); ++j)
        if (columns[j].key.cls == decl && path_covers(sub, columns[j].key.path))
          out.mup.cells[i][j] = 1;
    }
  }

  out.muo.kind = UsageMatrix::Kind::MUO;
  out.muo.owner = cls.name;
  for (const auto& r : rows) out.muo.rows.push_back(r.id);
  std::vector<std::vector<int>> muo_cells(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (const auto& conj : rows[i].meta->objects_where.disjuncts) {
      QualifiedConjunction qc = qualify_method_conjunction(conj, rows[i].cls, source);
      const std::string display = conjunction_display(qc);
      int j = out.muo.col_index(display);
      if (j < 0) {
        j = static_cast<int>(out.muo.cols.size());
        out.muo.cols.push_back(display);
        out.muo_conjs.push_back(qc);
      }
      muo_cells[i].push_back(j);
    }
  }
  out.muo.cells.assign(rows.size(), std::vector<int>(out.muo.cols.size(), 0));
  out.muo.derivable_col.assign(rows.size(), -1);
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (int j : muo_cells[i]) out.muo.cells[i][j] = 1;
  for (const auto& qc : out.muo_conjs)
    out.muo.derived_row.push_back(conjunction_covered(qc, info.selections) ? 1 : 0);
  return out;
}

UsageMatrix build_mum(const model::WarehouseSchema& schema, const SourceSchema& source,
                      const std::vector<LocalMatrices>& locals,
                      const std::map<std::string, std::string>& assigned,
                      const std::set<std::string>& assume_derivable) {
  std::set<std::string> involved;
  for (const auto& cls : schema.classes)
    if (cls.mapping && cls.info.source_extracting)
      involved.insert(cls.info.involved.begin(), cls.info.involved.end());
  const auto rows = method_rows(involved, source);

  UsageMatrix mum;
  mum.kind = UsageMatrix::Kind::MUM;
  for (const auto& r : rows) {
    mum.rows.push_back(r.id);
    mum.cols.push_back(r.id);
  }
  mum.cells.assign(rows.size(), std::vector<int>(rows.size(), 0));
  mum.derivable_col.assign(rows.size(), -1);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (!rows[i].meta->has_usage)
      raise(Errc::UnknownMethodMeta, "method " + rows[i].id + " lacks usage metadata");
    for (const auto& used : rows[i].meta->uses_methods) {
      const int j = mum.col_index(used);
      if (j < 0)
        raise(Errc::UnknownMethodMeta, "method " + rows[i].id + " uses method " + used +
                                           " outside the involved classes");
      mum.cells[i][j] = 1;
    }
  }
  // Derive row: methods already non-derivable locally start at 0, the rest
  // are unanalyzed (-1). Administrator overrides force 1.
  for (std::size_t j = 0; j < rows.size(); ++j) {
    const std::string& id = rows[j].id;
    int v = -1;
    auto it = assigned.find(id);
    if (it != assigned.end()) {
      for (const auto& lm : locals) {
        if (lm.mup.owner != it->second) continue;
        const int r = lm.mup.row_index(id);
        if (r >= 0 && (lm.mup.derivable_col[r] == 0 || lm.muo.derivable_col[r] == 0)) v = 0;
      }
    }
    const std::size_t sep = id.find("::");
    if (assume_derivable.count(id) || assume_derivable.count(id.substr(sep + 2))) v = 1;
    mum.derived_row.push_back(v);
  }
  return mum;
}

std::set<std::string> analyse_globale(std::size_t row, UsageMatrix& mum, std::vector<int>& visite,
                                      std::vector<CycleNote>& cycles) {
  std::set<std::string> missing;
  visite[row] = 1;
  for (std::size_t j = 0; j < mum.cols.size(); ++j) {
    if (mum.cells[row][j] != 1) continue;
    if (mum.derived_row[j] == 0) {
      missing.insert(mum.cols[j]);
      continue;
    }
    if (mum.derived_row[j] == -1) {
      if (visite[j] == 1) {
        cycles.push_back({mum.rows[row], mum.rows[j]});
        missing.insert(mum.cols[j]);
        continue;
      }
      analyse_globale(j, mum, visite, cycles);
      if (mum.derived_row[j] == 0) missing.insert(mum.cols[j]);
    }
  }
  mum.derivable_col[row] = missing.empty() ? 1 : 0;
  if (mum.derived_row[row] == -1) mum.derived_row[row] = missing.empty() ? 1 : 0;
  return missing;
}

namespace {

std::string bare_name(const std::string& qualified) {
  const std::size_t sep = qualified.find("::");
  return sep == std::string::npos ? qualified : qualified.substr(sep + 2);
}

}  // namespace

std::set<std::string> BehaviorAnalysis::derivable() const {
  std::set<std::string> out;
  for (const auto& v : verdicts)
    if (v.derivable) out.insert(v.display);
  return out;
}

const MethodVerdict* BehaviorAnalysis::find(const std::string& display_or_id) const {
  for (const auto& v : verdicts)
    if (v.display == display_or_id || v.id == display_or_id) return &v;
  return nullptr;
}

BehaviorAnalysis analyze_behavior(const model::WarehouseSchema& schema, const SourceSchema& source,
                                  const std::set<std::string>& assume_derivable) {
  BehaviorAnalysis a;
  // Local matrices, one per extraction mapping, in declaration order.
  for (const auto& cls : schema.classes) {
    if (!cls.mapping || !cls.info.source_extracting) continue;
    LocalMatrices lm = build_local_matrices(cls, source);
    lm.mup = optimize(lm.mup);
    lm.muo = optimize(lm.muo);
    for (std::size_t i = 0; i < lm.mup.rows.size(); ++i) analyse_locale(i, lm.mup);
    for (std::size_t i = 0; i < lm.muo.rows.size(); ++i) analyse_locale(i, lm.muo);
    a.locals.push_back(std::move(lm));
  }
  // Each source class's methods answer to the first extraction mapping that
  // involves the class.
  for (const auto& cls : schema.classes) {
    if (!cls.mapping || !cls.info.source_extracting) continue;
    for (const auto& src : cls.info.involved) {
      const SourceClass* sc = source.find_class(src);
      if (!sc) continue;
      for (const auto& m : sc->own_methods) a.assigned_mup.try_emplace(src + "::" + m.name, cls.name);
    }
  }

  a.mum = build_mum(schema, source, a.locals, a.assigned_mup, assume_derivable);
  for (std::size_t i = 0; i < a.mum.rows.size(); ++i) {
    std::vector<int> visite(a.mum.rows.size(), 0);
    analyse_globale(i, a.mum, visite, a.cycles);
  }

  // Verdicts: a method is derivable when its own MUP, MUO and MUM rows all
  // carry 1. Missing sets aggregate the three analyses.
  std::map<std::string, int> name_counts;
  for (const auto& id : a.mum.rows) ++name_counts[bare_name(id)];
  auto display_of = [&](const std::string& id) {
    const std::string bare = bare_name(id);
    return name_counts[bare] == 1 ? bare : id;
  };
  for (std::size_t i = 0; i < a.mum.rows.size(); ++i) {
    MethodVerdict v;
    v.id = a.mum.rows[i];
    v.display = display_of(v.id);
    bool local_ok = true;
    auto it = a.assigned_mup.find(v.id);
    if (it != a.assigned_mup.end()) {
      v.assigned_class = it->second;
      for (auto& lm : a.locals) {
        if (lm.mup.owner != it->second) continue;
        const int r = lm.mup.row_index(v.id);
        if (r < 0) continue;
        auto miss_p = analyse_locale(static_cast<std::size_t>(r), lm.mup);
        auto miss_o = analyse_locale(static_cast<std::size_t>(r), lm.muo);
        local_ok = miss_p.empty() && miss_o.empty();
        v.missing.insert(miss_p.begin(), miss_p.end());
        for (const auto& c : miss_o) v.missing.insert("objects{" + c + "}");
      }
    } else {
      local_ok = false;
      v.missing.insert("<no extraction mapping involves " + v.id + ">");
    }
    const bool forced = assume_derivable.count(v.id) || assume_derivable.count(bare_name(v.id));
    std::vector<int> visite(a.mum.rows.size(), 0);
    std::vector<CycleNote> scratch;
    auto miss_m = analyse_globale(i, a.mum, visite, scratch);
    for (const auto& m : miss_m) v.missing.insert(display_of(m));
    const bool mum_ok = forced || a.mum.derivable_col[i] == 1;
    v.derivable = local_ok && mum_ok;
    for (const auto& c : a.cycles) {
      if (c.a == v.id) v.cycle_with.insert(display_of(c.b));
      if (c.b == v.id) v.cycle_with.insert(display_of(c.a));
    }
    a.verdicts.push_back(std::move(v));
  }
  std::sort(a.verdicts.begin(), a.verdicts.end(),
            [](const MethodVerdict& x, const MethodVerdict& y) { return x.display < y.display; });
  return a;
}

std::string format_report(const BehaviorAnalysis& a, bool color) {
  const char* green = color ? "\x1b[32m" : "";
  const char* red = color ? "\x1b[31m" : "";
  const char* yellow = color ? "\x1b[33m" : "";
  const char* reset = color ? "\x1b[0m" : "";
  std::string out = "derivability report\n";
  out += "-------------------\n";
  for (const auto& v : a.verdicts) {
    out += v.display;
    out += ": ";
    if (v.derivable) {
      out += green;
      out += "DERIVABLE";
      out += reset;
    } else if (!v.cycle_with.empty()) {
      out += yellow;
      out += "CYCLE with {";
      bool first = true;
      for (const auto& c : v.cycle_with) {
        if (!first) out += ", ";
        first = false;
        out += c;
      }
      out += "}";
      out += reset;
      if (!v.missing.empty()) {
        out += " MISSING {";
        bool f2 = true;
        for (const auto& m : v.missing) {
          if (!f2) out += ", ";
          f2 = false;
          out += m;
        }
        out += "}";
      }
    } else {
      out += red;
      out += "MISSING {";
      bool first = true;
      for (const auto& m : v.missing) {
        if (!first) out += ", ";
        first = false;
        out += m;
      }
      out += "}";
      out += reset;
    }
    out += "\n";
  }
  std::size_t n = 0;
  for (const auto& v : a.verdicts)
    if (v.derivable) ++n;
  out += "derivable: " + std::to_string(n) + "/" + std::to_string(a.verdicts.size()) + "\n";
  for (const auto& c : a.cycles)
    out += "cycle diagnostic: " + c.a + " <-> " + c.b + " (administrator decision required)\n";
  return out;
}

// --- CSV ----------------------------------------------------------------------

namespace {

std::string csv_escape(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

std::vector<std::string> csv_split(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        cur += '"';
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        cur += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      out.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  out.push_back(cur);
  return out;
}

}  // namespace

std::string matrix_to_csv(const UsageMatrix& m) {
  std::string out = "Methode";
  for (const auto& c : m.cols) out += "," + csv_escape(c);
  out += ",Derivable\n";
  for (std::size_t i = 0; i < m.rows.size(); ++i) {
    out += csv_escape(m.rows[i]);
    for (std::size_t j = 0; j < m.cols.size(); ++j) out += "," + std::to_string(m.cells[i][j]);
    out += ",";
    if (m.derivable_col[i] >= 0) out += std::to_string(m.derivable_col[i]);
    out += "\n";
  }
  out += "Derive";
  for (std::size_t j = 0; j < m.cols.size(); ++j) out += "," + std::to_string(m.derived_row[j]);
  out += ",\n";
  return out;
}

UsageMatrix matrix_from_csv(const std::string& text) {
  UsageMatrix m;
  std::vector<std::string> lines;
  std::string cur;
  for (char c : text) {
    if (c == '\n') {
      lines.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  if (!cur.empty()) lines.push_back(cur);
  if (lines.size() < 2) raise(Errc::SyntaxError, "matrix CSV needs a header and a Derive row");
  auto header = csv_split(lines.front());
  if (header.size() < 2 || header.front() != "Methode" || header.back() != "Derivable")
    raise(Errc::SyntaxError, "malformed matrix CSV header");
  m.cols.assign(header.begin() + 1, header.end() - 1);
  for (std::size_t li = 1; li < lines.size(); ++li) {
    auto parts = csv_split(lines[li]);
    if (parts.size() != header.size())
      raise(Errc::SyntaxError, "matrix CSV row width mismatch on line " + std::to_string(li + 1));
    if (parts.front() == "Derive") {
      for (std::size_t j = 0; j < m.cols.size(); ++j) m.derived_row.push_back(std::stoi(parts[j + 1]));
      continue;
    }
    m.rows.push_back(parts.front());
    std::vector<int> row;
    for (std::size_t j = 0; j < m.cols.size(); ++j) row.push_back(std::stoi(parts[j + 1]));
    m.cells.push_back(std::move(row));
    m.derivable_col.push_back(parts.back().empty() ? -1 : std::stoi(parts.back()));
  }
  if (m.derived_row.size() != m.cols.size())
    raise(Errc::SyntaxError, "matrix CSV lacks a Derive row");
  return m;
}

}  // namespace wdw::analyzer
