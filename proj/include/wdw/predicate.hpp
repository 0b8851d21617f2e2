#pragma once

#include <string>
#include <vector>

#include "wdw/value.hpp"

namespace wdw {

// Operand of a simple comparison: a dotted property path (optionally scoped
// by a binder variable), a literal, or a bare binder (the object itself, in
// membership and relationship-equality join atoms).
struct PredOperand {
  enum class Kind { Path, Literal, Binder };

  Kind kind{Kind::Literal};
  std::string binder;             // Path ("" = class-relative) / Binder
  std::vector<std::string> path;  // Path
  Value literal;

  static PredOperand make_path(std::string binder, std::vector<std::string> path) {
    return {Kind::Path, std::move(binder), std::move(path), Value::null()};
  }
  static PredOperand make_literal(Value v) { return {Kind::Literal, "", {}, std::move(v)}; }
  static PredOperand make_binder(std::string b) { return {Kind::Binder, std::move(b), {}, Value::null()}; }

  friend bool operator==(const PredOperand&, const PredOperand&) = default;
};

struct PredAtom {
  enum class Op { Eq, Ne, Lt, Le, Gt, Ge, In };

  Op op{Op::Eq};
  PredOperand lhs;
  PredOperand rhs;

  friend bool operator==(const PredAtom&, const PredAtom&) = default;
};

const char* pred_op_text(PredAtom::Op op);

using Conjunction = std::vector<PredAtom>;

// Disjunctive normal form. No disjuncts = false; a disjunct with no atoms is
// vacuously true (so {{}}` encodes the constant true).
struct Dnf {
  std::vector<Conjunction> disjuncts;

  static Dnf constant(bool b) { return b ? Dnf{{Conjunction{}}} : Dnf{}; }
  bool is_true() const { return disjuncts.size() == 1 && disjuncts.front().empty(); }
  bool is_false() const { return disjuncts.empty(); }

  friend bool operator==(const Dnf&, const Dnf&) = default;
};

std::string format_operand(const PredOperand& o);
std::string format_atom(const PredAtom& a);
std::string format_conjunction(const Conjunction& c);
std::string format_dnf(const Dnf& d);

}  // namespace wdw
