#include "wdw/predicate.hpp"

namespace wdw {

const char* pred_op_text(PredAtom::Op op) {
  switch (op) {
    case PredAtom::Op::Eq: return "=";
    case PredAtom::Op::Ne: return "!=";
    case PredAtom::Op::Lt: return "<";
    case PredAtom::Op::Le: return "<=";
    case PredAtom::Op::Gt: return ">";
    case PredAtom::Op::Ge: return ">=";
    case PredAtom::Op::In: return "in";
  }
  return "?";
}

std::string format_operand(const PredOperand& o) {
  switch (o.kind) {
    case PredOperand::Kind::Binder:
      return o.binder;
    case PredOperand::Kind::Literal:
      return o.literal.to_string();
    case PredOperand::Kind::Path: {
      std::string out = o.binder;
      for (const auto& seg : o.path) {
        if (!out.empty()) out += '.';
        out += seg;
      }
      return out;
    }
  }
  return "?";
}

std::string format_atom(const PredAtom& a) {
  return format_operand(a.lhs) + " " + pred_op_text(a.op) + " " + format_operand(a.rhs);
}

std::string format_conjunction(const Conjunction& c) {
  if (c.empty()) return "true";
  std::string out;
  for (const auto& a : c) {
    if (!out.empty()) out += " and ";
    out += format_atom(a);
  }
  return out;
}

std::string format_dnf(const Dnf& d) {
  if (d.is_false()) return "false";
  if (d.is_true()) return "true";
  std::string out;
  for (const auto& c : d.disjuncts) {
    if (!out.empty()) out += " or ";
    out += format_conjunction(c);
  }
  return out;
}

}  // namespace wdw
