#include "wdw/errors.hpp"

namespace wdw {

const char* errc_name(Errc c) {
  switch (c) {
    case Errc::MixedUnits: return "MixedUnits";
    case Errc::EmptyInterval: return "EmptyInterval";
    case Errc::NotCoarser: return "NotCoarser";
    case Errc::UnknownClass: return "UnknownClass";
    case Errc::UnknownProperty: return "UnknownProperty";
    case Errc::UnknownMethodMeta: return "UnknownMethodMeta";
    case Errc::TypeMismatch: return "TypeMismatch";
    case Errc::NameCollision: return "NameCollision";
    case Errc::NonCollectionPath: return "NonCollectionPath";
    case Errc::NonNumericAgg: return "NonNumericAgg";
    case Errc::NotACollection: return "NotACollection";
    case Errc::StructureMismatch: return "StructureMismatch";
    case Errc::EmptyStructure: return "EmptyStructure";
    case Errc::EmptyInput: return "EmptyInput";
    case Errc::NonMonotonicTick: return "NonMonotonicTick";
    case Errc::ScheduleViolation: return "ScheduleViolation";
    case Errc::DependencyCycle: return "DependencyCycle";
    case Errc::SyntaxError: return "SyntaxError";
    case Errc::UnresolvedName: return "UnresolvedName";
    case Errc::DuplicateDeclaration: return "DuplicateDeclaration";
    case Errc::IoError: return "IoError";
    case Errc::SchemaMismatch: return "SchemaMismatch";
    case Errc::DanglingRef: return "DanglingRef";
    case Errc::OpenEnded: return "OpenEnded";
    case Errc::Usage: return "Usage";
  }
  return "Error";
}

}  // namespace wdw
