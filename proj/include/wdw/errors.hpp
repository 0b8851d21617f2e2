#pragma once

#include <stdexcept>
#include <string>

namespace wdw {

enum class Errc {
  MixedUnits,
  EmptyInterval,
  NotCoarser,
  UnknownClass,
  UnknownProperty,
  UnknownMethodMeta,
  TypeMismatch,
  NameCollision,
  NonCollectionPath,
  NonNumericAgg,
  NotACollection,
  StructureMismatch,
  EmptyStructure,
  EmptyInput,
  NonMonotonicTick,
  ScheduleViolation,
  DependencyCycle,
  SyntaxError,
  UnresolvedName,
  DuplicateDeclaration,
  IoError,
  SchemaMismatch,
  DanglingRef,
  OpenEnded,
  Usage,
};

const char* errc_name(Errc c);

/// Single exception type carrying a machine-readable error code.
class Error : public std::runtime_error {
 public:
  Error(Errc code, std::string message)
      : std::runtime_error(std::string(errc_name(code)) + ": " + message), code_(code) {}

  Errc code() const { return code_; }

 private:
  Errc code_;
};

[[noreturn]] inline void raise(Errc code, const std::string& message) {
  throw Error(code, message);
}

}  // namespace wdw
