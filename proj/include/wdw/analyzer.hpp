#pragma once

#include <map>
#include <set>
#include <string>
#include <vector>

#include "wdw/model.hpp"
#include "wdw/source_schema.hpp"

namespace wdw::analyzer {

// Usage matrix: one row per method, one column per criterion (property,
// object-predicate conjunction, or method). Cells are 0/1; the extra
// "Derive" row marks criteria available in the warehouse (-1 = not yet
// analyzed, MUM only); the "Derivable" column records each row's verdict
// (-1 = unset).
struct UsageMatrix {
  enum class Kind { MUP, MUO, MUM };

  Kind kind{Kind::MUP};
  std::string owner;  // warehouse class for local matrices
  std::vector<std::string> rows;
  std::vector<std::string> cols;
  std::vector<std::vector<int>> cells;
  std::vector<int> derived_row;
  std::vector<int> derivable_col;

  int row_index(const std::string& id) const;
  int col_index(const std::string& id) const;

  friend bool operator==(const UsageMatrix&, const UsageMatrix&) = default;
};

/// Removes columns whose cells are all 0 and whose Derive entry is 0.
UsageMatrix optimize(const UsageMatrix& m);

/// Local analysis of one row: the missing criteria (cell 1, Derive 0); sets
/// the row's Derivable entry.
std::set<std::string> analyse_locale(std::size_t row, UsageMatrix& m);

/// Per-class local matrices. `muo_conjs` carries the qualified conjunction
/// behind each MUO column.
struct LocalMatrices {
  UsageMatrix mup;
  UsageMatrix muo;
  std::vector<algebra::QualifiedConjunction> muo_conjs;
};

LocalMatrices build_local_matrices(const model::WarehouseClass& cls, const SourceSchema& source);

/// True when every object satisfying `conj` also satisfies all of the
/// mapping's selection predicates (syntactic one-path-at-a-time implication;
/// unknown means not covered).
bool conjunction_covered(const algebra::QualifiedConjunction& conj,
                         const std::vector<algebra::QualifiedDnf>& selections);

struct CycleNote {
  std::string a;
  std::string b;
};

struct MethodVerdict {
  std::string id;       // qualified CLASS::method
  std::string display;  // bare name when unambiguous
  std::string assigned_class;
  bool derivable = false;
  std::set<std::string> missing;     // display names of missing criteria
  std::set<std::string> cycle_with;  // display names of cycle partners
};

struct BehaviorAnalysis {
  std::vector<LocalMatrices> locals;                 // declaration order
  UsageMatrix mum;
  std::map<std::string, std::string> assigned_mup;   // method id -> class name
  std::vector<MethodVerdict> verdicts;               // sorted by display
  std::vector<CycleNote> cycles;

  std::set<std::string> derivable() const;
  const MethodVerdict* find(const std::string& display_or_id) const;
};

UsageMatrix build_mum(const model::WarehouseSchema& schema, const SourceSchema& source,
                      const std::vector<LocalMatrices>& locals,
                      const std::map<std::string, std::string>& assigned,
                      const std::set<std::string>& assume_derivable);

/// Global analysis of one MUM row with cycle detection; `visite` must be
/// all-zero at the top-level call. Returns the missing methods.
std::set<std::string> analyse_globale(std::size_t row, UsageMatrix& mum, std::vector<int>& visite,
                                      std::vector<CycleNote>& cycles);

/// Full derivation pipeline: local analyses, the global analysis, and the
/// per-method verdicts.
BehaviorAnalysis analyze_behavior(const model::WarehouseSchema& schema, const SourceSchema& source,
                                  const std::set<std::string>& assume_derivable = {});

std::string format_report(const BehaviorAnalysis& a, bool color = false);

std::string matrix_to_csv(const UsageMatrix& m);
UsageMatrix matrix_from_csv(const std::string& text);

}  // namespace wdw::analyzer
