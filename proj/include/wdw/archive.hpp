#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "wdw/model.hpp"

namespace wdw::archive {

/// Positions (into o.past) of the states whose whole domain satisfies the
/// predicate. The current state is never selected.
std::vector<std::size_t> select_for_archive(const model::WarehouseObject& o,
                                            const model::ArchivePredicate& pred);

/// Folds the selected states into one archived state: per archived property,
/// the aggregation function over one unweighted sample per state; the domain
/// is the normalized union of the states' domains.
model::State archive_classical(const std::vector<model::State>& states,
                               const std::vector<std::pair<std::string, model::AggFn>>& filter);

/// Groups the selected states by target-unit grain and folds each group; each
/// archived state covers exactly its grain.
std::vector<model::State> archive_temporal(
    const std::vector<model::State>& states,
    const std::vector<std::pair<std::string, model::AggFn>>& filter, temporal::Unit target_unit);

struct ArchiveReport {
  struct PerClass {
    std::string cls;
    std::int64_t consumed = 0;
    std::int64_t produced = 0;
  };
  std::vector<PerClass> per_class;

  std::int64_t total_consumed() const;
  std::int64_t total_produced() const;
};

/// Runs the environment's archive predicate over every object of its classes,
/// removing the selected past states and appending the produced archived
/// states. Hierarchy classes share their operands' objects and are skipped.
ArchiveReport apply_archive(const model::Environment& env, const model::WarehouseSchema& schema,
                            model::Store& store);

}  // namespace wdw::archive
