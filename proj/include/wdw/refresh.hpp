#pragma once

#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "wdw/archive.hpp"
#include "wdw/model.hpp"

namespace wdw::refresh {

struct RefreshCounts {
  std::int64_t created = 0;
  std::int64_t historized = 0;   // current closed into a past state
  std::int64_t updated = 0;      // non-temporal overwrite in place
  std::int64_t unchanged = 0;
  std::int64_t retired = 0;
};

struct RefreshReport {
  std::map<std::string, RefreshCounts> per_class;
};

/// Populates a fresh store from the first snapshot: every class evaluated in
/// dependency order, every produced object starting its current state at t0.
model::Store initial_build(const model::WarehouseSchema& schema, const SourceSnapshot& snapshot,
                           const temporal::Instant& t0, const std::string& schema_text);

/// One refresh tick: re-evaluates mappings on the snapshot and applies the
/// current-to-past transitions driven by each class's temporal filter.
/// `env_filter` limits the tick to one environment's classes.
RefreshReport refresh(model::Store& store, const model::WarehouseSchema& schema,
                      const SourceSnapshot& snapshot, const temporal::Instant& t,
                      const std::string* env_filter = nullptr);

struct Tick {
  temporal::Instant at;
  std::string snapshot_path;
  std::string environment;  // "" = whole store
  bool archive = false;
};

struct RunReport {
  std::vector<std::pair<Tick, RefreshReport>> refreshes;
  std::vector<std::pair<std::string, archive::ArchiveReport>> archives;
};

using SnapshotLoader = std::function<SourceSnapshot(const std::string& path)>;

/// Applies ticks in order, checking each environment's refresh period
/// spacing, and triggering the environment's archiving when a tick asks for
/// it.
RunReport run_schedule(model::Store& store, const model::WarehouseSchema& schema,
                       const std::vector<Tick>& ticks, const SnapshotLoader& load);

}  // namespace wdw::refresh
