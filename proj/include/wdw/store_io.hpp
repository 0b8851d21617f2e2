#pragma once

#include <string>
#include <vector>

#include "wdw/model.hpp"
#include "wdw/refresh.hpp"
#include "wdw/source_schema.hpp"

namespace wdw::io {

/// Schema-aware snapshot decoding: relationships given as oid strings become
/// Refs, attribute values are checked against their declared types, every
/// relationship target must resolve (DanglingRef otherwise) and declared
/// inverses must be consistent.
SourceSnapshot parse_snapshot(const std::string& json_text, const SourceSchema& schema);
SourceSnapshot load_snapshot(const std::string& path, const SourceSchema& schema);

std::string store_to_json(const model::Store& store);
model::Store parse_store(const std::string& json_text);  // verifies the schema hash
model::Store load_store(const std::string& path);
void save_store(const model::Store& store, const std::string& path);

std::vector<refresh::Tick> parse_tickscript(const std::string& json_text);
std::vector<refresh::Tick> load_tickscript(const std::string& path);

std::string read_file(const std::string& path);
void write_file(const std::string& path, const std::string& content);

}  // namespace wdw::io
