#pragma once

// Record files (JSON Lines, one record per line, sorted keys) and the
// manifest sidecar written next to them.

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "seedforge/ablation/builder.hpp"
#include "seedforge/types.hpp"

namespace seedforge {

// Writes atomically (temp file + rename). Byte-identical for equal input.
void write_records(const std::vector<InstructionRecord>& records, const std::filesystem::path& path);

// Throws FormatError with the 1-based line number on invalid UTF-8, bad
// JSON, a missing or mistyped field, a blank line or a repeated id.
std::vector<InstructionRecord> read_records(const std::filesystem::path& path);

// Topic, context and removal files share the JSON Lines layout; readers
// throw FormatError with the line number.
void write_topics(const std::vector<Topic>& topics, const std::filesystem::path& path);
std::vector<Topic> read_topics(const std::filesystem::path& path);
void write_contexts(const std::vector<ContextDoc>& contexts, const std::filesystem::path& path);
std::vector<ContextDoc> read_contexts(const std::filesystem::path& path);
void write_removals(const std::vector<Removal>& removals, const std::filesystem::path& path);

// "<dir>/<stem>.manifest.json" for "<dir>/<stem>.jsonl".
std::filesystem::path manifest_path_for(const std::filesystem::path& records_path);

// Everything about a build except the records themselves, plus the hash
// of the record file and the effective configuration.
nlohmann::json manifest_json(const DatasetManifest& m, const std::string& records_sha256,
                             const nlohmann::json& config);

// Writes the record file and its manifest; returns the manifest JSON.
nlohmann::json write_dataset(const DatasetManifest& m, const std::filesystem::path& records_path,
                             const nlohmann::json& config);

// Reads a manifest written by write_dataset back into a DatasetManifest
// (records loaded from the sibling file, checked against its hash).
DatasetManifest read_dataset(const std::filesystem::path& records_path);

std::string file_sha256(const std::filesystem::path& path);

// Atomic whole-file write.
void write_file(const std::filesystem::path& path, const std::string& content);

}  // namespace seedforge
