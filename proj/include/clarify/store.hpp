#pragma once

// On-disk run store:
//   <root>/runs/<id>/manifest.json   run metadata, skipped/failed lists, metrics
//   <root>/runs/<id>/records.jsonl   one StatementRecord per line
//   <root>/sessions/<id>.json        clarification sessions
//   <root>/cache/<xx>/<digest>.json  completion cache (see CompletionCache)
// Whole-file writes go through a temp file and rename.

#include <filesystem>
#include <fstream>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "clarify/records.hpp"

namespace clarify {

class RunStore {
 public:
  // Creates the root if needed; throws StorageFailure.
  explicit RunStore(std::filesystem::path root);

  const std::filesystem::path& root() const { return root_; }
  std::filesystem::path run_dir(const std::string& run_id) const;
  std::filesystem::path cache_dir() const { return root_ / "cache"; }

  // Appends records while a run is in progress. One writer per run; append
  // is internally serialized and flushes each line.
  class Writer {
   public:
    void append(const StatementRecord& record);

   private:
    friend class RunStore;
    explicit Writer(const std::filesystem::path& path);
    std::mutex mu_;
    std::ofstream out_;
    std::filesystem::path path_;
  };

  // Writes a Running manifest and opens records.jsonl for appending.
  std::unique_ptr<Writer> begin_run(const RunResult& header);

  // Records already persisted for a run that did not complete, keyed by
  // statement id. A torn final line is ignored. Complete or unknown runs
  // yield an empty list.
  std::vector<StatementRecord> resumable_records(const std::string& run_id) const;

  // Atomically replaces manifest and records with the final state.
  std::string save_run(const RunResult& result);
  // Throws UnknownRun or StorageFailure.
  RunResult load_run(const std::string& run_id) const;
  std::vector<std::string> list_runs() const;

  void save_session(const std::string& id, const nlohmann::json& session);
  std::optional<nlohmann::json> load_session(const std::string& id) const;

 private:
  std::filesystem::path root_;
};

}  // namespace clarify
