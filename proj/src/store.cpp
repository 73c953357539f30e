#include "clarify/store.hpp"

#include <algorithm>

#include "clarify/error.hpp"
#include "clarify/text.hpp"

namespace clarify {

using nlohmann::json;

namespace {

json manifest_json(const RunResult& r) {
  auto j = report_json(r);
  j["config"] = r.config;
  j["started"] = r.started;
  j["finished"] = r.finished;
  j["metrics_exact"] = r.metrics ? to_exact_json(*r.metrics) : json(nullptr);
  return j;
}

std::vector<StatementRecord> read_records(const std::filesystem::path& path, bool tolerate_torn) {
  std::vector<StatementRecord> out;
  std::error_code ec;
  if (!std::filesystem::exists(path, ec)) return out;
  auto data = read_file(path);
  std::size_t pos = 0;
  while (pos < data.size()) {
    auto nl = data.find('\n', pos);
    bool complete_line = nl != std::string::npos;
    auto line = data.substr(pos, complete_line ? nl - pos : std::string::npos);
    pos = complete_line ? nl + 1 : data.size();
    if (trim(line).empty()) continue;
    try {
      out.push_back(json::parse(line).get<StatementRecord>());
    } catch (const std::exception& e) {
      if (tolerate_torn && !complete_line) break;
      fail(ErrorCode::StorageFailure, "corrupt record in '" + path.string() + "': " + e.what());
    }
  }
  return out;
}

}  // namespace

RunStore::RunStore(std::filesystem::path root) : root_(std::move(root)) {
  std::error_code ec;
  std::filesystem::create_directories(root_ / "runs", ec);
  if (ec) fail(ErrorCode::StorageFailure, "cannot create store at '" + root_.string() + "': " + ec.message());
}

std::filesystem::path RunStore::run_dir(const std::string& run_id) const { return root_ / "runs" / run_id; }

RunStore::Writer::Writer(const std::filesystem::path& path)
    : out_(path, std::ios::app | std::ios::binary), path_(path) {
  if (!out_) fail(ErrorCode::StorageFailure, "cannot open '" + path.string() + "' for appending");
}

void RunStore::Writer::append(const StatementRecord& record) {
  auto line = json(record).dump() + "\n";
  std::lock_guard lock(mu_);
  out_ << line;
  out_.flush();
  if (!out_) fail(ErrorCode::StorageFailure, "append to '" + path_.string() + "' failed");
}

std::unique_ptr<RunStore::Writer> RunStore::begin_run(const RunResult& header) {
  auto dir = run_dir(header.run_id);
  auto manifest = manifest_json(header);
  write_file_atomic(dir / "manifest.json", manifest.dump(2) + "\n");
  // Rewrite the records file with whatever survives from an earlier attempt,
  // dropping any torn tail, before appending.
  std::string kept;
  for (const auto& r : header.records) kept += json(r).dump() + "\n";
  write_file_atomic(dir / "records.jsonl", kept);
  return std::unique_ptr<Writer>(new Writer(dir / "records.jsonl"));
}

std::vector<StatementRecord> RunStore::resumable_records(const std::string& run_id) const {
  auto dir = run_dir(run_id);
  std::error_code ec;
  if (!std::filesystem::exists(dir / "manifest.json", ec)) return {};
  json manifest;
  try {
    manifest = json::parse(read_file(dir / "manifest.json"));
  } catch (const json::exception&) {
    return {};
  }
  if (manifest.value("status", std::string()) == "complete") return {};
  return read_records(dir / "records.jsonl", true);
}

std::string RunStore::save_run(const RunResult& result) {
  auto dir = run_dir(result.run_id);
  std::string records;
  for (const auto& r : result.records) records += json(r).dump() + "\n";
  write_file_atomic(dir / "records.jsonl", records);
  write_file_atomic(dir / "manifest.json", manifest_json(result).dump(2) + "\n");
  return result.run_id;
}

RunResult RunStore::load_run(const std::string& run_id) const {
  auto dir = run_dir(run_id);
  std::error_code ec;
  if (!std::filesystem::exists(dir / "manifest.json", ec)) {
    fail(ErrorCode::UnknownRun, "no run '" + run_id + "' in '" + root_.string() + "'");
  }
  RunResult r;
  try {
    auto m = json::parse(read_file(dir / "manifest.json"));
    r.run_id = m.at("run_id").get<std::string>();
    r.strategy = parse_strategy(m.at("strategy").get<std::string>());
    r.corpus_digest = m.value("corpus_digest", std::string());
    r.config = m.value("config", json::object());
    r.status = parse_run_status(m.at("status").get<std::string>());
    r.started = m.value("started", std::string());
    r.finished = m.value("finished", std::string());
    r.unlabeled = m.value("n_unlabeled", std::size_t{0});
    if (m.contains("metrics_exact") && !m["metrics_exact"].is_null()) {
      r.metrics = metrics_from_exact_json(m["metrics_exact"]);
    }
    for (const auto& s : m.value("skipped", json::array())) {
      r.skipped.push_back({s.at("statement_id").get<std::string>(), s.at("reason").get<std::string>()});
    }
    for (const auto& f : m.value("failed", json::array())) {
      r.failed.push_back({f.at("statement_id").get<std::string>(), f.at("code").get<std::string>(),
                          f.at("message").get<std::string>()});
    }
  } catch (const json::exception& e) {
    fail(ErrorCode::StorageFailure, "corrupt manifest for run '" + run_id + "': " + e.what());
  }
  r.records = read_records(dir / "records.jsonl", r.status != RunStatus::Complete);
  return r;
}

std::vector<std::string> RunStore::list_runs() const {
  std::vector<std::string> ids;
  std::error_code ec;
  for (const auto& entry : std::filesystem::directory_iterator(root_ / "runs", ec)) {
    if (entry.is_directory() && std::filesystem::exists(entry.path() / "manifest.json")) {
      ids.push_back(entry.path().filename().string());
    }
  }
  std::sort(ids.begin(), ids.end());
  return ids;
}

void RunStore::save_session(const std::string& id, const json& session) {
  write_file_atomic(root_ / "sessions" / (id + ".json"), session.dump(2) + "\n");
}

std::optional<json> RunStore::load_session(const std::string& id) const {
  auto path = root_ / "sessions" / (id + ".json");
  std::error_code ec;
  if (!std::filesystem::exists(path, ec)) return std::nullopt;
  try {
    return json::parse(read_file(path));
  } catch (const json::exception& e) {
    fail(ErrorCode::StorageFailure, "corrupt session '" + id + "': " + e.what());
  }
}

}  // namespace clarify
