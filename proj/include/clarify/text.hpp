#pragma once

// Byte-level text utilities: UTF-8 validation and decoding, CSV parsing,
// SHA-256 digests and atomic file writes.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace clarify {

bool is_valid_utf8(std::string_view bytes);

// Decodes valid UTF-8 into code points. Precondition: is_valid_utf8(bytes).
std::vector<char32_t> decode_utf8(std::string_view bytes);
void append_utf8(std::string& out, char32_t cp);

std::string sha256_hex(std::string_view data);

// RFC 4180 records. Quoted fields may contain separators, doubled quotes and
// line breaks. `line` is the 1-based physical line where the record starts.
struct CsvRecord {
  std::vector<std::string> fields;
  std::size_t line = 0;
};

class CsvReader {
 public:
  explicit CsvReader(std::string_view data) : data_(data) {}

  // Returns nullopt at end of input. Throws MalformedRow on an unterminated
  // quote or stray characters after a closing quote.
  std::optional<CsvRecord> next();

 private:
  std::string_view data_;
  std::size_t pos_ = 0;
  std::size_t line_ = 1;
};

std::string csv_escape(std::string_view field);

// Reads a whole file; throws FileUnreadable.
std::string read_file(const std::filesystem::path& path);

// Writes to a sibling temp file then renames over `path`, so readers see
// either the old or the new content. Throws StorageFailure.
void write_file_atomic(const std::filesystem::path& path, std::string_view content);

// Current UTC time as YYYY-MM-DDTHH:MM:SSZ.
std::string now_iso8601();

}  // namespace clarify
