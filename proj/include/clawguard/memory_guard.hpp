#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "clawguard/common.hpp"
#include "clawguard/lexicon.hpp"
#include "clawguard/taint.hpp"
#include "clawguard/verdict.hpp"

namespace clawguard::memory {

// Entries are immutable once written; taint travels with the entry.
struct MemoryEntry {
  std::string entry_id;
  std::string content;
  TaintLabel taint;
  std::string written_at;
  std::string written_by;
  std::vector<Finding> vet_findings;
};

struct VetWriteResult {
  Verdict verdict;
  std::optional<std::string> stored_entry_id;
};

struct ReadResult {
  std::string content;
  TaintLabel taint;  // stored taint joined with MEMORY_PERSISTED provenance
  std::vector<Finding> findings;
};

// Flat append-only store with an in-memory index. SECRET entries are sealed
// under a store-local key file before they reach disk; a store without a
// directory stays purely in memory.
class MemoryStore {
public:
  MemoryStore() = default;
  static Result<MemoryStore> open(const std::string& dir, std::size_t max_entries = 4096);

  VetWriteResult vet_write(const std::string& content, TaintLabel taint,
                           const std::string& written_by, const Lexicon& lexicon,
                           const Clock& clock);
  Result<ReadResult> vet_read(const std::string& entry_id) const;

  std::size_t size() const { return entries_.size(); }
  std::vector<std::string> entry_ids() const;
  const std::string& store_file() const { return store_file_; }
  void set_max_entries(std::size_t n) { max_entries_ = n; }

private:
  Status persist(const MemoryEntry& entry);

  std::map<std::string, MemoryEntry> entries_;
  std::vector<std::string> order_;
  std::size_t next_id_ = 1;
  std::size_t max_entries_ = 4096;
  std::string store_file_;
  std::vector<std::uint8_t> seal_key_;
};

}  // namespace clawguard::memory
