#include "clawguard/memory_guard.hpp"

#include <sys/stat.h>

#include <filesystem>
#include <fstream>
#include <random>

#include <json.hpp>

#include "clawguard/digest.hpp"
#include "clawguard/sanitizer.hpp"

namespace clawguard::memory {
namespace {

// Keystream XOR under the store key. Not a hardened AEAD; the property the
// store guarantees is that SECRET bytes never appear verbatim at rest.
std::string seal_bytes(const std::vector<std::uint8_t>& key, const std::string& nonce_hex,
                       const std::string& plain) {
  std::string out = plain;
  std::size_t offset = 0;
  std::uint64_t counter = 0;
  while (offset < out.size()) {
    const Digest256 block = hmac_sha256(key, nonce_hex + ":" + std::to_string(counter++));
    for (std::size_t i = 0; i < block.size() && offset < out.size(); ++i, ++offset) {
      out[offset] = static_cast<char>(static_cast<std::uint8_t>(out[offset]) ^ block[i]);
    }
  }
  return out;
}

std::string random_nonce_hex() {
  static std::mt19937_64 rng{std::random_device{}()};
  std::vector<std::uint8_t> bytes(16);
  for (auto& b : bytes) b = static_cast<std::uint8_t>(rng() & 0xff);
  return hex_encode(bytes);
}

nlohmann::json entry_to_json(const MemoryEntry& entry, const std::vector<std::uint8_t>& key) {
  nlohmann::json j = {{"entry_id", entry.entry_id},
                      {"provenance", std::string(provenance_name(entry.taint.provenance))},
                      {"sensitivity", std::string(sensitivity_name(entry.taint.sensitivity))},
                      {"written_at", entry.written_at},
                      {"written_by", entry.written_by}};
  nlohmann::json findings = nlohmann::json::array();
  for (const auto& f : entry.vet_findings) findings.push_back(finding_to_json(f));
  j["findings"] = std::move(findings);
  if (entry.taint.sensitivity == Sensitivity::SECRET && !key.empty()) {
    const std::string nonce = random_nonce_hex();
    const std::string sealed = seal_bytes(key, nonce, entry.content);
    j["sealed"] = {{"nonce", nonce},
                   {"data", hex_encode(reinterpret_cast<const std::uint8_t*>(sealed.data()),
                                       sealed.size())}};
  } else {
    j["content"] = entry.content;
  }
  return j;
}

Result<MemoryEntry> entry_from_json(const nlohmann::json& j,
                                    const std::vector<std::uint8_t>& key) {
  MemoryEntry entry;
  entry.entry_id = j.at("entry_id").get<std::string>();
  const auto prov = provenance_from_name(j.at("provenance").get<std::string>());
  const auto sens = sensitivity_from_name(j.at("sensitivity").get<std::string>());
  if (!prov || !sens) return Result<MemoryEntry>::failure("MALFORMED", "bad taint in record");
  entry.taint = {*prov, *sens};
  entry.written_at = j.value("written_at", "");
  entry.written_by = j.value("written_by", "");
  if (j.contains("findings")) {
    for (const auto& f : j["findings"]) entry.vet_findings.push_back(finding_from_json(f));
  }
  if (j.contains("sealed")) {
    const auto data = hex_decode(j["sealed"].at("data").get<std::string>());
    if (!data) return Result<MemoryEntry>::failure("MALFORMED", "bad sealed data");
    const std::string sealed(reinterpret_cast<const char*>(data->data()), data->size());
    entry.content = seal_bytes(key, j["sealed"].at("nonce").get<std::string>(), sealed);
  } else {
    entry.content = j.value("content", "");
  }
  return entry;
}

}  // namespace

Result<MemoryStore> MemoryStore::open(const std::string& dir, std::size_t max_entries) {
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) return Result<MemoryStore>::failure("IO_ERROR", "cannot create " + dir);

  MemoryStore store;
  store.max_entries_ = max_entries;
  store.store_file_ = (fs::path(dir) / "store.log").string();

  const std::string key_path = (fs::path(dir) / "key").string();
  if (!fs::exists(key_path)) {
    std::mt19937_64 rng{std::random_device{}()};
    std::vector<std::uint8_t> key(32);
    for (auto& b : key) b = static_cast<std::uint8_t>(rng() & 0xff);
    std::ofstream out(key_path, std::ios::binary | std::ios::trunc);
    if (!out) return Result<MemoryStore>::failure("IO_ERROR", "cannot write key file");
    out.write(reinterpret_cast<const char*>(key.data()),
              static_cast<std::streamsize>(key.size()));
    out.close();
    ::chmod(key_path.c_str(), 0600);
  }
  {
    std::ifstream in(key_path, std::ios::binary);
    if (!in) return Result<MemoryStore>::failure("IO_ERROR", "cannot read key file");
    store.seal_key_.assign(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
    if (store.seal_key_.size() != 32) {
      return Result<MemoryStore>::failure("IO_ERROR", "key file corrupt");
    }
  }

  // replay existing records: 4-byte big-endian length prefix + JSON
  std::ifstream in(store.store_file_, std::ios::binary);
  while (in) {
    std::uint8_t len_be[4];
    if (!in.read(reinterpret_cast<char*>(len_be), 4)) break;
    const std::uint32_t len = (std::uint32_t(len_be[0]) << 24) | (std::uint32_t(len_be[1]) << 16) |
                              (std::uint32_t(len_be[2]) << 8) | std::uint32_t(len_be[3]);
    std::string record(len, '\0');
    if (!in.read(record.data(), len)) break;
    const auto j = nlohmann::json::parse(record, nullptr, false);
    if (j.is_discarded()) return Result<MemoryStore>::failure("MALFORMED", "corrupt record");
    auto entry = entry_from_json(j, store.seal_key_);
    if (!entry.ok()) return Result<MemoryStore>::failure(entry.error().code, entry.error().message);
    const std::string id = entry.value().entry_id;
    store.order_.push_back(id);
    store.entries_[id] = entry.take();
    store.next_id_ = store.order_.size() + 1;
  }
  return store;
}

Status MemoryStore::persist(const MemoryEntry& entry) {
  if (store_file_.empty()) return Status{};
  const std::string record = entry_to_json(entry, seal_key_).dump();
  std::ofstream out(store_file_, std::ios::binary | std::ios::app);
  if (!out) return Status::failure("IO_ERROR", "cannot append to store");
  const auto len = static_cast<std::uint32_t>(record.size());
  const std::uint8_t len_be[4] = {static_cast<std::uint8_t>(len >> 24),
                                  static_cast<std::uint8_t>(len >> 16),
                                  static_cast<std::uint8_t>(len >> 8),
                                  static_cast<std::uint8_t>(len)};
  out.write(reinterpret_cast<const char*>(len_be), 4);
  out.write(record.data(), static_cast<std::streamsize>(record.size()));
  return Status{};
}

VetWriteResult MemoryStore::vet_write(const std::string& content, TaintLabel taint,
                                      const std::string& written_by, const Lexicon& lexicon,
                                      const Clock& clock) {
  VetWriteResult out;
  out.verdict.stage = "memory";

  if (entries_.size() >= max_entries_) {
    out.verdict.disposition = Disposition::DENY;
    out.verdict.add_finding({"memory.store_full", Severity::HIGH, "memory store",
                             "store at capacity (" + std::to_string(max_entries_) + ")"});
    return out;
  }

  const auto findings = sanitizer::detect_injection(lexicon, {content});
  bool instruction_bearing = false;
  for (const auto& f : findings) {
    const bool instruction_class =
        f.kind == RuleKind::TRIGGER_ACTION || f.rule_id == "inj.override_phrase";
    if (instruction_class) instruction_bearing = true;
    out.verdict.add_finding({f.rule_id, f.severity, "memory write", f.message});
  }

  if (instruction_bearing && taint.provenance >= Provenance::SKILL_THIRD_PARTY) {
    out.verdict.disposition = Disposition::DENY;
    return out;  // never stored: the backdoor stays out of the store
  }

  MemoryEntry entry;
  entry.entry_id = "m" + std::to_string(next_id_++);
  entry.content = content;
  entry.taint = taint;
  entry.written_at = iso8601_utc(clock());
  entry.written_by = written_by;
  entry.vet_findings = out.verdict.findings;
  persist(entry);
  order_.push_back(entry.entry_id);
  out.stored_entry_id = entry.entry_id;
  entries_[entry.entry_id] = std::move(entry);
  out.verdict.disposition = out.verdict.findings.empty() ? Disposition::ALLOW : Disposition::FLAG;
  return out;
}

Result<ReadResult> MemoryStore::vet_read(const std::string& entry_id) const {
  const auto it = entries_.find(entry_id);
  if (it == entries_.end()) {
    return Result<ReadResult>::failure("NOT_FOUND", "no such entry: " + entry_id);
  }
  ReadResult out;
  out.content = it->second.content;
  out.taint = join(it->second.taint, TaintLabel{Provenance::MEMORY_PERSISTED, Sensitivity::PUBLIC});
  out.findings = it->second.vet_findings;
  return out;
}

std::vector<std::string> MemoryStore::entry_ids() const {
  return order_;
}

}  // namespace clawguard::memory
