#include "gptsm/cache_store.hpp"

#include <fcntl.h>
#include <unistd.h>

#include <cerrno>
#include <chrono>
#include <cstring>
#include <ctime>
#include <fstream>

#include "json.hpp"

namespace gptsm {
namespace {

using nlohmann::json;

std::string_view endpoint_name(Endpoint e) {
  return e == Endpoint::chat ? "chat" : "embed";
}

Endpoint parse_endpoint(const std::string& s) {
  if (s == "chat") return Endpoint::chat;
  if (s == "embed") return Endpoint::embedding;
  throw std::invalid_argument("unknown endpoint '" + s + "'");
}

json request_json(const RequestSummary& r) {
  return json{{"endpoint", endpoint_name(r.endpoint)},
              {"model", r.model},
              {"prompt", r.prompt},
              {"temperature", r.temperature},
              {"sample", r.sample_index}};
}

RequestSummary request_from_json(const json& j) {
  RequestSummary r;
  r.endpoint = parse_endpoint(j.at("endpoint").get<std::string>());
  r.model = j.at("model").get<std::string>();
  r.prompt = j.at("prompt").get<std::string>();
  r.temperature = j.at("temperature").get<double>();
  r.sample_index = j.at("sample").get<std::size_t>();
  return r;
}

json response_json(const CachedResponse& response) {
  if (const auto* s = std::get_if<std::string>(&response)) return *s;
  return std::get<std::vector<double>>(response);
}

CachedResponse response_from_json(const json& j) {
  if (j.is_string()) return j.get<std::string>();
  if (j.is_array()) return j.get<std::vector<double>>();
  throw std::invalid_argument("response is neither a string nor an array");
}

std::string serialize(const CacheEntry& e) {
  json line{{"k", e.key.hex()},
            {"req", request_json(e.request)},
            {"resp", response_json(e.response)},
            {"t", e.created_at}};
  line["sum"] = sha256_hex(line.dump());
  return line.dump();
}

// Throws std::exception with a human-readable reason on any defect.
CacheEntry parse_line(const std::string& text) {
  json line = json::parse(text);
  if (!line.is_object()) throw std::invalid_argument("not a JSON object");
  const std::string sum = line.at("sum").get<std::string>();
  line.erase("sum");
  if (line.size() != 4) throw std::invalid_argument("unexpected field set");
  if (sha256_hex(line.dump()) != sum) throw std::invalid_argument("checksum mismatch");

  CacheEntry e;
  e.request = request_from_json(line.at("req"));
  e.key = CacheKey::of(e.request);
  if (e.key.hex() != line.at("k").get<std::string>()) {
    throw std::invalid_argument("key does not match request digest");
  }
  e.response = response_from_json(line.at("resp"));
  e.created_at = line.at("t").get<std::string>();
  return e;
}

}  // namespace

std::string RequestSummary::canonical() const {
  return json::array({endpoint_name(endpoint), model, prompt, temperature, sample_index})
      .dump();
}

CacheKey CacheKey::of(const RequestSummary& request) {
  return CacheKey{sha256(request.canonical())};
}

std::string iso8601_now() {
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

CacheStore::CacheStore(std::filesystem::path dir, CacheOptions options)
    : dir_(std::move(dir)), options_(options) {
  if (options_.writable) {
    std::error_code ec;
    std::filesystem::create_directories(dir_, ec);
    if (ec) throw StorageError("cannot create cache directory " + dir_.string() + ": " + ec.message());
  }
  load();
}

void CacheStore::load() {
  const auto path = file();
  if (!std::filesystem::exists(path)) return;
  std::ifstream in(path, std::ios::binary);
  if (!in) throw StorageError("cannot read cache file " + path.string());
  std::string text;
  std::size_t line_no = 0;
  while (std::getline(in, text)) {
    ++line_no;
    if (text.empty()) continue;
    CacheEntry e;
    try {
      e = parse_line(text);
    } catch (const std::exception& ex) {
      throw StorageError(path.string() + ":" + std::to_string(line_no) + ": corrupt entry (" +
                         ex.what() + ")");
    }
    auto [it, inserted] = index_.try_emplace(e.key.hex(), e);
    if (!inserted && it->second.response != e.response) {
      throw StorageError(path.string() + ":" + std::to_string(line_no) +
                         ": conflicting response for key " + e.key.hex());
    }
  }
}

std::optional<CacheEntry> CacheStore::get(const CacheKey& key) const {
  std::lock_guard lock(mutex_);
  const auto it = index_.find(key.hex());
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

void CacheStore::put(const CacheEntry& entry) {
  if (!options_.writable) throw StorageError("cache store " + dir_.string() + " is read-only");
  if (CacheKey::of(entry.request) != entry.key) {
    throw StorageError("cache entry key does not match its request");
  }
  std::lock_guard lock(mutex_);
  const auto hex = entry.key.hex();
  if (const auto it = index_.find(hex); it != index_.end()) {
    if (it->second.response == entry.response) return;
    throw VersionConflict("cache key " + hex + " already holds a different response");
  }
  append_line(serialize(entry));
  index_.emplace(hex, entry);
}

void CacheStore::put(const RequestSummary& request, CachedResponse response) {
  put(CacheEntry{CacheKey::of(request), request, std::move(response), iso8601_now()});
}

std::size_t CacheStore::size() const {
  std::lock_guard lock(mutex_);
  return index_.size();
}

void CacheStore::append_line(const std::string& line) {
  const auto path = file();
  const int fd = ::open(path.c_str(), O_WRONLY | O_APPEND | O_CREAT | O_CLOEXEC, 0644);
  if (fd < 0) throw StorageError("cannot open " + path.string() + ": " + std::strerror(errno));
  std::string data = line + '\n';
  const char* p = data.data();
  std::size_t left = data.size();
  while (left > 0) {
    const ssize_t n = ::write(fd, p, left);
    if (n < 0) {
      if (errno == EINTR) continue;
      const std::string reason = std::strerror(errno);
      ::close(fd);
      throw StorageError("write to " + path.string() + " failed: " + reason);
    }
    p += n;
    left -= static_cast<std::size_t>(n);
  }
  if (options_.sync && ::fsync(fd) != 0) {
    const std::string reason = std::strerror(errno);
    ::close(fd);
    throw StorageError("fsync of " + path.string() + " failed: " + reason);
  }
  ::close(fd);
}

VerifyReport CacheStore::verify(const std::filesystem::path& dir) {
  VerifyReport report;
  const auto path = dir / kFileName;
  if (!std::filesystem::exists(path)) return report;
  std::ifstream in(path, std::ios::binary);
  if (!in) throw StorageError("cannot read cache file " + path.string());
  std::unordered_map<std::string, CachedResponse> seen;
  std::string text;
  std::size_t line_no = 0;
  while (std::getline(in, text)) {
    ++line_no;
    if (text.empty()) continue;
    try {
      const CacheEntry e = parse_line(text);
      auto [it, inserted] = seen.try_emplace(e.key.hex(), e.response);
      if (!inserted && it->second != e.response) {
        report.problems.push_back("line " + std::to_string(line_no) +
                                  ": conflicting response for key " + e.key.hex());
      } else if (inserted) {
        ++report.entries;
      }
    } catch (const std::exception& ex) {
      report.problems.push_back("line " + std::to_string(line_no) + ": " + ex.what());
    }
  }
  return report;
}

}  // namespace gptsm
