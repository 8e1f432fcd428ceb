#pragma once

// Access to a chat-completion endpoint and an embedding endpoint.
//
// The Gateway consults the cache before the backend; every response a backend
// produces is written to the cache before it is handed back. Backends are
// pluggable: MockBackend (scripted or echo, fully deterministic) and
// HttpBackend (chat-completions / embeddings style JSON APIs).

#include <cstddef>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <semaphore>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <tuple>
#include <vector>

#include "gptsm/cache_store.hpp"

namespace gptsm {

class TransportError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class BackendError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A request could not be served from the cache and no backend is available.
class OfflineCacheMiss : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class PromptKind { shorten_gp, shorten_ngp, grammar_grade };

std::string_view to_string(PromptKind kind);
std::optional<PromptKind> parse_prompt_kind(std::string_view name);

/// Instantiates the template for `kind`, inserting `paragraph` verbatim.
std::string render_prompt(PromptKind kind, std::string_view paragraph);

struct ChatRequest {
  std::string model;
  std::string prompt_text;
  double temperature = 0.7;
  std::size_t sample_count = 8;

  // Routing metadata. Not sent to live backends and not part of the cache
  // key; the mock uses it to look up scripted responses.
  PromptKind kind = PromptKind::shorten_gp;
  std::string subject;        // text placed in the template slot
  std::string paragraph_key;  // sha256 hex identifying the paragraph
  std::size_t round = 0;      // 1-based compression round; 0 for grading
};

ChatRequest make_chat_request(PromptKind kind, std::string_view subject, std::string model,
                              double temperature, std::size_t sample_count);

struct EmbeddingVector {
  std::vector<double> values;
};

/// Cosine similarity; 0 when either vector has zero norm.
double cosine(const EmbeddingVector& a, const EmbeddingVector& b);

class Backend {
 public:
  virtual ~Backend() = default;
  /// One response per requested sample index.
  virtual std::vector<std::string> complete(const ChatRequest& request,
                                            std::span<const std::size_t> sample_indices) = 0;
  virtual EmbeddingVector embed(std::string_view model, std::string_view text) = 0;
};

struct GatewayConfig {
  std::string embedding_model = "all-MiniLM-L6-v2";
  double grade_temperature = 0.0;
  std::size_t max_retries = 2;
  /// First backoff delay; doubles on each retry.
  double retry_backoff_seconds = 0.5;
  std::size_t max_in_flight = 4;
};

class Gateway {
 public:
  /// `backend` may be null (offline: cache only). `cache` may be null.
  Gateway(GatewayConfig config, std::shared_ptr<Backend> backend,
          std::shared_ptr<CacheStore> cache);

  std::vector<std::string> complete(const ChatRequest& request);
  EmbeddingVector embed(std::string_view text);

  /// Issues the grammar-grade prompt. Returns 'A', 'B' or 'C', or nullopt if
  /// neither the reply nor one retry contained a recognisable grade.
  std::optional<char> grade(std::string_view text, const std::string& model);

  const GatewayConfig& config() const { return config_; }

 private:
  std::vector<std::string> fetch(const ChatRequest& request,
                                 std::span<const std::size_t> sample_indices);
  template <typename Fn>
  auto with_retries(Fn&& fn);

  GatewayConfig config_;
  std::shared_ptr<Backend> backend_;
  std::shared_ptr<CacheStore> cache_;
  std::counting_semaphore<> in_flight_;
};

/// First standalone A, B or C (case-insensitive) in a grading reply.
std::optional<char> parse_grade(std::string_view reply);

// ---------------------------------------------------------------------------
// Mock backend
// ---------------------------------------------------------------------------

/// Scripted deterministic backend.
///
/// Script file format:
///   {
///     "default_grade": "A",
///     "entries": [
///       {"kind": "shorten_gp", "paragraph": "<level-0 text>", "round": 1,
///        "responses": ["...", "..."]},
///       {"kind": "grammar_grade", "paragraph": "<graded text>",
///        "responses": ["B"]}
///     ]
///   }
/// `paragraph` may be replaced by `paragraph_sha256` (hex digest of the
/// whitespace-normalized text). Kind "shorten" matches both shorten prompts.
/// Responses are returned by sample index modulo the list length. A shorten
/// request with no entry echoes its subject (a refusal); a grade request with
/// no entry answers `default_grade`. Embeddings are pseudo-random unit vectors
/// seeded by the SHA-256 of the text unless overridden.
class MockBackend : public Backend {
 public:
  static constexpr std::size_t kDefaultDimension = 64;

  MockBackend() = default;
  static MockBackend echo();
  static MockBackend from_json_text(std::string_view json_text);
  static MockBackend from_file(const std::filesystem::path& path);

  void add_shorten(PromptKind kind, std::string_view paragraph, std::size_t round,
                   std::vector<std::string> responses);
  /// Registers responses for both shorten prompt kinds.
  void add_shorten_any(std::string_view paragraph, std::size_t round,
                       std::vector<std::string> responses);
  void add_grade(std::string_view text, std::vector<std::string> replies);
  void set_default_grade(std::string reply) { default_grade_ = std::move(reply); }
  void set_embedding(std::string_view text, std::vector<double> values);
  void set_dimension(std::size_t dimension) { dimension_ = dimension; }
  void set_echo(bool echo) { echo_ = echo; }

  std::vector<std::string> complete(const ChatRequest& request,
                                    std::span<const std::size_t> sample_indices) override;
  EmbeddingVector embed(std::string_view model, std::string_view text) override;

 private:
  using Key = std::tuple<PromptKind, std::string, std::size_t>;

  bool echo_ = false;
  std::string default_grade_ = "A";
  std::size_t dimension_ = kDefaultDimension;
  std::map<Key, std::vector<std::string>> script_;
  std::map<std::string, std::vector<double>> embeddings_;
};

/// Deterministic unit vector derived from the SHA-256 of `text`.
std::vector<double> hashed_unit_vector(std::string_view text, std::size_t dimension);

// ---------------------------------------------------------------------------
// HTTP backend
// ---------------------------------------------------------------------------

struct HttpBackendConfig {
  std::string base_url = "https://api.openai.com/v1";
  std::string api_key;
  double timeout_seconds = 120.0;
};

/// POSTs {base}/chat/completions and {base}/embeddings. Network failures and
/// 5xx/429 statuses raise TransportError; other error statuses and malformed
/// bodies raise BackendError.
class HttpBackend : public Backend {
 public:
  explicit HttpBackend(HttpBackendConfig config);

  std::vector<std::string> complete(const ChatRequest& request,
                                    std::span<const std::size_t> sample_indices) override;
  EmbeddingVector embed(std::string_view model, std::string_view text) override;

 private:
  std::string post(const std::string& path, const std::string& body);

  HttpBackendConfig config_;
};

}  // namespace gptsm
