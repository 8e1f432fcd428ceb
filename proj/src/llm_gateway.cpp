#include "gptsm/llm_gateway.hpp"

#include <chrono>
#include <cmath>
#include <thread>

#include "gptsm/digest.hpp"
#include "gptsm/text_model.hpp"

namespace gptsm {
namespace {

constexpr std::string_view kShortenGpPrefix =
    "Delete spans of words or phrases from the following paragraph that don't "
    "contribute much to its meaning, but keep readability:\n";
constexpr std::string_view kShortenNgpPrefix =
    "Delete spans of words or phrases from the following paragraph that don't "
    "contribute much to its meaning. Don't worry about grammar:\n";
constexpr std::string_view kShortenSuffix =
    "\nPlease do not add any new words or change words, only delete words.";
constexpr std::string_view kGradePrefix =
    "Score the following paragraph by how grammatical it is.\n";
constexpr std::string_view kGradeSuffix =
    "\nAnswer A for grammatically correct, B for moderately grammatical, and C for "
    "bad grammar. Only respond with one letter.";

class SemaphoreGuard {
 public:
  explicit SemaphoreGuard(std::counting_semaphore<>& sem) : sem_(sem) { sem_.acquire(); }
  ~SemaphoreGuard() { sem_.release(); }
  SemaphoreGuard(const SemaphoreGuard&) = delete;
  SemaphoreGuard& operator=(const SemaphoreGuard&) = delete;

 private:
  std::counting_semaphore<>& sem_;
};

bool is_ascii_letter(char c) {
  return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z');
}

}  // namespace

std::string_view to_string(PromptKind kind) {
  switch (kind) {
    case PromptKind::shorten_gp: return "shorten_gp";
    case PromptKind::shorten_ngp: return "shorten_ngp";
    case PromptKind::grammar_grade: return "grammar_grade";
  }
  return "?";
}

std::optional<PromptKind> parse_prompt_kind(std::string_view name) {
  if (name == "shorten_gp") return PromptKind::shorten_gp;
  if (name == "shorten_ngp") return PromptKind::shorten_ngp;
  if (name == "grammar_grade") return PromptKind::grammar_grade;
  return std::nullopt;
}

std::string render_prompt(PromptKind kind, std::string_view paragraph) {
  std::string out;
  switch (kind) {
    case PromptKind::shorten_gp:
      out.append(kShortenGpPrefix).append(paragraph).append(kShortenSuffix);
      break;
    case PromptKind::shorten_ngp:
      out.append(kShortenNgpPrefix).append(paragraph).append(kShortenSuffix);
      break;
    case PromptKind::grammar_grade:
      out.append(kGradePrefix).append(paragraph).append(kGradeSuffix);
      break;
  }
  return out;
}

ChatRequest make_chat_request(PromptKind kind, std::string_view subject, std::string model,
                              double temperature, std::size_t sample_count) {
  ChatRequest req;
  req.model = std::move(model);
  req.prompt_text = render_prompt(kind, subject);
  req.temperature = temperature;
  req.sample_count = sample_count;
  req.kind = kind;
  req.subject = std::string(subject);
  req.paragraph_key = sha256_hex(normalize_whitespace(subject));
  return req;
}

double cosine(const EmbeddingVector& a, const EmbeddingVector& b) {
  const std::size_t n = std::min(a.values.size(), b.values.size());
  double dot = 0.0;
  double na = 0.0;
  double nb = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    dot += a.values[i] * b.values[i];
    na += a.values[i] * a.values[i];
    nb += b.values[i] * b.values[i];
  }
  if (na == 0.0 || nb == 0.0) return 0.0;
  return dot / (std::sqrt(na) * std::sqrt(nb));
}

std::optional<char> parse_grade(std::string_view reply) {
  for (std::size_t i = 0; i < reply.size(); ++i) {
    const char c = reply[i];
    const char upper = (c >= 'a' && c <= 'z') ? static_cast<char>(c - 'a' + 'A') : c;
    if (upper != 'A' && upper != 'B' && upper != 'C') continue;
    const bool left_ok = i == 0 || !is_ascii_letter(reply[i - 1]);
    const bool right_ok = i + 1 == reply.size() || !is_ascii_letter(reply[i + 1]);
    if (left_ok && right_ok) return upper;
  }
  return std::nullopt;
}

Gateway::Gateway(GatewayConfig config, std::shared_ptr<Backend> backend,
                 std::shared_ptr<CacheStore> cache)
    : config_(std::move(config)),
      backend_(std::move(backend)),
      cache_(std::move(cache)),
      in_flight_(static_cast<std::ptrdiff_t>(std::max<std::size_t>(1, config_.max_in_flight))) {}

template <typename Fn>
auto Gateway::with_retries(Fn&& fn) {
  for (std::size_t attempt = 0;; ++attempt) {
    try {
      SemaphoreGuard guard(in_flight_);
      return fn();
    } catch (const TransportError&) {
      if (attempt >= config_.max_retries) throw;
    }
    const double delay = config_.retry_backoff_seconds * std::pow(2.0, static_cast<double>(attempt));
    std::this_thread::sleep_for(std::chrono::duration<double>(delay));
  }
}

std::vector<std::string> Gateway::fetch(const ChatRequest& request,
                                        std::span<const std::size_t> sample_indices) {
  std::vector<std::string> out(sample_indices.size());
  std::vector<std::size_t> missing_slots;
  std::vector<std::size_t> missing_indices;
  auto summary_for = [&](std::size_t index) {
    return RequestSummary{Endpoint::chat, request.model, request.prompt_text,
                          request.temperature, index};
  };

  for (std::size_t slot = 0; slot < sample_indices.size(); ++slot) {
    if (cache_) {
      if (auto hit = cache_->get(CacheKey::of(summary_for(sample_indices[slot])))) {
        if (const auto* text = std::get_if<std::string>(&hit->response)) {
          out[slot] = *text;
          continue;
        }
      }
    }
    missing_slots.push_back(slot);
    missing_indices.push_back(sample_indices[slot]);
  }
  if (missing_slots.empty()) return out;

  if (!backend_) {
    throw OfflineCacheMiss("no cached " + std::string(to_string(request.kind)) +
                           " response in " +
                           (cache_ ? cache_->file().string() : std::string("(no cache)")) +
                           " and no backend available (offline)");
  }
  auto responses = with_retries([&] { return backend_->complete(request, missing_indices); });
  if (responses.size() != missing_indices.size()) {
    throw BackendError("backend returned " + std::to_string(responses.size()) +
                       " responses, expected " + std::to_string(missing_indices.size()));
  }
  for (std::size_t m = 0; m < missing_slots.size(); ++m) {
    if (cache_) cache_->put(summary_for(missing_indices[m]), responses[m]);
    out[missing_slots[m]] = std::move(responses[m]);
  }
  return out;
}

std::vector<std::string> Gateway::complete(const ChatRequest& request) {
  std::vector<std::size_t> indices(request.sample_count);
  for (std::size_t i = 0; i < indices.size(); ++i) indices[i] = i;
  return fetch(request, indices);
}

EmbeddingVector Gateway::embed(std::string_view text) {
  const RequestSummary summary{Endpoint::embedding, config_.embedding_model,
                               std::string(text), 0.0, 0};
  if (cache_) {
    if (auto hit = cache_->get(CacheKey::of(summary))) {
      if (const auto* values = std::get_if<std::vector<double>>(&hit->response)) {
        return EmbeddingVector{*values};
      }
    }
  }
  if (!backend_) {
    throw OfflineCacheMiss("no cached embedding in " +
                           (cache_ ? cache_->file().string() : std::string("(no cache)")) +
                           " and no backend available (offline)");
  }
  auto vec = with_retries([&] { return backend_->embed(config_.embedding_model, text); });
  if (cache_) cache_->put(summary, vec.values);
  return vec;
}

std::optional<char> Gateway::grade(std::string_view text, const std::string& model) {
  const auto request = make_chat_request(PromptKind::grammar_grade, text, model,
                                         config_.grade_temperature, 1);
  // The retry uses sample index 1 so it is not answered by the cached first reply.
  for (const std::size_t index : {std::size_t{0}, std::size_t{1}}) {
    const std::size_t indices[] = {index};
    const auto reply = fetch(request, indices);
    if (auto g = parse_grade(reply.front())) return g;
  }
  return std::nullopt;
}

}  // namespace gptsm
