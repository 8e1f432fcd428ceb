#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>

#include "gptsm/digest.hpp"
#include "gptsm/llm_gateway.hpp"
#include "gptsm/text_model.hpp"
#include "json.hpp"

namespace gptsm {
namespace {

std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

// Uniform in (0, 1].
double unit_open(std::uint64_t& state) {
  return (static_cast<double>(splitmix64(state) >> 11) + 1.0) * 0x1.0p-53;
}

std::string key_for_paragraph(std::string_view paragraph) {
  return sha256_hex(normalize_whitespace(paragraph));
}

}  // namespace

std::vector<double> hashed_unit_vector(std::string_view text, std::size_t dimension) {
  const Sha256 digest = sha256(text);
  std::uint64_t state = 0;
  for (int i = 0; i < 8; ++i) state = (state << 8) | digest[i];

  // Box-Muller gives isotropic Gaussian components; normalizing them yields a
  // uniformly distributed direction.
  std::vector<double> v(dimension);
  for (std::size_t i = 0; i < dimension; i += 2) {
    const double r = std::sqrt(-2.0 * std::log(unit_open(state)));
    const double theta = 2.0 * std::numbers::pi * unit_open(state);
    v[i] = r * std::cos(theta);
    if (i + 1 < dimension) v[i + 1] = r * std::sin(theta);
  }
  double norm = 0.0;
  for (const double x : v) norm += x * x;
  norm = std::sqrt(norm);
  if (norm > 0.0) {
    for (double& x : v) x /= norm;
  }
  return v;
}

MockBackend MockBackend::echo() {
  MockBackend m;
  m.set_echo(true);
  return m;
}

MockBackend MockBackend::from_json_text(std::string_view json_text) {
  using nlohmann::json;
  MockBackend m;
  const json doc = json::parse(json_text);
  if (!doc.is_object()) throw std::invalid_argument("mock script must be a JSON object");
  if (doc.contains("echo")) m.set_echo(doc.at("echo").get<bool>());
  if (doc.contains("default_grade")) m.set_default_grade(doc.at("default_grade").get<std::string>());
  if (doc.contains("embedding_dimension")) {
    m.set_dimension(doc.at("embedding_dimension").get<std::size_t>());
  }
  if (!doc.contains("entries")) return m;

  for (const auto& entry : doc.at("entries")) {
    const auto kind_name = entry.at("kind").get<std::string>();
    std::string key;
    if (entry.contains("paragraph")) {
      key = key_for_paragraph(entry.at("paragraph").get<std::string>());
    } else if (entry.contains("paragraph_sha256")) {
      key = entry.at("paragraph_sha256").get<std::string>();
    } else {
      throw std::invalid_argument("mock entry needs 'paragraph' or 'paragraph_sha256'");
    }
    auto responses = entry.at("responses").get<std::vector<std::string>>();
    if (responses.empty()) throw std::invalid_argument("mock entry has no responses");

    if (kind_name == "shorten") {
      const auto round = entry.value("round", std::size_t{1});
      m.script_[{PromptKind::shorten_gp, key, round}] = responses;
      m.script_[{PromptKind::shorten_ngp, key, round}] = std::move(responses);
      continue;
    }
    const auto kind = parse_prompt_kind(kind_name);
    if (!kind) throw std::invalid_argument("unknown mock entry kind '" + kind_name + "'");
    const std::size_t round =
        *kind == PromptKind::grammar_grade ? 0 : entry.value("round", std::size_t{1});
    m.script_[{*kind, key, round}] = std::move(responses);
  }
  return m;
}

MockBackend MockBackend::from_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read mock script " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return from_json_text(buf.str());
}

void MockBackend::add_shorten(PromptKind kind, std::string_view paragraph, std::size_t round,
                              std::vector<std::string> responses) {
  script_[{kind, key_for_paragraph(paragraph), round}] = std::move(responses);
}

void MockBackend::add_shorten_any(std::string_view paragraph, std::size_t round,
                                  std::vector<std::string> responses) {
  add_shorten(PromptKind::shorten_gp, paragraph, round, responses);
  add_shorten(PromptKind::shorten_ngp, paragraph, round, std::move(responses));
}

void MockBackend::add_grade(std::string_view text, std::vector<std::string> replies) {
  script_[{PromptKind::grammar_grade, key_for_paragraph(text), 0}] = std::move(replies);
}

void MockBackend::set_embedding(std::string_view text, std::vector<double> values) {
  embeddings_[std::string(text)] = std::move(values);
}

std::vector<std::string> MockBackend::complete(const ChatRequest& request,
                                               std::span<const std::size_t> sample_indices) {
  const bool grading = request.kind == PromptKind::grammar_grade;
  const std::size_t round = grading ? 0 : request.round;
  const std::vector<std::string>* scripted = nullptr;
  if (!echo_) {
    if (const auto it = script_.find({request.kind, request.paragraph_key, round});
        it != script_.end()) {
      scripted = &it->second;
    }
  }

  std::vector<std::string> out;
  out.reserve(sample_indices.size());
  for (const std::size_t index : sample_indices) {
    if (scripted) {
      out.push_back((*scripted)[index % scripted->size()]);
    } else if (grading) {
      out.push_back(default_grade_);
    } else {
      out.push_back(request.subject);
    }
  }
  return out;
}

EmbeddingVector MockBackend::embed(std::string_view /*model*/, std::string_view text) {
  if (const auto it = embeddings_.find(std::string(text)); it != embeddings_.end()) {
    return EmbeddingVector{it->second};
  }
  return EmbeddingVector{hashed_unit_vector(text, dimension_)};
}

}  // namespace gptsm
