#include "httplib.h"
#include "gptsm/llm_gateway.hpp"
#include "json.hpp"

namespace gptsm {
namespace {

using nlohmann::json;

struct SplitUrl {
  std::string origin;  // scheme://host[:port]
  std::string prefix;  // path prefix, no trailing slash
};

SplitUrl split_url(const std::string& url) {
  const auto scheme_end = url.find("://");
  if (scheme_end == std::string::npos) throw BackendError("base URL lacks a scheme: " + url);
  const auto path_start = url.find('/', scheme_end + 3);
  SplitUrl out;
  out.origin = url.substr(0, path_start);
  out.prefix = path_start == std::string::npos ? "" : url.substr(path_start);
  while (!out.prefix.empty() && out.prefix.back() == '/') out.prefix.pop_back();
  return out;
}

std::string error_message(const json& body) {
  if (body.is_object() && body.contains("error")) {
    const auto& err = body.at("error");
    if (err.is_object() && err.contains("message")) return err.at("message").dump();
    return err.dump();
  }
  return body.dump();
}

}  // namespace

HttpBackend::HttpBackend(HttpBackendConfig config) : config_(std::move(config)) {}

std::string HttpBackend::post(const std::string& path, const std::string& body) {
  const auto url = split_url(config_.base_url);
  httplib::Client client(url.origin);
  const auto timeout = std::chrono::duration<double>(config_.timeout_seconds);
  client.set_connection_timeout(std::chrono::duration_cast<std::chrono::microseconds>(timeout));
  client.set_read_timeout(std::chrono::duration_cast<std::chrono::microseconds>(timeout));
  client.set_write_timeout(std::chrono::duration_cast<std::chrono::microseconds>(timeout));

  httplib::Headers headers;
  if (!config_.api_key.empty()) {
    headers.emplace("Authorization", "Bearer " + config_.api_key);
  }
  const auto result = client.Post(url.prefix + path, headers, body, "application/json");
  if (!result) {
    throw TransportError("POST " + config_.base_url + path + ": " +
                         httplib::to_string(result.error()));
  }
  const int status = result->status;
  if (status == 429 || status >= 500) {
    throw TransportError("POST " + config_.base_url + path + ": HTTP " + std::to_string(status));
  }
  if (status != 200) {
    std::string detail = result->body;
    try {
      detail = error_message(json::parse(result->body));
    } catch (const json::exception&) {
    }
    throw BackendError("POST " + config_.base_url + path + ": HTTP " + std::to_string(status) +
                       ": " + detail);
  }
  return result->body;
}

std::vector<std::string> HttpBackend::complete(const ChatRequest& request,
                                               std::span<const std::size_t> sample_indices) {
  std::vector<std::string> out;
  // Ask for everything in one batched call; endpoints that ignore `n` get
  // follow-up requests for the remainder.
  while (out.size() < sample_indices.size()) {
    const std::size_t wanted = sample_indices.size() - out.size();
    json body{{"model", request.model},
              {"messages", json::array({json{{"role", "user"}, {"content", request.prompt_text}}})},
              {"temperature", request.temperature},
              {"n", wanted}};
    json reply;
    try {
      reply = json::parse(post("/chat/completions", body.dump()));
      const auto& choices = reply.at("choices");
      if (!choices.is_array() || choices.empty()) throw BackendError("response has no choices");
      for (const auto& choice : choices) {
        if (out.size() == sample_indices.size()) break;
        out.push_back(choice.at("message").at("content").get<std::string>());
      }
    } catch (const json::exception& ex) {
      throw BackendError(std::string("malformed chat completion response: ") + ex.what());
    }
  }
  return out;
}

EmbeddingVector HttpBackend::embed(std::string_view model, std::string_view text) {
  json body{{"model", model}, {"input", text}};
  try {
    const json reply = json::parse(post("/embeddings", body.dump()));
    return EmbeddingVector{reply.at("data").at(0).at("embedding").get<std::vector<double>>()};
  } catch (const json::exception& ex) {
    throw BackendError(std::string("malformed embedding response: ") + ex.what());
  }
}

}  // namespace gptsm
