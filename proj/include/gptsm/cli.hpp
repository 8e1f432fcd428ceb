#pragma once

// Command-line front end:
//
//   gptsm render  [options] <input|->   one rendering (gp, ngp or wf)
//   gptsm compare [options] <input|->   gp and ngp side by side as HTML
//   gptsm cache stats|verify [--cache DIR]
//
// Exit codes: 0 success, 1 I/O, storage or offline-cache failure, 2 usage.

#include <iosfwd>
#include <optional>
#include <string>

#include "gptsm/compression_engine.hpp"
#include "gptsm/renderers.hpp"
#include "gptsm/saliency_map.hpp"

namespace gptsm::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitUsage = 2;

struct RunConfig {
  std::string input = "-";
  std::string output;  // empty: stdout
  SaliencyMethod method = SaliencyMethod::gp_tsm;
  RenderFormat format = RenderFormat::html;
  std::size_t sample_count = 8;
  std::size_t max_rounds = 10;
  double floor = 0.30;
  double target_length_ratio = 0.85;
  double temperature = 0.7;
  std::string model = "gpt-4";
  std::string embedding_model = "all-MiniLM-L6-v2";
  std::string base_url = "https://api.openai.com/v1";
  std::string api_key_env = "LLM_API_KEY";
  std::string mock_script;
  bool echo_mock = false;
  std::string cache_dir = ".gptsm-cache";
  bool use_cache = true;
  bool offline = false;
  std::optional<double> wf_target;
  bool wf_match_gp = false;
  bool ansi_256 = false;
  std::string font_family;
  std::string title = "Skim view";
  std::size_t parallelism = 4;
  std::size_t max_in_flight = 4;
};

/// Parses argv and dispatches to the subcommand.
int run(int argc, const char* const* argv, std::istream& in, std::ostream& out,
        std::ostream& err);

int run_render(const RunConfig& config, std::istream& in, std::ostream& out, std::ostream& err);
int run_compare(const RunConfig& config, std::istream& in, std::ostream& out, std::ostream& err);
int run_cache(const std::string& subcommand, const std::string& cache_dir, std::ostream& out,
              std::ostream& err);

}  // namespace gptsm::cli
