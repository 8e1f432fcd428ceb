#include "gptsm/cli.hpp"

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <sstream>

#include "CLI11.hpp"
#include "gptsm/cache_store.hpp"
#include "gptsm/llm_gateway.hpp"

namespace gptsm::cli {
namespace {

struct Failure {
  int code;
  std::string message;
};

std::string read_input(const std::string& path, std::istream& in) {
  std::ostringstream buf;
  if (path == "-") {
    buf << in.rdbuf();
    if (in.bad()) throw Failure{kExitFailure, "cannot read standard input"};
    return buf.str();
  }
  std::ifstream file(path, std::ios::binary);
  if (!file) throw Failure{kExitFailure, "cannot open input file " + path};
  buf << file.rdbuf();
  return buf.str();
}

void write_output(const std::string& path, const std::string& data, std::ostream& out) {
  if (path.empty() || path == "-") {
    out << data;
    out.flush();
    return;
  }
  std::ofstream file(path, std::ios::binary | std::ios::trunc);
  if (!file) throw Failure{kExitFailure, "cannot open output file " + path};
  file << data;
  file.close();
  if (!file) throw Failure{kExitFailure, "failed writing output file " + path};
}

struct Session {
  std::shared_ptr<CacheStore> cache;
  std::unique_ptr<Gateway> gateway;
};

Session open_session(const RunConfig& config, std::ostream& err) {
  Session s;
  const bool has_mock = config.echo_mock || !config.mock_script.empty();
  const auto cache_file = std::filesystem::path(config.cache_dir) / CacheStore::kFileName;

  if (config.offline && !has_mock) {
    if (!config.use_cache) {
      throw Failure{kExitUsage, "--offline needs a cache or a mock script"};
    }
    if (!std::filesystem::exists(cache_file)) {
      throw Failure{kExitFailure, "offline run needs a warmed cache, but " + cache_file.string() +
                                      " does not exist"};
    }
  }
  if (config.use_cache) {
    s.cache = std::make_shared<CacheStore>(config.cache_dir, CacheOptions{});
    if (config.offline && !has_mock && s.cache->size() == 0) {
      throw Failure{kExitFailure,
                    "offline run needs a warmed cache, but " + cache_file.string() + " is empty"};
    }
  }

  std::shared_ptr<Backend> backend;
  if (!config.mock_script.empty()) {
    try {
      backend = std::make_shared<MockBackend>(MockBackend::from_file(config.mock_script));
    } catch (const std::exception& e) {
      throw Failure{kExitFailure, "mock script " + config.mock_script + ": " + e.what()};
    }
  } else if (config.echo_mock) {
    backend = std::make_shared<MockBackend>(MockBackend::echo());
  } else if (!config.offline) {
    HttpBackendConfig http;
    http.base_url = config.base_url;
    if (const char* key = std::getenv(config.api_key_env.c_str())) http.api_key = key;
    if (http.api_key.empty()) {
      err << "warning: environment variable " << config.api_key_env
          << " is not set; sending requests without an API key\n";
    }
    backend = std::make_shared<HttpBackend>(std::move(http));
  }

  GatewayConfig gateway_config;
  gateway_config.embedding_model = config.embedding_model;
  gateway_config.max_in_flight = config.max_in_flight;
  s.gateway = std::make_unique<Gateway>(gateway_config, std::move(backend), s.cache);
  return s;
}

EngineConfig engine_config(const RunConfig& config, CompressionMode mode) {
  EngineConfig e;
  e.sample_count = config.sample_count;
  e.max_rounds = config.max_rounds;
  e.mode = mode;
  e.scoring.target_length_ratio = config.target_length_ratio;
  e.model = config.model;
  e.temperature = config.temperature;
  e.parallelism = config.parallelism;
  return e.normalized();
}

std::vector<LevelTrace> compress(const Document& doc, const RunConfig& config,
                                 CompressionMode mode, Session& session, std::ostream& err) {
  auto traces = compress_document(doc, engine_config(config, mode), *session.gateway);
  for (const auto& t : traces) {
    if (!t.diagnostic.empty()) {
      err << "warning: paragraph " << t.paragraph_index + 1
          << " left unfaded: " << t.diagnostic << '\n';
    }
  }
  return traces;
}

Theme theme_for(const RunConfig& config) {
  Theme theme;
  if (!config.font_family.empty()) theme.font_family = config.font_family;
  return theme;
}

OpacityConfig opacity_config(const RunConfig& config) {
  OpacityConfig oc;
  oc.floor = config.floor;
  oc.method = config.method;
  oc.wf_faded_fraction_target = config.wf_target;
  oc.validate();
  return oc;
}

template <typename Body>
int guarded(std::ostream& err, Body&& body) {
  try {
    return body();
  } catch (const Failure& f) {
    err << "error: " << f.message << '\n';
    return f.code;
  } catch (const OfflineCacheMiss& e) {
    err << "error: " << e.what() << '\n';
    return kExitFailure;
  } catch (const StorageError& e) {
    err << "error: cache: " << e.what() << '\n';
    return kExitFailure;
  } catch (const VersionConflict& e) {
    err << "error: cache: " << e.what() << '\n';
    return kExitFailure;
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitFailure;
  }
}

void add_pipeline_options(CLI::App& cmd, RunConfig& c) {
  cmd.add_option("input", c.input, "Input text file, or - for stdin")->capture_default_str();
  cmd.add_option("-o,--output", c.output, "Output file (default stdout)");
  cmd.add_option("--samples", c.sample_count, "Shortenings requested per round")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  cmd.add_option("--max-rounds", c.max_rounds, "Cap on compression rounds")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  cmd.add_option("--floor", c.floor, "Minimum opacity")->check(CLI::Range(0.0, 1.0))->capture_default_str();
  cmd.add_option("--target-length", c.target_length_ratio, "Target length ratio per round")
      ->check(CLI::Range(0.0, 1.0))
      ->capture_default_str();
  cmd.add_option("--temperature", c.temperature, "Sampling temperature")
      ->check(CLI::NonNegativeNumber)
      ->capture_default_str();
  cmd.add_option("--model", c.model, "Chat model id")->capture_default_str();
  cmd.add_option("--embedding-model", c.embedding_model, "Embedding model id")->capture_default_str();
  cmd.add_option("--base-url", c.base_url, "API base URL")->capture_default_str();
  cmd.add_option("--api-key-env", c.api_key_env, "Environment variable holding the API key")
      ->capture_default_str();
  cmd.add_option("--mock", c.mock_script, "Scripted mock backend (JSON)")->check(CLI::ExistingFile);
  cmd.add_flag("--echo-mock", c.echo_mock, "Mock backend that returns every paragraph unchanged");
  cmd.add_option("--cache", c.cache_dir, "Cache directory")->capture_default_str();
  cmd.add_flag("!--no-cache", c.use_cache, "Do not read or write the cache");
  cmd.add_flag("--offline", c.offline, "Never contact the network");
  cmd.add_flag("--ansi-256", c.ansi_256, "Use the 256-colour grayscale ramp for ANSI output");
  cmd.add_option("--font", c.font_family, "CSS font-family for HTML output");
  cmd.add_option("--title", c.title, "HTML page title")->capture_default_str();
  cmd.add_option("--parallel", c.parallelism, "Paragraphs compressed concurrently")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  cmd.add_option("--max-in-flight", c.max_in_flight, "Concurrent backend requests")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
}

}  // namespace

int run_render(const RunConfig& config, std::istream& in, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const OpacityConfig base_opacity = opacity_config(config);
    const Document doc = segment(read_input(config.input, in));

    SaliencyMap map;
    if (config.method == SaliencyMethod::wf_tsm) {
      OpacityConfig oc = base_opacity;
      if (config.wf_match_gp && !doc.paragraphs.empty()) {
        Session session = open_session(config, err);
        const auto traces = compress(doc, config, CompressionMode::gp, session, err);
        const double gp_fraction = map_gp(traces, doc, base_opacity).faded_fraction;
        if (gp_fraction > 0.0 && gp_fraction < 1.0) oc.wf_faded_fraction_target = gp_fraction;
      }
      map = map_wf(doc, oc);
    } else {
      Session session = open_session(config, err);
      const auto mode = config.method == SaliencyMethod::gp_tsm ? CompressionMode::gp
                                                                : CompressionMode::ngp;
      map = map_gp(compress(doc, config, mode, session, err), doc, base_opacity);
    }

    RenderPlan plan{doc, map, theme_for(config), config.title, config.ansi_256};
    std::string rendered;
    switch (config.format) {
      case RenderFormat::html: rendered = render_html(plan); break;
      case RenderFormat::ansi: rendered = render_ansi(plan); break;
      case RenderFormat::json: rendered = render_json(plan); break;
    }
    write_output(config.output, rendered, out);
    return kExitOk;
  });
}

int run_compare(const RunConfig& config, std::istream& in, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const OpacityConfig oc = opacity_config(config);
    const Document doc = segment(read_input(config.input, in));
    Session session = open_session(config, err);
    const auto gp = map_gp(compress(doc, config, CompressionMode::gp, session, err), doc, oc);
    const auto ngp = map_gp(compress(doc, config, CompressionMode::ngp, session, err), doc, oc);
    const Theme theme = theme_for(config);
    const RenderPlan left{doc, gp, theme, config.title};
    const RenderPlan right{doc, ngp, theme, config.title};
    write_output(config.output,
                 render_compare_html(left, "Grammar-preserving", right, "Not grammar-preserving"),
                 out);
    return kExitOk;
  });
}

int run_cache(const std::string& subcommand, const std::string& cache_dir, std::ostream& out,
              std::ostream& err) {
  return guarded(err, [&] {
    if (subcommand == "stats") {
      const CacheStore store(cache_dir, CacheOptions{.writable = false});
      std::uintmax_t bytes = 0;
      if (std::filesystem::exists(store.file())) bytes = std::filesystem::file_size(store.file());
      out << store.size() << " entries, " << bytes << " bytes (" << store.file().string() << ")\n";
      return kExitOk;
    }
    if (subcommand == "verify") {
      const auto report = CacheStore::verify(cache_dir);
      for (const auto& problem : report.problems) {
        err << "corrupt: " << (std::filesystem::path(cache_dir) / CacheStore::kFileName).string()
            << ": " << problem << '\n';
      }
      out << report.entries << " entries verified, " << report.problems.size() << " problems\n";
      return report.ok() ? kExitOk : kExitFailure;
    }
    throw Failure{kExitUsage, "unknown cache subcommand '" + subcommand + "'"};
  });
}

int run(int argc, const char* const* argv, std::istream& in, std::ostream& out,
        std::ostream& err) {
  CLI::App app{"Grammar-preserving text saliency rendering"};
  app.require_subcommand(1);

  RunConfig render_config;
  auto* render = app.add_subcommand("render", "Render a document with per-word opacity");
  add_pipeline_options(*render, render_config);
  const std::map<std::string, SaliencyMethod> methods{
      {"gp", SaliencyMethod::gp_tsm}, {"ngp", SaliencyMethod::ngp_tsm}, {"wf", SaliencyMethod::wf_tsm}};
  const std::map<std::string, RenderFormat> formats{
      {"html", RenderFormat::html}, {"ansi", RenderFormat::ansi}, {"json", RenderFormat::json}};
  render->add_option("--method", render_config.method, "gp, ngp or wf")
      ->transform(CLI::CheckedTransformer(methods, CLI::ignore_case).description(""))
      ->option_text("gp|ngp|wf");
  render->add_option("--format", render_config.format, "html, ansi or json")
      ->transform(CLI::CheckedTransformer(formats, CLI::ignore_case).description(""))
      ->option_text("html|ansi|json");
  render->add_option("--wf-target", render_config.wf_target, "Faded fraction target for wf")
      ->check(CLI::Range(0.0, 1.0));
  render->add_flag("--wf-match-gp", render_config.wf_match_gp,
                   "Use the faded fraction of a gp run as the wf target");

  RunConfig compare_config;
  auto* compare = app.add_subcommand("compare", "Render gp and ngp side by side as HTML");
  add_pipeline_options(*compare, compare_config);

  std::string cache_action;
  std::string cache_dir = ".gptsm-cache";
  auto* cache = app.add_subcommand("cache", "Inspect the response cache");
  cache->add_option("action", cache_action, "stats or verify")
      ->required()
      ->check(CLI::IsMember({"stats", "verify"}));
  cache->add_option("--cache", cache_dir, "Cache directory")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    app.exit(e, out, err);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return kExitUsage;
  }

  if (render->parsed()) return run_render(render_config, in, out, err);
  if (compare->parsed()) return run_compare(compare_config, in, out, err);
  return run_cache(cache_action, cache_dir, out, err);
}

}  // namespace gptsm::cli
