#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "sentinel/types.hpp"

namespace sentinel {

// The seven model roles a pipeline run binds. Each role maps to exactly one
// configured backend.
enum class BackendKind { Ocr, Captioner, Embedder, QuestionGen, Answerer, Judge, VqaScorer };

inline constexpr BackendKind kAllBackendKinds[] = {
    BackendKind::Ocr,      BackendKind::Captioner, BackendKind::Embedder, BackendKind::QuestionGen,
    BackendKind::Answerer, BackendKind::Judge,     BackendKind::VqaScorer};

std::string to_string(BackendKind kind);
std::optional<BackendKind> backend_kind_from_string(const std::string& s);

enum class BackendMode { Mock, Http };

struct BackendConfig {
  BackendKind kind = BackendKind::Ocr;
  BackendMode mode = BackendMode::Mock;
  std::optional<std::string> endpoint;  // Http only
  uint32_t timeout_ms = 10000;
  uint32_t max_attempts = 3;
  uint32_t backoff_ms = 250;  // first retry delay; doubles per attempt
  std::optional<uint64_t> seed;  // Mock only
};

// Throws ConfigInvalid when the config violates its mode's requirements.
void validate_config(const BackendConfig& config);

struct BackendRequest {
  BackendKind kind = BackendKind::Ocr;
  std::optional<std::string> image_ref;
  std::map<std::string, std::string> inputs;
};

struct BackendResponse {
  std::variant<std::string, std::vector<double>> output;
  std::optional<double> confidence;
  uint32_t attempts = 1;  // transport attempts actually issued

  const std::string& text() const;                // ProtocolError if vector
  const std::vector<double>& vector_output() const;  // ProtocolError if text
};

// Per-image OCR/caption strings the mock Ocr/Captioner backends echo.
struct Fixture {
  std::string ocr;
  std::string caption;
};

// Shared read-only state for mock backends.
struct MockContext {
  std::map<std::string, Fixture> fixtures;  // image_ref -> fixture
  std::vector<LexiconEntry> lexicon;        // answerer keyword table
  int embed_dim = 64;
};

MockContext load_fixtures_context(const std::string& fixtures_path, const std::string& lexicon_path,
                                  int embed_dim);

// Wire helpers, exposed for golden tests of the HTTP protocol.
std::string backend_request_to_json(const BackendRequest& request);
BackendResponse parse_backend_response_json(const std::string& body);

// Routes a request to the configured implementation. Http mode POSTs JSON and
// retries transport failures with doubling backoff; Mock mode delegates to the
// deterministic mocks.
BackendResponse dispatch(const BackendConfig& config, const BackendRequest& request,
                         const MockContext& ctx);

// One configured backend per kind plus the shared mock context.
class BackendSet {
 public:
  BackendSet() = default;
  BackendSet(std::map<BackendKind, BackendConfig> configs, MockContext ctx);

  // Every kind mocked with the same seed; tests use this heavily.
  static BackendSet all_mock(uint64_t seed, MockContext ctx);

  BackendResponse call(BackendKind kind, BackendRequest request) const;

  // Embeds text and returns a unit vector of embed_dim components.
  // Validates dimension and finiteness; throws ZeroVector on zero output.
  std::vector<double> embed(const std::string& text) const;

  // Calls a text-producing kind and returns the output string.
  std::string text_call(BackendKind kind, std::map<std::string, std::string> inputs,
                        std::optional<std::string> image_ref = std::nullopt) const;

  const BackendConfig& config(BackendKind kind) const;
  const MockContext& context() const { return ctx_; }
  int embed_dim() const { return ctx_.embed_dim; }

 private:
  std::map<BackendKind, BackendConfig> configs_;
  MockContext ctx_;
};

// Side-file settings that travel with the backend bindings.
struct BackendSettings {
  std::map<BackendKind, BackendConfig> configs;
  MockContext context;
  std::string fixtures_path;  // as resolved, empty when not configured
  std::string lexicon_path;
};

// Loads the kind->config map; kinds missing from the file default to Mock with
// seed 0. Throws ConfigParseError / ConfigInvalid.
std::map<BackendKind, BackendConfig> load_backend_config(const std::string& path);

// Full loader: bindings plus mock context (fixtures, lexicon, embed_dim).
// Relative fixture/lexicon paths resolve against the config file's directory.
BackendSettings load_backend_settings(const std::string& path);

}  // namespace sentinel
