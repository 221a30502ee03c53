#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <atomic>
#include <chrono>
#include <cmath>
#include <map>
#include <mutex>
#include <string>
#include <vector>

#include "sentinel/backend.hpp"
#include "sentinel/error.hpp"
#include "sentinel/mock_backend.hpp"
#include "localserver.hpp"
#include "testutil.hpp"

using namespace sentinel;
using testutil::thrown_code;

namespace {

MockContext small_context() {
  MockContext ctx;
  ctx.embed_dim = 16;
  ctx.fixtures["img/1.png"] = Fixture{"the vermin are here", "an angry crowd at night"};
  ctx.fixtures["img/2.png"] = Fixture{"cats are great", "a cat on a sofa"};
  ctx.lexicon = {{"demeaning", {"vermin", "scum"}}, {"supremacist", {"inferior"}}};
  return ctx;
}

}  // namespace

TEST_CASE("stable_hash is deterministic and seed-sensitive") {
  CHECK(stable_hash("abc", 7) == stable_hash("abc", 7));
  CHECK(stable_hash("abc", 7) != stable_hash("abc", 8));
  CHECK(stable_hash("abc", 7) != stable_hash("abd", 7));
  // frozen value so a refactor of the mixing cannot silently change every mock
  uint64_t h = 14695981039346656037ull ^ (7ull + 0x9e3779b97f4a7c15ull);
  for (unsigned char c : {'a', 'b', 'c'}) {
    h ^= c;
    h *= 1099511628211ull;
  }
  CHECK(stable_hash("abc", 7) == h);
}

TEST_CASE("mock_embed yields deterministic unit vectors keyed on normalized text") {
  const auto v1 = mock_embed("Hello  World!", 7, 32);
  const auto v2 = mock_embed("hello world", 7, 32);
  CHECK(v1 == v2);
  CHECK(v1.size() == 32);
  double norm2 = 0.0;
  for (double x : v1) norm2 += x * x;
  CHECK(norm2 == doctest::Approx(1.0).epsilon(1e-12));

  CHECK(mock_embed("hello world", 7, 32) != mock_embed("hello world", 8, 32));
  CHECK(mock_embed("hello world", 7, 32) != mock_embed("different words", 7, 32));
}

TEST_CASE("mock_embed falls back to the first basis vector on short text") {
  for (const char* s : {"", "a", "ab", "  !  "}) {
    const auto v = mock_embed(s, 3, 8);
    std::vector<double> e0(8, 0.0);
    e0[0] = 1.0;
    CHECK(v == e0);
  }
  CHECK(mock_embed("abc", 3, 8) != mock_embed("", 3, 8));
}

TEST_CASE("mock_embed rejects dimensions below 2") {
  CHECK(thrown_code([] { mock_embed("text", 0, 1); }) == ErrorCode::InvalidArgument);
  CHECK(thrown_code([] { mock_embed("text", 0, 0); }) == ErrorCode::InvalidArgument);
  CHECK_NOTHROW(mock_embed("text", 0, 2));
}

TEST_CASE("ocr and captioner mocks echo fixtures") {
  const MockContext ctx = small_context();
  CHECK(mock_generate(BackendKind::Ocr, {}, std::string("img/1.png"), 0, ctx) ==
        "the vermin are here");
  CHECK(mock_generate(BackendKind::Captioner, {}, std::string("img/1.png"), 0, ctx) ==
        "an angry crowd at night");
  CHECK(thrown_code([&] { mock_generate(BackendKind::Ocr, {}, std::string("nope.png"), 0, ctx); }) ==
        ErrorCode::MissingFixture);
  CHECK(thrown_code([&] { mock_generate(BackendKind::Ocr, {}, std::nullopt, 0, ctx); }) ==
        ErrorCode::MissingFixture);
}

TEST_CASE("question generator templates on turn and signal") {
  const MockContext ctx = small_context();
  const std::string broad =
      "What is the overall theme of this meme given the text: 'get out'?";
  CHECK(mock_generate(BackendKind::QuestionGen, {{"ocr", "get out"}}, std::nullopt, 0, ctx) ==
        broad);
  CHECK(mock_generate(BackendKind::QuestionGen, {{"ocr", "get out"}, {"turn", "0"}}, std::nullopt,
                      0, ctx) == broad);
  CHECK(mock_generate(BackendKind::QuestionGen, {{"turn", "2"}, {"signal", "demeaning"}},
                      std::nullopt, 0, ctx) ==
        "Does the element 'demeaning' target a protected group?");
}

TEST_CASE("answerer quotes matched trigger terms in lexicon order") {
  const MockContext ctx = small_context();
  const std::string question = "What is going on here?";
  const bool even = stable_hash(question, 3) % 2 == 0;

  std::map<std::string, std::string> inputs = {{"question", question},
                                               {"ocr", "these inferior vermin"}};
  const std::string expected =
      even ? "The wording 'vermin' and 'inferior' stands out; the meme leans on it to frame the group."
           : "The phrasing 'vermin' and 'inferior' is doing the work here, aimed at the group.";
  CHECK(mock_generate(BackendKind::Answerer, inputs, std::nullopt, 3, ctx) == expected);

  // three terms: comma-separated with a final "and"
  inputs["ocr"] = "inferior vermin scum";
  const std::string reply = mock_generate(BackendKind::Answerer, inputs, std::nullopt, 3, ctx);
  CHECK(reply.find("'vermin', 'scum' and 'inferior'") != std::string::npos);
}

TEST_CASE("answerer stays bland without trigger matches") {
  const MockContext ctx = small_context();
  const std::string question = "Anything hateful here?";
  const bool even = stable_hash(question, 3) % 2 == 0;
  const std::string expected =
      even ? "The scene reads as an ordinary joke without a target group."
           : "Nothing in the text or imagery points at a protected group.";
  CHECK(mock_generate(BackendKind::Answerer, {{"question", question}, {"ocr", "a nice sunset"}},
                      std::nullopt, 3, ctx) == expected);
  // substring hits are not matches
  CHECK(mock_generate(BackendKind::Answerer,
                      {{"question", question}, {"ocr", "the overmind is scummy"}}, std::nullopt, 3,
                      ctx) == expected);
}

TEST_CASE("judge mock weighs exemplar margin against the decision threshold") {
  const MockContext ctx = small_context();
  auto judge = [&](const std::string& prompt) {
    return mock_generate(BackendKind::Judge, {{"prompt", prompt}}, std::nullopt, 0, ctx);
  };

  // margin 0.1 < threshold 0.15: non-hateful, p_hateful 0.55 printed as 1-p
  const std::string close_call = judge(
      "[1] (hateful/race, sim=0.9000) bad text\n"
      "[2] (non-hateful/race, sim=0.8000) fine text\n");
  CHECK(close_call.rfind("LABEL: non-hateful\nCONFIDENCE: 0.4500\nWHY: ", 0) == 0);

  // one dialogue signal adds 0.18: 0.1 + 0.18 = 0.28 crosses the threshold
  const std::string with_signal = judge(
      "[1] (hateful/race, sim=0.9000) bad text\n"
      "[2] (non-hateful/race, sim=0.8000) fine text\n"
      "Signals: demeaning\n");
  CHECK(with_signal.rfind("LABEL: hateful\nCONFIDENCE: 0.6400\nWHY: ", 0) == 0);

  // a near-identical hateful exemplar forces the verdict regardless of margin
  const std::string identity = judge(
      "[1] (hateful/race, sim=0.9950) same meme\n"
      "[2] (non-hateful/race, sim=0.9990) benign twin\n");
  CHECK(identity.rfind("LABEL: hateful\nCONFIDENCE: 0.9800\nWHY: ", 0) == 0);

  // signal boost caps at three distinct tags: -0.3 + 3*0.18 = 0.24
  const std::string capped = judge(
      "[1] (hateful/race, sim=0.2000) far\n"
      "[2] (non-hateful/other, sim=0.5000) near benign\n"
      "Signals: s1,s2,s3\n"
      "Signals: s4,s5\n");
  CHECK(capped.rfind("LABEL: hateful\nCONFIDENCE: 0.6200\nWHY: ", 0) == 0);

  // "Signals: -" stanzas carry nothing
  const std::string dash = judge(
      "[1] (hateful/race, sim=0.9000) bad text\n"
      "[2] (non-hateful/race, sim=0.8000) fine text\n"
      "Signals: -\n");
  CHECK(dash == close_call);
}

TEST_CASE("vqa scorer matches its embedding formula and formats four decimals") {
  const MockContext ctx = small_context();
  const std::string question = "What is the tone?";
  const std::string answer = "Menacing and accusatory.";

  const auto qa = mock_embed(question + answer, 5, ctx.embed_dim);
  const auto cap = mock_embed("an angry crowd at night", 5, ctx.embed_dim);
  double dot = 0.0;
  for (size_t i = 0; i < qa.size(); ++i) dot += qa[i] * cap[i];
  const double expected = 100.0 * std::max(0.0, dot);

  CHECK(mock_vqascore(question, answer, "img/1.png", 5, ctx) ==
        doctest::Approx(expected).epsilon(1e-12));

  char formatted[32];
  std::snprintf(formatted, sizeof(formatted), "%.4f", expected);
  CHECK(mock_generate(BackendKind::VqaScorer, {{"question", question}, {"answer", answer}},
                      std::string("img/1.png"), 5, ctx) == formatted);

  CHECK(thrown_code([&] { mock_vqascore(question, answer, "", 5, ctx); }) ==
        ErrorCode::MissingFixture);
  CHECK(thrown_code([&] { mock_vqascore(question, answer, "unknown.png", 5, ctx); }) ==
        ErrorCode::MissingFixture);
}

TEST_CASE("request wire format is stable") {
  BackendRequest ocr;
  ocr.kind = BackendKind::Ocr;
  ocr.image_ref = "img/1.png";
  CHECK(backend_request_to_json(ocr) ==
        R"({"image_ref":"img/1.png","inputs":{},"kind":"ocr"})");

  BackendRequest embed;
  embed.kind = BackendKind::Embedder;
  embed.inputs["text"] = "hello";
  CHECK(backend_request_to_json(embed) == R"({"inputs":{"text":"hello"},"kind":"embedder"})");
}

TEST_CASE("response parsing accepts text, vectors and bounded confidence") {
  const auto text = parse_backend_response_json(R"({"output":"fine"})");
  CHECK(text.text() == "fine");
  CHECK_FALSE(text.confidence.has_value());
  CHECK(thrown_code([&] { text.vector_output(); }) == ErrorCode::ProtocolError);

  const auto vec = parse_backend_response_json(R"({"output":[0.5,-1.25,3]})");
  CHECK(vec.vector_output() == std::vector<double>{0.5, -1.25, 3.0});
  CHECK(thrown_code([&] { vec.text(); }) == ErrorCode::ProtocolError);

  const auto conf = parse_backend_response_json(R"({"output":"x","confidence":0.75})");
  REQUIRE(conf.confidence.has_value());
  CHECK(*conf.confidence == 0.75);
}

TEST_CASE("response parsing rejects every malformed shape") {
  auto code = [](const std::string& body) {
    return thrown_code([&] { parse_backend_response_json(body); });
  };
  CHECK(code("complete nonsense") == ErrorCode::ProtocolError);
  CHECK(code("[1,2]") == ErrorCode::ProtocolError);
  CHECK(code(R"({"result":"x"})") == ErrorCode::ProtocolError);
  CHECK(code(R"({"output":42})") == ErrorCode::ProtocolError);
  CHECK(code(R"({"output":[1,"x"]})") == ErrorCode::ProtocolError);
  CHECK(code(R"({"output":"x","confidence":"high"})") == ErrorCode::ProtocolError);
  CHECK(code(R"({"output":"x","confidence":1.5})") == ErrorCode::ProtocolError);
  CHECK(code(R"({"output":"x","confidence":-0.1})") == ErrorCode::ProtocolError);
}

TEST_CASE("dispatch enforces kind routing and embedder inputs") {
  const MockContext ctx = small_context();
  BackendConfig config;
  config.kind = BackendKind::Ocr;
  config.seed = 0;

  BackendRequest request;
  request.kind = BackendKind::Judge;
  CHECK(thrown_code([&] { dispatch(config, request, ctx); }) == ErrorCode::KindMismatch);

  BackendConfig embedder;
  embedder.kind = BackendKind::Embedder;
  embedder.seed = 0;
  BackendRequest no_text;
  no_text.kind = BackendKind::Embedder;
  CHECK(thrown_code([&] { dispatch(embedder, no_text, ctx); }) == ErrorCode::InvalidArgument);

  no_text.inputs["text"] = "hello world";
  const auto response = dispatch(embedder, no_text, ctx);
  CHECK(response.vector_output() == mock_embed("hello world", 0, ctx.embed_dim));
  CHECK(response.attempts == 1);
}

TEST_CASE("validate_config enforces per-mode requirements") {
  BackendConfig config;
  config.kind = BackendKind::Judge;
  config.seed = 1;
  CHECK_NOTHROW(validate_config(config));

  auto broken = [&](auto mutate) {
    BackendConfig c = config;
    mutate(c);
    return thrown_code([&] { validate_config(c); });
  };
  CHECK(broken([](BackendConfig& c) { c.timeout_ms = 0; }) == ErrorCode::ConfigInvalid);
  CHECK(broken([](BackendConfig& c) { c.max_attempts = 0; }) == ErrorCode::ConfigInvalid);
  CHECK(broken([](BackendConfig& c) { c.backoff_ms = 0; }) == ErrorCode::ConfigInvalid);
  CHECK(broken([](BackendConfig& c) { c.seed.reset(); }) == ErrorCode::ConfigInvalid);
  CHECK(broken([](BackendConfig& c) {
          c.mode = BackendMode::Http;
          c.endpoint.reset();
        }) == ErrorCode::ConfigInvalid);
}

TEST_CASE("BackendSet requires all seven kinds and embeds unit vectors") {
  const MockContext ctx = small_context();
  std::map<BackendKind, BackendConfig> six;
  for (BackendKind kind : kAllBackendKinds) {
    if (kind == BackendKind::VqaScorer) continue;
    BackendConfig config;
    config.kind = kind;
    config.seed = 2;
    six[kind] = config;
  }
  CHECK(thrown_code([&] { BackendSet(six, ctx); }) == ErrorCode::ConfigInvalid);

  const BackendSet backends = BackendSet::all_mock(2, ctx);
  const auto vec = backends.embed("the vermin are here");
  CHECK(vec == mock_embed("the vermin are here", 2, ctx.embed_dim));
  CHECK(backends.embed_dim() == ctx.embed_dim);
  CHECK(backends.config(BackendKind::Judge).mode == BackendMode::Mock);
  CHECK(backends.text_call(BackendKind::Ocr, {}, std::string("img/2.png")) == "cats are great");
}

TEST_CASE("http dispatch retries transport failures and reports attempts") {
  std::atomic<int> calls{0};
  std::mutex body_mutex;
  std::string seen_body;
  testutil::LocalServer server([&](const httplib::Request& req, httplib::Response& res) {
    {
      std::lock_guard<std::mutex> lock(body_mutex);
      seen_body = req.body;
    }
    if (++calls < 3) {
      res.status = 500;
      res.set_content("busy", "text/plain");
      return;
    }
    res.set_content(R"({"output":"recovered","confidence":0.5})", "application/json");
  });

  BackendConfig config;
  config.kind = BackendKind::Judge;
  config.mode = BackendMode::Http;
  config.endpoint = server.endpoint() + "/v1/infer";
  config.max_attempts = 3;
  config.backoff_ms = 1;

  BackendRequest request;
  request.kind = BackendKind::Judge;
  request.inputs["prompt"] = "a prompt";

  const auto response = dispatch(config, request, MockContext{});
  CHECK(response.text() == "recovered");
  CHECK(response.attempts == 3);
  CHECK(calls.load() == 3);
  {
    std::lock_guard<std::mutex> lock(body_mutex);
    CHECK(seen_body == backend_request_to_json(request));
  }
}

TEST_CASE("http dispatch gives up after max_attempts with the last failure") {
  std::atomic<int> calls{0};
  testutil::LocalServer server([&](const httplib::Request&, httplib::Response& res) {
    ++calls;
    res.status = 503;
    res.set_content("down", "text/plain");
  });

  BackendConfig config;
  config.kind = BackendKind::Captioner;
  config.mode = BackendMode::Http;
  config.endpoint = server.endpoint();
  config.max_attempts = 2;
  config.backoff_ms = 1;

  BackendRequest request;
  request.kind = BackendKind::Captioner;
  request.image_ref = "img/1.png";
  try {
    dispatch(config, request, MockContext{});
    FAIL("expected BackendUnavailable");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::BackendUnavailable);
    const std::string what = e.what();
    CHECK(what.find("after 2 attempt(s)") != std::string::npos);
    CHECK(what.find("status 503") != std::string::npos);
    CHECK(what.find(*config.endpoint) != std::string::npos);
  }
  CHECK(calls.load() == 2);
}

TEST_CASE("http dispatch sleeps with doubling backoff between attempts") {
  testutil::LocalServer server([](const httplib::Request&, httplib::Response& res) {
    res.status = 500;
  });

  BackendConfig config;
  config.kind = BackendKind::Judge;
  config.mode = BackendMode::Http;
  config.endpoint = server.endpoint();
  config.max_attempts = 3;
  config.backoff_ms = 50;

  BackendRequest request;
  request.kind = BackendKind::Judge;
  const auto start = std::chrono::steady_clock::now();
  CHECK(thrown_code([&] { dispatch(config, request, MockContext{}); }) ==
        ErrorCode::BackendUnavailable);
  const auto elapsed =
      std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::steady_clock::now() - start);
  // sleeps 50ms then 100ms before the second and third attempts
  CHECK(elapsed.count() >= 140);
}

TEST_CASE("protocol errors are terminal, not retried") {
  std::atomic<int> calls{0};
  testutil::LocalServer server([&](const httplib::Request&, httplib::Response& res) {
    ++calls;
    res.set_content("not json", "text/plain");
  });

  BackendConfig config;
  config.kind = BackendKind::Judge;
  config.mode = BackendMode::Http;
  config.endpoint = server.endpoint();
  config.max_attempts = 5;
  config.backoff_ms = 1;

  BackendRequest request;
  request.kind = BackendKind::Judge;
  CHECK(thrown_code([&] { dispatch(config, request, MockContext{}); }) == ErrorCode::ProtocolError);
  CHECK(calls.load() == 1);
}

TEST_CASE("http dispatch rejects output of the wrong shape") {
  testutil::LocalServer server([](const httplib::Request& req, httplib::Response& res) {
    // embedder asked, text answered; judge asked, vector answered
    if (req.body.find("\"embedder\"") != std::string::npos) {
      res.set_content(R"({"output":"not a vector"})", "application/json");
    } else {
      res.set_content(R"({"output":[1,2]})", "application/json");
    }
  });

  BackendConfig config;
  config.mode = BackendMode::Http;
  config.endpoint = server.endpoint();

  BackendRequest embed;
  embed.kind = BackendKind::Embedder;
  embed.inputs["text"] = "x";
  config.kind = BackendKind::Embedder;
  CHECK(thrown_code([&] { dispatch(config, embed, MockContext{}); }) == ErrorCode::ProtocolError);

  BackendRequest judge;
  judge.kind = BackendKind::Judge;
  config.kind = BackendKind::Judge;
  CHECK(thrown_code([&] { dispatch(config, judge, MockContext{}); }) == ErrorCode::ProtocolError);
}

TEST_CASE("dead endpoints surface as BackendUnavailable") {
  BackendConfig config;
  config.kind = BackendKind::Ocr;
  config.mode = BackendMode::Http;
  config.endpoint = testutil::dead_endpoint();
  config.max_attempts = 2;
  config.backoff_ms = 1;
  config.timeout_ms = 2000;

  BackendRequest request;
  request.kind = BackendKind::Ocr;
  request.image_ref = "img/1.png";
  try {
    dispatch(config, request, MockContext{});
    FAIL("expected BackendUnavailable");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::BackendUnavailable);
    CHECK(std::string(e.what()).find("transport error") != std::string::npos);
  }
}

TEST_CASE("embed over http renormalizes and validates the vector") {
  testutil::LocalServer server([](const httplib::Request& req, httplib::Response& res) {
    if (req.body.find("three") != std::string::npos) {
      res.set_content(R"({"output":[1,2,3]})", "application/json");
    } else if (req.body.find("zero") != std::string::npos) {
      res.set_content(R"({"output":[0,0]})", "application/json");
    } else {
      res.set_content(R"({"output":[3,4]})", "application/json");
    }
  });

  MockContext ctx;
  ctx.embed_dim = 2;
  std::map<BackendKind, BackendConfig> configs;
  for (BackendKind kind : kAllBackendKinds) {
    BackendConfig config;
    config.kind = kind;
    config.seed = 0;
    configs[kind] = config;
  }
  configs[BackendKind::Embedder].mode = BackendMode::Http;
  configs[BackendKind::Embedder].seed.reset();
  configs[BackendKind::Embedder].endpoint = server.endpoint();
  const BackendSet backends(configs, ctx);

  const auto vec = backends.embed("anything");
  REQUIRE(vec.size() == 2);
  CHECK(vec[0] == doctest::Approx(0.6).epsilon(1e-12));
  CHECK(vec[1] == doctest::Approx(0.8).epsilon(1e-12));

  CHECK(thrown_code([&] { backends.embed("three"); }) == ErrorCode::DimensionMismatch);
  CHECK(thrown_code([&] { backends.embed("zero"); }) == ErrorCode::ZeroVector);
}

TEST_CASE("backend config files parse with defaults and strict keys") {
  testutil::TempDir dir;
  const std::string path = dir.file("backends.json");

  testutil::write_file(path, R"({
    "judge": {"mode": "http", "endpoint": "http://127.0.0.1:9/v1", "timeout_ms": 50,
              "max_attempts": 4, "backoff_ms": 10},
    "embedder": {"mode": "mock", "seed": 9}
  })");
  const auto configs = load_backend_config(path);
  CHECK(configs.size() == 7);
  CHECK(configs.at(BackendKind::Judge).mode == BackendMode::Http);
  CHECK(configs.at(BackendKind::Judge).endpoint == "http://127.0.0.1:9/v1");
  CHECK(configs.at(BackendKind::Judge).timeout_ms == 50);
  CHECK(configs.at(BackendKind::Judge).max_attempts == 4);
  CHECK(configs.at(BackendKind::Judge).backoff_ms == 10);
  CHECK(configs.at(BackendKind::Embedder).seed == 9);
  // kinds absent from the file default to mock with seed 0
  CHECK(configs.at(BackendKind::Ocr).mode == BackendMode::Mock);
  CHECK(configs.at(BackendKind::Ocr).seed == 0);

  auto code_for = [&](const std::string& content) {
    testutil::write_file(path, content);
    return thrown_code([&] { load_backend_config(path); });
  };
  CHECK(code_for(R"({"flux": {}})") == ErrorCode::ConfigInvalid);
  CHECK(code_for(R"({"judge": 5})") == ErrorCode::ConfigInvalid);
  CHECK(code_for(R"({"judge": {"model": "x"}})") == ErrorCode::ConfigInvalid);
  CHECK(code_for(R"({"judge": {"mode": "grpc"}})") == ErrorCode::ConfigInvalid);
  CHECK(code_for(R"({"judge": {"mode": "http"}})") == ErrorCode::ConfigInvalid);
  CHECK(code_for(R"({"judge": {"mode": "mock", "seed": 1, "timeout_ms": 0}})") ==
        ErrorCode::ConfigInvalid);
  CHECK(code_for("[]") == ErrorCode::ConfigParseError);
  CHECK(code_for("{{{") == ErrorCode::ConfigParseError);
  CHECK(thrown_code([&] { load_backend_config(dir.file("absent.json")); }) == ErrorCode::IoError);
}

TEST_CASE("backend settings resolve sibling files and bound embed_dim") {
  testutil::TempDir dir;
  testutil::write_file(dir.file("fixtures.json"),
                       R"({"img/x.png": {"ocr": "o text", "caption": "c text"}})");
  testutil::write_file(dir.file("lexicon.json"), R"([{"tag": "t", "triggers": ["x"]}])");

  const std::string path = dir.file("settings.json");
  testutil::write_file(path, R"({
    "embed_dim": 8,
    "fixtures": "fixtures.json",
    "lexicon": "lexicon.json",
    "answerer": {"mode": "mock", "seed": 4}
  })");
  const auto settings = load_backend_settings(path);
  CHECK(settings.context.embed_dim == 8);
  CHECK(settings.fixtures_path == dir.file("fixtures.json"));
  CHECK(settings.lexicon_path == dir.file("lexicon.json"));
  REQUIRE(settings.context.fixtures.count("img/x.png") == 1);
  CHECK(settings.context.fixtures.at("img/x.png").ocr == "o text");
  REQUIRE(settings.context.lexicon.size() == 1);
  CHECK(settings.context.lexicon[0].tag == "t");
  CHECK(settings.configs.at(BackendKind::Answerer).seed == 4);

  testutil::write_file(path, R"({"embed_dim": 1})");
  CHECK(thrown_code([&] { load_backend_settings(path); }) == ErrorCode::ConfigInvalid);
  testutil::write_file(path, R"({"embed_dim": 129})");
  CHECK(thrown_code([&] { load_backend_settings(path); }) == ErrorCode::ConfigInvalid);

  testutil::write_file(dir.file("fixtures.json"), R"({"img/x.png": {"ocr": "only"}})");
  testutil::write_file(path, R"({"embed_dim": 8, "fixtures": "fixtures.json"})");
  CHECK(thrown_code([&] { load_backend_settings(path); }) == ErrorCode::ConfigParseError);
}

TEST_CASE("shipped mock settings bind every kind with seed 7") {
  const auto settings = load_backend_settings(testutil::data_path("backends.mock.json"));
  CHECK(settings.context.embed_dim == 128);
  CHECK(settings.context.fixtures.size() == 40);
  CHECK(settings.context.lexicon.size() == 5);
  for (BackendKind kind : kAllBackendKinds) {
    CHECK(settings.configs.at(kind).mode == BackendMode::Mock);
    CHECK(settings.configs.at(kind).seed == 7);
  }
}

TEST_CASE("backend kind names round-trip") {
  for (BackendKind kind : kAllBackendKinds) {
    CHECK(backend_kind_from_string(to_string(kind)) == kind);
  }
  CHECK_FALSE(backend_kind_from_string("tokenizer").has_value());
}
