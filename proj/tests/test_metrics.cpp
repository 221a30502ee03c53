#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <atomic>
#include <cstdio>
#include <cstdlib>
#include <random>
#include <string>
#include <vector>

#include "sentinel/error.hpp"
#include "sentinel/metrics.hpp"
#include "sentinel/mock_backend.hpp"
#include "localserver.hpp"
#include "testutil.hpp"

using namespace sentinel;
using testutil::thrown_code;

namespace {

EvalRow row(HateLabel gold, double confidence, HateLabel predicted = HateLabel::NonHateful) {
  EvalRow r;
  r.gold = gold;
  r.predicted = predicted;
  r.confidence = confidence;
  return r;
}

std::vector<EvalRow> random_rows(std::mt19937_64& rng, size_t n, bool tie_heavy) {
  std::vector<EvalRow> rows;
  std::uniform_real_distribution<double> uniform(0.0, 1.0);
  for (size_t i = 0; i < n; ++i) {
    const auto gold = rng() % 2 ? HateLabel::Hateful : HateLabel::NonHateful;
    // a coarse grid makes exact score collisions the norm rather than the exception
    const double confidence =
        tie_heavy ? static_cast<double>(rng() % 5) / 4.0 : uniform(rng);
    rows.push_back(row(gold, confidence));
  }
  return rows;
}

bool has_both_classes(const std::vector<EvalRow>& rows) {
  bool pos = false, neg = false;
  for (const EvalRow& r : rows) {
    (r.gold == HateLabel::Hateful ? pos : neg) = true;
  }
  return pos && neg;
}

}  // namespace

TEST_CASE("accuracy is the exact fraction of matching predictions") {
  std::vector<EvalRow> rows = {
      row(HateLabel::Hateful, 0.9, HateLabel::Hateful),
      row(HateLabel::Hateful, 0.2, HateLabel::NonHateful),
      row(HateLabel::NonHateful, 0.1, HateLabel::NonHateful),
      row(HateLabel::NonHateful, 0.8, HateLabel::NonHateful),
  };
  CHECK(accuracy(rows) == 0.75);
  rows.pop_back();
  CHECK(accuracy(rows) == doctest::Approx(2.0 / 3.0).epsilon(1e-15));
  CHECK(thrown_code([] { accuracy({}); }) == ErrorCode::EmptyRows);
}

TEST_CASE("auroc matches hand-computed rankings") {
  // pairs: (0.9,0.8)=1 (0.9,0.1)=1 (0.7,0.8)=0 (0.7,0.1)=1 -> 3/4
  CHECK(auroc({row(HateLabel::Hateful, 0.9), row(HateLabel::Hateful, 0.7),
               row(HateLabel::NonHateful, 0.8), row(HateLabel::NonHateful, 0.1)}) == 0.75);

  // perfect separation and perfect inversion
  CHECK(auroc({row(HateLabel::Hateful, 0.9), row(HateLabel::Hateful, 0.6),
               row(HateLabel::NonHateful, 0.4), row(HateLabel::NonHateful, 0.2)}) == 1.0);
  CHECK(auroc({row(HateLabel::Hateful, 0.1), row(HateLabel::NonHateful, 0.9)}) == 0.0);

  // every score equal: all pairs tie at half credit, exactly 0.5
  CHECK(auroc({row(HateLabel::Hateful, 0.5), row(HateLabel::Hateful, 0.5),
               row(HateLabel::NonHateful, 0.5), row(HateLabel::NonHateful, 0.5)}) == 0.5);

  // one tied pair: (0.8,0.8)=0.5 (0.8,0.1)=1 -> 0.75
  CHECK(auroc({row(HateLabel::Hateful, 0.8), row(HateLabel::NonHateful, 0.8),
               row(HateLabel::NonHateful, 0.1)}) == 0.75);
}

TEST_CASE("auroc requires rows of both classes") {
  CHECK(thrown_code([] { auroc({}); }) == ErrorCode::EmptyRows);
  CHECK(thrown_code([] { auroc({row(HateLabel::Hateful, 0.9), row(HateLabel::Hateful, 0.1)}); }) ==
        ErrorCode::SingleClass);
  CHECK(thrown_code([] { auroc({row(HateLabel::NonHateful, 0.9)}); }) == ErrorCode::SingleClass);
}

TEST_CASE("auroc agrees with the pairwise oracle on random data") {
  std::mt19937_64 rng(42);
  for (int trial = 0; trial < 60; ++trial) {
    const size_t n = 2 + rng() % 80;
    auto rows = random_rows(rng, n, trial % 2 == 0);
    if (!has_both_classes(rows)) {
      rows.push_back(row(HateLabel::Hateful, 0.5));
      rows.push_back(row(HateLabel::NonHateful, 0.5));
    }
    CHECK(auroc(rows) == doctest::Approx(testutil::auroc_oracle(rows)).epsilon(1e-12));
  }
}

TEST_CASE("make_vqascore_item lifts dialogue turns into scorable pairs") {
  MemeRecord meme;
  meme.id = "m5";
  meme.image_ref = "img/5.png";
  DialogueTranscript transcript;
  transcript.turns.push_back({0, "q0", "a0", {}});
  transcript.turns.push_back({1, "q1", "a1", {"tag"}});

  const VqaScoreItem item = make_vqascore_item(meme, transcript);
  CHECK(item.meme_id == "m5");
  CHECK(item.image_ref == "img/5.png");
  REQUIRE(item.qa_pairs.size() == 2);
  CHECK(item.qa_pairs[0] == std::pair<std::string, std::string>{"q0", "a0"});
  CHECK(item.qa_pairs[1] == std::pair<std::string, std::string>{"q1", "a1"});
}

TEST_CASE("vqascore_protocol validates its inputs") {
  MockContext ctx;
  ctx.embed_dim = 16;
  ctx.fixtures["img/5.png"] = Fixture{"o", "a busy market square"};
  const BackendSet backends = BackendSet::all_mock(1, ctx);

  VqaScoreItem item;
  item.meme_id = "m5";
  item.image_ref = "img/5.png";
  item.qa_pairs = {{"q0", "a0"}};

  CHECK(thrown_code([&] { vqascore_protocol({item}, backends, 0); }) == ErrorCode::InvalidArgument);
  CHECK(thrown_code([&] { vqascore_protocol({}, backends, 5); }) == ErrorCode::EmptyRows);

  VqaScoreItem empty_item;
  empty_item.meme_id = "m6";
  empty_item.image_ref = "img/5.png";
  CHECK(thrown_code([&] { vqascore_protocol({item, empty_item}, backends, 5); }) ==
        ErrorCode::InvalidArgument);
}

TEST_CASE("mock scorer rounds are identical, so means equal the single round") {
  MockContext ctx;
  ctx.embed_dim = 32;
  ctx.fixtures["img/5.png"] = Fixture{"some text", "a busy market square"};
  ctx.fixtures["img/6.png"] = Fixture{"more text", "a quiet library corner"};
  const BackendSet backends = BackendSet::all_mock(1, ctx);

  VqaScoreItem first;
  first.meme_id = "m5";
  first.image_ref = "img/5.png";
  first.qa_pairs = {{"What is shown?", "A crowded market."},
                    {"Is anyone targeted?", "No, it is a generic scene."}};
  VqaScoreItem second;
  second.meme_id = "m6";
  second.image_ref = "img/6.png";
  second.qa_pairs = {{"What is the mood?", "Calm and studious."}};

  const auto report = vqascore_protocol({first, second}, backends, 5);
  CHECK(report.item_ids == std::vector<std::string>{"m5", "m6"});
  REQUIRE(report.rounds.size() == 5);
  for (const auto& round : report.rounds) {
    REQUIRE(round.size() == 2);
    CHECK(round == report.rounds[0]);
  }
  REQUIRE(report.per_item_mean.size() == 2);
  CHECK(report.per_item_mean[0] == doctest::Approx(report.rounds[0][0]).epsilon(1e-12));
  CHECK(report.per_item_mean[1] == doctest::Approx(report.rounds[0][1]).epsilon(1e-12));

  const auto single = vqascore_protocol({first, second}, backends, 1);
  CHECK(report.overall_mean == doctest::Approx(single.overall_mean).epsilon(1e-12));

  // the mock score is the embedding formula, surfaced through the protocol;
  // the scorer emits 4-decimal text, so the oracle rounds the same way
  auto through_wire = [](double score) {
    char text[32];
    std::snprintf(text, sizeof(text), "%.4f", score);
    return std::strtod(text, nullptr);
  };
  const double expected =
      0.5 *
      (through_wire(mock_vqascore("What is shown?", "A crowded market.", "img/5.png", 1, ctx)) +
       through_wire(
           mock_vqascore("Is anyone targeted?", "No, it is a generic scene.", "img/5.png", 1, ctx)));
  CHECK(report.rounds[0][0] == doctest::Approx(expected).epsilon(1e-12));

  // scores land in [0,100]
  for (double mean : report.per_item_mean) {
    CHECK(mean >= 0.0);
    CHECK(mean <= 100.0);
  }
}

TEST_CASE("a remote scorer's numbers aggregate per pair, round and item") {
  // fixed response sequence: item one has two pairs, item two has one,
  // so each round consumes three calls
  const std::vector<std::string> sequence = {"70", "80", "40", "75.5", "84.5", "60"};
  std::atomic<size_t> call{0};
  testutil::LocalServer server([&](const httplib::Request&, httplib::Response& res) {
    const size_t idx = call++ % sequence.size();
    res.set_content("{\"output\":\"" + sequence[idx] + "\"}", "application/json");
  });

  MockContext ctx;
  ctx.embed_dim = 16;
  std::map<BackendKind, BackendConfig> configs;
  for (BackendKind kind : kAllBackendKinds) {
    BackendConfig config;
    config.kind = kind;
    config.seed = 0;
    configs[kind] = config;
  }
  configs[BackendKind::VqaScorer].mode = BackendMode::Http;
  configs[BackendKind::VqaScorer].seed.reset();
  configs[BackendKind::VqaScorer].endpoint = server.endpoint();
  const BackendSet backends(configs, ctx);

  VqaScoreItem one;
  one.meme_id = "m1";
  one.image_ref = "img/1.png";
  one.qa_pairs = {{"qa", "aa"}, {"qb", "ab"}};
  VqaScoreItem two;
  two.meme_id = "m2";
  two.image_ref = "img/2.png";
  two.qa_pairs = {{"qc", "ac"}};

  const auto report = vqascore_protocol({one, two}, backends, 2);
  CHECK(call.load() == 6);
  REQUIRE(report.rounds.size() == 2);
  CHECK(report.rounds[0] == std::vector<double>{75.0, 40.0});
  CHECK(report.rounds[1] == std::vector<double>{80.0, 60.0});
  CHECK(report.per_item_mean == std::vector<double>{77.5, 50.0});
  CHECK(report.overall_mean == doctest::Approx(63.75).epsilon(1e-12));
}

TEST_CASE("out-of-range or unreadable scores are protocol errors") {
  for (const std::string& bad : {std::string("101"), std::string("-3"), std::string("not a number")}) {
    testutil::LocalServer server([&](const httplib::Request&, httplib::Response& res) {
      res.set_content("{\"output\":\"" + bad + "\"}", "application/json");
    });
    MockContext ctx;
    ctx.embed_dim = 16;
    std::map<BackendKind, BackendConfig> configs;
    for (BackendKind kind : kAllBackendKinds) {
      BackendConfig config;
      config.kind = kind;
      config.seed = 0;
      configs[kind] = config;
    }
    configs[BackendKind::VqaScorer].mode = BackendMode::Http;
    configs[BackendKind::VqaScorer].seed.reset();
    configs[BackendKind::VqaScorer].endpoint = server.endpoint();
    const BackendSet backends(configs, ctx);

    VqaScoreItem item;
    item.meme_id = "m1";
    item.image_ref = "img/1.png";
    item.qa_pairs = {{"q", "a"}};
    try {
      vqascore_protocol({item}, backends, 1);
      FAIL("expected ProtocolError for score " << bad);
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::ProtocolError);
      CHECK(std::string(e.what()).find("expected 0..100") != std::string::npos);
    }
  }
}
