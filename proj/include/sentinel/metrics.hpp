#pragma once

#include <map>
#include <string>
#include <utility>
#include <vector>

#include "sentinel/backend.hpp"
#include "sentinel/detector.hpp"
#include "sentinel/types.hpp"
#include "sentinel/vqa.hpp"

namespace sentinel {

// One scored meme under one variant. confidence is oriented toward Hateful:
// a NonHateful prediction with judge confidence c contributes 1 - c.
struct EvalRow {
  std::string meme_id;
  HateLabel gold = HateLabel::NonHateful;
  HateLabel predicted = HateLabel::NonHateful;
  double confidence = 0.5;
};

// Fraction of rows with predicted == gold. Throws EmptyRows.
double accuracy(const std::vector<EvalRow>& rows);

// Tie-aware rank statistic (Mann-Whitney, midranks): over all
// (positive, negative) pairs, credit 1 / 0.5 / 0 for higher / equal / lower
// positive score. Throws EmptyRows / SingleClass.
double auroc(const std::vector<EvalRow>& rows);

struct SubLabelStats {
  size_t n = 0;
  double accuracy = 0.0;

  bool operator==(const SubLabelStats&) const = default;
};

struct MetricsReport {
  VariantKind variant = VariantKind::SubLabel;
  size_t n = 0;
  double accuracy = 0.0;
  double auroc = 0.0;
  std::map<SubLabel, SubLabelStats> per_sublabel;  // routed variants only
  size_t warnings = 0;  // rows dropped because classification failed
};

// Everything the scorer needs for one meme: its image and the dialogue's
// question/answer pairs.
struct VqaScoreItem {
  std::string meme_id;
  std::string image_ref;
  std::vector<std::pair<std::string, std::string>> qa_pairs;
};

VqaScoreItem make_vqascore_item(const MemeRecord& meme, const DialogueTranscript& transcript);

struct VqaScoreReport {
  std::vector<std::string> item_ids;
  std::vector<std::vector<double>> rounds;  // rounds[r][i] = item i's score in round r
  std::vector<double> per_item_mean;
  double overall_mean = 0.0;
};

// Scores every question/answer pair against its image over the given number
// of rounds; an item's round score is the mean over its pairs. Throws
// EmptyRows (no items), InvalidArgument (item without pairs, rounds < 1),
// ProtocolError (score outside [0,100]).
VqaScoreReport vqascore_protocol(const std::vector<VqaScoreItem>& items, const BackendSet& backends,
                                 int rounds = 5);

}  // namespace sentinel
