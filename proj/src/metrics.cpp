#include "sentinel/metrics.hpp"

#include <algorithm>
#include <cstdlib>
#include <numeric>

#include "sentinel/error.hpp"

namespace sentinel {

double accuracy(const std::vector<EvalRow>& rows) {
  if (rows.empty()) throw Error(ErrorCode::EmptyRows, "no rows to score");
  size_t correct = 0;
  for (const EvalRow& row : rows) {
    if (row.predicted == row.gold) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(rows.size());
}

double auroc(const std::vector<EvalRow>& rows) {
  if (rows.empty()) throw Error(ErrorCode::EmptyRows, "no rows to score");

  std::vector<size_t> order(rows.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&rows](size_t a, size_t b) { return rows[a].confidence < rows[b].confidence; });

  // Midranks: tied scores share the average of the ranks they span, which
  // yields exactly the 1/0.5/0 pairwise credit.
  size_t positives = 0;
  double positive_rank_sum = 0.0;
  size_t i = 0;
  while (i < order.size()) {
    size_t j = i;
    while (j < order.size() && rows[order[j]].confidence == rows[order[i]].confidence) ++j;
    const double midrank = 0.5 * static_cast<double>(i + 1 + j);  // ranks are 1-based
    for (size_t t = i; t < j; ++t) {
      if (rows[order[t]].gold == HateLabel::Hateful) {
        ++positives;
        positive_rank_sum += midrank;
      }
    }
    i = j;
  }

  const size_t negatives = rows.size() - positives;
  if (positives == 0 || negatives == 0) {
    throw Error(ErrorCode::SingleClass, "need at least one row of each gold class");
  }
  const double u = positive_rank_sum -
                   static_cast<double>(positives) * static_cast<double>(positives + 1) / 2.0;
  return u / (static_cast<double>(positives) * static_cast<double>(negatives));
}

VqaScoreItem make_vqascore_item(const MemeRecord& meme, const DialogueTranscript& transcript) {
  VqaScoreItem item;
  item.meme_id = meme.id;
  item.image_ref = meme.image_ref;
  for (const QAPair& turn : transcript.turns) {
    item.qa_pairs.emplace_back(turn.question, turn.answer);
  }
  return item;
}

VqaScoreReport vqascore_protocol(const std::vector<VqaScoreItem>& items, const BackendSet& backends,
                                 int rounds) {
  if (rounds < 1) throw Error(ErrorCode::InvalidArgument, "rounds must be >= 1");
  if (items.empty()) throw Error(ErrorCode::EmptyRows, "no items to score");
  for (const VqaScoreItem& item : items) {
    if (item.qa_pairs.empty()) {
      throw Error(ErrorCode::InvalidArgument, "item " + item.meme_id + " has no question/answer pairs");
    }
  }

  auto score_pair = [&backends](const VqaScoreItem& item,
                                const std::pair<std::string, std::string>& qa) {
    const std::string text = backends.text_call(
        BackendKind::VqaScorer, {{"question", qa.first}, {"answer", qa.second}}, item.image_ref);
    char* end = nullptr;
    const double value = std::strtod(text.c_str(), &end);
    if (end == text.c_str() || !(value >= 0.0 && value <= 100.0)) {
      throw Error(ErrorCode::ProtocolError, "scorer returned '" + text + "', expected 0..100");
    }
    return value;
  };

  VqaScoreReport report;
  for (const VqaScoreItem& item : items) report.item_ids.push_back(item.meme_id);
  report.rounds.resize(static_cast<size_t>(rounds));
  for (auto& round : report.rounds) {
    round.reserve(items.size());
    for (const VqaScoreItem& item : items) {
      double sum = 0.0;
      for (const auto& qa : item.qa_pairs) sum += score_pair(item, qa);
      round.push_back(sum / static_cast<double>(item.qa_pairs.size()));
    }
  }

  report.per_item_mean.resize(items.size(), 0.0);
  for (const auto& round : report.rounds) {
    for (size_t idx = 0; idx < round.size(); ++idx) report.per_item_mean[idx] += round[idx];
  }
  for (double& mean : report.per_item_mean) mean /= static_cast<double>(rounds);
  report.overall_mean =
      std::accumulate(report.per_item_mean.begin(), report.per_item_mean.end(), 0.0) /
      static_cast<double>(report.per_item_mean.size());
  return report;
}

}  // namespace sentinel
