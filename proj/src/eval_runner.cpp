#include "sentinel/eval_runner.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>

#include "sentinel/error.hpp"

namespace sentinel {

namespace {

using nlohmann::json;

void write_atomic(const std::string& path, const std::string& content) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::IoError, "cannot open " + tmp + " for writing");
    out << content;
    out.flush();
    if (!out) throw Error(ErrorCode::IoError, "write to " + tmp + " failed");
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp);
    throw Error(ErrorCode::IoError, "cannot move " + tmp + " to " + path + ": " + ec.message());
  }
}

double percent(double fraction) { return 100.0 * fraction; }

std::string format_table(const std::vector<MetricsReport>& reports) {
  std::string table = "Variant                  Acc. (%)  AUROC (%)\n";
  char buf[128];
  for (const MetricsReport& report : reports) {
    std::snprintf(buf, sizeof(buf), "%-24s %8.2f %10.2f\n",
                  variant_display_name(report.variant).c_str(), percent(report.accuracy),
                  percent(report.auroc));
    table += buf;
  }
  return table;
}

}  // namespace

PaperReference paper_reference(VariantKind variant) {
  switch (variant) {
    case VariantKind::Explanation: return {59.20, 63.01};
    case VariantKind::SubLabel: return {72.00, 76.52};
    case VariantKind::SubLabelVqa: return {73.50, 78.35};
  }
  return {};
}

EvalOutcome run_eval(const std::vector<MemeRecord>& dataset, const PartitionedIndex& index,
                     const BackendSet& backends, const EvalConfig& config) {
  if (dataset.empty()) throw Error(ErrorCode::EmptyRows, "dataset is empty");
  if (config.variants.empty()) throw Error(ErrorCode::InvalidArgument, "no variants requested");
  for (const MemeRecord& meme : dataset) {
    if (!meme.gold_label) {
      throw Error(ErrorCode::MissingGoldLabels, "meme " + meme.id + " has no gold label");
    }
  }

  EvalOutcome outcome;
  outcome.json_report = json::array();

  for (VariantKind variant : config.variants) {
    MetricsReport report;
    report.variant = variant;
    std::vector<EvalRow> rows;
    std::vector<VqaScoreItem> score_items;

    for (const MemeRecord& meme : dataset) {
      ClassifyDetail detail;
      try {
        detail = classify_detailed(meme, index, backends, config.detector, variant);
      } catch (const Error& e) {
        ++report.warnings;
        outcome.failures.push_back(to_string(variant) + "/" + meme.id + ": " + e.what());
        continue;
      }
      const Verdict& verdict = detail.verdict;

      EvalRow row;
      row.meme_id = meme.id;
      row.gold = *meme.gold_label;
      row.predicted = verdict.label;
      row.confidence = verdict.label == HateLabel::Hateful ? verdict.confidence
                                                           : 1.0 - verdict.confidence;
      rows.push_back(row);

      if (verdict.chosen_sublabel) {
        SubLabelStats& stats = report.per_sublabel[*verdict.chosen_sublabel];
        stats.accuracy = (stats.accuracy * static_cast<double>(stats.n) +
                          (verdict.label == *meme.gold_label ? 1.0 : 0.0)) /
                         static_cast<double>(stats.n + 1);
        ++stats.n;
      }
      if (variant == VariantKind::SubLabelVqa && detail.transcript) {
        score_items.push_back(make_vqascore_item(meme, *detail.transcript));
      }
    }

    report.n = rows.size();
    report.accuracy = accuracy(rows);
    report.auroc = auroc(rows);
    outcome.reports.push_back(report);

    const PaperReference reference = paper_reference(variant);
    json entry;
    entry["variant"] = to_string(variant);
    entry["display_name"] = variant_display_name(variant);
    entry["n"] = report.n;
    entry["accuracy"] = report.accuracy;
    entry["auroc"] = report.auroc;
    entry["per_sublabel"] = json::object();
    for (const auto& [sub, stats] : report.per_sublabel) {
      entry["per_sublabel"][to_string(sub)] = {{"n", stats.n}, {"accuracy", stats.accuracy}};
    }
    entry["warnings"] = report.warnings;
    entry["reference"] = {{"paper_acc", reference.acc}, {"paper_auroc", reference.auroc}};
    outcome.json_report.push_back(std::move(entry));

    if (variant == VariantKind::SubLabelVqa && !score_items.empty()) {
      outcome.vqascore = vqascore_protocol(score_items, backends, config.vqascore_rounds);
    }
  }

  outcome.table_text = format_table(outcome.reports);

  if (outcome.vqascore) {
    json block;
    block["rounds"] = outcome.vqascore->rounds.size();
    block["n_items"] = outcome.vqascore->item_ids.size();
    block["overall_mean"] = outcome.vqascore->overall_mean;
    block["reference"] = {
        {"paper_vqascore", kPaperVqaScoreReference},
        {"note", "live-system reference value; not reproducible with offline mock backends"}};
    outcome.json_report.push_back(json{{"vqascore", std::move(block)}});
  }

  if (!config.report_dir.empty()) {
    std::error_code ec;
    std::filesystem::create_directories(config.report_dir, ec);
    if (ec) {
      throw Error(ErrorCode::IoError, "cannot create " + config.report_dir + ": " + ec.message());
    }
    outcome.json_path = (std::filesystem::path(config.report_dir) / "eval_report.json").string();
    outcome.table_path = (std::filesystem::path(config.report_dir) / "eval_report.txt").string();
    write_atomic(outcome.json_path, outcome.json_report.dump(2) + "\n");
    write_atomic(outcome.table_path, outcome.table_text);
  }
  return outcome;
}

}  // namespace sentinel
