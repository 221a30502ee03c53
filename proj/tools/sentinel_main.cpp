#include <atomic>
#include <chrono>
#include <csignal>
#include <fstream>
#include <iostream>
#include <sstream>
#include <thread>

#include "CLI11.hpp"
#include "json.hpp"

#include "sentinel/backend.hpp"
#include "sentinel/dataset.hpp"
#include "sentinel/detector.hpp"
#include "sentinel/error.hpp"
#include "sentinel/eval_runner.hpp"
#include "sentinel/ingest.hpp"
#include "sentinel/knowledge_store.hpp"
#include "sentinel/run_store.hpp"
#include "sentinel/service.hpp"
#include "sentinel/vqa.hpp"

namespace {

using nlohmann::json;
using namespace sentinel;

std::atomic<bool> g_stop_requested{false};

void handle_stop_signal(int) { g_stop_requested = true; }

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, "cannot open " + path);
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

BackendSettings load_settings(const std::string& config_path) {
  if (!config_path.empty()) return load_backend_settings(config_path);
  BackendSettings settings;
  for (BackendKind kind : kAllBackendKinds) {
    BackendConfig config;
    config.kind = kind;
    config.mode = BackendMode::Mock;
    config.seed = 0;
    settings.configs[kind] = config;
  }
  return settings;
}

std::string join_args(int argc, char** argv) {
  std::string joined;
  for (int i = 0; i < argc; ++i) {
    if (i > 0) joined += ' ';
    joined += argv[i];
  }
  return joined;
}

struct DialogueFlags {
  int max_turns = 4;
  double dedup_threshold = 0.95;
};

VqaConfig make_vqa_config(const BackendSettings& settings, const DialogueFlags& flags) {
  VqaConfig config;
  config.max_turns = flags.max_turns;
  config.dedup_threshold = flags.dedup_threshold;
  config.signal_lexicon = settings.context.lexicon;
  return config;
}

void persist_command_run(const std::string& runs_dir, const std::string& command,
                         const json& snapshot, std::vector<json> outputs, int64_t started_ms_value) {
  RunRecord record;
  record.run_id = new_run_id();
  record.command = command;
  record.config_snapshot = snapshot;
  record.outputs = std::move(outputs);
  record.started_ms = started_ms_value;
  record.finished_ms = now_ms();
  persist_run(record, runs_dir);
  std::cerr << "run " << record.run_id << " persisted under " << runs_dir << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"retrieval-augmented hateful meme detection pipeline"};
  app.require_subcommand(1);

  std::string config_path;
  app.add_option("--config", config_path, "backend config JSON (mock/http bindings, fixtures)")
      ->envname("SENTINEL_CONFIG");

  const auto variant_check = CLI::IsMember({"explanation", "sub_label", "sub_label_vqa"});

  // ingest
  auto* ingest_cmd = app.add_subcommand("ingest", "validate a dataset and enrich captions/OCR");
  std::string ingest_input, ingest_output;
  ingest_cmd->add_option("input", ingest_input, "dataset JSONL")->required();
  ingest_cmd->add_option("-o,--output", ingest_output, "enriched JSONL path")->required();

  // index build
  auto* index_cmd = app.add_subcommand("index", "knowledge index operations");
  index_cmd->require_subcommand(1);
  auto* build_cmd = index_cmd->add_subcommand("build", "embed exemplars and write the index");
  std::string build_input, build_output;
  build_cmd->add_option("entries", build_input, "exemplar JSONL (with sub_label/explanation)")
      ->required();
  build_cmd->add_option("-o,--output", build_output, "index file path")->required();

  // classify
  auto* classify_cmd = app.add_subcommand("classify", "classify one meme");
  std::string classify_meme, classify_variant, classify_index, classify_runs_dir;
  int classify_k = 5;
  bool classify_audit = false;
  DialogueFlags classify_flags;
  classify_cmd->add_option("meme", classify_meme, "meme JSON file")->required();
  classify_cmd->add_option("--variant", classify_variant, "pipeline variant")
      ->required()
      ->check(variant_check);
  classify_cmd->add_option("--index", classify_index, "index file")->required();
  classify_cmd->add_option("-k", classify_k, "retrieved chunks per query");
  classify_cmd->add_option("--max-turns", classify_flags.max_turns, "dialogue turn cap");
  classify_cmd->add_option("--dedup-threshold", classify_flags.dedup_threshold,
                           "question dedup cosine threshold");
  classify_cmd->add_flag("--audit", classify_audit, "include the prompt and transcript in output");
  classify_cmd->add_option("--runs-dir", classify_runs_dir, "persist a run record here");

  // vqa
  auto* vqa_cmd = app.add_subcommand("vqa", "run the dialogue for one meme");
  std::string vqa_meme, vqa_runs_dir;
  DialogueFlags vqa_flags;
  vqa_cmd->add_option("meme", vqa_meme, "meme JSON file")->required();
  vqa_cmd->add_option("--max-turns", vqa_flags.max_turns, "dialogue turn cap");
  vqa_cmd->add_option("--dedup-threshold", vqa_flags.dedup_threshold,
                      "question dedup cosine threshold");
  vqa_cmd->add_option("--runs-dir", vqa_runs_dir, "persist a run record here");

  // eval
  auto* eval_cmd = app.add_subcommand("eval", "score a labeled dataset under pipeline variants");
  std::string eval_dataset, eval_index, eval_report_dir, eval_runs_dir;
  std::vector<std::string> eval_variants{"explanation", "sub_label", "sub_label_vqa"};
  int eval_k = 5;
  DialogueFlags eval_flags;
  eval_cmd->add_option("dataset", eval_dataset, "labeled dataset JSONL")->required();
  eval_cmd->add_option("--index", eval_index, "index file")->required();
  eval_cmd->add_option("--variants", eval_variants, "variants to run")
      ->delimiter(',')
      ->check(variant_check);
  eval_cmd->add_option("-k", eval_k, "retrieved chunks per query");
  eval_cmd->add_option("--max-turns", eval_flags.max_turns, "dialogue turn cap");
  eval_cmd->add_option("--dedup-threshold", eval_flags.dedup_threshold,
                       "question dedup cosine threshold");
  eval_cmd->add_option("--report-dir", eval_report_dir, "write eval_report.{json,txt} here");
  eval_cmd->add_option("--runs-dir", eval_runs_dir, "persist a run record here");

  // serve
  auto* serve_cmd = app.add_subcommand("serve", "run the classification HTTP service");
  std::string serve_config;
  serve_cmd->add_option("config", serve_config, "service config JSON")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  }

  const std::string command_line = join_args(argc, argv);
  const int64_t started = now_ms();

  try {
    if (*ingest_cmd) {
      const BackendSettings settings = load_settings(config_path);
      const BackendSet backends(settings.configs, settings.context);
      std::vector<MemeRecord> records = load_dataset(ingest_input);
      const ValidationSummary summary = validate_dataset(records);
      records = enrich_dataset(std::move(records), backends);
      write_dataset_jsonl(records, ingest_output);

      json out;
      out["n"] = summary.n;
      out["hateful"] = summary.hateful;
      out["non_hateful"] = summary.non_hateful;
      out["unlabeled"] = summary.unlabeled;
      out["empty_image_refs"] = summary.empty_image_refs;
      out["duplicate_ids"] = json::object();
      for (const auto& [id, count] : summary.duplicate_ids) out["duplicate_ids"][id] = count;
      out["output"] = ingest_output;
      std::cout << out.dump() << "\n";
      return 0;
    }

    if (*index_cmd) {
      const BackendSettings settings = load_settings(config_path);
      const BackendSet backends(settings.configs, settings.context);
      std::vector<KnowledgeEntry> entries = load_knowledge_jsonl(build_input, backends);
      const PartitionedIndex index = build_index(std::move(entries), backends.embed_dim());
      save_index(index, build_output);

      json out;
      out["entries"] = index.total_count();
      out["dimension"] = index.dimension();
      out["partitions"] = json::object();
      for (const auto& [sub, list] : index.partitions()) {
        out["partitions"][to_string(sub)] = list.size();
      }
      out["output"] = build_output;
      std::cout << out.dump() << "\n";
      return 0;
    }

    if (*classify_cmd) {
      const BackendSettings settings = load_settings(config_path);
      const BackendSet backends(settings.configs, settings.context);
      const PartitionedIndex index = load_index(classify_index);
      DetectorConfig detector;
      detector.k = classify_k;
      detector.vqa = make_vqa_config(settings, classify_flags);
      const VariantKind variant = *variant_from_string(classify_variant);

      const MemeRecord meme = parse_dataset_line(read_file(classify_meme));
      const ClassifyDetail detail = classify_detailed(meme, index, backends, detector, variant);

      json out = verdict_to_json(detail.verdict);
      if (classify_audit) {
        out["prompt"] = detail.prompt_text;
        if (detail.transcript) out["transcript"] = format_transcript(*detail.transcript);
      }
      if (!classify_runs_dir.empty()) {
        persist_command_run(classify_runs_dir, command_line,
                            config_snapshot_json(settings.configs, backends.embed_dim(), detector,
                                                 variant, classify_index),
                            {out}, started);
      }
      std::cout << out.dump() << "\n";
      return 0;
    }

    if (*vqa_cmd) {
      const BackendSettings settings = load_settings(config_path);
      const BackendSet backends(settings.configs, settings.context);
      DetectorConfig detector;
      detector.vqa = make_vqa_config(settings, vqa_flags);

      MemeRecord meme = parse_dataset_line(read_file(vqa_meme));
      meme = enrich_meme(std::move(meme), backends);
      const DialogueTranscript transcript = run_dialogue(meme, backends, detector.vqa);

      json out;
      out["meme_id"] = transcript.meme_id;
      out["stop_reason"] = to_string(transcript.stop_reason);
      out["turns"] = json::array();
      for (const QAPair& turn : transcript.turns) {
        out["turns"].push_back({{"turn", turn.turn_index},
                                {"question", turn.question},
                                {"answer", turn.answer},
                                {"signals", turn.flagged_signals}});
      }
      out["text"] = format_transcript(transcript);
      if (!vqa_runs_dir.empty()) {
        persist_command_run(vqa_runs_dir, command_line,
                            config_snapshot_json(settings.configs, backends.embed_dim(), detector,
                                                 std::nullopt, ""),
                            {out}, started);
      }
      std::cout << out.dump() << "\n";
      return 0;
    }

    if (*eval_cmd) {
      const BackendSettings settings = load_settings(config_path);
      const BackendSet backends(settings.configs, settings.context);
      const PartitionedIndex index = load_index(eval_index);

      EvalConfig config;
      config.detector.k = eval_k;
      config.detector.vqa = make_vqa_config(settings, eval_flags);
      for (const std::string& name : eval_variants) {
        config.variants.push_back(*variant_from_string(name));
      }
      config.report_dir = eval_report_dir;

      const std::vector<MemeRecord> dataset = load_dataset(eval_dataset);
      const EvalOutcome outcome = run_eval(dataset, index, backends, config);

      for (const std::string& failure : outcome.failures) {
        std::cerr << "warning: " << failure << "\n";
      }
      std::cerr << outcome.table_text;
      if (!eval_runs_dir.empty()) {
        json snapshot = config_snapshot_json(settings.configs, backends.embed_dim(),
                                             config.detector, std::nullopt, eval_index);
        snapshot["variants"] = eval_variants;
        std::vector<json> outputs(outcome.json_report.begin(), outcome.json_report.end());
        persist_command_run(eval_runs_dir, command_line, snapshot, std::move(outputs), started);
      }
      std::cout << outcome.json_report.dump() << "\n";
      return 0;
    }

    if (*serve_cmd) {
      ServiceConfig service_config = load_service_config(serve_config);
      if (service_config.backend_config_path.empty() && !config_path.empty()) {
        service_config.backend_config_path = config_path;
      }
      Service service(std::move(service_config));
      const int port = service.start();

      std::signal(SIGINT, handle_stop_signal);
      std::signal(SIGTERM, handle_stop_signal);
      std::cout << json{{"status", "serving"}, {"port", port}}.dump() << "\n" << std::flush;
      while (!g_stop_requested) {
        std::this_thread::sleep_for(std::chrono::milliseconds(100));
      }
      service.stop();
      return 0;
    }
  } catch (const Error& e) {
    std::cerr << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
