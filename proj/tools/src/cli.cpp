#include "obj2text_tools/cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <memory>
#include <optional>
#include <sstream>

#include <nlohmann/json.hpp>

#include "obj2text/baseline.hpp"
#include "obj2text/checkpoint.hpp"
#include "obj2text/errors.hpp"
#include "obj2text/gradcheck.hpp"
#include "obj2text/json_io.hpp"
#include "obj2text/service.hpp"
#include "obj2text/synthetic.hpp"
#include "obj2text/training.hpp"
#include "obj2text_tools/http_server.hpp"

namespace obj2text::tools {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string read_text(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open " + path.string());
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

json read_json(const fs::path& path) {
  json j = json::parse(read_text(path), nullptr, false);
  if (j.is_discarded()) throw ParseError(path.string() + ": not valid JSON");
  return j;
}

// Writes next to the target and renames, so a failure never leaves a
// partial file at `path`.
void write_atomic(const fs::path& path, const std::string& content) {
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw InputError("cannot open " + tmp.string() + " for writing");
    out << content;
    out.close();
    if (!out) {
      fs::remove(tmp);
      throw InputError("write to " + tmp.string() + " failed");
    }
  }
  fs::rename(tmp, path);
}

std::span<const CaptionedExample> pick_split(const PreparedData& data, const std::string& split,
                                             std::vector<CaptionedExample>& all) {
  if (split == "train") return data.train;
  if (split == "val") return data.val;
  if (split == "test") return data.test;
  all = data.train;
  all.insert(all.end(), data.val.begin(), data.val.end());
  all.insert(all.end(), data.test.begin(), data.test.end());
  return all;
}

json candidates_json(std::span<const CaptionedExample> examples,
                     std::span<const std::string> candidates) {
  json out = json::array();
  for (std::size_t i = 0; i < examples.size(); ++i) {
    out.push_back({{"id", examples[i].id},
                   {"caption", candidates[i]},
                   {"references", examples[i].references}});
  }
  return out;
}

Vocabulary read_vocabulary(const fs::path& path) {
  const json j = read_json(path);
  try {
    return Vocabulary(j.at("words").get<std::vector<std::string>>());
  } catch (const json::exception& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
}

// Line-delimited {"id", "caption"} records.
std::map<std::string, std::string> read_candidates(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open " + path.string());
  std::map<std::string, std::string> out;
  std::string line;
  for (std::size_t n = 1; std::getline(in, line); ++n) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const json j = json::parse(line, nullptr, false);
    if (j.is_discarded() || !j.is_object() || !j.contains("id") || !j.contains("caption") ||
        !j["id"].is_string() || !j["caption"].is_string()) {
      throw ParseError(path.string() + ":" + std::to_string(n) + ": expected {\"id\", \"caption\"}");
    }
    out[j["id"].get<std::string>()] = j["caption"].get<std::string>();
  }
  return out;
}

void print_history(std::ostream& err, const HistoryEntry& e) {
  err << "iter " << e.iteration << std::fixed << std::setprecision(4)
      << "  train_loss " << e.train_loss << "  val_loss " << e.val_loss << "  val_cider "
      << e.val_metrics.cider << "  val_bleu4 " << e.val_metrics.bleu[3] << '\n'
      << std::defaultfloat;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Caption object layouts with an LSTM encoder-decoder", "obj2text"};
  app.require_subcommand(1);

  // gen-data
  auto* gen = app.add_subcommand("gen-data", "Write a synthetic layout/caption corpus");
  std::uint64_t gen_seed = 0;
  std::size_t gen_n = 2000;
  std::size_t gen_aux = 0;
  std::string gen_out;
  gen->add_option("--seed", gen_seed, "Generator seed")->required();
  gen->add_option("--n", gen_n, "Number of scenes")->required();
  gen->add_option("--out", gen_out, "Output JSONL file")->required();
  gen->add_option("--aux-dim", gen_aux, "Width of the template one-hot aux features (0 = none)");

  // build-vocab
  auto* vocab = app.add_subcommand("build-vocab", "Build the word vocabulary of a corpus");
  std::string vocab_data, vocab_out;
  std::size_t vocab_min = 5;
  std::uint64_t vocab_split_seed = 0;
  vocab->add_option("--data", vocab_data, "Corpus JSONL")->required()->check(CLI::ExistingFile);
  vocab->add_option("--min-count", vocab_min, "Minimum token frequency");
  vocab->add_option("--out", vocab_out, "Output JSON file")->required();
  vocab->add_option("--split-seed", vocab_split_seed, "Seed of the train/val/test split");

  // train
  auto* tr = app.add_subcommand("train", "Train a model");
  std::string tr_data, tr_config, tr_out, tr_best, tr_history, tr_vocab, tr_resume;
  bool tr_no_loc = false;
  bool tr_no_counts = false;
  std::optional<std::size_t> tr_aux, tr_iters;
  std::optional<std::uint64_t> tr_seed;
  tr->add_option("--data", tr_data, "Corpus JSONL")->required()->check(CLI::ExistingFile);
  tr->add_option("--config", tr_config, "Training config JSON")->check(CLI::ExistingFile);
  tr->add_option("--out-checkpoint", tr_out, "Final checkpoint")->required();
  tr->add_option("--best-checkpoint", tr_best, "Checkpoint with the best validation CIDEr");
  tr->add_option("--history", tr_history, "Validation history JSON");
  tr->add_option("--vocab", tr_vocab, "Vocabulary JSON from build-vocab")->check(CLI::ExistingFile);
  tr->add_option("--resume", tr_resume, "Continue from a checkpoint")->check(CLI::ExistingFile);
  tr->add_flag("--no-locations", tr_no_loc, "Encoder without box locations");
  tr->add_flag("--no-counts", tr_no_counts, "Keep one object per category (with --no-locations)");
  tr->add_option("--aux-dim", tr_aux, "Fuse aux features of this width");
  tr->add_option("--max-iterations", tr_iters, "Override the iteration budget");
  tr->add_option("--seed", tr_seed, "Override the training seed");

  // caption
  auto* cap = app.add_subcommand("caption", "Caption one layout");
  std::string cap_ckpt, cap_layout;
  std::optional<std::size_t> cap_beam;
  bool cap_json = false;
  cap->add_option("--checkpoint", cap_ckpt, "Checkpoint")->required()->check(CLI::ExistingFile);
  cap->add_option("--layout-json", cap_layout, "Caption request JSON")
      ->required()
      ->check(CLI::ExistingFile);
  cap->add_option("--beam-size", cap_beam, "Beam size (default: request value, else 2)");
  cap->add_flag("--json", cap_json, "Print the full response JSON");

  // evaluate
  auto* ev = app.add_subcommand("evaluate", "Score a model or candidate captions on a split");
  std::string ev_ckpt, ev_cands, ev_data, ev_split = "test", ev_out;
  std::optional<std::size_t> ev_beam, ev_max_len;
  std::uint64_t ev_split_seed = 0;
  auto* ev_ckpt_opt =
      ev->add_option("--checkpoint", ev_ckpt, "Checkpoint")->check(CLI::ExistingFile);
  auto* ev_cands_opt = ev->add_option("--candidates", ev_cands, "JSONL of {id, caption} records")
                           ->check(CLI::ExistingFile);
  ev_ckpt_opt->excludes(ev_cands_opt);
  ev->add_option("--data", ev_data, "Corpus JSONL")->required()->check(CLI::ExistingFile);
  ev->add_option("--split", ev_split, "train, val, test or all")
      ->check(CLI::IsMember({"train", "val", "test", "all"}));
  ev->add_option("--out-report", ev_out, "Report JSON")->required();
  ev->add_option("--beam-size", ev_beam, "Beam size (default: checkpoint setting)");
  ev->add_option("--max-len", ev_max_len, "Generated tokens per caption, EOS included");
  ev->add_option("--split-seed", ev_split_seed, "Split seed for --candidates");

  // grad-check
  auto* gc = app.add_subcommand("grad-check", "Finite-difference check of every tensor");
  std::uint64_t gc_seed = 0;
  gc->add_option("--seed", gc_seed, "Seed of the random model and batch");

  // serve
  auto* sv = app.add_subcommand("serve", "HTTP caption service");
  std::string sv_ckpt, sv_host = "127.0.0.1";
  std::vector<std::string> sv_ablated;
  int sv_port = 8080;
  sv->add_option("--checkpoint", sv_ckpt, "Default model")->required()->check(CLI::ExistingFile);
  sv->add_option("--checkpoint-ablated", sv_ablated, "Additional (lesioned) models")
      ->check(CLI::ExistingFile);
  sv->add_option("--port", sv_port, "Port");
  sv->add_option("--host", sv_host, "Bind address");

  // nn-baseline
  auto* nn = app.add_subcommand("nn-baseline", "Nearest-neighbour caption retrieval baseline");
  std::string nn_data, nn_out, nn_split = "test";
  std::uint64_t nn_split_seed = 0;
  nn->add_option("--data", nn_data, "Corpus JSONL")->required()->check(CLI::ExistingFile);
  nn->add_option("--out", nn_out, "Report JSON")->required();
  nn->add_option("--split", nn_split, "Split to caption")
      ->check(CLI::IsMember({"train", "val", "test", "all"}));
  nn->add_option("--split-seed", nn_split_seed, "Seed of the train/val/test split");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err);
  }

  try {
    if (gen->parsed()) {
      SyntheticConfig config;
      config.aux_dim = gen_aux;
      const auto raw = generate_synthetic(gen_seed, gen_n, config);
      std::ostringstream os;
      write_dataset(os, raw);
      write_atomic(gen_out, os.str());
      err << "wrote " << raw.size() << " examples to " << gen_out << '\n';
      return 0;
    }

    if (vocab->parsed()) {
      const auto raw = read_dataset(fs::path(vocab_data));
      const TrainConfig defaults;
      const auto split = split_indices(raw.size(), defaults.split, vocab_split_seed);
      std::vector<std::string> captions;
      for (std::size_t i : split.train)
        captions.insert(captions.end(), raw[i].captions.begin(), raw[i].captions.end());
      const Vocabulary words = build_vocabulary(captions, vocab_min);
      write_atomic(vocab_out,
                   json{{"min_count", vocab_min}, {"words", words.words()}}.dump(2) + "\n");
      err << "vocabulary: " << words.size() << " entries\n";
      return 0;
    }

    if (tr->parsed()) {
      TrainConfig config = tr_config.empty() ? TrainConfig{} : parse_train_config(read_json(tr_config));
      if (tr_no_loc) config.ablation.no_locations = true;
      if (tr_no_counts) config.ablation.no_counts = true;
      if (tr_aux) config.aux_dim = *tr_aux;
      if (tr_iters) config.max_iterations = *tr_iters;
      if (tr_seed) config.seed = *tr_seed;
      config.validate();

      const auto raw = read_dataset(fs::path(tr_data));
      std::optional<Checkpoint> resume;
      std::optional<Vocabulary> words;
      std::optional<CategoryVocabulary> categories;
      if (!tr_resume.empty()) {
        resume = load_checkpoint(fs::path(tr_resume));
        words = resume->words;
        categories = resume->categories;
      } else if (!tr_vocab.empty()) {
        words = read_vocabulary(tr_vocab);
      }
      const PreparedData data = prepare_data(raw, config, words ? &*words : nullptr,
                                             categories ? &*categories : nullptr);
      err << "train " << data.train.size() << " / val " << data.val.size() << " / test "
          << data.test.size() << " examples, vocabulary " << data.words.size() << ", model "
          << describe(config.ablation) << '\n';
      const TrainResult result = train(data, config, resume ? &*resume : nullptr,
                                       [&](const HistoryEntry& e) { print_history(err, e); });
      save_checkpoint(fs::path(tr_out), result.final_checkpoint);
      if (!tr_best.empty()) save_checkpoint(fs::path(tr_best), result.best_checkpoint);
      if (!tr_history.empty()) {
        write_atomic(tr_history, json{{"config", config}, {"history", result.history}}.dump(2) + "\n");
      }
      return 0;
    }

    if (cap->parsed()) {
      const Checkpoint ckpt = load_checkpoint(fs::path(cap_ckpt));
      const json body = read_json(cap_layout);
      CaptionRequest request = parse_caption_request(body);
      if (cap_beam) request.beam_size = *cap_beam;
      const CaptionResponse response = caption_layout(ckpt, request);
      if (cap_json) {
        out << to_json(response).dump(2) << '\n';
      } else {
        out << response.caption << '\n';
      }
      return 0;
    }

    if (ev->parsed()) {
      if (ev_ckpt.empty() == ev_cands.empty()) {
        err << "evaluate: exactly one of --checkpoint and --candidates is required\n";
        return 2;
      }
      const auto raw = read_dataset(fs::path(ev_data));
      json report{{"split", ev_split}};
      std::vector<CaptionedExample> all;
      if (!ev_ckpt.empty()) {
        const Checkpoint ckpt = load_checkpoint(fs::path(ev_ckpt));
        const PreparedData data = prepare_data(raw, ckpt.config, &ckpt.words, &ckpt.categories);
        const auto examples = pick_split(data, ev_split, all);
        const std::size_t beam = ev_beam.value_or(ckpt.config.eval_beam_size);
        const std::size_t max_len = ev_max_len.value_or(ckpt.config.eval_max_len);
        const EvaluationResult result = evaluate_model(ckpt.model, ckpt.words, examples, beam, max_len);
        report["model_id"] = describe(ckpt.model.config().ablation);
        report["iteration"] = ckpt.iteration;
        report["beam_size"] = beam;
        report["examples"] = examples.size();
        report["metrics"] = result.metrics;
        report["candidates"] = candidates_json(examples, result.candidates);
      } else {
        TrainConfig config;
        config.split_seed = ev_split_seed;
        config.min_count = 1;
        const PreparedData data = prepare_data(raw, config);
        const auto examples = pick_split(data, ev_split, all);
        const auto given = read_candidates(ev_cands);
        std::vector<std::string> candidates;
        for (const auto& ex : examples) {
          auto it = given.find(ex.id);
          if (it == given.end()) throw InputError(ev_cands + ": no caption for example " + ex.id);
          candidates.push_back(it->second);
        }
        report["examples"] = examples.size();
        report["metrics"] = score_captions(candidates, examples);
        report["candidates"] = candidates_json(examples, candidates);
      }
      write_atomic(ev_out, report.dump(2) + "\n");
      out << report["metrics"].dump() << '\n';
      return 0;
    }

    if (gc->parsed()) {
      bool ok = true;
      for (const auto& r : model_gradient_suite(gc_seed)) {
        const bool pass = r.relative_error < 1e-4;
        ok = ok && pass;
        out << (pass ? "PASS " : "FAIL ") << r.variant << ' ' << r.tensor << " rel_error "
            << r.relative_error << '\n';
      }
      return ok ? 0 : 1;
    }

    if (sv->parsed()) {
      auto service = std::make_shared<CaptionService>();
      service->add_model(std::make_shared<const Checkpoint>(load_checkpoint(fs::path(sv_ckpt))));
      for (const auto& path : sv_ablated) {
        service->add_model(std::make_shared<const Checkpoint>(load_checkpoint(fs::path(path))));
      }
      HttpServer server(service);
      const int port = server.bind(sv_host, sv_port);
      if (port < 0) {
        err << "serve: cannot bind " << sv_host << ':' << sv_port << '\n';
        return 1;
      }
      err << "serving " << service->model_ids().size() << " model(s) on http://" << sv_host << ':'
          << port << '\n';
      return server.serve() ? 0 : 1;
    }

    if (nn->parsed()) {
      TrainConfig config;
      config.split_seed = nn_split_seed;
      config.min_count = 1;
      const auto raw = read_dataset(fs::path(nn_data));
      const PreparedData data = prepare_data(raw, config);
      std::vector<CaptionedExample> all;
      const auto examples = pick_split(data, nn_split, all);
      const NearestNeighborBaseline baseline(data.train, data.categories.size());
      std::vector<std::string> candidates;
      for (const auto& ex : examples) candidates.push_back(baseline.caption(ex.layout));
      json report{{"split", nn_split}, {"model_id", "nn-baseline"}, {"examples", examples.size()}};
      report["metrics"] = score_captions(candidates, examples);
      report["candidates"] = candidates_json(examples, candidates);
      write_atomic(nn_out, report.dump(2) + "\n");
      out << report["metrics"].dump() << '\n';
      return 0;
    }
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}

}  // namespace obj2text::tools
