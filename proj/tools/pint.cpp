// pint: corpus curation, review sessions, tokenizer surgery and model math.

#include <csignal>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "pint/clean.hpp"
#include "pint/corpus.hpp"
#include "pint/interface.hpp"
#include "pint/mix.hpp"
#include "pint/modelmath.hpp"
#include "pint/review.hpp"
#include "pint/tokkit.hpp"

namespace fs = std::filesystem;
using namespace pint;

namespace {

void write_documents(const fs::path& path, const std::vector<Document>& docs) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write " + path.string());
  for (const auto& d : docs) out << to_line(d) << '\n';
  if (!out) throw Error("write failed: " + path.string());
}

void report_skipped(const corpus::ReadResult& read) {
  for (const auto& e : read.errors) std::cerr << e.file.string() << ":" << e.line << ": skipped: " << e.message << '\n';
}

tok::TokenizerDef manifest_tokenizer(const corpus::Manifest& m) {
  if (m.tokenizer.empty()) return tok::TokenizerDef::byte_level();
  return tok::load_tokenizer(m.tokenizer).def;
}

std::vector<fs::path> jsonl_inputs(const fs::path& in) {
  if (!fs::is_directory(in)) return {in};
  std::vector<fs::path> files;
  for (const auto& e : fs::directory_iterator(in))
    if (e.is_regular_file() && e.path().extension() == ".jsonl") files.push_back(e.path());
  std::sort(files.begin(), files.end());
  return files;
}

std::string fixed(double v, int digits) {
  std::ostringstream out;
  out.setf(std::ios::fixed);
  out.precision(digits);
  out << v;
  return out.str();
}

std::optional<std::uint64_t> parse_n(const std::string& n) {
  if (n == "auto") return std::nullopt;
  std::size_t used = 0;
  unsigned long long v = 0;
  try {
    v = std::stoull(n, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != n.size() || n.empty() || n[0] == '-') throw ValidationError("--n must be 'auto' or a non-negative integer");
  return v;
}

api::Service* g_service = nullptr;

void on_signal(int) {
  if (g_service) g_service->stop();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"pint: corpus curation and tokenizer toolkit"};
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all", "Show help for every subcommand");

  std::optional<std::string> data_flag;
  auto add_data = [&](CLI::App* sub) {
    sub->add_option("--data", data_flag, "Data root (default: $PINT_DATA_DIR, else ./data)");
  };

  // ingest
  auto* ingest = app.add_subcommand("ingest", "Read a dataset's inputs, order them and apply its token budget");
  std::string manifest_path, dataset, out_dir;
  std::optional<std::uint64_t> budget;
  ingest->add_option("--manifest", manifest_path, "Manifest file")->required();
  ingest->add_option("--dataset", dataset, "Dataset name")->required();
  ingest->add_option("--out", out_dir, "Output directory; writes <dataset>.jsonl")->required();
  ingest->add_option("--budget", budget, "Token budget (overrides the manifest)");

  // clean
  auto* clean_cmd = app.add_subcommand("clean", "Apply a dataset's cleaning rules");
  std::string in_dir, report_path;
  clean_cmd->add_option("--manifest", manifest_path, "Manifest file")->required();
  clean_cmd->add_option("--dataset", dataset, "Dataset name")->required();
  clean_cmd->add_option("--in", in_dir, "Directory holding <dataset>.jsonl")->required();
  clean_cmd->add_option("--out", out_dir, "Output directory; writes <dataset>.jsonl")->required();
  clean_cmd->add_option("--report", report_path, "Per-rule drop counts");

  // sample
  auto* sample = app.add_subcommand("sample", "Draw a review sample and create its session");
  std::string n_arg = "auto", kind_arg = "pretrain_rubric", coverage_arg = "every_judge";
  std::uint64_t seed = 0;
  std::vector<std::string> judges{"judge"};
  sample->add_option("--dataset", dataset, "Dataset name under <data>/datasets")->required();
  sample->add_option("--n", n_arg, "Sample size, or 'auto'")->capture_default_str();
  sample->add_option("--seed", seed, "Random seed")->required();
  sample->add_option("--kind", kind_arg, "pretrain_rubric or finetune_hallucination")->capture_default_str();
  sample->add_option("--judge", judges, "Enrolled judge ids")->capture_default_str();
  sample->add_option("--coverage", coverage_arg, "every_judge or any_judge")->capture_default_str();
  add_data(sample);

  // score / gate
  std::string session_id;
  auto* score = app.add_subcommand("score", "Score a complete rubric session");
  score->add_option("--session", session_id, "Session id")->required();
  add_data(score);
  auto* gate = app.add_subcommand("gate", "Accept or reject a complete fine-tune session");
  gate->add_option("--session", session_id, "Session id")->required();
  add_data(gate);

  // mix
  auto* mix_cmd = app.add_subcommand("mix", "Plan the corpus mix from token counts and review scores");
  std::string counts_path, plan_path;
  std::optional<std::uint64_t> total_override;
  mix_cmd->add_option("--manifest", manifest_path, "Manifest file")->required();
  mix_cmd->add_option("--counts", counts_path, "Counts file (dataset, tokens, score per line)")->required();
  mix_cmd->add_option("--out", plan_path, "Plan file")->required();
  mix_cmd->add_option("--total", total_override, "Total token target (overrides the manifest)");

  // tok
  auto* tok_cmd = app.add_subcommand("tok", "Tokenizer utilities");
  tok_cmd->require_subcommand(1);
  auto* extend = tok_cmd->add_subcommand("extend", "Add pad, chat and reserved tokens");
  std::string tok_in, tok_out, pad = "<|pad|>", chat_preset = "standard";
  std::vector<std::string> chat_extra;
  std::size_t multiple = 64;
  bool no_pad = false;
  extend->add_option("--in", tok_in, "Input tokenizer.json")->required();
  extend->add_option("--out", tok_out, "Output tokenizer.json")->required();
  extend->add_option("--pad", pad, "Pad literal")->capture_default_str();
  extend->add_flag("--no-pad", no_pad, "Do not add a pad token");
  extend->add_option("--chat-preset", chat_preset, "'standard' (14 chat template tokens) or 'none'")->capture_default_str();
  extend->add_option("--chat", chat_extra, "Extra chat literals, appended after the preset");
  extend->add_option("--multiple", multiple, "Round the vocabulary up to this multiple")->capture_default_str();

  auto* count = tok_cmd->add_subcommand("count", "Count tokens over documents");
  std::string tokenizer_path;
  count->add_option("--tokenizer", tokenizer_path, "tokenizer.json (default: byte-level)");
  count->add_option("--in", in_dir, "A .jsonl file or a directory of them")->required();

  auto* compare = tok_cmd->add_subcommand("compare", "Percent fewer tokens produced by B than A");
  std::uint64_t count_a = 0, count_b = 0;
  compare->add_option("--a", count_a, "Token count under tokenizer A")->required();
  compare->add_option("--b", count_b, "Token count under tokenizer B")->required();

  auto* bpc_cmd = tok_cmd->add_subcommand("bpc", "Bits per character from per-token losses");
  std::string losses_path;
  std::uint64_t chars = 0;
  bpc_cmd->add_option("--losses", losses_path, "File of per-token losses in bits, whitespace separated")->required();
  bpc_cmd->add_option("--chars", chars, "Character count")->required();

  // params / lr / duration
  std::string config_path;
  auto* params = app.add_subcommand("params", "Exact parameter count of a model config");
  std::string preset;
  params->add_option("--config", config_path, "Config file with a 'model' section");
  params->add_option("--preset", preset, "Built-in config: pints-1.5b");

  auto* lr = app.add_subcommand("lr", "Learning rate at a step, or the whole schedule as CSV");
  std::optional<std::uint64_t> step;
  bool csv = false;
  lr->add_option("--config", config_path, "Config file with a 'schedule' section")->required();
  lr->add_option("--step", step, "Step");
  lr->add_flag("--csv", csv, "Print step,lr for every step");

  auto* duration = app.add_subcommand("duration", "Training time from token count and throughput");
  std::uint64_t tokens = 0, gpus = 0;
  double throughput = 0.0;
  duration->add_option("--tokens", tokens, "Total tokens")->required();
  duration->add_option("--gpus", gpus, "GPU count")->required();
  duration->add_option("--throughput", throughput, "Tokens per GPU per second")->required();

  // serve
  auto* serve = app.add_subcommand("serve", "Run the review HTTP service");
  int port = 8080;
  std::string host = "127.0.0.1";
  std::optional<std::string> ui_dir;
  serve->add_option("--port", port, "Port (0 picks a free one)")->capture_default_str();
  serve->add_option("--host", host, "Bind address")->capture_default_str();
  serve->add_option("--ui", ui_dir, "Directory of built UI assets to serve at /");
  add_data(serve);

  CLI11_PARSE(app, argc, argv);

  try {
    if (*ingest) {
      const auto manifest = corpus::load_manifest(manifest_path);
      const auto& spec = manifest.at(dataset);
      auto read = corpus::read_documents(spec);
      report_skipped(read);
      const auto limit = budget ? budget : spec.token_budget;
      std::size_t keep = read.documents.size();
      std::uint64_t total = 0;
      if (limit) {
        const auto def = manifest_tokenizer(manifest);
        const auto sub = corpus::subsample_by_budget(read.documents, *limit, tok::make_counter(def));
        keep = sub.count;
        total = sub.total;
      }
      read.documents.resize(keep);
      const auto out = fs::path(out_dir) / (dataset + ".jsonl");
      write_documents(out, read.documents);
      std::cout << "dataset " << dataset << ": " << keep << " documents written to " << out.string() << ", "
                << read.skipped() << " skipped";
      if (limit) std::cout << ", " << total << " tokens (budget " << *limit << ")";
      std::cout << '\n';
    } else if (*clean_cmd) {
      const auto manifest = corpus::load_manifest(manifest_path);
      const auto& spec = manifest.at(dataset);
      corpus::DatasetSpec staged = spec;
      staged.inputs = {fs::path(in_dir) / (dataset + ".jsonl")};
      staged.order = corpus::Order::file_order;
      auto read = corpus::read_documents(staged);
      report_skipped(read);
      const auto in_count = read.documents.size();
      auto result = clean::clean_batch(std::move(read.documents), spec.cleaning_rules);
      const auto out = fs::path(out_dir) / (dataset + ".jsonl");
      write_documents(out, result.kept);

      std::ostringstream report;
      report << "dataset " << dataset << "\n";
      report << "input " << in_count << "\n";
      report << "kept " << result.kept.size() << "\n";
      report << "skipped_malformed " << read.skipped() << "\n";
      for (const auto& rule : spec.cleaning_rules) {
        const auto name = std::string(clean::rule_name(rule.kind));
        auto it = result.dropped.find(name);
        report << "dropped " << name << " " << (it == result.dropped.end() ? 0 : it->second) << "\n";
        if (it != result.dropped.end()) result.dropped.erase(it);
      }
      if (report_path.empty()) {
        std::cout << report.str();
      } else {
        std::ofstream(report_path, std::ios::binary | std::ios::trunc) << report.str();
        std::cout << "dataset " << dataset << ": kept " << result.kept.size() << " of " << in_count << '\n';
      }
    } else if (*sample) {
      api::SessionStore store(api::data_root(data_flag));
      api::CreateRequest req;
      req.dataset = dataset;
      auto kind = review::session_kind_from_string(kind_arg);
      if (!kind) throw ValidationError("--kind must be pretrain_rubric or finetune_hallucination");
      req.kind = *kind;
      auto coverage = review::coverage_from_string(coverage_arg);
      if (!coverage) throw ValidationError("--coverage must be every_judge or any_judge");
      req.coverage = *coverage;
      req.n = parse_n(n_arg);
      req.seed = seed;
      req.judges = judges;
      auto result = store.create_session(req);
      for (const auto& w : result.warnings) std::cerr << "warning: " << w << '\n';
      const auto summary = store.summary(result.id);
      std::cout << "session " << result.id << (result.created ? "" : " (existing)") << '\n';
      for (const auto& id : summary["sample_ids"]) std::cout << id.get<std::string>() << '\n';
    } else if (*score) {
      api::SessionStore store(api::data_root(data_flag));
      const auto session = store.replay(session_id);
      const auto s = review::score_dataset(session);
      std::cout << "session " << session_id << "\n"
                << "dataset " << s.dataset << "\n"
                << "samples " << s.n << "\n"
                << "mean_score " << fixed(s.mean_score, 4) << "\n"
                << "expository_rate " << fixed(s.yes_rates.expository, 4) << "\n"
                << "toxic_rate " << fixed(s.yes_rates.toxic, 4) << "\n"
                << "clean_rate " << fixed(s.yes_rates.clean, 4) << "\n";
    } else if (*gate) {
      api::SessionStore store(api::data_root(data_flag));
      const auto g = review::finetune_gate(store.replay(session_id));
      std::cout << "session " << session_id << "\n"
                << "flagged " << g.flagged << " of " << g.reviewed << " (" << fixed(100.0 * g.flagged_fraction(), 2)
                << "%)\n"
                << "decision " << (g.accept ? "accept" : "reject") << "\n";
    } else if (*mix_cmd) {
      const auto manifest = corpus::load_manifest(manifest_path);
      std::map<std::string, mix::Available> available;
      std::vector<std::pair<std::string, std::uint64_t>> order;
      for (const auto& r : mix::read_counts(counts_path)) {
        const auto& spec = manifest.at(r.dataset);
        if (!available.emplace(r.dataset, mix::Available{spec.role, r.tokens, r.score}).second)
          throw ValidationError("dataset '" + r.dataset + "' appears twice in " + counts_path);
        order.emplace_back(r.dataset, r.tokens);
      }
      const auto plan = mix::plan_mix(available, manifest.target_proportions,
                                      total_override.value_or(manifest.total_token_target));
      for (const auto& w : plan.warnings) std::cerr << "warning: " << w << '\n';
      mix::write_plan(plan, available, plan_path);

      std::vector<std::pair<std::string, std::uint64_t>> selected;
      std::map<std::string, mix::Role> roles;
      for (const auto& [name, t] : order)
        if (auto it = plan.allocations.find(name); it != plan.allocations.end() && it->second > 0) {
          selected.emplace_back(name, it->second);
          roles[name] = available.at(name).role;
        }
      if (plan.grand_total > 0) std::cout << mix::format_report(mix::report_proportions(selected, roles));
    } else if (*tok_cmd) {
      if (*extend) {
        auto file = tok::load_tokenizer(tok_in);
        std::vector<std::string> chat;
        if (chat_preset == "standard")
          chat.assign(tok::kChatTemplateTokens.begin(), tok::kChatTemplateTokens.end());
        else if (chat_preset != "none")
          throw ValidationError("--chat-preset must be 'standard' or 'none'");
        chat.insert(chat.end(), chat_extra.begin(), chat_extra.end());
        auto def = tok::extend_vocab(file.def, no_pad ? std::nullopt : std::optional<std::string>(pad), chat, multiple);
        tok::save_tokenizer(def, tok_out, file.raw);
        std::cout << "size " << def.size() << " (base " << def.base_size() << ")\n"
                  << "pad " << tok::count_specials(def, tok::SpecialKind::pad) - tok::count_specials(file.def, tok::SpecialKind::pad) << "\n"
                  << "chat " << chat.size() << "\n"
                  << "reserved " << tok::count_specials(def, tok::SpecialKind::reserved) - tok::count_specials(file.def, tok::SpecialKind::reserved) << "\n";
      } else if (*count) {
        const auto def = tokenizer_path.empty() ? tok::TokenizerDef::byte_level() : tok::load_tokenizer(tokenizer_path).def;
        corpus::DatasetSpec spec;
        spec.name = fs::path(in_dir).stem().string();
        spec.inputs = jsonl_inputs(in_dir);
        auto read = corpus::read_documents(spec);
        report_skipped(read);
        std::cout << tok::count_tokens(def, read.documents) << '\n';
      } else if (*compare) {
        std::cout << tok::compare_counts_2dp(count_a, count_b) << '\n';
      } else if (*bpc_cmd) {
        std::ifstream in(losses_path);
        if (!in) throw Error("cannot open " + losses_path);
        tok::BpcInput input;
        input.char_count = chars;
        std::string word;
        while (in >> word) {
          std::size_t used = 0;
          double v = 0;
          try {
            v = std::stod(word, &used);
          } catch (const std::exception&) {
            used = 0;
          }
          if (used != word.size()) throw ParseError(losses_path + ": not a number: '" + word + "'");
          input.token_losses.push_back(v);
        }
        std::cout << fixed(tok::bpc(input), 6) << '\n';
      }
    } else if (*params) {
      model::ModelConfig cfg;
      if (!preset.empty()) {
        if (preset != "pints-1.5b") throw ValidationError("unknown preset '" + preset + "'");
        cfg = model::ModelConfig::pints_1_5b();
      } else if (!config_path.empty()) {
        auto file = model::load_config(config_path);
        if (!file.model) throw ValidationError(config_path + " has no 'model' section");
        cfg = *file.model;
      } else {
        throw ValidationError("give --config or --preset");
      }
      std::cout << model::param_count(cfg) << '\n';
    } else if (*lr) {
      auto file = model::load_config(config_path);
      if (!file.schedule) throw ValidationError(config_path + " has no 'schedule' section");
      if (csv) {
        std::cout << "step,lr\n";
        char buf[64];
        for (std::uint64_t s = 0; s <= file.schedule->total_steps; ++s) {
          std::snprintf(buf, sizeof buf, "%llu,%.9e\n", static_cast<unsigned long long>(s), model::lr_at(*file.schedule, s));
          std::cout << buf;
        }
      } else {
        if (!step) throw ValidationError("give --step or --csv");
        char buf[64];
        std::snprintf(buf, sizeof buf, "%.9e", model::lr_at(*file.schedule, *step));
        std::cout << buf << '\n';
      }
    } else if (*duration) {
      const double seconds = model::duration_estimate(tokens, gpus, throughput);
      std::cout << "seconds " << fixed(seconds, 1) << "\n"
                << "days " << fixed(seconds / 86400.0, 2) << "\n"
                << "duration " << model::format_duration(seconds) << "\n";
    } else if (*serve) {
      api::SessionStore store(api::data_root(data_flag));
      api::ServeOptions options;
      options.host = host;
      options.port = port;
      if (ui_dir) options.ui_dir = *ui_dir;
      api::Service service(store, options);
      const int bound = service.bind();
      g_service = &service;
      std::signal(SIGINT, on_signal);
      std::signal(SIGTERM, on_signal);
      std::cout << "listening on http://" << host << ":" << bound << " (data " << store.root().string() << ")"
                << std::endl;
      service.run();
      g_service = nullptr;
    }
  } catch (const std::exception& e) {
    const auto err = api::to_api_error(e);
    std::cerr << "error: " << api::to_string(err.code()) << ": " << err.what() << '\n';
    return 1;
  }
  return 0;
}
