// Acceptance checks. Prints one PASS/FAIL line per criterion and exits
// nonzero if any fails. Tolerances are fixed here and nowhere else.

#include <httplib.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <functional>
#include <iostream>
#include <numbers>
#include <random>
#include <sstream>

#include "../support/bpe_oracle.hpp"
#include "../support/fuzz_corpus.hpp"
#include "../support/process.hpp"
#include "../support/corpus_table.hpp"
#include "../support/temp_dir.hpp"
#include "pint/clean.hpp"
#include "pint/interface.hpp"
#include "pint/mix.hpp"
#include "pint/modelmath.hpp"
#include "pint/review.hpp"
#include "pint/tokkit.hpp"

using namespace pint;
using nlohmann::json;

namespace {

constexpr double kLrRelTol = 1e-12;        // endpoint relative error
constexpr double kLrMidAbsTol = 1e-18;     // decay midpoint
constexpr double kBpcRelTol = 1e-9;        // linearity
constexpr std::int64_t kMixTolHundredths = 1;  // +-0.01 percentage points
constexpr int kRandomTrials = 1000;

// Thrown by require(); carries the first violated condition.
struct Unmet : std::runtime_error {
  using std::runtime_error::runtime_error;
};

void require(bool ok, const std::string& what) {
  if (!ok) throw Unmet(what);
}

template <typename T>
std::string str(const T& v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

int failures = 0;

void criterion(const std::string& name, const std::function<std::string()>& body) {
  std::string detail;
  bool ok = false;
  try {
    detail = body();
    ok = true;
  } catch (const std::exception& e) {
    detail = e.what();
  }
  if (!ok) ++failures;
  std::cout << (ok ? "PASS " : "FAIL ") << name << ": " << detail << std::endl;
}

std::string dataset_lines(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::string out;
  for (std::size_t i = 0; i < n; ++i) {
    std::string text;
    const std::size_t words = 1 + rng() % 60;
    for (std::size_t w = 0; w < words; ++w) text += (w ? " w" : "w") + std::to_string(rng() % 97);
    const std::string date = "20" + std::to_string(10 + rng() % 14) + "-0" + std::to_string(1 + rng() % 9) + "-1" +
                             std::to_string(rng() % 10);
    out += to_line(Document{"doc" + std::to_string(i), "acc", date, text, {}}) + "\n";
  }
  return out;
}

// Reads the "listening on http://host:port ..." line of `pint serve`.
int read_port(testkit::Child& child) {
  const std::string line = child.read_line();
  const std::string prefix = "listening on http://";
  require(line.rfind(prefix, 0) == 0, "unexpected serve banner '" + line + "'");
  const auto colon = line.find(':', prefix.size());
  return std::stoi(line.substr(colon + 1));
}

std::string get_report(int port, const std::string& id) {
  httplib::Client client("127.0.0.1", port);
  auto res = client.Get("/sessions/" + id + "/report");
  require(res && res->status == 200, "report request failed");
  return res->body;
}

}  // namespace

int main() {
  criterion("sample size", [] {
    const auto n = review::required_sample_size({1.96, 0.5, 0.05});
    require(n == 385, "got " + str(n));
    return "n = 385";
  });

  criterion("parameter count", [] {
    const auto n = model::param_count(model::ModelConfig::pints_1_5b());
    require(n == 1'565'886'464ULL, "got " + str(n));
    return "1565886464";
  });

  criterion("vocab extension", [] {
    std::vector<std::string> base;
    for (std::size_t i = 0; i < 32000; ++i) base.push_back("t" + std::to_string(i));
    tok::TokenizerDef def(base, {}, {}, {false, false});
    std::vector<std::string> chat(tok::kChatTemplateTokens.begin(), tok::kChatTemplateTokens.end());
    const auto ext = tok::extend_vocab(def, "<|pad|>", chat, 64);
    const auto reserved = tok::count_specials(ext, tok::SpecialKind::reserved);
    require(ext.size() == 32064, "size " + str(ext.size()));
    require(reserved == 49, "reserved " + str(reserved));
    require(ext.size() % 64 == 0, "size not a multiple of 64");
    require(tok::count_specials(ext, tok::SpecialKind::chat) == 14, "chat tokens");
    require(tok::count_specials(ext, tok::SpecialKind::pad) == 1, "pad token");
    return "size 32064, 49 reserved";
  });

  criterion("token reduction", [] {
    const auto s = tok::compare_counts_2dp(24'131'968'012ULL, 23'261'356'142ULL);
    require(s == "3.61", "got " + s);
    return "3.61";
  });

  criterion("mix report", [] {
    std::vector<std::pair<std::string, std::uint64_t>> counts;
    std::map<std::string, corpus::Role> roles;
    for (const auto& r : testkit::corpus_table()) {
      counts.emplace_back(r.name, r.tokens);
      roles[r.name] = r.role;
    }
    const auto report = mix::report_proportions(counts, roles);
    auto dataset = [&](const std::string& name) {
      for (const auto& r : report.datasets)
        if (r.name == name) return r.hundredths;
      throw Unmet("missing row " + name);
    };
    auto role = [&](const std::string& name) {
      for (const auto& r : report.roles)
        if (r.name == name) return r.hundredths;
      throw Unmet("missing role " + name);
    };
    const std::vector<std::tuple<std::string, std::int64_t, std::int64_t>> checks{
        {"ArXiv", dataset("ArXiv"), 1731},
        {"Wikipedia", dataset("Wikipedia"), 964},
        {"Falcon-refinedweb", dataset("Falcon-refinedweb"), 4007},
        {"Starcoder", dataset("Starcoder"), 2213},
        {"textbook subtotal", role("textbook"), 3780}};
    for (const auto& [name, got, want] : checks)
      require(std::abs(got - want) <= kMixTolHundredths, name + " got " + str(got) + " hundredths, want " + str(want));
    return "17.31 9.64 40.07 22.13 subtotal 37.80";
  });

  criterion("LR schedule", [] {
    const model::ScheduleConfig cfg{4.0e-4, 4.0e-5, 2000, 54'305};
    require(model::lr_at(cfg, 2000) == 4.0e-4, "peak " + str(model::lr_at(cfg, 2000)));
    const double end = model::lr_at(cfg, cfg.total_steps);
    require(std::abs(end - 4.0e-5) / 4.0e-5 < kLrRelTol, "end " + str(end));
    // The midpoint needs an even decay length to land on an integer step.
    const model::ScheduleConfig even{4.0e-4, 4.0e-5, 2000, 54'302};
    const double mid = model::lr_at(even, 2000 + (54'302 - 2000) / 2);
    require(std::abs(mid - 2.2e-4) <= kLrMidAbsTol, "midpoint " + str(mid));

    std::mt19937_64 rng(2024);
    std::uniform_real_distribution<double> lr(1e-6, 1e-2), frac(0.0, 1.0);
    for (int t = 0; t < 200; ++t) {
      model::ScheduleConfig c{lr(rng), 0.0, 0, 2 + rng() % 5000};
      c.min_lr = c.max_lr * frac(rng);
      c.warmup_steps = 1 + rng() % (c.total_steps - 1);
      const double peak = model::lr_at(c, c.warmup_steps);
      require(peak == c.max_lr, "discontinuous at warmup boundary, trial " + str(t));
      // Cosine slope is zero at the start of decay: the first step moves by at most
      // (max - min) * pi^2 / (4 * D^2) for a decay length D.
      const double d = static_cast<double>(c.total_steps - c.warmup_steps);
      const double first_drop = peak - model::lr_at(c, c.warmup_steps + 1);
      require(first_drop <= (c.max_lr - c.min_lr) * std::numbers::pi * std::numbers::pi / (4 * d * d) + 1e-15 * c.max_lr,
              "jump after warmup, trial " + str(t));
      double prev = peak;
      for (std::uint64_t s = c.warmup_steps + 1; s <= c.total_steps; ++s) {
        const double cur = model::lr_at(c, s);
        require(cur <= prev, "increase at step " + str(s) + ", trial " + str(t));
        prev = cur;
      }
    }
    return "reference points exact; 200 random configs continuous and non-increasing";
  });

  criterion("BPC", [] {
    require(tok::bpc({std::vector<double>(1000, 1.0), 1000}) == 1.0, "uniform 1-bit case");
    require(tok::bpc({std::vector<double>(1000, 0.0), 1000}) == 0.0, "certainty case");
    std::mt19937_64 rng(77);
    std::uniform_real_distribution<double> loss(0.0, 20.0), scale(0.0, 10.0);
    for (int i = 0; i < kRandomTrials; ++i) {
      tok::BpcInput a, b;
      a.char_count = 1 + rng() % 5000;
      for (std::size_t k = 0; k < 1 + rng() % 200; ++k) a.token_losses.push_back(loss(rng));
      b.char_count = a.char_count;
      for (std::size_t k = 0; k < 1 + rng() % 200; ++k) b.token_losses.push_back(loss(rng));
      const double c = scale(rng);
      tok::BpcInput scaled = a;
      for (auto& l : scaled.token_losses) l *= c;
      const double want_scaled = c * tok::bpc(a);
      require(std::abs(tok::bpc(scaled) - want_scaled) <= kBpcRelTol * (1 + want_scaled), "homogeneity, vector " + str(i));
      tok::BpcInput sum = a;
      sum.token_losses.insert(sum.token_losses.end(), b.token_losses.begin(), b.token_losses.end());
      const double want_sum = tok::bpc(a) + tok::bpc(b);
      require(std::abs(tok::bpc(sum) - want_sum) <= kBpcRelTol * (1 + want_sum), "additivity, vector " + str(i));
    }
    return "1.0, 0.0, linear over 1000 vectors";
  });

  criterion("review gates", [] {
    require(review::gate_decision(38, 385).accept, "38/385 rejected");
    require(!review::gate_decision(39, 385).accept, "39/385 accepted");
    for (std::size_t reviewed = 1; reviewed <= 400; ++reviewed)
      for (std::size_t flagged = 0; flagged <= reviewed; ++flagged)
        require(review::gate_decision(flagged, reviewed).accept == (flagged * 10 <= reviewed),
                "gate " + str(flagged) + "/" + str(reviewed));
    for (int mask = 0; mask < 8; ++mask) {
      const bool e = mask & 1, t = mask & 2, c = mask & 4;
      const int want = (e ? 2 : 0) - (t ? 2 : 0) + (c ? 1 : 0);
      const int got = review::score_sample({"s", "j", review::Rubric{e, t, c}, ""});
      require(got == want, "rubric mask " + str(mask));
    }
    return "38/385 accept, 39/385 reject, 8 rubric combinations";
  });

  criterion("percentile", [] {
    std::mt19937_64 rng(95);
    for (int t = 0; t < kRandomTrials; ++t) {
      std::vector<std::uint64_t> v(1 + rng() % 500);
      for (auto& x : v) x = rng() % 10'000;
      auto sorted = v;
      std::sort(sorted.begin(), sorted.end());
      const std::size_t rank = (95 * sorted.size() + 99) / 100;  // ceil(0.95 n)
      require(review::p95_threshold(v) == sorted[rank - 1], "list " + str(t));
    }
    return "1000 lists agree with sort-and-index";
  });

  criterion("cleaning", [] {
    using namespace clean;
    auto doc = [](std::string text) { return Document{"d", "src", std::nullopt, std::move(text), {}}; };
    const std::vector min{CleaningRule::min_chars(1000)};
    require(std::holds_alternative<Dropped>(apply_rules(doc(std::string(999, 'x')), min)), "999 chars kept");
    require(std::holds_alternative<Document>(apply_rules(doc(std::string(1000, 'x')), min)), "1000 chars dropped");

    std::string lines, tail;
    for (int i = 1; i <= 300; ++i) {
      const std::string l = "line " + std::to_string(i) + (i < 300 ? "\n" : "");
      lines += l;
      if (i > 200) tail += l;
    }
    auto stripped = apply_rules(doc(lines), std::vector{CleaningRule::strip_first_lines(200)});
    require(std::holds_alternative<Document>(stripped) && std::get<Document>(stripped).text == tail, "strip_first_lines(200)");

    const std::vector<CleaningRule> idempotent{CleaningRule::of(RuleKind::strip_html),
                                               CleaningRule::of(RuleKind::remove_edit_source),
                                               CleaningRule::of(RuleKind::latex_to_markdown),
                                               CleaningRule::of(RuleKind::normalize_whitespace)};
    const auto corpus = testkit::fuzz_corpus(100, 1234);
    for (const auto& d : corpus) {
      std::vector<std::vector<CleaningRule>> sets;
      for (const auto& r : idempotent) sets.push_back({r});
      sets.push_back(idempotent);
      for (const auto& rules : sets) {
        auto once = apply_rules(d, rules);
        if (std::holds_alternative<Dropped>(once)) continue;
        auto twice = apply_rules(std::get<Document>(once), rules);
        require(std::holds_alternative<Document>(twice) && std::get<Document>(twice).text == std::get<Document>(once).text,
                "not idempotent on " + d.id);
      }
    }
    return "999 dropped, 1000 kept, strip 200 of 300, 100-doc idempotence";
  });

  criterion("BPE oracle", [] {
    const auto strings = testkit::all_strings("abc", 8);
    std::mt19937_64 rng(8);
    std::size_t checked = 0;
    for (int t = 0; t < 30; ++t) {
      auto table = testkit::random_merge_table("abc", 4 + rng() % 20, 8, rng);
      tok::TokenizerDef def(table.vocab, table.merges, {}, {false, false});
      testkit::NaiveBpe oracle(table.vocab, table.merges);
      tok::Encoder enc(def);
      for (const auto& s : strings) {
        const auto want = oracle.encode(s);
        require(want.has_value(), "oracle produced an unknown token");
        require(enc.encode(s) == *want, "table " + str(t) + " text '" + s + "'");
        ++checked;
      }
    }
    return str(strings.size()) + " strings x 30 tables (" + str(checked) + " encodings)";
  });

  criterion("determinism", [] {
    testkit::TempDir a, b, shared;
    const std::string data = dataset_lines(2000, 5);
    a.write("datasets/acc.jsonl", data);
    b.write("datasets/acc.jsonl", data);
    const std::vector<std::string> sample_args{"sample", "--dataset", "acc", "--n", "300", "--seed", "17", "--judge", "j1"};
    auto run_sample = [&](const testkit::TempDir& root) {
      std::vector<std::string> argv{PINT_CLI_PATH};
      argv.insert(argv.end(), sample_args.begin(), sample_args.end());
      argv.insert(argv.end(), {"--data", root.path().string()});
      auto r = testkit::run(argv);
      require(r.exit_code == 0, "sample failed: " + r.out);
      return r.out;
    };
    const auto first = run_sample(a), second = run_sample(b);
    require(first == second, "sample output differs between runs");
    require(std::count(first.begin(), first.end(), '\n') == 301, "unexpected sample output");

    const auto input = shared.write("in.jsonl", data);
    const auto manifest = shared.write("manifest.yaml", "datasets:\n  - name: acc\n    role: web\n    order: date_descending\n"
                                                        "    inputs: [" + input.string() + "]\n"
                                                        "target_proportions: {web: 1.0}\n");
    for (const char* out : {"out1", "out2"}) std::filesystem::create_directories(shared / out);
    for (const char* out : {"out1", "out2"}) {
      auto r = testkit::run({PINT_CLI_PATH, "ingest", "--manifest", manifest.string(), "--dataset", "acc", "--out",
                             (shared / out).string(), "--budget", "50000"});
      require(r.exit_code == 0, "ingest failed: " + r.out);
    }
    const auto x = testkit::read_file(shared / "out1" / "acc.jsonl");
    require(!x.empty() && x == testkit::read_file(shared / "out2" / "acc.jsonl"), "ingest output differs between runs");
    require(x.size() < data.size(), "budget did not subsample");
    return "sample and ingest --budget byte-identical across runs";
  });

  criterion("crash recovery", [] {
    testkit::TempDir root;
    root.write("datasets/acc.jsonl", dataset_lines(500, 9));
    const std::vector<std::string> serve{PINT_CLI_PATH, "serve", "--port", "0", "--data", root.path().string()};
    constexpr int kJudgments = 23;
    std::string id, before;
    {
      testkit::Child server(serve);
      const int port = read_port(server);
      httplib::Client client("127.0.0.1", port);
      auto created = client.Post("/sessions", json{{"dataset", "acc"}, {"n", 40}, {"seed", 3}, {"judges", {"j1", "j2"}}}.dump(),
                                 "application/json");
      require(created && created->status == 201, "create failed");
      id = json::parse(created->body)["id"];
      std::mt19937_64 rng(1);
      for (int k = 0; k < kJudgments; ++k) {
        const std::string judge = k % 3 ? "j1" : "j2";
        auto next = client.Get("/sessions/" + id + "/next?judge=" + judge);
        require(next && next->status == 200, "next failed");
        json j{{"sample_id", json::parse(next->body)["sample_id"]},
               {"judge_id", judge},
               {"expository", rng() % 2 == 0},
               {"toxic", rng() % 5 == 0},
               {"clean", rng() % 3 != 0}};
        auto sub = client.Post("/sessions/" + id + "/judgments", j.dump(), "application/json");
        require(sub && sub->status == 201, "submit failed");
      }
      before = get_report(port, id);
      server.kill(SIGKILL);
    }
    {
      testkit::Child server(serve);
      require(get_report(read_port(server), id) == before, "report differs after restart");
    }
    // A write torn by the crash is dropped on replay.
    std::ofstream(root / "sessions" / id / "judgments.log", std::ios::app | std::ios::binary)
        << R"({"sample_id":"doc1","judge_id":"j1","expository":tr)";
    {
      testkit::Child server(serve);
      require(get_report(read_port(server), id) == before, "report differs after torn write");
    }
    require(json::parse(before)["progress"]["judgments"] == kJudgments, "judgment count");
    api::SessionStore store(root.path());
    require(api::session_report(store.replay(id)).dump() + "\n" == before, "offline replay differs");
    return str(kJudgments) + " judgments, SIGKILL, identical report after restart and torn tail";
  });

  std::cout << (failures ? std::to_string(failures) + " criteria failed" : std::string("all criteria passed")) << std::endl;
  return failures ? 1 : 0;
}
