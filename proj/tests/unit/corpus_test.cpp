#include <gtest/gtest.h>

#include <random>

#include "../support/temp_dir.hpp"
#include "pint/corpus.hpp"
#include "pint/error.hpp"

using namespace pint;
using namespace pint::corpus;

namespace {

Document doc(std::string id, std::optional<std::string> date = std::nullopt, std::string text = "t") {
  return {std::move(id), "src", std::move(date), std::move(text), {}};
}

std::vector<std::string> ids_of(const std::vector<Document>& docs) {
  std::vector<std::string> out;
  for (const auto& d : docs) out.push_back(d.id);
  return out;
}

// Counter reading the token count from the text length.
std::uint64_t length_counter(const Document& d) { return d.text.size(); }

std::vector<Document> sized(const std::vector<std::uint64_t>& counts) {
  std::vector<Document> docs;
  for (std::size_t i = 0; i < counts.size(); ++i) docs.push_back(doc("d" + std::to_string(i), {}, std::string(counts[i], 'x')));
  return docs;
}

}  // namespace

TEST(Manifest, Minimal) {
  auto m = parse_manifest(R"(
datasets:
  - name: web1
    role: web
    inputs: [a.jsonl]
target_proportions: {web: 1.0}
total_token_target: 100
)",
                          "/base");
  ASSERT_EQ(m.datasets.size(), 1u);
  EXPECT_EQ(m.datasets[0].role, Role::web);
  EXPECT_EQ(m.datasets[0].inputs[0], std::filesystem::path("/base/a.jsonl"));
  EXPECT_EQ(m.datasets[0].order, Order::file_order);
  EXPECT_EQ(m.total_token_target, 100u);
  EXPECT_EQ(&m.at("web1"), &m.datasets[0]);
  EXPECT_EQ(m.find("nope"), nullptr);
  EXPECT_THROW(m.at("nope"), Error);
}

TEST(Manifest, FortyFortyTwenty) {
  auto m = parse_manifest(R"(
datasets:
  - name: books
    role: textbook
    order: date_descending
    token_budget: 4000000000
    cleaning_rules:
      - strip_first_lines: 200
      - language_filter: {lang: en, min_confidence: 0.9}
      - min_chars: 1000
      - strip_html
target_proportions: {textbook: 0.4, web: 0.4, code: 0.2}
)");
  const auto& d = m.datasets[0];
  EXPECT_EQ(d.order, Order::date_descending);
  EXPECT_EQ(d.token_budget, 4000000000u);
  ASSERT_EQ(d.cleaning_rules.size(), 4u);
  EXPECT_EQ(d.cleaning_rules[0], clean::CleaningRule::strip_first_lines(200));
  EXPECT_EQ(d.cleaning_rules[1], clean::CleaningRule::language_filter("en", 0.9));
  EXPECT_EQ(d.cleaning_rules[2], clean::CleaningRule::min_chars(1000));
  EXPECT_EQ(d.cleaning_rules[3], clean::CleaningRule::of(clean::RuleKind::strip_html));
  EXPECT_DOUBLE_EQ(m.target_proportions.at(Role::textbook), 0.4);
}

TEST(Manifest, Errors) {
  try {
    parse_manifest("target_proportions: {web: 0.5, code: 0.4}\n");
    FAIL();
  } catch (const ValidationError& e) {
    EXPECT_NE(std::string(e.what()).find("0.9"), std::string::npos) << e.what();
  }
  EXPECT_THROW(parse_manifest(R"(
datasets:
  - {name: a, role: web}
  - {name: a, role: code}
target_proportions: {web: 1.0}
)"),
               ValidationError);
  EXPECT_THROW(parse_manifest("datasets:\n  - {name: a, role: blog}\ntarget_proportions: {web: 1.0}\n"), ValidationError);
  EXPECT_THROW(parse_manifest("datasets:\n  - {name: a, role: web, token_bugdet: 5}\ntarget_proportions: {web: 1.0}\n"),
               ParseError);
  EXPECT_THROW(parse_manifest("datasets:\n  - {name: a, role: web, cleaning_rules: [dedupe]}\ntarget_proportions: {web: 1.0}\n"),
               ParseError);
  EXPECT_THROW(parse_manifest("datasets:\n  - {name: a, role: web, cleaning_rules: [min_chars]}\ntarget_proportions: {web: 1.0}\n"),
               ParseError);
  EXPECT_THROW(parse_manifest("datasets: [\n"), ParseError);
  EXPECT_THROW(parse_manifest("target_proportions: {web: 1.0}\nextra_key: 1\n"), ParseError);
}

TEST(Manifest, LoadsFromFileWithRelativeInputs) {
  testkit::TempDir dir;
  const auto path = dir.write("m.yaml", "datasets:\n  - {name: a, role: web, inputs: [data/a.jsonl]}\ntarget_proportions: {web: 1}\n");
  auto m = load_manifest(path);
  EXPECT_EQ(m.datasets[0].inputs[0], dir / "data/a.jsonl");
  EXPECT_THROW(load_manifest(dir / "missing.yaml"), Error);
}

TEST(ReadDocuments, EmptyFile) {
  testkit::TempDir dir;
  DatasetSpec spec{"ds", Role::web, {dir.write("a.jsonl", "")}, {}, {}, Order::file_order};
  auto r = read_documents(spec);
  EXPECT_TRUE(r.documents.empty());
  EXPECT_EQ(r.skipped(), 0u);
}

TEST(ReadDocuments, DateDescending) {
  testkit::TempDir dir;
  const auto path = dir.write("a.jsonl",
                              "{\"id\":\"a\",\"date\":\"2020\",\"text\":\"x\"}\n"
                              "{\"id\":\"b\",\"date\":\"2022\",\"text\":\"x\"}\n"
                              "{\"id\":\"c\",\"date\":\"2021\",\"text\":\"x\"}\n");
  DatasetSpec spec{"ds", Role::web, {path}, {}, {}, Order::date_descending};
  auto r = read_documents(spec);
  EXPECT_EQ(ids_of(r.documents), (std::vector<std::string>{"b", "c", "a"}));
  EXPECT_EQ(r.documents[0].source, "ds");
}

TEST(ReadDocuments, MalformedRecordsAreSkippedWithLocation) {
  testkit::TempDir dir;
  const auto path = dir.write("a.jsonl",
                              "{\"id\":\"a\",\"text\":\"x\"}\n"
                              "{\"id\":\"b\"}\n"
                              "\n"
                              "not json\n"
                              "{\"id\":\"a\",\"text\":\"dup\"}\n"
                              "{\"id\":\"c\",\"text\":\"y\"}\n");
  DatasetSpec spec{"ds", Role::web, {path}, {}, {}, Order::file_order};
  auto r = read_documents(spec);
  EXPECT_EQ(ids_of(r.documents), (std::vector<std::string>{"a", "c"}));
  ASSERT_EQ(r.skipped(), 3u);
  EXPECT_EQ(r.errors[0].line, 2u);
  EXPECT_EQ(r.errors[1].line, 4u);
  EXPECT_EQ(r.errors[2].line, 5u);
  EXPECT_EQ(r.errors[0].file, path);
}

TEST(ReadDocuments, MissingDateUnderDateOrderIsSkipped) {
  testkit::TempDir dir;
  const auto path = dir.write("a.jsonl", "{\"id\":\"a\",\"text\":\"x\"}\n{\"id\":\"b\",\"date\":\"2021\",\"text\":\"x\"}\n");
  auto r = read_documents({"ds", Role::web, {path}, {}, {}, Order::date_descending});
  EXPECT_EQ(ids_of(r.documents), std::vector<std::string>{"b"});
  EXPECT_EQ(r.skipped(), 1u);
}

TEST(ReadDocuments, FilesMergeInDeclaredOrderDeterministically) {
  testkit::TempDir dir;
  std::vector<std::filesystem::path> inputs;
  for (int f = 0; f < 6; ++f) {
    std::string content;
    for (int i = 0; i < 50; ++i) content += to_line(doc("f" + std::to_string(f) + "-" + std::to_string(i))) + "\n";
    inputs.push_back(dir.write("in" + std::to_string(f) + ".jsonl", content));
  }
  DatasetSpec spec{"ds", Role::web, inputs, {}, {}, Order::file_order};
  auto a = read_documents(spec);
  auto b = read_documents(spec);
  ASSERT_EQ(a.documents.size(), 300u);
  EXPECT_EQ(a.documents, b.documents);
  EXPECT_EQ(a.documents.front().id, "f0-0");
  EXPECT_EQ(a.documents[50].id, "f1-0");
  EXPECT_EQ(a.documents.back().id, "f5-49");
  spec.inputs.push_back(dir / "missing.jsonl");
  EXPECT_THROW(read_documents(spec), Error);
}

TEST(DateSort, TiesAndUnparseable) {
  std::vector<Document> docs{doc("z", "2021"), doc("b", "garbage"), doc("a", "2021-01-01"), doc("m", "2023-05"),
                             doc("c", std::nullopt), doc("y", "2021-01")};
  sort_date_descending(docs);
  EXPECT_EQ(ids_of(docs), (std::vector<std::string>{"m", "a", "y", "z", "b", "c"}));
}

TEST(DateSort, IsATotalOrder) {
  std::mt19937_64 rng(12);
  const std::vector<std::optional<std::string>> dates{"2020", "2020-06", "2021-01-01", "bad", std::nullopt, "2019-12-31"};
  for (int t = 0; t < 100; ++t) {
    std::vector<Document> docs;
    for (int i = 0; i < 30; ++i) docs.push_back(doc("id" + std::to_string(rng() % 20) + "-" + std::to_string(i), dates[rng() % dates.size()]));
    auto shuffled = docs;
    std::shuffle(shuffled.begin(), shuffled.end(), rng);
    sort_date_descending(docs);
    sort_date_descending(shuffled);
    EXPECT_EQ(ids_of(docs), ids_of(shuffled));
  }
}

TEST(Subsample, Examples) {
  auto docs = sized({3, 4, 5});
  // The crossing document (4, reaching 7) is the last one emitted.
  auto s = subsample_by_budget(docs, 7, length_counter);
  EXPECT_EQ(s.count, 2u);
  EXPECT_EQ(s.total, 7u);
  auto crossing = subsample_by_budget(docs, 8, length_counter);
  EXPECT_EQ(crossing.count, 3u);
  EXPECT_EQ(crossing.total, 12u);
  auto zero = subsample_by_budget(docs, 0, length_counter);
  EXPECT_EQ(zero.count, 0u);
  EXPECT_EQ(zero.total, 0u);
  auto all = subsample_by_budget(sized({10}), 1000, length_counter);
  EXPECT_EQ(all.count, 1u);
  EXPECT_EQ(all.total, 10u);
  EXPECT_EQ(subsample_by_budget({}, 5, length_counter).count, 0u);
}

TEST(Subsample, CrossingInvariant) {
  std::mt19937_64 rng(77);
  for (int t = 0; t < 2000; ++t) {
    std::vector<std::uint64_t> counts(rng() % 30);
    std::uint64_t corpus = 0;
    for (auto& c : counts) corpus += (c = rng() % 20);
    auto docs = sized(counts);
    const std::uint64_t budget = rng() % (corpus + 10);
    auto s = subsample_by_budget(docs, budget, length_counter);
    std::uint64_t prefix = 0;
    for (std::size_t i = 0; i < s.count; ++i) prefix += counts[i];
    EXPECT_EQ(prefix, s.total);
    if (budget == 0) EXPECT_EQ(s.count, 0u);
    if (s.count > 0 && budget <= corpus) {
      EXPECT_LT(s.total - counts[s.count - 1], budget);
      EXPECT_LE(budget, s.total);
    }
    if (budget > corpus) EXPECT_EQ(s.count, counts.size());

    BudgetGate gate(budget);
    std::size_t streamed = 0;
    for (auto c : counts)
      if (gate.admit(c)) ++streamed;
    EXPECT_EQ(streamed, s.count);
    EXPECT_EQ(gate.total(), s.total);
  }
}

TEST(Names, RoundTrip) {
  for (auto r : {Role::textbook, Role::web, Role::code, Role::finetune, Role::alignment}) EXPECT_EQ(role_from_string(to_string(r)), r);
  for (auto o : {Order::date_descending, Order::file_order}) EXPECT_EQ(order_from_string(to_string(o)), o);
  EXPECT_FALSE(role_from_string("blog").has_value());
}
