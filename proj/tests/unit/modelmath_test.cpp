#include <gtest/gtest.h>

#include <random>

#include "../support/temp_dir.hpp"
#include "pint/error.hpp"
#include "pint/modelmath.hpp"

using namespace pint;
using namespace pint::model;

namespace {

ModelConfig tiny(bool tied = false) { return {4, 2, 1, 1, 1, 4, 8, tied}; }

// Term-by-term sum written out independently of the library layout.
std::uint64_t reference_count(const ModelConfig& c) {
  const std::uint64_t V = c.vocab_size, d = c.d_model, L = c.n_layers, H = c.n_heads, G = c.n_kv_groups,
                      I = c.d_intermediate;
  const std::uint64_t head_dim = d / H;
  std::uint64_t per_layer = 0;
  per_layer += d * (H * head_dim);  // q
  per_layer += d * (G * head_dim);  // k
  per_layer += d * (G * head_dim);  // v
  per_layer += (H * head_dim) * d;  // o
  per_layer += d * I + d * I + I * d;
  per_layer += d + d;
  return V * d + L * per_layer + d + (c.tie_embeddings ? 0 : V * d);
}

ScheduleConfig pretrain_schedule(std::uint64_t total) { return {4.0e-4, 4.0e-5, 2000, total}; }

}  // namespace

TEST(Params, ReferenceConfig) {
  EXPECT_EQ(param_count(ModelConfig::pints_1_5b()), 1'565'886'464u);
  EXPECT_EQ(reference_count(ModelConfig::pints_1_5b()), 1'565'886'464u);
}

TEST(Params, TinyHandSum) {
  EXPECT_EQ(param_count(tiny()), 62u);
  EXPECT_EQ(param_count(tiny(true)), 54u);
}

TEST(Params, Validation) {
  auto bad = tiny();
  bad.n_kv_groups = 3;
  bad.n_heads = 4;
  bad.d_model = 8;
  EXPECT_THROW(param_count(bad), ValidationError);  // 4 % 3
  bad = tiny();
  bad.n_heads = 3;
  bad.n_kv_groups = 3;
  EXPECT_THROW(param_count(bad), ValidationError);  // 2 % 3
  bad = tiny();
  bad.vocab_size = 0;
  EXPECT_THROW(param_count(bad), ValidationError);
  ModelConfig huge{1ULL << 50, 1ULL << 20, 1ULL << 20, 1, 1, 1ULL << 20, 1, false};
  EXPECT_THROW(param_count(huge), ValidationError);
}

TEST(Params, MatchesReferenceAndProperties) {
  std::mt19937_64 rng(3);
  for (int t = 0; t < 2000; ++t) {
    const std::uint64_t G = 1 + rng() % 4;
    const std::uint64_t H = G * (1 + rng() % 4);
    ModelConfig c{1 + rng() % 5000, H * (1 + rng() % 16), 1 + rng() % 8, H, G, 1 + rng() % 512, 16, (rng() & 1) != 0};
    ASSERT_EQ(param_count(c), reference_count(c));

    auto untied = c, tied = c;
    untied.tie_embeddings = false;
    tied.tie_embeddings = true;
    EXPECT_EQ(param_count(untied) - param_count(tied), c.vocab_size * c.d_model);

    for (auto field : {&ModelConfig::vocab_size, &ModelConfig::n_layers, &ModelConfig::d_intermediate}) {
      auto bigger = c;
      bigger.*field += 1;
      EXPECT_GT(param_count(bigger), param_count(c));
    }
  }
}

TEST(Schedule, ReferencePoints) {
  const auto cfg = pretrain_schedule(54'302);
  EXPECT_DOUBLE_EQ(lr_at(cfg, 2000), 4.0e-4);
  EXPECT_LT(std::abs(lr_at(cfg, cfg.total_steps) - 4.0e-5) / 4.0e-5, 1e-12);
  const std::uint64_t mid = 2000 + (cfg.total_steps - 2000) / 2;
  ASSERT_EQ((cfg.total_steps - 2000) % 2, 0u);
  EXPECT_NEAR(lr_at(cfg, mid), 2.2e-4, 1e-18);
  EXPECT_EQ(lr_at(cfg, 0), 0.0);
  EXPECT_DOUBLE_EQ(lr_at(cfg, 1000), 2.0e-4);
  EXPECT_THROW(lr_at(cfg, cfg.total_steps + 1), ValidationError);
}

TEST(Schedule, Validation) {
  EXPECT_THROW(lr_at({1e-4, 1e-3, 0, 10}, 0), ValidationError);
  EXPECT_THROW(lr_at({1e-4, 1e-5, 11, 10}, 0), ValidationError);
  EXPECT_THROW(lr_at({0.0, 0.0, 0, 10}, 0), ValidationError);
}

TEST(Schedule, NoWarmupStartsAtMax) {
  ScheduleConfig cfg{1e-3, 1e-4, 0, 100};
  EXPECT_DOUBLE_EQ(lr_at(cfg, 0), 1e-3);
  EXPECT_DOUBLE_EQ(lr_at(cfg, 100), 1e-4);
  ScheduleConfig all_warmup{1e-3, 1e-4, 100, 100};
  EXPECT_DOUBLE_EQ(lr_at(all_warmup, 100), 1e-3);
}

TEST(Schedule, RandomizedProperties) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> lr(1e-6, 1e-2), frac(0.0, 1.0);
  for (int t = 0; t < 500; ++t) {
    const double max_lr = lr(rng);
    ScheduleConfig cfg{max_lr, max_lr * frac(rng) + 1e-12, 0, 1 + rng() % 3000};
    cfg.min_lr = std::min(cfg.min_lr, cfg.max_lr);
    cfg.warmup_steps = rng() % (cfg.total_steps + 1);
    if (cfg.warmup_steps > 0) {
      EXPECT_EQ(lr_at(cfg, cfg.warmup_steps), cfg.max_lr);
    }
    if (cfg.warmup_steps < cfg.total_steps) {
      EXPECT_LT(std::abs(lr_at(cfg, cfg.total_steps) - cfg.min_lr) / cfg.min_lr, 1e-12);
    }
    double prev = lr_at(cfg, cfg.warmup_steps);
    for (std::uint64_t s = cfg.warmup_steps + 1; s <= cfg.total_steps; ++s) {
      const double cur = lr_at(cfg, s);
      ASSERT_LE(cur, prev) << s;
      ASSERT_GE(cur, cfg.min_lr * (1 - 1e-12));
      prev = cur;
    }
    for (std::uint64_t s = 1; s <= cfg.warmup_steps; ++s) ASSERT_GT(lr_at(cfg, s), lr_at(cfg, s - 1));
  }
}

TEST(Duration, Examples) {
  const double secs = duration_estimate(115'000'000'000ULL, 8, 17'528);
  EXPECT_NEAR(secs, 820'116.4, 0.1);
  EXPECT_NEAR(secs / 86400.0, 9.49, 0.005);
  const double reported_total = 9 * 86400.0 + 2 * 3600.0;
  EXPECT_LT(std::abs(secs - reported_total) / reported_total, 0.05);
  EXPECT_DOUBLE_EQ(duration_estimate(140'224, 8, 17'528), 1.0);
  EXPECT_EQ(duration_estimate(0, 8, 17'528), 0.0);
  EXPECT_THROW(duration_estimate(1, 0, 17'528), ValidationError);
  EXPECT_THROW(duration_estimate(1, 8, 0.0), ValidationError);
}

TEST(Duration, Linearity) {
  std::mt19937_64 rng(6);
  for (int t = 0; t < 1000; ++t) {
    const std::uint64_t tokens = rng() % 1'000'000'000'000ULL;
    const std::uint64_t gpus = 1 + rng() % 64;
    const std::uint64_t k = 1 + rng() % 16;
    const double tp = 100.0 + static_cast<double>(rng() % 100000);
    const double base = duration_estimate(tokens, gpus, tp);
    EXPECT_NEAR(duration_estimate(tokens * k, gpus, tp), base * static_cast<double>(k), 1e-9 * base * static_cast<double>(k) + 1e-12);
    EXPECT_NEAR(duration_estimate(tokens, gpus * k, tp), base / static_cast<double>(k), 1e-9 * base + 1e-12);
  }
}

TEST(Duration, Formatting) {
  EXPECT_EQ(format_duration(820'116.4), "9d 11h 49m");
  EXPECT_EQ(format_duration(3600), "1h 0m");
  EXPECT_EQ(format_duration(65), "1m 5s");
  EXPECT_EQ(format_duration(1), "0m 1s");
  EXPECT_THROW(format_duration(-1), ValidationError);
}

TEST(Steps, CeilingDivision) {
  EXPECT_EQ(steps_for(56'942'424'790ULL, 2, 2'097'152), 54'305u);
  EXPECT_EQ(steps_for(10, 1, 5), 2u);
  EXPECT_EQ(steps_for(11, 1, 5), 3u);
  EXPECT_EQ(steps_for(0, 1, 5), 0u);
  EXPECT_THROW(steps_for(1, 1, 0), ValidationError);
}

TEST(Hyperparams, Presets) {
  const auto pre = TrainHyperparams::pretrain();
  EXPECT_EQ(pre.batch_size_tokens, 2'097'152u);
  EXPECT_EQ(pre.warmup_steps, 2000u);
  EXPECT_DOUBLE_EQ(pre.peak_lr, 4.0e-4);
  EXPECT_DOUBLE_EQ(pre.min_lr, 4.0e-5);
  EXPECT_DOUBLE_EQ(pre.grad_clip, 1.0);
  EXPECT_EQ(pre.epochs, 2u);
  const auto ft = TrainHyperparams::finetune();
  EXPECT_EQ(ft.batch_size_tokens, 1'048'512u);
  EXPECT_EQ(ft.warmup_steps, 1126u);
  EXPECT_DOUBLE_EQ(ft.peak_lr, 2e-5);
  EXPECT_EQ(ft.epochs, 5u);
  EXPECT_NO_THROW(validate(pre));
  EXPECT_NO_THROW(validate(ft));
}

TEST(Config, ParsesAllSections) {
  auto cfg = parse_config(R"(
model:
  vocab_size: 32064
  d_model: 2048
  n_layers: 24
  n_heads: 32
  n_kv_groups: 4
  d_intermediate: 8192
  context_length: 16384
  tie_embeddings: false
schedule: {max_lr: 4.0e-4, min_lr: 4.0e-5, warmup_steps: 2000, total_steps: 54305}
train: {batch_size_tokens: 2097152, epochs: 2, weight_decay: 0.1}
)");
  ASSERT_TRUE(cfg.model && cfg.schedule && cfg.train);
  EXPECT_EQ(param_count(*cfg.model), 1'565'886'464u);
  EXPECT_DOUBLE_EQ(lr_at(*cfg.schedule, 2000), 4.0e-4);
  EXPECT_EQ(cfg.train->batch_size_tokens, 2'097'152u);
  EXPECT_DOUBLE_EQ(cfg.train->beta2, 0.95);
}

TEST(Config, Errors) {
  EXPECT_THROW(parse_config("model: {vocab_size: 4, d_modle: 2}"), ParseError);
  EXPECT_THROW(parse_config("extra: 1"), ParseError);
  EXPECT_THROW(parse_config("model: {vocab_size: 4}"), ValidationError);
  EXPECT_THROW(parse_config("schedule: {max_lr: abc}"), ParseError);
  EXPECT_THROW(parse_config("schedule: {max_lr: 1e-4, min_lr: 1e-3, warmup_steps: 0, total_steps: 5}"), ValidationError);
  EXPECT_THROW(parse_config("model: {n_layers: -1}"), ValidationError);
  EXPECT_THROW(parse_config("[1, 2]"), ParseError);
  auto empty = parse_config("{}");
  EXPECT_FALSE(empty.model || empty.schedule || empty.train);
}

TEST(Config, LoadFromFile) {
  testkit::TempDir dir;
  auto path = dir.write("c.yaml", "schedule: {max_lr: 1.0e-3, min_lr: 1.0e-4, warmup_steps: 10, total_steps: 100}\n");
  EXPECT_EQ(load_config(path).schedule->total_steps, 100u);
  EXPECT_THROW(load_config(dir / "none.yaml"), Error);
  auto bad = dir.write("bad.yaml", "model: [\n");
  try {
    load_config(bad);
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_NE(std::string(e.what()).find("bad.yaml"), std::string::npos);
  }
}
