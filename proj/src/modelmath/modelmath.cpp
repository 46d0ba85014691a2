#include <cmath>
#include <fstream>
#include <iterator>
#include <numbers>

#include <yaml-cpp/yaml.h>

#include "pint/error.hpp"
#include "pint/modelmath.hpp"

namespace pint::model {

namespace {

std::uint64_t mul(std::uint64_t a, std::uint64_t b) {
  std::uint64_t r;
  if (__builtin_mul_overflow(a, b, &r)) throw ValidationError("parameter count overflows 64 bits");
  return r;
}

std::uint64_t add(std::uint64_t a, std::uint64_t b) {
  std::uint64_t r;
  if (__builtin_add_overflow(a, b, &r)) throw ValidationError("parameter count overflows 64 bits");
  return r;
}

}  // namespace

ModelConfig ModelConfig::pints_1_5b() {
  ModelConfig cfg;
  cfg.vocab_size = 32064;
  cfg.d_model = 2048;
  cfg.n_layers = 24;
  cfg.n_heads = 32;
  cfg.n_kv_groups = 4;
  cfg.d_intermediate = 8192;
  cfg.context_length = 16384;
  cfg.tie_embeddings = false;
  return cfg;
}

void validate(const ModelConfig& cfg) {
  if (!cfg.vocab_size || !cfg.d_model || !cfg.n_layers || !cfg.n_heads || !cfg.n_kv_groups || !cfg.d_intermediate ||
      !cfg.context_length)
    throw ValidationError("model sizes must all be positive");
  if (cfg.n_heads % cfg.n_kv_groups != 0) throw ValidationError("n_heads must be a multiple of n_kv_groups");
  if (cfg.d_model % cfg.n_heads != 0) throw ValidationError("d_model must be a multiple of n_heads");
}

std::uint64_t param_count(const ModelConfig& cfg) {
  validate(cfg);
  const auto d = cfg.d_model;
  const auto kv = d / cfg.n_heads * cfg.n_kv_groups;
  const auto embed = mul(cfg.vocab_size, d);
  const auto attention = add(add(mul(d, d), mul(2, mul(d, kv))), mul(d, d));
  const auto mlp = mul(3, mul(d, cfg.d_intermediate));
  const auto layer = add(add(attention, mlp), mul(2, d));
  auto total = add(embed, mul(cfg.n_layers, layer));
  total = add(total, d);
  if (!cfg.tie_embeddings) total = add(total, embed);
  return total;
}

void validate(const ScheduleConfig& cfg) {
  if (!(cfg.max_lr > 0.0) || !std::isfinite(cfg.max_lr)) throw ValidationError("max_lr must be positive");
  if (!(cfg.min_lr > 0.0)) throw ValidationError("min_lr must be positive");
  if (cfg.min_lr > cfg.max_lr) throw ValidationError("min_lr must not exceed max_lr");
  if (cfg.warmup_steps > cfg.total_steps) throw ValidationError("warmup_steps must not exceed total_steps");
}

double lr_at(const ScheduleConfig& cfg, std::uint64_t step) {
  validate(cfg);
  if (step > cfg.total_steps)
    throw ValidationError("step " + std::to_string(step) + " is past total_steps " + std::to_string(cfg.total_steps));
  if (cfg.warmup_steps > 0 && step <= cfg.warmup_steps)
    return cfg.max_lr * (static_cast<double>(step) / static_cast<double>(cfg.warmup_steps));
  const double progress =
      static_cast<double>(step - cfg.warmup_steps) / static_cast<double>(cfg.total_steps - cfg.warmup_steps);
  return cfg.min_lr + 0.5 * (cfg.max_lr - cfg.min_lr) * (1.0 + std::cos(std::numbers::pi * progress));
}

TrainHyperparams TrainHyperparams::pretrain() {
  TrainHyperparams hp;
  hp.beta1 = 0.9;
  hp.beta2 = 0.95;
  hp.batch_size_tokens = 2097152;
  hp.weight_decay = 0.1;
  hp.grad_clip = 1.0;
  hp.epochs = 2;
  hp.peak_lr = 4.0e-4;
  hp.min_lr = 4.0e-5;
  hp.warmup_steps = 2000;
  return hp;
}

TrainHyperparams TrainHyperparams::finetune() {
  TrainHyperparams hp;
  hp.beta1 = 0.9;
  hp.beta2 = 0.95;
  hp.batch_size_tokens = 1048512;
  hp.weight_decay = 0.1;
  hp.epochs = 5;
  hp.peak_lr = 2e-5;
  hp.warmup_steps = 1126;
  return hp;
}

void validate(const TrainHyperparams& hp) {
  if (!(hp.beta1 > 0.0 && hp.beta1 < 1.0) || !(hp.beta2 > 0.0 && hp.beta2 < 1.0))
    throw ValidationError("betas must lie in (0, 1)");
  if (hp.batch_size_tokens == 0) throw ValidationError("batch_size_tokens must be positive");
  if (hp.epochs == 0) throw ValidationError("epochs must be positive");
  if (!(hp.weight_decay >= 0.0) || !(hp.grad_clip >= 0.0) || !(hp.peak_lr >= 0.0) || !(hp.min_lr >= 0.0))
    throw ValidationError("weight_decay, grad_clip and learning rates must be non-negative");
}

std::uint64_t steps_for(std::uint64_t tokens_per_epoch, std::uint64_t epochs, std::uint64_t batch_size_tokens) {
  if (batch_size_tokens == 0) throw ValidationError("batch_size_tokens must be positive");
  const unsigned __int128 tokens = static_cast<unsigned __int128>(tokens_per_epoch) * epochs;
  return static_cast<std::uint64_t>((tokens + batch_size_tokens - 1) / batch_size_tokens);
}

double duration_estimate(std::uint64_t total_tokens, std::uint64_t gpus, double tokens_per_gpu_s) {
  if (gpus == 0) throw ValidationError("gpus must be positive");
  if (!(tokens_per_gpu_s > 0.0) || !std::isfinite(tokens_per_gpu_s))
    throw ValidationError("throughput must be positive");
  return static_cast<double>(total_tokens) / (static_cast<double>(gpus) * tokens_per_gpu_s);
}

std::string format_duration(double seconds) {
  if (!(seconds >= 0.0) || !std::isfinite(seconds)) throw ValidationError("duration must be finite and non-negative");
  if (seconds < 3600.0) {
    const auto secs = static_cast<std::uint64_t>(std::llround(seconds));
    return std::to_string(secs / 60) + "m " + std::to_string(secs % 60) + "s";
  }
  const auto minutes = static_cast<std::uint64_t>(std::llround(seconds / 60.0));
  const auto days = minutes / (24 * 60);
  const auto hours = minutes / 60 % 24;
  const auto mins = minutes % 60;
  std::string out;
  if (days) out += std::to_string(days) + "d ";
  return out + std::to_string(hours) + "h " + std::to_string(mins) + "m";
}

namespace {

template <typename T>
void read(const YAML::Node& map, const char* key, T& field, const std::string& section) {
  const auto node = map[key];
  if (!node) return;
  try {
    field = node.as<T>();
  } catch (const YAML::Exception&) {
    throw ParseError(section + "." + key + ": invalid value");
  }
}

void read_count(const YAML::Node& map, const char* key, std::uint64_t& field, const std::string& section) {
  long long v = 0;
  bool present = static_cast<bool>(map[key]);
  read(map, key, v, section);
  if (!present) return;
  if (v < 0) throw ValidationError(section + "." + key + " must be non-negative");
  field = static_cast<std::uint64_t>(v);
}

void check_keys(const YAML::Node& map, const std::string& section, std::initializer_list<std::string_view> known) {
  if (!map.IsMap()) throw ParseError("'" + section + "' must be a map");
  for (const auto& kv : map) {
    const auto key = kv.first.as<std::string>();
    bool ok = false;
    for (auto k : known) ok = ok || k == key;
    if (!ok) throw ParseError("unknown key '" + section + "." + key + "'");
  }
}

}  // namespace

ConfigFile parse_config(std::string_view yaml) {
  YAML::Node root;
  try {
    root = YAML::Load(std::string(yaml));
  } catch (const YAML::Exception& e) {
    throw ParseError(std::string("config: ") + e.what());
  }
  if (!root.IsMap()) throw ParseError("config must be a map");
  check_keys(root, "config", {"model", "schedule", "train"});

  ConfigFile out;
  if (auto m = root["model"]) {
    check_keys(m, "model",
               {"vocab_size", "d_model", "n_layers", "n_heads", "n_kv_groups", "d_intermediate", "context_length",
                "tie_embeddings"});
    ModelConfig cfg;
    read_count(m, "vocab_size", cfg.vocab_size, "model");
    read_count(m, "d_model", cfg.d_model, "model");
    read_count(m, "n_layers", cfg.n_layers, "model");
    read_count(m, "n_heads", cfg.n_heads, "model");
    read_count(m, "n_kv_groups", cfg.n_kv_groups, "model");
    read_count(m, "d_intermediate", cfg.d_intermediate, "model");
    read_count(m, "context_length", cfg.context_length, "model");
    read(m, "tie_embeddings", cfg.tie_embeddings, "model");
    validate(cfg);
    out.model = cfg;
  }
  if (auto s = root["schedule"]) {
    check_keys(s, "schedule", {"max_lr", "min_lr", "warmup_steps", "total_steps"});
    ScheduleConfig cfg;
    read(s, "max_lr", cfg.max_lr, "schedule");
    read(s, "min_lr", cfg.min_lr, "schedule");
    read_count(s, "warmup_steps", cfg.warmup_steps, "schedule");
    read_count(s, "total_steps", cfg.total_steps, "schedule");
    validate(cfg);
    out.schedule = cfg;
  }
  if (auto t = root["train"]) {
    check_keys(t, "train",
               {"beta1", "beta2", "batch_size_tokens", "weight_decay", "grad_clip", "epochs", "peak_lr", "min_lr",
                "warmup_steps"});
    TrainHyperparams hp;
    read(t, "beta1", hp.beta1, "train");
    read(t, "beta2", hp.beta2, "train");
    read_count(t, "batch_size_tokens", hp.batch_size_tokens, "train");
    read(t, "weight_decay", hp.weight_decay, "train");
    read(t, "grad_clip", hp.grad_clip, "train");
    read_count(t, "epochs", hp.epochs, "train");
    read(t, "peak_lr", hp.peak_lr, "train");
    read(t, "min_lr", hp.min_lr, "train");
    read_count(t, "warmup_steps", hp.warmup_steps, "train");
    validate(hp);
    out.train = hp;
  }
  return out;
}

ConfigFile load_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path.string());
  std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  try {
    return parse_config(text);
  } catch (const ParseError& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
}

}  // namespace pint::model
