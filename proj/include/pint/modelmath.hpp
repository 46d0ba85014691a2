#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>

namespace pint::model {

struct ModelConfig {
  std::uint64_t vocab_size = 0;
  std::uint64_t d_model = 0;
  std::uint64_t n_layers = 0;
  std::uint64_t n_heads = 0;
  std::uint64_t n_kv_groups = 0;
  std::uint64_t d_intermediate = 0;
  std::uint64_t context_length = 0;
  bool tie_embeddings = false;

  // 24 layers, 32 heads in 4 query groups, d=2048, untied 32,064 vocab.
  static ModelConfig pints_1_5b();
};

// Throws ValidationError unless all sizes are positive, H % G == 0 and
// d % H == 0.
void validate(const ModelConfig& cfg);

// Llama-style layout without biases: embeddings, per-layer Q/K/V/O (K and V
// narrowed to d*G/H), gate/up/down MLP, two RMSNorm vectors per layer, a final
// norm, and an output head unless embeddings are tied. Throws on overflow.
std::uint64_t param_count(const ModelConfig& cfg);

struct ScheduleConfig {
  double max_lr = 0.0;
  double min_lr = 0.0;
  std::uint64_t warmup_steps = 0;
  std::uint64_t total_steps = 0;
};

void validate(const ScheduleConfig& cfg);

// Linear warmup from 0 to max_lr, then cosine decay to min_lr at total_steps.
double lr_at(const ScheduleConfig& cfg, std::uint64_t step);

struct TrainHyperparams {
  double beta1 = 0.9;
  double beta2 = 0.95;
  std::uint64_t batch_size_tokens = 0;
  double weight_decay = 0.0;
  double grad_clip = 0.0;  // 0 when not stated
  std::uint64_t epochs = 0;
  double peak_lr = 0.0;
  double min_lr = 0.0;  // 0 when not stated
  std::uint64_t warmup_steps = 0;

  static TrainHyperparams pretrain();
  static TrainHyperparams finetune();
};

void validate(const TrainHyperparams& hp);

// ceil(tokens_per_epoch * epochs / batch_size_tokens).
std::uint64_t steps_for(std::uint64_t tokens_per_epoch, std::uint64_t epochs, std::uint64_t batch_size_tokens);

// total_tokens / (gpus * tokens_per_gpu_s), in seconds.
double duration_estimate(std::uint64_t total_tokens, std::uint64_t gpus, double tokens_per_gpu_s);

// "9d 11h 49m", rounded to the minute; "1m 5s" below an hour.
std::string format_duration(double seconds);

struct ConfigFile {
  std::optional<ModelConfig> model;
  std::optional<ScheduleConfig> schedule;
  std::optional<TrainHyperparams> train;
};

// YAML with optional top-level `model`, `schedule` and `train` maps whose keys
// are the field names above. Every section present is validated.
ConfigFile load_config(const std::filesystem::path& path);
ConfigFile parse_config(std::string_view yaml);

}  // namespace pint::model
