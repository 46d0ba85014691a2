#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include <json.hpp>

#include "pint/document.hpp"
#include "pint/error.hpp"

namespace pint::tok {

using TokenId = std::uint32_t;

enum class SpecialKind { pad, chat, reserved, control };

std::string_view to_string(SpecialKind kind);

struct SpecialToken {
  std::string literal;
  TokenId id = 0;
  SpecialKind kind = SpecialKind::control;

  bool operator==(const SpecialToken&) const = default;
};

// The whitespace marker used by the space-prefix convention (U+2581).
inline constexpr std::string_view kSpaceMarker = "\xE2\x96\x81";

// Chat template literals added next to the pad token, in id order:
// ChatML, Llama-2, Llama-3, OpenChat, Zephyr.
inline constexpr std::array<std::string_view, 14> kChatTemplateTokens{
    "<|im_start|>",       "<|im_end|>",          "[INST]",         "[/INST]",   "<<SYS>>",
    "<</SYS>>",           "<|begin_of_text|>",   "<|start_header_id|>", "<|end_header_id|>",
    "<|eot_id|>",         "<|end_of_turn|>",     "<|user|>",       "<|system|>", "<|assistant|>"};

class EncodeError : public Error {
 public:
  using Error::Error;
};

struct TokenizerOptions {
  // Replace ' ' with U+2581, prefix each text span with it, and split
  // pieces at word starts.
  bool space_prefix = false;
  // Characters missing from the vocabulary become <0xXX> byte tokens.
  bool byte_fallback = true;

  bool operator==(const TokenizerOptions&) const = default;
};

// Immutable BPE tokenizer definition.
class TokenizerDef {
 public:
  using Merge = std::pair<std::string, std::string>;

  // `tokens[i]` is the string for id i. Every special literal must already be
  // in `tokens` at its id. Throws ValidationError on any broken invariant.
  TokenizerDef(std::vector<std::string> tokens, std::vector<Merge> merges, std::vector<SpecialToken> specials,
               TokenizerOptions options = {}, std::optional<std::size_t> base_size = std::nullopt);

  // 256 byte tokens and nothing else: one token per UTF-8 byte.
  static TokenizerDef byte_level();

  std::size_t size() const { return tokens_.size(); }
  // Size of the definition this one was extended from; own size otherwise.
  std::size_t base_size() const { return base_size_; }
  const std::string& token(TokenId id) const { return tokens_.at(id); }
  std::optional<TokenId> find(std::string_view token) const;
  const std::vector<std::string>& tokens() const { return tokens_; }
  const std::vector<Merge>& merges() const { return merges_; }
  const std::vector<SpecialToken>& specials() const { return specials_; }
  const TokenizerOptions& options() const { return options_; }

  struct MergeResult {
    std::uint32_t rank;
    TokenId merged;
  };
  std::optional<MergeResult> merge(TokenId left, TokenId right) const;
  std::optional<TokenId> byte_token(unsigned char byte) const { return byte_ids_[byte]; }

 private:
  std::vector<std::string> tokens_;
  std::vector<Merge> merges_;
  std::vector<SpecialToken> specials_;
  TokenizerOptions options_;
  std::size_t base_size_ = 0;
  std::unordered_map<std::string, TokenId> index_;
  std::unordered_map<std::uint64_t, MergeResult> merge_table_;
  std::array<std::optional<TokenId>, 256> byte_ids_{};
};

// Reusable encoder. Holds a per-word cache, so one instance per thread.
class Encoder {
 public:
  explicit Encoder(const TokenizerDef& def, std::size_t cache_limit = 1 << 16);

  void encode(std::string_view text, std::vector<TokenId>& out);
  std::vector<TokenId> encode(std::string_view text);
  std::uint64_t count(std::string_view text);

 private:
  void encode_span(std::string_view span, std::vector<TokenId>& out);
  void encode_piece(std::string_view piece, std::vector<TokenId>& out);
  void merge_symbols(std::string_view piece, std::vector<TokenId>& out);

  const TokenizerDef& def_;
  std::size_t cache_limit_;
  std::unordered_map<std::string, std::vector<TokenId>> cache_;
  std::vector<std::vector<const SpecialToken*>> specials_by_byte_;
  std::string scratch_;
};

// Special literals are matched first (leftmost, longest) and emitted whole;
// the rest is encoded by lowest-rank-first merging.
std::vector<TokenId> encode(const TokenizerDef& def, std::string_view text);

// Concatenates token strings, expanding byte tokens and the space marker.
std::string decode(const TokenizerDef& def, std::span<const TokenId> ids);

// Total encoded length. OpenMP-parallel over documents. EncodeError messages
// name the offending document id.
std::uint64_t count_tokens(const TokenizerDef& def, std::span<const Document> docs);
std::uint64_t count_tokens_serial(const TokenizerDef& def, std::span<const Document> docs);

// Token counter for streaming use (not thread-safe; one per thread).
std::function<std::uint64_t(const Document&)> make_counter(const TokenizerDef& def);

// Appends the pad token (if any), then `chat` literals in order, then
// <|reserved_n|> tokens until size is the smallest multiple of `multiple`
// not below the grown size. Existing ids are untouched.
TokenizerDef extend_vocab(const TokenizerDef& def, const std::optional<std::string>& pad,
                          std::span<const std::string> chat, std::size_t multiple = 64);

std::size_t count_specials(const TokenizerDef& def, SpecialKind kind);

// Percentage by which `count_b` undercuts `count_a`: 100 * (a - b) / a.
double compare_counts(std::uint64_t count_a, std::uint64_t count_b);
// The same value rendered to two decimals, rounded half away from zero.
std::string compare_counts_2dp(std::uint64_t count_a, std::uint64_t count_b);

struct BpcInput {
  std::vector<double> token_losses;  // -log2 p(token | prefix), bits
  std::uint64_t char_count = 0;
};

// Bits per character: sum of token losses over character count.
double bpc(const BpcInput& input);

// --- tokenizer.json files ---------------------------------------------------

struct TokenizerFile {
  TokenizerDef def;
  nlohmann::json raw;  // original document, used as the template on save
};

// Reads the single-file JSON tokenizer format. Fields read:
//   model.type          must be "BPE" when present
//   model.vocab         object: token -> id
//   model.merges        ["left right", ...] or [["left", "right"], ...]
//   model.byte_fallback bool (default true)
//   added_tokens[]      {id, content}; matched atomically when encoding
//   normalizer / pre_tokenizer
//                       a Replace(" " -> U+2581), Prepend(U+2581) or
//                       Metaspace step switches on space_prefix
// Special-token kinds are inferred from the literal: <|reserved_N|> ->
// reserved, known chat template literal -> chat, contains "pad" -> pad,
// anything else -> control.
TokenizerFile load_tokenizer(const std::filesystem::path& path);
TokenizerFile parse_tokenizer(const nlohmann::json& j);

// Writes `def` using `raw` as the template (other fields are preserved).
// Merges are written in the [left, right] array form.
nlohmann::json to_json(const TokenizerDef& def, const nlohmann::json& raw = nullptr);
void save_tokenizer(const TokenizerDef& def, const std::filesystem::path& path, const nlohmann::json& raw = nullptr);

}  // namespace pint::tok
