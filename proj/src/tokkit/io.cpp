#include <algorithm>
#include <cctype>
#include <fstream>
#include <sstream>

#include "pint/tokkit.hpp"

namespace pint::tok {

namespace {

using nlohmann::json;

bool is_reserved_literal(std::string_view s) {
  constexpr std::string_view prefix = "<|reserved_";
  constexpr std::string_view suffix = "|>";
  if (s.size() <= prefix.size() + suffix.size()) return false;
  if (s.substr(0, prefix.size()) != prefix || s.substr(s.size() - suffix.size()) != suffix) return false;
  auto digits = s.substr(prefix.size(), s.size() - prefix.size() - suffix.size());
  return std::all_of(digits.begin(), digits.end(), [](char c) { return c >= '0' && c <= '9'; });
}

SpecialKind infer_kind(std::string_view literal) {
  if (is_reserved_literal(literal)) return SpecialKind::reserved;
  if (std::find(kChatTemplateTokens.begin(), kChatTemplateTokens.end(), literal) != kChatTemplateTokens.end())
    return SpecialKind::chat;
  std::string lower(literal);
  std::transform(lower.begin(), lower.end(), lower.begin(), [](unsigned char c) { return std::tolower(c); });
  if (lower.find("pad") != std::string::npos) return SpecialKind::pad;
  return SpecialKind::control;
}

// True if this normalizer or pre-tokenizer step (or any nested step) maps
// spaces to the marker.
bool marks_spaces(const json& step) {
  if (!step.is_object()) return false;
  const auto type = step.value("type", std::string());
  if (type == "Metaspace") return true;
  if (type == "Prepend" && step.value("prepend", std::string()) == kSpaceMarker) return true;
  if (type == "Replace") {
    const auto& pattern = step.contains("pattern") ? step["pattern"] : json();
    std::string from;
    if (pattern.is_object() && pattern.contains("String") && pattern["String"].is_string())
      from = pattern["String"].get<std::string>();
    if (from == " " && step.value("content", std::string()) == kSpaceMarker) return true;
  }
  for (const char* key : {"normalizers", "pretokenizers"}) {
    if (step.contains(key) && step[key].is_array())
      for (const auto& inner : step[key])
        if (marks_spaces(inner)) return true;
  }
  return false;
}

TokenizerDef::Merge parse_merge(const json& m, std::size_t index) {
  if (m.is_string()) {
    const auto s = m.get<std::string>();
    auto space = s.find(' ');
    if (space == std::string::npos || space == 0 || space + 1 >= s.size() || s.find(' ', space + 1) != std::string::npos)
      throw ParseError("merge " + std::to_string(index) + " is not of the form 'left right': '" + s + "'");
    return {s.substr(0, space), s.substr(space + 1)};
  }
  if (m.is_array() && m.size() == 2 && m[0].is_string() && m[1].is_string())
    return {m[0].get<std::string>(), m[1].get<std::string>()};
  throw ParseError("merge " + std::to_string(index) + " must be a string or a pair of strings");
}

}  // namespace

TokenizerFile parse_tokenizer(const json& j) {
  if (!j.is_object()) throw ParseError("tokenizer file must be a JSON object");
  if (!j.contains("model") || !j["model"].is_object()) throw ParseError("tokenizer file has no 'model' object");
  const auto& model = j["model"];
  if (model.contains("type") && model["type"] != "BPE")
    throw ParseError("unsupported model type " + model["type"].dump() + "; only BPE is supported");
  if (!model.contains("vocab") || !model["vocab"].is_object()) throw ParseError("model.vocab must be an object");

  const auto& vocab = model["vocab"];
  std::vector<std::string> tokens(vocab.size());
  std::vector<bool> seen(vocab.size(), false);

  auto place = [&](const std::string& token, const json& id_json) {
    if (!id_json.is_number_unsigned() && !id_json.is_number_integer())
      throw ParseError("id of token '" + token + "' is not an integer");
    const auto id = id_json.get<std::int64_t>();
    if (id < 0) throw ParseError("negative id for token '" + token + "'");
    const auto uid = static_cast<std::size_t>(id);
    if (uid >= tokens.size()) {
      tokens.resize(uid + 1);
      seen.resize(uid + 1, false);
    }
    if (seen[uid]) {
      if (tokens[uid] == token) return;
      throw ParseError("id " + std::to_string(uid) + " assigned to both '" + tokens[uid] + "' and '" + token + "'");
    }
    tokens[uid] = token;
    seen[uid] = true;
  };

  for (const auto& [token, id] : vocab.items()) place(token, id);

  std::vector<SpecialToken> specials;
  if (j.contains("added_tokens") && !j["added_tokens"].is_null()) {
    if (!j["added_tokens"].is_array()) throw ParseError("added_tokens must be an array");
    for (const auto& a : j["added_tokens"]) {
      if (!a.is_object() || !a.contains("id") || !a.contains("content") || !a["content"].is_string())
        throw ParseError("added_tokens entries need 'id' and 'content'");
      const auto literal = a["content"].get<std::string>();
      if (auto it = vocab.find(literal); it != vocab.end() && *it != a["id"])
        throw ParseError("added token '" + literal + "' has a different id in model.vocab");
      place(literal, a["id"]);
      specials.push_back({literal, a["id"].get<TokenId>(), infer_kind(literal)});
    }
  }

  for (std::size_t id = 0; id < seen.size(); ++id)
    if (!seen[id]) throw ParseError("token ids are not contiguous: id " + std::to_string(id) + " is unused");

  std::vector<TokenizerDef::Merge> merges;
  if (model.contains("merges") && !model["merges"].is_null()) {
    if (!model["merges"].is_array()) throw ParseError("model.merges must be an array");
    merges.reserve(model["merges"].size());
    for (std::size_t i = 0; i < model["merges"].size(); ++i) merges.push_back(parse_merge(model["merges"][i], i));
  }

  TokenizerOptions options;
  options.byte_fallback = model.value("byte_fallback", true);
  options.space_prefix = (j.contains("normalizer") && marks_spaces(j["normalizer"])) ||
                         (j.contains("pre_tokenizer") && marks_spaces(j["pre_tokenizer"]));

  return TokenizerFile{TokenizerDef(std::move(tokens), std::move(merges), std::move(specials), options), j};
}

TokenizerFile load_tokenizer(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path.string());
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
  try {
    return parse_tokenizer(j);
  } catch (const ParseError& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
}

json to_json(const TokenizerDef& def, const json& raw) {
  json out = raw.is_object() ? raw : json::object();

  std::vector<bool> is_special(def.size(), false);
  for (const auto& s : def.specials()) is_special[s.id] = true;

  json vocab = json::object();
  for (std::size_t id = 0; id < def.size(); ++id)
    if (!is_special[id]) vocab[def.token(static_cast<TokenId>(id))] = id;

  json merges = json::array();
  for (const auto& [l, r] : def.merges()) merges.push_back(json::array({l, r}));

  json model = out.contains("model") && out["model"].is_object() ? out["model"] : json::object();
  model["type"] = "BPE";
  model["vocab"] = std::move(vocab);
  model["merges"] = std::move(merges);
  model["byte_fallback"] = def.options().byte_fallback;
  out["model"] = std::move(model);

  // Keep per-token flags from the template for tokens it already declared.
  std::unordered_map<std::string, json> previous;
  if (raw.is_object() && raw.contains("added_tokens") && raw["added_tokens"].is_array())
    for (const auto& a : raw["added_tokens"])
      if (a.is_object() && a.contains("content") && a["content"].is_string())
        previous[a["content"].get<std::string>()] = a;

  auto specials = def.specials();
  std::sort(specials.begin(), specials.end(), [](const auto& a, const auto& b) { return a.id < b.id; });
  json added = json::array();
  for (const auto& s : specials) {
    json a;
    if (auto it = previous.find(s.literal); it != previous.end()) {
      a = it->second;
    } else {
      a = {{"single_word", false}, {"lstrip", false}, {"rstrip", false}, {"normalized", false}, {"special", true}};
    }
    a["id"] = s.id;
    a["content"] = s.literal;
    added.push_back(std::move(a));
  }
  out["added_tokens"] = std::move(added);

  if (def.options().space_prefix && !(out.contains("normalizer") && marks_spaces(out["normalizer"])) &&
      !(out.contains("pre_tokenizer") && marks_spaces(out["pre_tokenizer"]))) {
    out["normalizer"] = {{"type", "Sequence"},
                         {"normalizers",
                          json::array({{{"type", "Prepend"}, {"prepend", kSpaceMarker}},
                                       {{"type", "Replace"},
                                        {"pattern", {{"String", " "}}},
                                        {"content", kSpaceMarker}}})}};
  }
  return out;
}

void save_tokenizer(const TokenizerDef& def, const std::filesystem::path& path, const json& raw) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write " + path.string());
  out << to_json(def, raw).dump(2) << '\n';
  if (!out) throw Error("write failed: " + path.string());
}

}  // namespace pint::tok
