#include <algorithm>
#include <cstdio>
#include <queue>
#include <unordered_set>

#include "pint/tokkit.hpp"
#include "pint/utf8.hpp"

namespace pint::tok {

namespace {

std::uint64_t pair_key(TokenId left, TokenId right) {
  return (static_cast<std::uint64_t>(left) << 32) | right;
}

std::optional<unsigned char> parse_byte_token(std::string_view t) {
  if (t.size() != 6 || t.substr(0, 3) != "<0x" || t[5] != '>') return std::nullopt;
  auto hex = [](char c) -> int {
    if (c >= '0' && c <= '9') return c - '0';
    if (c >= 'A' && c <= 'F') return c - 'A' + 10;
    if (c >= 'a' && c <= 'f') return c - 'a' + 10;
    return -1;
  };
  int hi = hex(t[3]);
  int lo = hex(t[4]);
  if (hi < 0 || lo < 0) return std::nullopt;
  return static_cast<unsigned char>(hi * 16 + lo);
}

std::string byte_token_name(unsigned b) {
  char buf[8];
  std::snprintf(buf, sizeof buf, "<0x%02X>", b);
  return buf;
}

}  // namespace

std::string_view to_string(SpecialKind kind) {
  switch (kind) {
    case SpecialKind::pad: return "pad";
    case SpecialKind::chat: return "chat";
    case SpecialKind::reserved: return "reserved";
    case SpecialKind::control: return "control";
  }
  return "control";
}

TokenizerDef::TokenizerDef(std::vector<std::string> tokens, std::vector<Merge> merges,
                           std::vector<SpecialToken> specials, TokenizerOptions options,
                           std::optional<std::size_t> base_size)
    : tokens_(std::move(tokens)),
      merges_(std::move(merges)),
      specials_(std::move(specials)),
      options_(options),
      base_size_(base_size.value_or(tokens_.size())) {
  if (tokens_.size() > 0xFFFFFFFFu) throw ValidationError("vocabulary too large");
  index_.reserve(tokens_.size());
  for (std::size_t id = 0; id < tokens_.size(); ++id) {
    const auto& t = tokens_[id];
    if (t.empty()) throw ValidationError("empty token at id " + std::to_string(id));
    if (!index_.emplace(t, static_cast<TokenId>(id)).second) throw ValidationError("duplicate token '" + t + "'");
    if (auto b = parse_byte_token(t)) byte_ids_[*b] = static_cast<TokenId>(id);
  }

  std::unordered_set<std::string> literals;
  for (const auto& s : specials_) {
    if (s.id >= tokens_.size() || tokens_[s.id] != s.literal)
      throw ValidationError("special token '" + s.literal + "' does not match the vocabulary");
    if (!literals.insert(s.literal).second) throw ValidationError("duplicate special token '" + s.literal + "'");
  }

  merge_table_.reserve(merges_.size());
  for (std::size_t rank = 0; rank < merges_.size(); ++rank) {
    const auto& [l, r] = merges_[rank];
    auto left = find(l);
    auto right = find(r);
    auto merged = find(l + r);
    if (!left || !right || !merged)
      throw ValidationError("merge (" + l + ", " + r + ") references a token missing from the vocabulary");
    if (literals.count(l + r)) throw ValidationError("merge (" + l + ", " + r + ") produces a special token");
    if (!merge_table_.emplace(pair_key(*left, *right), MergeResult{static_cast<std::uint32_t>(rank), *merged}).second)
      throw ValidationError("duplicate merge (" + l + ", " + r + ")");
  }
}

TokenizerDef TokenizerDef::byte_level() {
  std::vector<std::string> tokens;
  tokens.reserve(256);
  for (unsigned b = 0; b < 256; ++b) tokens.push_back(byte_token_name(b));
  return TokenizerDef(std::move(tokens), {}, {}, TokenizerOptions{false, true});
}

std::optional<TokenId> TokenizerDef::find(std::string_view token) const {
  auto it = index_.find(std::string(token));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

std::optional<TokenizerDef::MergeResult> TokenizerDef::merge(TokenId left, TokenId right) const {
  auto it = merge_table_.find(pair_key(left, right));
  if (it == merge_table_.end()) return std::nullopt;
  return it->second;
}

// --- Encoder ----------------------------------------------------------------

Encoder::Encoder(const TokenizerDef& def, std::size_t cache_limit)
    : def_(def), cache_limit_(cache_limit), specials_by_byte_(256) {
  for (const auto& s : def_.specials()) specials_by_byte_[static_cast<unsigned char>(s.literal[0])].push_back(&s);
  for (auto& bucket : specials_by_byte_)
    std::stable_sort(bucket.begin(), bucket.end(),
                     [](const SpecialToken* a, const SpecialToken* b) { return a->literal.size() > b->literal.size(); });
}

void Encoder::encode(std::string_view text, std::vector<TokenId>& out) {
  std::size_t span_start = 0;
  std::size_t pos = 0;
  while (pos < text.size()) {
    const auto& candidates = specials_by_byte_[static_cast<unsigned char>(text[pos])];
    const SpecialToken* hit = nullptr;
    for (const auto* s : candidates) {
      if (text.compare(pos, s->literal.size(), s->literal) == 0) {
        hit = s;
        break;
      }
    }
    if (hit) {
      encode_span(text.substr(span_start, pos - span_start), out);
      out.push_back(hit->id);
      pos += hit->literal.size();
      span_start = pos;
    } else {
      ++pos;
    }
  }
  encode_span(text.substr(span_start), out);
}

std::vector<TokenId> Encoder::encode(std::string_view text) {
  std::vector<TokenId> out;
  encode(text, out);
  return out;
}

std::uint64_t Encoder::count(std::string_view text) {
  std::vector<TokenId> ids;
  encode(text, ids);
  return ids.size();
}

void Encoder::encode_span(std::string_view span, std::vector<TokenId>& out) {
  if (span.empty()) return;
  if (!def_.options().space_prefix) {
    encode_piece(span, out);
    return;
  }
  std::string marked;
  marked.reserve(span.size() + span.size() / 4 + 3);
  marked += kSpaceMarker;
  for (char c : span) {
    if (c == ' ')
      marked += kSpaceMarker;
    else
      marked.push_back(c);
  }
  // Each piece starts at a marker.
  std::string_view view(marked);
  std::size_t start = 0;
  while (start < view.size()) {
    auto next = view.find(kSpaceMarker, start + kSpaceMarker.size());
    if (next == std::string_view::npos) next = view.size();
    encode_piece(view.substr(start, next - start), out);
    start = next;
  }
}

void Encoder::encode_piece(std::string_view piece, std::vector<TokenId>& out) {
  if (cache_limit_ == 0 || piece.size() > 64) {
    merge_symbols(piece, out);
    return;
  }
  scratch_.assign(piece);
  if (auto it = cache_.find(scratch_); it != cache_.end()) {
    out.insert(out.end(), it->second.begin(), it->second.end());
    return;
  }
  std::vector<TokenId> ids;
  merge_symbols(piece, ids);
  out.insert(out.end(), ids.begin(), ids.end());
  if (cache_.size() >= cache_limit_) cache_.clear();
  cache_.emplace(scratch_, std::move(ids));
}

void Encoder::merge_symbols(std::string_view piece, std::vector<TokenId>& out) {
  struct Symbol {
    TokenId id;
    int prev;
    int next;
    bool alive;
  };
  std::vector<Symbol> syms;
  syms.reserve(piece.size());
  auto push = [&](TokenId id) {
    int idx = static_cast<int>(syms.size());
    syms.push_back({id, idx - 1, idx + 1, true});
  };

  std::size_t pos = 0;
  while (pos < piece.size()) {
    std::size_t len = utf8::sequence_length(piece, pos);
    auto ch = piece.substr(pos, len);
    if (auto id = def_.find(ch)) {
      push(*id);
    } else if (def_.options().byte_fallback) {
      for (char b : ch) {
        auto bid = def_.byte_token(static_cast<unsigned char>(b));
        if (!bid) {
          std::size_t p = pos;
          char buf[16];
          std::snprintf(buf, sizeof buf, "U+%04X", static_cast<unsigned>(utf8::next(piece, p)));
          throw EncodeError(std::string("no vocabulary or byte-fallback entry for ") + buf);
        }
        push(*bid);
      }
    } else {
      std::size_t p = pos;
      char buf[16];
      std::snprintf(buf, sizeof buf, "U+%04X", static_cast<unsigned>(utf8::next(piece, p)));
      throw EncodeError(std::string("no vocabulary entry for ") + buf);
    }
    pos += len;
  }
  if (syms.empty()) return;
  syms.back().next = -1;

  struct Candidate {
    std::uint32_t rank;
    int left;
    int right;
    TokenId left_id;
    TokenId right_id;
    bool operator>(const Candidate& o) const { return rank != o.rank ? rank > o.rank : left > o.left; }
  };
  std::priority_queue<Candidate, std::vector<Candidate>, std::greater<>> queue;
  auto consider = [&](int left) {
    if (left < 0) return;
    int right = syms[left].next;
    if (right < 0) return;
    if (auto m = def_.merge(syms[left].id, syms[right].id))
      queue.push({m->rank, left, right, syms[left].id, syms[right].id});
  };
  for (int i = 0; i + 1 < static_cast<int>(syms.size()); ++i) consider(i);

  while (!queue.empty()) {
    Candidate c = queue.top();
    queue.pop();
    auto& l = syms[c.left];
    if (!l.alive || l.next != c.right || l.id != c.left_id || syms[c.right].id != c.right_id) continue;
    auto& r = syms[c.right];
    l.id = def_.merge(c.left_id, c.right_id)->merged;
    r.alive = false;
    l.next = r.next;
    if (r.next >= 0) syms[r.next].prev = c.left;
    consider(l.prev);
    consider(c.left);
  }

  for (int i = 0; i >= 0; i = syms[i].next) out.push_back(syms[i].id);
}

std::vector<TokenId> encode(const TokenizerDef& def, std::string_view text) {
  Encoder enc(def, 0);
  return enc.encode(text);
}

std::string decode(const TokenizerDef& def, std::span<const TokenId> ids) {
  std::string out;
  bool span_start = true;
  for (TokenId id : ids) {
    const auto& t = def.token(id);
    bool special = std::any_of(def.specials().begin(), def.specials().end(),
                               [&](const SpecialToken& s) { return s.id == id; });
    if (special) {
      out += t;
      span_start = true;
      continue;
    }
    std::string piece;
    if (auto byte = parse_byte_token(t)) {
      piece.push_back(static_cast<char>(*byte));
    } else {
      piece = t;
    }
    if (def.options().space_prefix) {
      std::string spaced;
      for (std::size_t i = 0; i < piece.size();) {
        if (piece.compare(i, kSpaceMarker.size(), kSpaceMarker) == 0) {
          spaced.push_back(' ');
          i += kSpaceMarker.size();
        } else {
          spaced.push_back(piece[i++]);
        }
      }
      piece = std::move(spaced);
      if (span_start && !piece.empty() && piece[0] == ' ') piece.erase(0, 1);
    }
    span_start = false;
    out += piece;
  }
  return out;
}

}  // namespace pint::tok
