#include <algorithm>
#include <array>
#include <cctype>
#include <vector>

#include "pint/clean.hpp"

namespace pint::clean {

namespace {

constexpr std::array<std::string_view, 14> kMathEnvironments{
    "equation", "equation*", "align", "align*",   "gather",      "gather*",  "multline",
    "multline*", "eqnarray", "eqnarray*", "displaymath", "math", "flalign", "flalign*"};

constexpr std::array<std::string_view, 9> kReferenceCommands{
    "cite", "citep", "citet", "ref", "eqref", "autoref", "cref", "Cref", "pageref"};

int heading_level(std::string_view cmd) {
  if (cmd == "chapter" || cmd == "section") return 1;
  if (cmd == "subsection") return 2;
  if (cmd == "subsubsection") return 3;
  if (cmd == "paragraph") return 4;
  return 0;
}

bool is_list_environment(std::string_view env) {
  return env == "itemize" || env == "enumerate" || env == "description";
}

bool is_blank(char c) { return c == ' ' || c == '\t'; }

class Converter {
 public:
  explicit Converter(std::string_view in) : in_(in) { out_.reserve(in.size()); }

  std::string run() {
    while (pos_ < in_.size()) step();
    return std::move(out_);
  }

 private:
  struct ListFrame {
    std::string env;
    int counter = 0;
  };

  bool at_line_start() const { return pos_ == 0 || in_[pos_ - 1] == '\n'; }

  void trim_trailing_blanks() {
    while (!out_.empty() && is_blank(out_.back())) out_.pop_back();
  }

  void begin_line() {
    trim_trailing_blanks();
    if (!out_.empty() && out_.back() != '\n') out_.push_back('\n');
  }

  void skip_blanks() {
    while (pos_ < in_.size() && is_blank(in_[pos_])) ++pos_;
  }

  // Drops the rest of a directive-only line.
  void skip_line_if_directive_only() {
    trim_trailing_blanks();
    if (!out_.empty() && out_.back() != '\n') return;
    skip_blanks();
    if (pos_ < in_.size() && in_[pos_] == '\n') ++pos_;
  }

  // Reads a balanced {...} group starting at pos_ (after optional blanks).
  // Returns false and leaves pos_ unchanged if there is none.
  bool read_group(std::string_view& body) {
    std::size_t p = pos_;
    while (p < in_.size() && is_blank(in_[p])) ++p;
    if (p >= in_.size() || in_[p] != '{') return false;
    int depth = 0;
    for (std::size_t i = p; i < in_.size(); ++i) {
      char c = in_[i];
      if (c == '\\') {
        ++i;
        continue;
      }
      if (c == '{') ++depth;
      if (c == '}' && --depth == 0) {
        body = in_.substr(p + 1, i - p - 1);
        pos_ = i + 1;
        return true;
      }
    }
    return false;
  }

  void skip_optional_argument() {
    std::size_t p = pos_;
    while (p < in_.size() && is_blank(in_[p])) ++p;
    if (p < in_.size() && in_[p] == '[') {
      auto close = in_.find(']', p);
      if (close != std::string_view::npos) pos_ = close + 1;
    }
  }

  void emit_fence(std::string_view verbatim) {
    begin_line();
    out_ += "```math\n";
    out_ += verbatim;
    out_ += "\n```";
  }

  void copy_fenced_block() {
    // Existing fenced block: copied through its closing fence line.
    auto first_nl = in_.find('\n', pos_);
    if (first_nl == std::string_view::npos) {
      out_ += in_.substr(pos_);
      pos_ = in_.size();
      return;
    }
    std::size_t line = first_nl + 1;
    while (line < in_.size()) {
      auto nl = in_.find('\n', line);
      std::size_t end = nl == std::string_view::npos ? in_.size() : nl;
      if (in_.compare(line, 3, "```") == 0) {
        out_ += in_.substr(pos_, end - pos_);
        pos_ = end;
        return;
      }
      line = end + 1;
    }
    out_ += in_.substr(pos_);
    pos_ = in_.size();
  }

  // Inline code spans are never rewritten.
  void code_span() {
    auto close = in_.find('`', pos_ + 1);
    auto nl = in_.find('\n', pos_ + 1);
    if (close == std::string_view::npos || close > nl) {
      out_.push_back('`');
      ++pos_;
      return;
    }
    out_ += in_.substr(pos_, close + 1 - pos_);
    pos_ = close + 1;
  }

  void comment() {
    bool whole_line = true;
    for (auto it = out_.rbegin(); it != out_.rend() && *it != '\n'; ++it)
      if (!is_blank(*it)) whole_line = false;
    trim_trailing_blanks();
    auto nl = in_.find('\n', pos_);
    pos_ = nl == std::string_view::npos ? in_.size() : nl;
    if (whole_line && pos_ < in_.size()) ++pos_;
  }

  void dollar_math() {
    if (in_.compare(pos_, 2, "$$") == 0) {
      auto close = in_.find("$$", pos_ + 2);
      if (close != std::string_view::npos) {
        emit_fence(in_.substr(pos_, close + 2 - pos_));
        pos_ = close + 2;
        return;
      }
      out_ += "$$";
      pos_ += 2;
      return;
    }
    for (std::size_t i = pos_ + 1; i < in_.size(); ++i) {
      if (in_[i] == '\\') {
        ++i;
        continue;
      }
      if (in_[i] == '$') {
        out_ += in_.substr(pos_, i + 1 - pos_);
        pos_ = i + 1;
        return;
      }
    }
    out_.push_back('$');
    ++pos_;
  }

  void command() {
    const std::size_t start = pos_;
    std::size_t p = pos_ + 1;
    if (p >= in_.size()) {
      out_.push_back('\\');
      ++pos_;
      return;
    }
    if (!std::isalpha(static_cast<unsigned char>(in_[p]))) {
      if (in_[p] == '[') {
        auto close = in_.find("\\]", p + 1);
        if (close != std::string_view::npos) {
          emit_fence(in_.substr(start, close + 2 - start));
          pos_ = close + 2;
          return;
        }
      }
      out_ += in_.substr(start, 2);
      pos_ = p + 1;
      return;
    }
    while (p < in_.size() && std::isalpha(static_cast<unsigned char>(in_[p]))) ++p;
    std::string_view name = in_.substr(start + 1, p - start - 1);
    bool starred = p < in_.size() && in_[p] == '*';
    pos_ = p;

    if (int level = heading_level(name); level > 0) {
      if (starred) ++pos_;
      skip_optional_argument();
      std::string_view title;
      if (read_group(title)) {
        begin_line();
        out_.append(static_cast<std::size_t>(level), '#');
        out_.push_back(' ');
        out_ += Converter(title).run();
        return;
      }
      pos_ = p;
    } else if (name == "textbf" || name == "emph" || name == "textit" || name == "texttt") {
      std::string_view body;
      if (read_group(body)) {
        if (name == "texttt") {
          out_ += '`';
          out_ += body;
          out_ += '`';
        } else {
          std::string_view mark = name == "textbf" ? "**" : "*";
          out_ += mark;
          out_ += Converter(body).run();
          out_ += mark;
        }
        return;
      }
    } else if (std::find(kReferenceCommands.begin(), kReferenceCommands.end(), name) !=
               kReferenceCommands.end()) {
      skip_optional_argument();
      std::string_view keys;
      if (read_group(keys)) {
        out_ += '[';
        out_ += keys;
        out_ += ']';
        return;
      }
      pos_ = p;
    } else if (name == "begin" || name == "end") {
      std::string_view env;
      if (read_group(env)) {
        if (name == "begin" && std::find(kMathEnvironments.begin(), kMathEnvironments.end(), env) !=
                                   kMathEnvironments.end()) {
          std::string closing = "\\end{" + std::string(env) + "}";
          auto close = in_.find(closing, pos_);
          if (close != std::string_view::npos) {
            emit_fence(in_.substr(start, close + closing.size() - start));
            pos_ = close + closing.size();
            return;
          }
        } else if (is_list_environment(env)) {
          if (name == "begin") {
            lists_.push_back({std::string(env), 0});
            skip_line_if_directive_only();
            return;
          }
          if (!lists_.empty()) {
            lists_.pop_back();
            skip_line_if_directive_only();
            return;
          }
        }
      }
      pos_ = p;
    } else if (name == "item" && !lists_.empty()) {
      auto& frame = lists_.back();
      begin_line();
      out_.append(2 * (lists_.size() - 1), ' ');
      std::string label;
      std::size_t q = pos_;
      while (q < in_.size() && is_blank(in_[q])) ++q;
      if (q < in_.size() && in_[q] == '[') {
        auto close = in_.find(']', q);
        if (close != std::string_view::npos) {
          label = std::string(in_.substr(q + 1, close - q - 1));
          pos_ = close + 1;
        }
      }
      if (frame.env == "enumerate")
        out_ += std::to_string(++frame.counter) + ". ";
      else
        out_ += "- ";
      if (!label.empty()) out_ += "**" + label + "** ";
      skip_blanks();
      return;
    }

    // Unknown command: left verbatim, arguments processed as ordinary text.
    out_ += in_.substr(start, p - start);
  }

  void step() {
    char c = in_[pos_];
    if (c == '`' && at_line_start() && in_.compare(pos_, 3, "```") == 0) {
      copy_fenced_block();
    } else if (c == '`') {
      code_span();
    } else if (c == '%') {
      comment();
    } else if (c == '$') {
      dollar_math();
    } else if (c == '\\') {
      command();
    } else {
      out_.push_back(c);
      ++pos_;
    }
  }

  std::string_view in_;
  std::size_t pos_ = 0;
  std::string out_;
  std::vector<ListFrame> lists_;
};

}  // namespace

std::string latex_to_markdown(std::string_view text) { return Converter(text).run(); }

}  // namespace pint::clean
