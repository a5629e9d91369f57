#ifndef PELW_TEXT_HPP
#define PELW_TEXT_HPP

#include <cctype>
#include <string>
#include <string_view>
#include <vector>

#include "pelw/error.hpp"

namespace pelw::text {

/// Hand-rolled scanner shared by every input grammar. Whitespace and `#`
/// comments (to end of line) are insignificant between tokens.
class Cursor {
 public:
  explicit Cursor(std::string_view src) : src_(src) {}

  void skip_space() {
    while (pos_ < src_.size()) {
      char c = src_[pos_];
      if (std::isspace(static_cast<unsigned char>(c))) {
        ++pos_;
      } else if (c == '#') {
        while (pos_ < src_.size() && src_[pos_] != '\n') ++pos_;
      } else {
        break;
      }
    }
  }

  bool at_end() {
    skip_space();
    return pos_ >= src_.size();
  }

  std::size_t pos() const { return pos_; }
  void set_pos(std::size_t p) { pos_ = p; }
  std::string_view source() const { return src_; }

  char peek() {
    skip_space();
    return pos_ < src_.size() ? src_[pos_] : '\0';
  }

  bool looking_at(std::string_view tok) {
    skip_space();
    return src_.substr(pos_, tok.size()) == tok;
  }

  bool accept(std::string_view tok) {
    if (!looking_at(tok)) return false;
    pos_ += tok.size();
    return true;
  }

  /// Accepts `word` only when it is a whole identifier (not a prefix).
  bool accept_keyword(std::string_view word) {
    skip_space();
    if (src_.substr(pos_, word.size()) != word) return false;
    std::size_t end = pos_ + word.size();
    if (end < src_.size() && is_ident_char(src_[end])) return false;
    pos_ = end;
    return true;
  }

  void expect(std::string_view tok) {
    if (!accept(tok)) fail("expected '" + std::string(tok) + "'");
  }

  static bool is_ident_start(char c) {
    return std::isalpha(static_cast<unsigned char>(c)) || c == '_';
  }
  static bool is_ident_char(char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '\'';
  }

  bool at_identifier() {
    skip_space();
    return pos_ < src_.size() && is_ident_start(src_[pos_]);
  }

  std::string identifier() {
    skip_space();
    if (pos_ >= src_.size() || !is_ident_start(src_[pos_])) fail("expected identifier");
    std::size_t start = pos_;
    while (pos_ < src_.size() && is_ident_char(src_[pos_])) ++pos_;
    return std::string(src_.substr(start, pos_ - start));
  }

  bool at_number() {
    skip_space();
    return pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]));
  }

  unsigned long number() {
    skip_space();
    if (!at_number()) fail("expected number");
    unsigned long v = 0;
    while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) {
      v = v * 10 + static_cast<unsigned long>(src_[pos_] - '0');
      ++pos_;
    }
    return v;
  }

  /// Identifier or bare number, used for element and symbol names.
  std::string word() {
    skip_space();
    std::size_t start = pos_;
    while (pos_ < src_.size() && (is_ident_char(src_[pos_]))) ++pos_;
    if (start == pos_) fail("expected name");
    return std::string(src_.substr(start, pos_ - start));
  }

  [[noreturn]] void fail(const std::string& msg) const {
    std::size_t line = 1, col = 1;
    for (std::size_t i = 0; i < pos_ && i < src_.size(); ++i) {
      if (src_[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
    throw Error(ErrorKind::SyntaxError,
                msg + " at line " + std::to_string(line) + ", column " + std::to_string(col));
  }

 private:
  std::string_view src_;
  std::size_t pos_ = 0;
};

inline std::string join(const std::vector<std::string>& parts, std::string_view sep) {
  std::string out;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (i) out += sep;
    out += parts[i];
  }
  return out;
}

}  // namespace pelw::text

#endif
