#pragma once

#include <cctype>
#include <cstddef>
#include <string>
#include <string_view>

#include "../error.hpp"

namespace tela::detail {

enum class Tok { Ident, Int, String, Header, Punct, BodyMarker, EndMarker, Eof };

struct Token {
  Tok kind = Tok::Eof;
  std::string text;
  std::size_t line = 1;
  std::size_t col = 1;
};

/// Tokenizer shared by the HOA and acceptance-formula readers.
/// `name:` is reported as a single Header token; `/* ... */` comments are skipped.
class Lexer {
 public:
  explicit Lexer(std::string_view src) : src_(src) { advance(); }

  const Token& peek() const { return tok_; }

  Token next() {
    Token t = tok_;
    advance();
    return t;
  }

  [[noreturn]] void fail(const std::string& msg) const { throw ParseError(msg, tok_.line, tok_.col); }
  [[noreturn]] static void fail_at(const Token& t, const std::string& msg) { throw ParseError(msg, t.line, t.col); }

  bool is_punct(char c) const { return tok_.kind == Tok::Punct && tok_.text[0] == c; }

  void expect_punct(char c) {
    if (!is_punct(c)) fail(std::string("expected '") + c + "'");
    advance();
  }

  unsigned expect_uint() {
    if (tok_.kind != Tok::Int) fail("expected a non-negative integer");
    unsigned long v = 0;
    for (char c : tok_.text) {
      v = v * 10 + static_cast<unsigned long>(c - '0');
      if (v > 0xffffffUL) fail("integer out of range");
    }
    advance();
    return static_cast<unsigned>(v);
  }

 private:
  char at(std::size_t i) const { return i < src_.size() ? src_[i] : '\0'; }

  void bump() {
    if (src_[pos_] == '\n') {
      ++line_;
      col_ = 1;
    } else {
      ++col_;
    }
    ++pos_;
  }

  void skip_space() {
    for (;;) {
      while (pos_ < src_.size() && std::isspace(static_cast<unsigned char>(src_[pos_]))) bump();
      if (at(pos_) == '/' && at(pos_ + 1) == '*') {
        std::size_t l = line_, c = col_;
        bump();
        bump();
        while (pos_ < src_.size() && !(at(pos_) == '*' && at(pos_ + 1) == '/')) bump();
        if (pos_ >= src_.size()) throw ParseError("unterminated comment", l, c);
        bump();
        bump();
        continue;
      }
      return;
    }
  }

  void advance() {
    skip_space();
    tok_ = Token{};
    tok_.line = line_;
    tok_.col = col_;
    if (pos_ >= src_.size()) return;
    char c = src_[pos_];
    if (std::isdigit(static_cast<unsigned char>(c))) {
      tok_.kind = Tok::Int;
      while (std::isdigit(static_cast<unsigned char>(at(pos_)))) {
        tok_.text += at(pos_);
        bump();
      }
      return;
    }
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_' || c == '@') {
      while (std::isalnum(static_cast<unsigned char>(at(pos_))) || at(pos_) == '_' || at(pos_) == '-' ||
             at(pos_) == '@' || at(pos_) == '.') {
        tok_.text += at(pos_);
        bump();
      }
      if (at(pos_) == ':') {
        bump();
        tok_.kind = Tok::Header;
      } else {
        tok_.kind = Tok::Ident;
      }
      return;
    }
    if (c == '"') {
      tok_.kind = Tok::String;
      bump();
      while (pos_ < src_.size() && src_[pos_] != '"') {
        if (src_[pos_] == '\\' && pos_ + 1 < src_.size()) bump();
        tok_.text += src_[pos_];
        bump();
      }
      if (pos_ >= src_.size()) throw ParseError("unterminated string", tok_.line, tok_.col);
      bump();
      return;
    }
    if (src_.substr(pos_, 8) == "--BODY--") {
      tok_.kind = Tok::BodyMarker;
      for (int i = 0; i < 8; ++i) bump();
      return;
    }
    if (src_.substr(pos_, 7) == "--END--") {
      tok_.kind = Tok::EndMarker;
      for (int i = 0; i < 7; ++i) bump();
      return;
    }
    tok_.kind = Tok::Punct;
    tok_.text = std::string(1, c);
    bump();
  }

  std::string_view src_;
  std::size_t pos_ = 0;
  std::size_t line_ = 1;
  std::size_t col_ = 1;
  Token tok_;
};

}  // namespace tela::detail
