#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "acceptance.hpp"
#include "automaton.hpp"
#include "detail/lexer.hpp"
#include "error.hpp"

namespace tela {

namespace detail {

inline std::string quote(const std::string& s) {
  std::string r = "\"";
  for (char c : s) {
    if (c == '"' || c == '\\') r += '\\';
    r += c;
  }
  return r + '"';
}

/// Label expression over AP indices, evaluated on letters.
struct LabelExpr {
  enum class Kind { True, False, Ap, Not, And, Or } kind;
  unsigned ap = 0;
  std::vector<LabelExpr> kids;

  bool eval(unsigned letter) const {
    switch (kind) {
      case Kind::True: return true;
      case Kind::False: return false;
      case Kind::Ap: return (letter >> ap) & 1U;
      case Kind::Not: return !kids[0].eval(letter);
      case Kind::And:
        for (const auto& k : kids)
          if (!k.eval(letter)) return false;
        return true;
      case Kind::Or:
        for (const auto& k : kids)
          if (k.eval(letter)) return true;
        return false;
    }
    return false;
  }
};

class HoaReader {
 public:
  explicit HoaReader(std::string_view text) : lx_(text) {}

  Tela read() {
    read_headers();
    build_automaton();
    read_body();
    if (lx_.peek().kind != Tok::Eof) lx_.fail("trailing input after --END--");
    return std::move(*aut_);
  }

 private:
  void read_headers() {
    const Token& first = lx_.peek();
    if (first.kind != Tok::Header || first.text != "HOA") lx_.fail("expected `HOA:` header");
    lx_.next();
    if (lx_.peek().kind != Tok::Ident || lx_.peek().text != "v1") lx_.fail("unsupported HOA version");
    lx_.next();
    for (;;) {
      const Token t = lx_.peek();
      if (t.kind == Tok::BodyMarker) {
        lx_.next();
        return;
      }
      if (t.kind != Tok::Header) lx_.fail("expected a header or --BODY--");
      lx_.next();
      if (t.text == "States") {
        if (states_) Lexer::fail_at(t, "duplicate States header");
        states_ = lx_.expect_uint();
      } else if (t.text == "Start") {
        unsigned s = lx_.expect_uint();
        if (lx_.is_punct('&')) lx_.fail("conjunctive initial states are not supported");
        start_.push_back(s);
      } else if (t.text == "AP") {
        if (aps_) Lexer::fail_at(t, "duplicate AP header");
        const Token count_tok = lx_.peek();
        unsigned n = lx_.expect_uint();
        if (n > kMaxAps) Lexer::fail_at(count_tok, "at most " + std::to_string(kMaxAps) + " atomic propositions");
        std::vector<std::string> names;
        for (unsigned i = 0; i < n; ++i) {
          if (lx_.peek().kind != Tok::String) lx_.fail("expected AP name");
          names.push_back(lx_.next().text);
        }
        aps_ = std::move(names);
      } else if (t.text == "Acceptance") {
        if (acc_) Lexer::fail_at(t, "duplicate Acceptance header");
        mark_count_ = lx_.expect_uint();
        acc_tok_ = lx_.peek();
        acc_ = parse_acc_or(lx_);
      } else if (t.text == "acc-name" || t.text == "name" || t.text == "tool" || t.text == "properties") {
        skip_values();
      } else if (t.text == "Alias") {
        Lexer::fail_at(t, "aliases are not supported");
      } else {
        Lexer::fail_at(t, "unknown header `" + t.text + ":`");
      }
    }
  }

  void skip_values() {
    while (lx_.peek().kind == Tok::Ident || lx_.peek().kind == Tok::Int || lx_.peek().kind == Tok::String ||
           (lx_.peek().kind == Tok::Punct && lx_.peek().text != "-"))
      lx_.next();
  }

  void build_automaton() {
    if (!states_) lx_.fail("missing States header");
    if (!acc_) lx_.fail("missing Acceptance header");
    std::vector<std::string> names = aps_ ? *aps_ : std::vector<std::string>{};
    aut_.emplace(static_cast<unsigned>(names.size()), *states_);
    aut_->set_ap_names(names);
    if (acc_->used_marks().bound() > mark_count_)
      Lexer::fail_at(acc_tok_, "acceptance uses a set beyond the declared count");
    aut_->set_acceptance(*acc_, mark_count_);
    for (unsigned s : start_)
      if (s >= *states_) lx_.fail("initial state out of range");
    aut_->set_initial(start_);
  }

  LabelExpr label_atom() {
    const Token t = lx_.peek();
    if (lx_.is_punct('!')) {
      lx_.next();
      return LabelExpr{LabelExpr::Kind::Not, 0, {label_atom()}};
    }
    if (lx_.is_punct('(')) {
      lx_.next();
      LabelExpr e = label_or();
      lx_.expect_punct(')');
      return e;
    }
    if (t.kind == Tok::Ident && t.text == "t") {
      lx_.next();
      return LabelExpr{LabelExpr::Kind::True, 0, {}};
    }
    if (t.kind == Tok::Ident && t.text == "f") {
      lx_.next();
      return LabelExpr{LabelExpr::Kind::False, 0, {}};
    }
    if (t.kind == Tok::Ident && t.text[0] == '@') lx_.fail("aliases are not supported");
    unsigned ap = lx_.expect_uint();
    if (ap >= aut_->ap_count()) Lexer::fail_at(t, "undeclared atomic proposition");
    return LabelExpr{LabelExpr::Kind::Ap, ap, {}};
  }

  LabelExpr label_and() {
    LabelExpr e{LabelExpr::Kind::And, 0, {label_atom()}};
    while (lx_.is_punct('&')) {
      lx_.next();
      e.kids.push_back(label_atom());
    }
    return e;
  }

  LabelExpr label_or() {
    LabelExpr e{LabelExpr::Kind::Or, 0, {label_and()}};
    while (lx_.is_punct('|')) {
      lx_.next();
      e.kids.push_back(label_and());
    }
    return e;
  }

  MarkSet mark_list() {
    MarkSet m;
    lx_.expect_punct('{');
    while (!lx_.is_punct('}')) {
      const Token t = lx_.peek();
      unsigned v = lx_.expect_uint();
      if (v >= mark_count_) Lexer::fail_at(t, "acceptance set beyond the declared count");
      m.set(v);
    }
    lx_.next();
    return m;
  }

  void read_body() {
    std::vector<char> declared(*states_, 0);
    for (;;) {
      const Token t = lx_.peek();
      if (t.kind == Tok::EndMarker) {
        lx_.next();
        return;
      }
      if (t.kind != Tok::Header || t.text != "State") lx_.fail("expected `State:` or --END--");
      lx_.next();
      if (lx_.is_punct('[')) lx_.fail("state labels are not supported");
      const Token st = lx_.peek();
      unsigned q = lx_.expect_uint();
      if (q >= *states_) Lexer::fail_at(st, "state out of range");
      if (declared[q]) Lexer::fail_at(st, "state declared twice");
      declared[q] = 1;
      if (lx_.peek().kind == Tok::String) lx_.next();
      if (lx_.is_punct('{')) lx_.fail("state-based acceptance is not supported");
      for (;;) {
        if (!lx_.is_punct('[')) {
          if (lx_.peek().kind == Tok::Int) lx_.fail("implicit labels are not supported");
          break;
        }
        lx_.next();
        LabelExpr label = label_or();
        lx_.expect_punct(']');
        const Token dt = lx_.peek();
        unsigned dst = lx_.expect_uint();
        if (dst >= *states_) Lexer::fail_at(dt, "state out of range");
        if (lx_.is_punct('&')) lx_.fail("universal branching is not supported");
        MarkSet marks;
        if (lx_.is_punct('{')) marks = mark_list();
        for (unsigned letter = 0; letter < aut_->letter_count(); ++letter)
          if (label.eval(letter)) aut_->add_transition(q, letter, dst, marks);
      }
    }
  }

  Lexer lx_;
  std::optional<unsigned> states_;
  std::vector<unsigned> start_;
  std::optional<std::vector<std::string>> aps_;
  std::optional<Acc> acc_;
  Token acc_tok_;
  unsigned mark_count_ = 0;
  std::optional<Tela> aut_;
};

}  // namespace detail

inline Tela parse_hoa(std::string_view text) { return detail::HoaReader(text).read(); }

/// Canonical HOA text: fixed header order, one edge per letter, edges sorted
/// by (letter, target, marks).
inline std::string print_hoa(const Tela& a) {
  std::string o = "HOA: v1\n";
  o += "States: " + std::to_string(a.state_count()) + "\n";
  for (unsigned q : a.initial()) o += "Start: " + std::to_string(q) + "\n";
  o += "AP: " + std::to_string(a.ap_count());
  for (const auto& n : a.ap_names()) o += " " + detail::quote(n);
  o += "\nAcceptance: " + std::to_string(a.mark_count()) + " " + to_string(a.acceptance()) + "\n";
  o += "properties: trans-labels explicit-labels trans-acc";
  if (is_deterministic(a)) o += " deterministic";
  if (is_complete(a)) o += " complete";
  o += "\n--BODY--\n";
  for (unsigned q = 0; q < a.state_count(); ++q) {
    o += "State: " + std::to_string(q) + "\n";
    auto edges = a.out(q);
    std::sort(edges.begin(), edges.end());
    for (const auto& e : edges) {
      o += "[" + letter_label(e.letter, a.ap_count()) + "] " + std::to_string(e.dst);
      if (!e.marks.empty()) {
        o += " {";
        bool first = true;
        e.marks.for_each([&](unsigned m) {
          if (!first) o += ' ';
          first = false;
          o += std::to_string(m);
        });
        o += '}';
      }
      o += '\n';
    }
  }
  o += "--END--\n";
  return o;
}

}  // namespace tela
