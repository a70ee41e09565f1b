#include "bsp/sexpr.hpp"

#include <cctype>

namespace bsp {

ParseError::ParseError(const std::string& what, int line, int column)
    : std::runtime_error(std::to_string(line) + ":" + std::to_string(column) + ": " + what),
      line_(line),
      column_(column) {}

namespace {

bool iequal(std::string_view a, std::string_view b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (std::tolower(static_cast<unsigned char>(a[i])) !=
        std::tolower(static_cast<unsigned char>(b[i])))
      return false;
  }
  return true;
}

class Reader {
 public:
  explicit Reader(std::string_view text) : text_(text) {}

  bool at_end() {
    skip();
    return pos_ >= text_.size();
  }

  SExpr read() {
    skip();
    if (pos_ >= text_.size()) throw ParseError("unexpected end of input", line_, col_);
    SExpr e;
    e.line = line_;
    e.column = col_;
    char c = text_[pos_];
    if (c == '(') {
      advance();
      for (;;) {
        skip();
        if (pos_ >= text_.size()) throw ParseError("unbalanced '('", e.line, e.column);
        if (text_[pos_] == ')') {
          advance();
          break;
        }
        e.items.push_back(read());
      }
      return e;
    }
    if (c == ')') throw ParseError("unexpected ')'", line_, col_);
    e.is_atom = true;
    while (pos_ < text_.size()) {
      char d = text_[pos_];
      if (std::isspace(static_cast<unsigned char>(d)) || d == '(' || d == ')' || d == ';') break;
      e.atom.push_back(d);
      advance();
    }
    return e;
  }

 private:
  void advance() {
    if (text_[pos_] == '\n') {
      ++line_;
      col_ = 1;
    } else {
      ++col_;
    }
    ++pos_;
  }

  void skip() {
    while (pos_ < text_.size()) {
      char c = text_[pos_];
      if (c == ';') {
        while (pos_ < text_.size() && text_[pos_] != '\n') advance();
      } else if (std::isspace(static_cast<unsigned char>(c))) {
        advance();
      } else {
        break;
      }
    }
  }

  std::string_view text_;
  std::size_t pos_ = 0;
  int line_ = 1;
  int col_ = 1;
};

}  // namespace

bool SExpr::is(std::string_view name) const { return is_atom && iequal(atom, name); }

bool SExpr::head_is(std::string_view name) const {
  return is_list() && !items.empty() && items.front().is(name);
}

void SExpr::fail(const std::string& message) const { throw ParseError(message, line, column); }

std::vector<SExpr> parse_sexprs(std::string_view text) {
  Reader r(text);
  std::vector<SExpr> out;
  while (!r.at_end()) out.push_back(r.read());
  return out;
}

SExpr parse_sexpr(std::string_view text) {
  Reader r(text);
  SExpr e = r.read();
  if (!r.at_end()) throw ParseError("trailing input after expression", e.line, e.column);
  return e;
}

std::string to_string(const SExpr& e) {
  if (e.is_atom) return e.atom;
  std::string s = "(";
  for (std::size_t i = 0; i < e.items.size(); ++i) {
    if (i) s += ' ';
    s += to_string(e.items[i]);
  }
  return s + ")";
}

}  // namespace bsp
