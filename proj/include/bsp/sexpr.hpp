#pragma once

#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace bsp {

// Parse failure with the position of the offending token.
class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& what, int line, int column);
  int line() const { return line_; }
  int column() const { return column_; }

 private:
  int line_;
  int column_;
};

struct SExpr {
  bool is_atom = false;
  std::string atom;
  std::vector<SExpr> items;
  int line = 1;
  int column = 1;

  bool is_list() const { return !is_atom; }
  bool is(std::string_view name) const;  // atom equal to name (case-insensitive)
  bool head_is(std::string_view name) const;
  [[noreturn]] void fail(const std::string& message) const;
};

// Reads every top-level expression. ';' starts a comment to end of line.
std::vector<SExpr> parse_sexprs(std::string_view text);
SExpr parse_sexpr(std::string_view text);

std::string to_string(const SExpr& e);

}  // namespace bsp
