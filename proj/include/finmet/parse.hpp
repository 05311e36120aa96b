#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "finmet/expr.hpp"

namespace finmet {

class ParseError : public std::runtime_error {
 public:
  enum class Kind { syntax, unknown_identifier, index_out_of_range };

  ParseError(Kind kind, std::size_t position, std::string message);

  Kind kind() const { return kind_; }
  /// 0-based byte offset into the source.
  std::size_t position() const { return position_; }

 private:
  Kind kind_;
  std::size_t position_;
};

/// Parses a formula over x1..xn, y1..yn and the declared parameter names.
///
///   expr     := term (('+'|'-') term)*
///   term     := unary (('*'|'/') unary)*
///   unary    := '-' unary | power
///   power    := atom ('^' exponent)?
///   atom     := number | ident | func '(' expr ')' | '(' expr ')'
///   exponent := ['-'] integer | '(' ['-'] integer ['/' '2'] ')'
///
/// '^' binds tighter than unary minus, so -y1^2 is -(y1^2).
Expression parse(std::string_view source, int dim, const std::vector<std::string>& params = {});

}  // namespace finmet
