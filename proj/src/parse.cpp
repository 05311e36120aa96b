#include "finmet/parse.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cstdlib>

namespace finmet {

ParseError::ParseError(Kind kind, std::size_t position, std::string message)
    : std::runtime_error("at " + std::to_string(position) + ": " + message), kind_(kind), position_(position) {}

namespace {

class Parser {
 public:
  Parser(std::string_view src, int dim, const std::vector<std::string>& params)
      : src_(src), dim_(dim), params_(params) {}

  Expression run() {
    Expression e = expr();
    skip_ws();
    if (pos_ != src_.size()) syntax("end of input");
    return e;
  }

 private:
  [[noreturn]] void syntax(std::string_view expected) {
    std::string found = pos_ < src_.size() ? "'" + std::string(1, src_[pos_]) + "'" : "end of input";
    throw ParseError(ParseError::Kind::syntax, pos_, "expected " + std::string(expected) + ", found " + found);
  }

  void skip_ws() {
    while (pos_ < src_.size() && std::isspace(static_cast<unsigned char>(src_[pos_]))) ++pos_;
  }

  bool accept(char c) {
    skip_ws();
    if (pos_ < src_.size() && src_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  void expect(char c) {
    if (!accept(c)) syntax(std::string("'") + c + "'");
  }

  Expression expr() {
    Expression e = term();
    for (;;) {
      if (accept('+')) {
        e = e + term();
      } else if (accept('-')) {
        e = e - term();
      } else {
        return e;
      }
    }
  }

  Expression term() {
    Expression e = unary();
    for (;;) {
      if (accept('*')) {
        e = e * unary();
      } else if (accept('/')) {
        e = e / unary();
      } else {
        return e;
      }
    }
  }

  Expression unary() {
    if (accept('-')) return -unary();
    return power();
  }

  Expression power() {
    Expression base = atom();
    if (accept('^')) return pow(base, exponent());
    return base;
  }

  int integer() {
    skip_ws();
    const std::size_t start = pos_;
    while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) ++pos_;
    if (start == pos_) syntax("integer");
    int v = 0;
    auto [ptr, ec] = std::from_chars(src_.data() + start, src_.data() + pos_, v);
    if (ec != std::errc()) {
      pos_ = start;
      syntax("integer of representable size");
    }
    return v;
  }

  Rational exponent() {
    if (accept('(')) {
      const int sign = accept('-') ? -1 : 1;
      const int n = sign * integer();
      int d = 1;
      if (accept('/')) {
        skip_ws();
        const std::size_t at = pos_;
        d = integer();
        if (d != 2) {
          pos_ = at;
          syntax("denominator 2");
        }
      }
      expect(')');
      return Rational(n, d);
    }
    const int sign = accept('-') ? -1 : 1;
    return Rational(sign * integer());
  }

  Expression number() {
    const std::size_t start = pos_;
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(src_.data() + pos_, src_.data() + src_.size(), v);
    if (ec != std::errc()) syntax("number");
    pos_ = static_cast<std::size_t>(ptr - src_.data());
    (void)start;
    return Expression::constant(v);
  }

  Expression atom() {
    skip_ws();
    if (pos_ >= src_.size()) syntax("operand");
    const char c = src_[pos_];
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return number();
    if (c == '(') {
      ++pos_;
      Expression e = expr();
      expect(')');
      return e;
    }
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') return identifier();
    syntax("operand");
  }

  Expression identifier() {
    const std::size_t start = pos_;
    while (pos_ < src_.size() &&
           (std::isalnum(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '_')) {
      ++pos_;
    }
    const std::string_view name = src_.substr(start, pos_ - start);

    static constexpr Func kFuncs[] = {Func::exp, Func::log, Func::sin, Func::cos, Func::abs};
    if (name == "sqrt") {
      expect('(');
      Expression arg = expr();
      expect(')');
      return sqrt(arg);
    }
    for (Func f : kFuncs) {
      if (name == func_name(f)) {
        expect('(');
        Expression arg = expr();
        expect(')');
        return apply(f, arg);
      }
    }

    if (std::find(params_.begin(), params_.end(), name) != params_.end()) return Expression::parameter(name);

    if (name.size() >= 2 && (name[0] == 'x' || name[0] == 'y') &&
        std::all_of(name.begin() + 1, name.end(), [](char ch) { return std::isdigit(static_cast<unsigned char>(ch)); })) {
      int index = 0;
      auto [ptr, ec] = std::from_chars(name.data() + 1, name.data() + name.size(), index);
      if (ec != std::errc() || index < 1 || index > dim_) {
        throw ParseError(ParseError::Kind::index_out_of_range, start,
                         "coordinate '" + std::string(name) + "' out of range for dimension " + std::to_string(dim_));
      }
      return Expression::coordinate(name[0] == 'x' ? Coordinate::x(index) : Coordinate::y(index));
    }
    throw ParseError(ParseError::Kind::unknown_identifier, start, "unknown identifier '" + std::string(name) + "'");
  }

  std::string_view src_;
  int dim_;
  const std::vector<std::string>& params_;
  std::size_t pos_ = 0;
};

}  // namespace

Expression parse(std::string_view source, int dim, const std::vector<std::string>& params) {
  if (dim < 1) throw std::invalid_argument("parse: dimension must be positive");
  return Parser(source, dim, params).run();
}

}  // namespace finmet
