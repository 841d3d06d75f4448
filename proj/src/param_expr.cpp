#include "xcosw/param_expr.hpp"

#include "xcosw/error.hpp"
#include "xcosw/format.hpp"

#include <charconv>
#include <cmath>
#include <optional>

namespace xcosw {

std::string_view to_string(ParamShape shape) noexcept {
  switch (shape) {
  case ParamShape::Scalar: return "scalar";
  case ParamShape::SignVector: return "sign-vector";
  case ParamShape::Rational: return "rational";
  }
  return "scalar";
}

namespace {

std::string_view strip(std::string_view text) {
  constexpr std::string_view ws = " \t\r\n";
  const auto first = text.find_first_not_of(ws);
  if (first == std::string_view::npos) return {};
  const auto last = text.find_last_not_of(ws);
  return text.substr(first, last - first + 1);
}

constexpr std::size_t kMaxDepth = 128;
constexpr std::size_t kMaxDegree = 64;
constexpr unsigned kMaxExponent = 32;

struct Rational {
  Poly num{0.0};
  Poly den{1.0};
};

bool is_one(const Poly &p) { return p.size() == 1 && p[0] == 1.0; }

class ExprParser {
public:
  ExprParser(std::string_view text, bool allow_s) : text_(text), allow_s_(allow_s) {}

  Rational parse_all() {
    Rational r = parse_expr();
    skip_ws();
    if (pos_ < text_.size()) syntax("unexpected '" + std::string(1, text_[pos_]) + "'");
    return r;
  }

  /// Parses one scalar list element, stopping before ';', ',' or ']'.
  Rational parse_element() { return parse_expr(); }

  void skip_ws() {
    while (pos_ < text_.size() && (text_[pos_] == ' ' || text_[pos_] == '\t' ||
                                   text_[pos_] == '\r' || text_[pos_] == '\n'))
      ++pos_;
  }
  [[nodiscard]] std::size_t pos() const { return pos_; }
  [[nodiscard]] bool at_end() const { return pos_ >= text_.size(); }
  [[nodiscard]] char peek() const { return at_end() ? '\0' : text_[pos_]; }
  void advance() { ++pos_; }

  [[noreturn]] void syntax(const std::string &msg) const { syntax_at(pos_, msg); }
  [[noreturn]] static void syntax_at(std::size_t at, const std::string &msg) {
    throw ExprError(Errc::ExprSyntax, at, msg);
  }

private:
  Rational parse_expr() {
    Rational lhs = parse_term();
    for (;;) {
      skip_ws();
      const char c = peek();
      if (c != '+' && c != '-') return lhs;
      advance();
      Rational rhs = parse_term();
      if (c == '-') rhs.num = poly_scale(rhs.num, -1.0);
      lhs = add(lhs, rhs);
    }
  }

  Rational parse_term() {
    Rational lhs = parse_unary();
    for (;;) {
      skip_ws();
      const char c = peek();
      if (c != '*' && c != '/') return lhs;
      const std::size_t op_at = pos_;
      advance();
      Rational rhs = parse_unary();
      if (c == '*') {
        lhs = multiply(lhs, rhs);
      } else {
        if (is_zero(rhs.num)) syntax_at(op_at, "division by zero");
        lhs = multiply(lhs, Rational{rhs.den, rhs.num});
      }
      check_degree(lhs, op_at);
    }
  }

  Rational parse_unary() {
    skip_ws();
    const char c = peek();
    if (c == '+' || c == '-') {
      advance();
      Depth guard(*this);
      Rational r = parse_unary();
      if (c == '-') r.num = poly_scale(r.num, -1.0);
      return r;
    }
    return parse_power();
  }

  Rational parse_power() {
    Rational base = parse_primary();
    skip_ws();
    if (peek() != '^') return base;
    const std::size_t op_at = pos_;
    advance();
    skip_ws();
    const std::size_t start = pos_;
    while (!at_end() && text_[pos_] >= '0' && text_[pos_] <= '9') ++pos_;
    if (start == pos_) syntax("expected a non-negative integer exponent");
    unsigned exponent = 0;
    auto [ptr, ec] = std::from_chars(text_.data() + start, text_.data() + pos_, exponent);
    if (ec != std::errc{} || exponent > kMaxExponent)
      syntax_at(start, "exponent must be at most " + std::to_string(kMaxExponent));
    Rational r{{1.0}, {1.0}};
    for (unsigned i = 0; i < exponent; ++i) {
      r = multiply(r, base);
      check_degree(r, op_at);
    }
    return r;
  }

  Rational parse_primary() {
    skip_ws();
    if (at_end()) syntax("unexpected end of expression");
    const char c = peek();
    if (c == '(') {
      const std::size_t open_at = pos_;
      advance();
      Depth guard(*this);
      Rational r = parse_expr();
      skip_ws();
      if (peek() != ')') {
        if (at_end()) syntax_at(open_at, "unbalanced '('");
        syntax("expected ')'");
      }
      advance();
      return r;
    }
    if (c == 's') {
      if (!allow_s_) throw ExprError(Errc::WrongShape, pos_, "'s' is not allowed in a scalar");
      advance();
      return Rational{{0.0, 1.0}, {1.0}};
    }
    if ((c >= '0' && c <= '9') || c == '.') return Rational{{parse_number()}, {1.0}};
    syntax("unexpected '" + std::string(1, c) + "'");
  }

  double parse_number() {
    const std::size_t start = pos_;
    auto digits = [&] {
      std::size_t n = 0;
      while (!at_end() && text_[pos_] >= '0' && text_[pos_] <= '9') {
        ++pos_;
        ++n;
      }
      return n;
    };
    std::size_t n = digits();
    if (peek() == '.') {
      advance();
      n += digits();
    }
    if (n == 0) syntax_at(start, "malformed number");
    if (peek() == 'e' || peek() == 'E') {
      const std::size_t save = pos_;
      advance();
      if (peek() == '+' || peek() == '-') advance();
      if (digits() == 0) pos_ = save; // not an exponent; let the caller reject 'e'
    }
    double value = 0.0;
    auto [ptr, ec] = std::from_chars(text_.data() + start, text_.data() + pos_, value);
    if (ec == std::errc::result_out_of_range) syntax_at(start, "number out of range");
    if (ec != std::errc{} || ptr != text_.data() + pos_) syntax_at(start, "malformed number");
    return value;
  }

  static Rational add(const Rational &a, const Rational &b) {
    if (a.den == b.den) return {poly_add(a.num, b.num), a.den};
    return {poly_add(poly_mul(a.num, b.den), poly_mul(b.num, a.den)), poly_mul(a.den, b.den)};
  }

  static Rational multiply(const Rational &a, const Rational &b) {
    return {poly_mul(a.num, b.num), poly_mul(a.den, b.den)};
  }

  static void check_degree(const Rational &r, std::size_t at) {
    if (degree(r.num) > kMaxDegree || degree(r.den) > kMaxDegree)
      syntax_at(at, "polynomial degree exceeds " + std::to_string(kMaxDegree));
  }

  struct Depth {
    explicit Depth(ExprParser &p) : parser(p) {
      if (++parser.depth_ > kMaxDepth) parser.syntax("expression nested too deeply");
    }
    ~Depth() { --parser.depth_; }
    ExprParser &parser;
  };

  std::string_view text_;
  bool allow_s_;
  std::size_t pos_ = 0;
  std::size_t depth_ = 0;
};

bool all_finite(const Poly &p) {
  for (double c : p)
    if (!std::isfinite(c)) return false;
  return true;
}

double to_scalar(const Rational &r, std::size_t at) {
  const double value = r.num[0] / r.den[0];
  if (!std::isfinite(value)) ExprParser::syntax_at(at, "value is not finite");
  return value;
}

SignVector parse_sign_vector(std::string_view raw, std::size_t base) {
  ExprParser p(raw, false);
  SignVector signs;
  p.skip_ws();
  const bool bracketed = p.peek() == '[';
  if (bracketed) p.advance();
  for (;;) {
    p.skip_ws();
    if (bracketed && p.peek() == ']' && signs.empty()) break;
    const std::size_t at = p.pos();
    const double v = to_scalar(p.parse_element(), base + at);
    if (v != 1.0 && v != -1.0)
      throw ExprError(Errc::WrongShape, base + at, "sign entries must be +1 or -1");
    signs.push_back(static_cast<int>(v));
    p.skip_ws();
    if (p.peek() == ';' || p.peek() == ',') {
      p.advance();
      continue;
    }
    break;
  }
  if (bracketed) {
    if (p.peek() != ']') p.syntax("expected ']'");
    p.advance();
  }
  p.skip_ws();
  if (!p.at_end()) p.syntax("unexpected '" + std::string(1, p.peek()) + "'");
  if (signs.empty()) throw ExprError(Errc::WrongShape, base, "sign vector is empty");
  return signs;
}

void append_poly(std::string &out, const Poly &p) {
  bool first = true;
  for (std::size_t i = 0; i < p.size(); ++i) {
    double c = p[i];
    if (c == 0.0 && !(i == 0 && p.size() == 1)) continue;
    if (first) {
      out += format_real(c);
    } else {
      out += c < 0 ? '-' : '+';
      out += format_real(std::fabs(c));
    }
    if (i >= 1) out += "*s";
    if (i >= 2) out += "^" + std::to_string(i);
    first = false;
  }
  if (first) out += "0";
}

} // namespace

bool is_unset_text(std::string_view raw) noexcept {
  const auto t = strip(raw);
  return t.empty() || t == "%s";
}

ParamValue parse_param_expr(std::string_view raw, ParamShape shape) {
  ParamValue out{std::string(raw), Unset{}};
  if (is_unset_text(raw)) return out;

  switch (shape) {
  case ParamShape::Scalar: {
    ExprParser p(raw, false);
    out.parsed = to_scalar(p.parse_all(), 0);
    break;
  }
  case ParamShape::SignVector:
    out.parsed = parse_sign_vector(raw, 0);
    break;
  case ParamShape::Rational: {
    ExprParser p(raw, true);
    Rational r = p.parse_all();
    TransferFunction tf{trim(r.num), trim(r.den)};
    if (!all_finite(tf.num) || !all_finite(tf.den))
      ExprParser::syntax_at(0, "coefficients are not finite");
    out.parsed = std::move(tf);
    break;
  }
  }
  return out;
}

std::string format_param(const ParsedParam &value) {
  struct Visitor {
    std::string operator()(const Unset &) const { return "%s"; }
    std::string operator()(double v) const { return format_real(v); }
    std::string operator()(const SignVector &signs) const {
      std::string out = "[";
      for (std::size_t i = 0; i < signs.size(); ++i) {
        if (i) out += ';';
        out += signs[i] < 0 ? "-1" : "+1";
      }
      return out + "]";
    }
    std::string operator()(const TransferFunction &tf) const {
      std::string out;
      if (is_one(trim(tf.den))) {
        append_poly(out, trim(tf.num));
        return out;
      }
      out += '(';
      append_poly(out, trim(tf.num));
      out += ")/(";
      append_poly(out, trim(tf.den));
      out += ')';
      return out;
    }
  };
  return std::visit(Visitor{}, value);
}

} // namespace xcosw
