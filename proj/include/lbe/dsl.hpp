#pragma once

// Reader and writer for `.nmx` model files.
//
//   # comment to end of line
//   model G {
//     lags 3                       # k_y: x[0] .. x[3] are available
//     init 0.5 0.5 0.5 0.5         # k_y + 1 seed values, oldest first
//     input cosine(10, pi/60)      # optional; bare `input` is allowed too
//     update 2.6868*x[0] - 0.2462*x[0]^3
//   }
//
// `x[p]` is the output p steps before the newest one, `u[q]` the input q
// steps before the current one. Operators bind as `^` > unary `-` > `*` `/` >
// `+` `-`; binary operators are left-associative and parentheses are kept as
// explicit subtrees. `a^k` takes a positive integer literal and means the
// left-folded product ((a*a)*a)...; chained powers need parentheses. `pi` is
// the binary64 value 3.141592653589793.

#include <cctype>
#include <charconv>
#include <cstddef>
#include <numbers>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "lbe/expression.hpp"
#include "lbe/model.hpp"
#include "lbe/numeric_text.hpp"

namespace lbe {

enum class Severity { error, warning };

struct ParseDiagnostic {
  Severity severity = Severity::error;
  std::size_t line = 0;
  std::size_t column = 0;
  std::string message;
};

inline std::string to_string(const ParseDiagnostic& d) {
  return std::to_string(d.line) + ":" + std::to_string(d.column) + ": " +
         (d.severity == Severity::error ? "error: " : "warning: ") + d.message;
}

template <class T>
struct ParseResult {
  std::optional<T> value;
  std::vector<ParseDiagnostic> diagnostics;

  bool ok() const noexcept { return value.has_value(); }
};

class ModelFile {
 public:
  ModelFile(std::string source, std::vector<ModelDefinition> models)
      : source_(std::move(source)), models_(std::move(models)) {}

  const std::string& source() const noexcept { return source_; }
  const std::vector<ModelDefinition>& models() const noexcept { return models_; }

  const ModelDefinition* find(std::string_view name) const {
    for (const auto& m : models_)
      if (m.name() == name) return &m;
    return nullptr;
  }

 private:
  std::string source_;
  std::vector<ModelDefinition> models_;
};

inline constexpr double pi_literal = 3.141592653589793;
static_assert(pi_literal == std::numbers::pi);

namespace detail {

enum class TokenKind {
  number,
  identifier,
  lbracket,
  rbracket,
  lparen,
  rparen,
  lbrace,
  rbrace,
  comma,
  plus,
  minus,
  star,
  slash,
  caret,
  invalid,
  end,
};

struct Token {
  TokenKind kind;
  std::string_view text;
  SourcePosition at;
};

inline std::vector<Token> tokenize(std::string_view text, std::vector<ParseDiagnostic>& diagnostics) {
  std::vector<Token> tokens;
  std::size_t line = 1;
  std::size_t line_start = 0;
  std::size_t i = 0;
  auto is_digit = [](char c) { return c >= '0' && c <= '9'; };
  auto is_ident_start = [](char c) { return std::isalpha(static_cast<unsigned char>(c)) || c == '_'; };
  auto is_ident = [](char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; };

  while (i < text.size()) {
    const char c = text[i];
    const SourcePosition at{line, i - line_start + 1};
    if (c == '\n') {
      ++i;
      ++line;
      line_start = i;
      continue;
    }
    if (c == ' ' || c == '\t' || c == '\r') {
      ++i;
      continue;
    }
    if (c == '#') {
      while (i < text.size() && text[i] != '\n') ++i;
      continue;
    }
    if (is_digit(c)) {
      const std::size_t start = i;
      bool malformed = false;
      while (i < text.size() && is_digit(text[i])) ++i;
      if (i < text.size() && text[i] == '.') {
        ++i;
        if (i >= text.size() || !is_digit(text[i])) malformed = true;
        while (i < text.size() && is_digit(text[i])) ++i;
      }
      if (i < text.size() && (text[i] == 'e' || text[i] == 'E')) {
        ++i;
        if (i < text.size() && (text[i] == '+' || text[i] == '-')) ++i;
        if (i >= text.size() || !is_digit(text[i])) malformed = true;
        while (i < text.size() && is_digit(text[i])) ++i;
      }
      const std::string_view literal = text.substr(start, i - start);
      if (malformed) {
        diagnostics.push_back({Severity::error, at.line, at.column,
                               "malformed number '" + std::string(literal) + "'"});
        tokens.push_back({TokenKind::invalid, literal, at});
      } else {
        tokens.push_back({TokenKind::number, literal, at});
      }
      continue;
    }
    if (is_ident_start(c)) {
      const std::size_t start = i;
      while (i < text.size() && is_ident(text[i])) ++i;
      tokens.push_back({TokenKind::identifier, text.substr(start, i - start), at});
      continue;
    }
    TokenKind kind = TokenKind::invalid;
    switch (c) {
      case '[': kind = TokenKind::lbracket; break;
      case ']': kind = TokenKind::rbracket; break;
      case '(': kind = TokenKind::lparen; break;
      case ')': kind = TokenKind::rparen; break;
      case '{': kind = TokenKind::lbrace; break;
      case '}': kind = TokenKind::rbrace; break;
      case ',': kind = TokenKind::comma; break;
      case '+': kind = TokenKind::plus; break;
      case '-': kind = TokenKind::minus; break;
      case '*': kind = TokenKind::star; break;
      case '/': kind = TokenKind::slash; break;
      case '^': kind = TokenKind::caret; break;
      default: break;
    }
    if (kind == TokenKind::invalid) {
      // Swallow a whole UTF-8 sequence so the message names one character.
      std::size_t length = 1;
      while (i + length < text.size() && (static_cast<unsigned char>(text[i + length]) & 0xC0) == 0x80)
        ++length;
      diagnostics.push_back({Severity::error, at.line, at.column,
                             "unexpected character '" + std::string(text.substr(i, length)) + "'"});
      tokens.push_back({TokenKind::invalid, text.substr(i, length), at});
      i += length;
      continue;
    }
    tokens.push_back({kind, text.substr(i, 1), at});
    ++i;
  }
  tokens.push_back({TokenKind::end, {}, SourcePosition{line, i - line_start + 1}});
  return tokens;
}

class Parser {
 public:
  Parser(std::vector<Token> tokens, std::vector<ParseDiagnostic>& diagnostics)
      : tokens_(std::move(tokens)), diagnostics_(diagnostics) {}

  struct Failure {};

  std::optional<Expression> whole_expression() {
    try {
      Expression e = sum();
      if (peek().kind != TokenKind::end) fail(peek(), "unexpected " + describe(peek()) + " after expression");
      return e;
    } catch (const Failure&) {
      return std::nullopt;
    }
  }

  std::optional<std::vector<ModelDefinition>> model_file() {
    std::vector<ModelDefinition> models;
    bool failed = false;
    if (peek().kind == TokenKind::end) {
      error(peek().at, "no model blocks");
      return std::nullopt;
    }
    while (peek().kind != TokenKind::end) {
      if (!is_keyword(peek(), "model")) {
        if (peek().kind != TokenKind::invalid)
          error(peek().at, "expected 'model', found " + describe(peek()));
        failed = true;
        advance();
        while (peek().kind != TokenKind::end && !is_keyword(peek(), "model")) advance();
        continue;
      }
      try {
        if (auto m = model_block(models)) {
          models.push_back(std::move(*m));
        } else {
          failed = true;
        }
      } catch (const Failure&) {
        failed = true;
        while (peek().kind != TokenKind::end && peek().kind != TokenKind::rbrace &&
               !is_keyword(peek(), "model"))
          advance();
        if (peek().kind == TokenKind::rbrace) advance();
      }
    }
    if (failed) return std::nullopt;
    return models;
  }

 private:
  const Token& peek(std::size_t ahead = 0) const {
    return tokens_[std::min(pos_ + ahead, tokens_.size() - 1)];
  }

  Token advance() {
    Token t = peek();
    if (pos_ < tokens_.size() - 1) ++pos_;
    return t;
  }

  static bool is_keyword(const Token& t, std::string_view word) {
    return t.kind == TokenKind::identifier && t.text == word;
  }

  static std::string describe(const Token& t) {
    if (t.kind == TokenKind::end) return "end of input";
    return "'" + std::string(t.text) + "'";
  }

  void error(SourcePosition at, std::string message) {
    diagnostics_.push_back({Severity::error, at.line, at.column, std::move(message)});
  }

  void warning(SourcePosition at, std::string message) {
    diagnostics_.push_back({Severity::warning, at.line, at.column, std::move(message)});
  }

  // The lexer already reported invalid tokens.
  [[noreturn]] void fail(const Token& at, std::string message) {
    if (at.kind != TokenKind::invalid) error(at.at, std::move(message));
    throw Failure{};
  }

  Token expect(TokenKind kind, const char* what) {
    if (peek().kind != kind) fail(peek(), std::string("expected ") + what + ", found " + describe(peek()));
    return advance();
  }

  double number_value(const Token& t) {
    const auto value = parse_number(t.text);
    if (!value) fail(t, "number '" + std::string(t.text) + "' is out of binary64 range");
    return *value;
  }

  // Digits only; used for lags and exponents.
  std::size_t integer_value(const Token& t, const char* what) {
    if (t.kind != TokenKind::number) fail(t, std::string("expected ") + what + ", found " + describe(t));
    std::size_t value = 0;
    const auto [end, ec] = std::from_chars(t.text.data(), t.text.data() + t.text.size(), value);
    if (ec != std::errc{} || end != t.text.data() + t.text.size())
      fail(t, std::string(what) + " must be a non-negative integer, found '" + std::string(t.text) + "'");
    return value;
  }

  Expression sum() {
    Expression lhs = product();
    while (peek().kind == TokenKind::plus || peek().kind == TokenKind::minus) {
      const Token op = advance();
      Expression rhs = product();
      lhs = Expression::binary(op.kind == TokenKind::plus ? BinaryOperator::add : BinaryOperator::subtract,
                               std::move(lhs), std::move(rhs), op.at);
    }
    return lhs;
  }

  Expression product() {
    Expression lhs = unary();
    while (peek().kind == TokenKind::star || peek().kind == TokenKind::slash) {
      const Token op = advance();
      Expression rhs = unary();
      lhs = Expression::binary(op.kind == TokenKind::star ? BinaryOperator::multiply : BinaryOperator::divide,
                               std::move(lhs), std::move(rhs), op.at);
    }
    return lhs;
  }

  // `-2` is a negative literal unless it is the base of a power: -2^2 is -(2^2).
  Expression unary() {
    if (peek().kind != TokenKind::minus) return power();
    const Token minus = advance();
    if (peek().kind == TokenKind::number && peek(1).kind != TokenKind::caret)
      return Expression::constant(-number_value(advance()), minus.at);
    return Expression::negate(unary(), minus.at);
  }

  Expression power() {
    Expression base = primary();
    if (peek().kind != TokenKind::caret) return base;
    const Token caret = advance();
    const Token exponent_token = peek();
    if (exponent_token.kind != TokenKind::number)
      fail(exponent_token, "exponent must be a positive integer literal, found " + describe(exponent_token));
    const std::size_t exponent = integer_value(exponent_token, "exponent");
    if (exponent < 1) fail(exponent_token, "exponent must be at least 1");
    if (exponent > 1024) fail(exponent_token, "exponent " + std::string(exponent_token.text) + " is too large");
    advance();
    if (peek().kind == TokenKind::caret) fail(peek(), "chained '^' needs parentheses");
    return Expression::power(std::move(base), static_cast<unsigned>(exponent), caret.at);
  }

  Expression primary() {
    const Token t = peek();
    switch (t.kind) {
      case TokenKind::number:
        advance();
        return Expression::constant(number_value(t), t.at);
      case TokenKind::lparen: {
        advance();
        Expression inner = sum();
        expect(TokenKind::rparen, "')'");
        return inner;
      }
      case TokenKind::identifier: {
        advance();
        if (t.text == "pi") return Expression::constant(pi_literal, t.at);
        if (t.text == "x" || t.text == "u") {
          expect(TokenKind::lbracket, "'['");
          const std::size_t lag = integer_value(advance(), "lag");
          expect(TokenKind::rbracket, "']'");
          return t.text == "x" ? Expression::output(lag, t.at) : Expression::input(lag, t.at);
        }
        if (t.text == "sin" || t.text == "cos") {
          expect(TokenKind::lparen, "'('");
          Expression argument = sum();
          expect(TokenKind::rparen, "')'");
          return Expression::call(t.text == "sin" ? Function::sin : Function::cos, std::move(argument), t.at);
        }
        fail(t, "unknown identifier '" + std::string(t.text) + "'");
      }
      default:
        fail(t, "expected an expression, found " + describe(t));
    }
  }

  double constant_expression() {
    const Token start = peek();
    Expression e = sum();
    if (max_lags(e).references_input || references_output(e))
      fail(start, "expected a constant expression (no x[...] or u[...])");
    try {
      return evaluate(e);
    } catch (const std::exception& ex) {
      fail(start, ex.what());
    }
  }

  static bool references_output(const Expression& e) {
    return e.visit(overloaded{
        [](const node::Constant&) { return false; },
        [](const node::LaggedOutput&) { return true; },
        [](const node::LaggedInput&) { return false; },
        [](const node::Negate& n) { return references_output(n.operand); },
        [](const node::Call& c) { return references_output(c.argument); },
        [](const node::Binary& b) { return references_output(b.left) || references_output(b.right); },
        [](const node::Power& p) { return references_output(p.base); },
    });
  }

  double signed_number() {
    double sign = 1.0;
    if (peek().kind == TokenKind::minus) {
      advance();
      sign = -1.0;
    }
    const Token t = advance();
    if (is_keyword(t, "pi")) return sign * pi_literal;
    if (t.kind != TokenKind::number) fail(t, "expected a number, found " + describe(t));
    return sign * number_value(t);
  }

  bool starts_number(std::size_t ahead = 0) const {
    const Token& t = peek(ahead);
    if (t.kind == TokenKind::minus) return starts_number(ahead + 1);
    return t.kind == TokenKind::number || is_keyword(t, "pi");
  }

  // Reports lag violations at the offending node.
  bool check_lags(const Expression& e, std::size_t max_output_lag, bool has_input) {
    return e.visit(overloaded{
        [](const node::Constant&) { return true; },
        [&](const node::LaggedOutput& x) {
          if (x.lag <= max_output_lag) return true;
          error(e.position(), "x[" + std::to_string(x.lag) + "] exceeds the declared lags (" +
                                  std::to_string(max_output_lag) + ")");
          return false;
        },
        [&](const node::LaggedInput& u) {
          if (has_input) return true;
          error(e.position(), "u[" + std::to_string(u.lag) + "] requires an 'input' declaration");
          return false;
        },
        [&](const node::Negate& n) { return check_lags(n.operand, max_output_lag, has_input); },
        [&](const node::Call& c) { return check_lags(c.argument, max_output_lag, has_input); },
        [&](const node::Binary& b) {
          const bool left = check_lags(b.left, max_output_lag, has_input);
          const bool right = check_lags(b.right, max_output_lag, has_input);
          return left && right;
        },
        [&](const node::Power& p) { return check_lags(p.base, max_output_lag, has_input); },
    });
  }

  std::optional<ModelDefinition> model_block(const std::vector<ModelDefinition>& previous) {
    advance();  // 'model'
    const Token name = peek();
    if (name.kind != TokenKind::identifier) fail(name, "expected a model name, found " + describe(name));
    advance();
    expect(TokenKind::lbrace, "'{'");

    std::optional<std::size_t> lags;
    std::optional<std::vector<double>> init;
    std::optional<Expression> update;
    std::optional<CosineForcing> forcing;
    bool has_input = false;
    Token lags_token{}, init_token{}, input_token{};

    auto once = [this](bool seen, const Token& kw) {
      if (seen) fail(kw, "duplicate '" + std::string(kw.text) + "' statement");
    };

    while (peek().kind != TokenKind::rbrace) {
      const Token kw = peek();
      if (kw.kind == TokenKind::end) fail(kw, "unterminated model block, expected '}'");
      if (is_keyword(kw, "lags")) {
        once(lags.has_value(), kw);
        advance();
        lags_token = kw;
        lags = integer_value(advance(), "lag count");
      } else if (is_keyword(kw, "init")) {
        once(init.has_value(), kw);
        advance();
        init_token = kw;
        std::vector<double> values;
        if (!starts_number()) fail(peek(), "expected initial condition values after 'init'");
        while (starts_number()) values.push_back(signed_number());
        init = std::move(values);
      } else if (is_keyword(kw, "input")) {
        once(has_input, kw);
        advance();
        input_token = kw;
        has_input = true;
        if (is_keyword(peek(), "cosine")) {
          advance();
          expect(TokenKind::lparen, "'('");
          const double amplitude = constant_expression();
          expect(TokenKind::comma, "','");
          const double period = constant_expression();
          expect(TokenKind::rparen, "')'");
          forcing = CosineForcing{amplitude, period};
        }
      } else if (is_keyword(kw, "update")) {
        once(update.has_value(), kw);
        advance();
        update = sum();
      } else {
        fail(kw, "expected 'lags', 'init', 'input', 'update' or '}', found " + describe(kw));
      }
    }
    advance();  // '}'

    const std::string model_name(name.text);
    bool ok = true;
    for (const auto& m : previous) {
      if (m.name() == model_name) {
        error(name.at, "duplicate model name '" + model_name + "'");
        ok = false;
      }
    }
    if (!lags) {
      error(name.at, "model '" + model_name + "' is missing 'lags'");
      ok = false;
    }
    if (!init) {
      error(name.at, "model '" + model_name + "' is missing 'init'");
      ok = false;
    }
    if (!update) {
      error(name.at, "model '" + model_name + "' is missing 'update'");
      ok = false;
    }
    if (!ok) return std::nullopt;
    if (init->size() != *lags + 1) {
      error(init_token.at, "'init' has " + std::to_string(init->size()) + " values but 'lags " +
                               std::to_string(*lags) + "' needs " + std::to_string(*lags + 1));
      ok = false;
    }
    if (!check_lags(*update, *lags, has_input)) ok = false;
    if (!ok) return std::nullopt;
    if (has_input && !max_lags(*update).references_input)
      warning(input_token.at, "model '" + model_name + "' declares an input but never uses u[...]");
    try {
      return ModelDefinition(model_name, *lags, std::move(*init), std::move(*update), has_input, forcing);
    } catch (const std::invalid_argument& ex) {
      error(name.at, ex.what());
      return std::nullopt;
    }
  }

  std::vector<Token> tokens_;
  std::size_t pos_ = 0;
  std::vector<ParseDiagnostic>& diagnostics_;
};

}  // namespace detail

inline ParseResult<Expression> parse_expression(std::string_view text) {
  ParseResult<Expression> result;
  auto tokens = detail::tokenize(text, result.diagnostics);
  detail::Parser parser(std::move(tokens), result.diagnostics);
  auto expr = parser.whole_expression();
  if (expr && result.diagnostics.empty()) result.value = std::move(expr);
  return result;
}

inline ParseResult<ModelFile> parse_model_file(std::string_view text) {
  ParseResult<ModelFile> result;
  auto tokens = detail::tokenize(text, result.diagnostics);
  const bool lexed_cleanly = result.diagnostics.empty();
  detail::Parser parser(std::move(tokens), result.diagnostics);
  auto models = parser.model_file();
  if (models && lexed_cleanly) result.value = ModelFile(std::string(text), std::move(*models));
  return result;
}

namespace detail {

enum Precedence { sum_level = 1, product_level = 2, unary_level = 3, power_level = 4, primary_level = 5 };

inline int precedence(const Expression& e) {
  return e.visit(overloaded{
      [](const node::Constant& c) { return std::signbit(c.value) ? unary_level : primary_level; },
      [](const node::LaggedOutput&) { return primary_level; },
      [](const node::LaggedInput&) { return primary_level; },
      [](const node::Negate&) { return unary_level; },
      [](const node::Call&) { return primary_level; },
      [](const node::Binary& b) {
        return b.op == BinaryOperator::add || b.op == BinaryOperator::subtract ? sum_level : product_level;
      },
      [](const node::Power&) { return power_level; },
  });
}

inline void format_into(std::string& out, const Expression& e);

inline void format_wrapped(std::string& out, const Expression& e, bool wrap) {
  if (wrap) out += '(';
  format_into(out, e);
  if (wrap) out += ')';
}

inline void format_into(std::string& out, const Expression& e) {
  e.visit(overloaded{
      [&](const node::Constant& c) { out += format_number(c.value); },
      [&](const node::LaggedOutput& x) { out += "x[" + std::to_string(x.lag) + "]"; },
      [&](const node::LaggedInput& u) { out += "u[" + std::to_string(u.lag) + "]"; },
      [&](const node::Negate& n) {
        out += '-';
        const bool literal = n.operand.visit(
            [](const auto& v) { return std::is_same_v<std::decay_t<decltype(v)>, node::Constant>; });
        format_wrapped(out, n.operand, literal || precedence(n.operand) < unary_level);
      },
      [&](const node::Call& c) {
        out += to_string(c.function);
        format_wrapped(out, c.argument, true);
      },
      [&](const node::Binary& b) {
        const int level = precedence(e);
        format_wrapped(out, b.left, precedence(b.left) < level);
        if (level == sum_level) {
          out += ' ';
          out += to_symbol(b.op);
          out += ' ';
        } else {
          out += to_symbol(b.op);
        }
        format_wrapped(out, b.right, precedence(b.right) <= level);
      },
      [&](const node::Power& p) {
        format_wrapped(out, p.base, precedence(p.base) < primary_level);
        out += '^';
        out += std::to_string(p.exponent);
      },
  });
}

}  // namespace detail

/// Canonical text with the fewest parentheses that reparse to the same tree.
inline std::string format_expression(const Expression& e) {
  std::string out;
  detail::format_into(out, e);
  return out;
}

inline std::string format_model(const ModelDefinition& model) {
  std::string out = "model " + model.name() + " {\n";
  out += "  lags " + std::to_string(model.max_output_lag()) + "\n";
  out += "  init";
  for (double v : model.initial_conditions()) out += " " + format_number(v);
  out += "\n";
  if (model.requires_input()) {
    out += "  input";
    if (const auto& f = model.default_forcing())
      out += " cosine(" + format_number(f->amplitude) + ", " + format_number(f->period) + ")";
    out += "\n";
  }
  out += "  update " + format_expression(model.update()) + "\n";
  out += "}\n";
  return out;
}

inline std::string format_model_file(std::span<const ModelDefinition> models) {
  std::string out;
  for (std::size_t i = 0; i < models.size(); ++i) {
    if (i > 0) out += "\n";
    out += format_model(models[i]);
  }
  return out;
}

}  // namespace lbe
