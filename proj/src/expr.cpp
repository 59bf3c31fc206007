#include "iiss/expr.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <charconv>
#include <cmath>
#include <numbers>

#include "iiss/errors.hpp"

namespace iiss::expr {

namespace {

constexpr std::size_t kMaxStack = 128;

enum class Code : unsigned char {
  Const, Var, Neg, Add, Sub, Mul, Div, Pow,
  Lt, Le, Gt, Ge, Eq, Ne,
  Fn1, Min, Max, Select
};

using Fn1 = double (*)(double);

double sign(double x) { return x > 0 ? 1.0 : (x < 0 ? -1.0 : 0.0); }

struct Builtin {
  std::string_view name;
  Fn1 fn;
};

constexpr std::array<Builtin, 12> kUnary{{
    {"abs", [](double x) { return std::abs(x); }},
    {"sqrt", [](double x) { return std::sqrt(x); }},
    {"cbrt", [](double x) { return std::cbrt(x); }},
    {"exp", [](double x) { return std::exp(x); }},
    {"log", [](double x) { return std::log(x); }},
    {"sin", [](double x) { return std::sin(x); }},
    {"cos", [](double x) { return std::cos(x); }},
    {"tan", [](double x) { return std::tan(x); }},
    {"sinh", [](double x) { return std::sinh(x); }},
    {"cosh", [](double x) { return std::cosh(x); }},
    {"tanh", [](double x) { return std::tanh(x); }},
    {"sign", sign},
}};

}  // namespace

struct Expression::Op {
  Code code;
  std::size_t arg = 0;  // variable index or argument count
  double value = 0.0;
  Fn1 fn = nullptr;
};

namespace {

class Parser {
 public:
  Parser(std::string_view text, const std::vector<std::string>& vars) : s_(text), vars_(vars) {}

  std::vector<Expression::Op> run() {
    expression(0);
    skip();
    if (pos_ != s_.size()) fail("unexpected '" + std::string(1, s_[pos_]) + "'");
    return std::move(out_);
  }

 private:
  using Op = Expression::Op;

  [[noreturn]] void fail(const std::string& msg) const {
    throw ConfigError("expression '" + std::string(s_) + "' at column " + std::to_string(pos_ + 1) +
                      ": " + msg);
  }

  void skip() {
    while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
  }

  bool accept(std::string_view tok) {
    skip();
    if (s_.substr(pos_, tok.size()) == tok) {
      pos_ += tok.size();
      return true;
    }
    return false;
  }

  void expect(char c) {
    if (!accept(std::string_view(&c, 1))) fail(std::string("expected '") + c + "'");
  }

  // Binary operator at the cursor with its precedence, without consuming it.
  bool peek_binary(Code& code, int& prec, std::size_t& len) {
    skip();
    const auto rest = s_.substr(pos_);
    struct Entry {
      std::string_view tok;
      Code code;
      int prec;
    };
    static constexpr std::array<Entry, 11> table{{
        {"<=", Code::Le, 1}, {">=", Code::Ge, 1}, {"==", Code::Eq, 1}, {"!=", Code::Ne, 1},
        {"<", Code::Lt, 1},  {">", Code::Gt, 1},  {"+", Code::Add, 2}, {"-", Code::Sub, 2},
        {"*", Code::Mul, 3}, {"/", Code::Div, 3}, {"^", Code::Pow, 5},
    }};
    for (const auto& e : table) {
      if (rest.substr(0, e.tok.size()) == e.tok) {
        code = e.code;
        prec = e.prec;
        len = e.tok.size();
        return true;
      }
    }
    return false;
  }

  void expression(int min_prec) {
    unary();
    Code code{};
    int prec = 0;
    std::size_t len = 0;
    while (peek_binary(code, prec, len) && prec >= min_prec) {
      pos_ += len;
      // ^ is right-associative; everything else associates left.
      expression(code == Code::Pow ? prec : prec + 1);
      emit({code});
    }
  }

  void unary() {
    if (accept("-")) {
      expression(4);
      emit({Code::Neg});
      return;
    }
    if (accept("+")) {
      expression(4);
      return;
    }
    primary();
  }

  void primary() {
    skip();
    if (pos_ >= s_.size()) fail("unexpected end of input");
    const char c = s_[pos_];
    if (c == '(') {
      ++pos_;
      expression(0);
      expect(')');
      return;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
      number();
      return;
    }
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      identifier();
      return;
    }
    fail("unexpected '" + std::string(1, c) + "'");
  }

  void number() {
    double v = 0.0;
    const char* first = s_.data() + pos_;
    const char* last = s_.data() + s_.size();
    const auto [ptr, ec] = std::from_chars(first, last, v);
    if (ec != std::errc()) fail("malformed number");
    pos_ += static_cast<std::size_t>(ptr - first);
    emit({Code::Const, 0, v});
  }

  std::size_t arguments() {
    std::size_t n = 0;
    if (accept(")")) return 0;
    do {
      expression(0);
      ++n;
    } while (accept(","));
    expect(')');
    return n;
  }

  void identifier() {
    const std::size_t start = pos_;
    while (pos_ < s_.size() &&
           (std::isalnum(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '_')) {
      ++pos_;
    }
    const std::string name(s_.substr(start, pos_ - start));
    if (accept("(")) {
      const std::size_t n = arguments();
      call(name, n);
      return;
    }
    const auto it = std::find(vars_.begin(), vars_.end(), name);
    if (it != vars_.end()) {
      emit({Code::Var, static_cast<std::size_t>(it - vars_.begin())});
      return;
    }
    if (name == "pi") {
      emit({Code::Const, 0, std::numbers::pi});
    } else if (name == "e") {
      emit({Code::Const, 0, std::numbers::e});
    } else {
      pos_ = start;
      fail("unknown identifier '" + name + "'");
    }
  }

  void call(const std::string& name, std::size_t n) {
    const auto arity = [&](std::size_t want) {
      if (n != want) fail(name + "() takes " + std::to_string(want) + " argument(s)");
    };
    for (const auto& b : kUnary) {
      if (b.name == name) {
        arity(1);
        emit({Code::Fn1, 1, 0.0, b.fn});
        return;
      }
    }
    if (name == "pow") {
      arity(2);
      emit({Code::Pow});
    } else if (name == "min" || name == "max") {
      if (n == 0) fail(name + "() needs at least one argument");
      emit({name == "min" ? Code::Min : Code::Max, n});
    } else if (name == "if") {
      arity(3);
      emit({Code::Select, 3});
    } else {
      fail("unknown function '" + name + "'");
    }
  }

  void emit(Op op) { out_.push_back(op); }

  std::string_view s_;
  const std::vector<std::string>& vars_;
  std::size_t pos_ = 0;
  std::vector<Op> out_;
};

}  // namespace

Expression Expression::parse(std::string_view text, const std::vector<std::string>& variables) {
  Expression e;
  e.text_ = std::string(text);
  e.vars_ = variables;
  e.used_.assign(variables.size(), false);
  auto code = Parser(text, variables).run();
  // Stack depth; the parser guarantees well-formed postfix.
  std::size_t depth = 0;
  for (const auto& op : code) {
    switch (op.code) {
      case Code::Const:
        ++depth;
        break;
      case Code::Var:
        e.used_[op.arg] = true;
        ++depth;
        break;
      case Code::Neg:
      case Code::Fn1:
        break;
      case Code::Min:
      case Code::Max:
      case Code::Select:
        depth -= op.arg - 1;
        break;
      default:
        --depth;
    }
    e.stack_ = std::max(e.stack_, depth);
  }
  if (e.stack_ > kMaxStack) {
    throw ConfigError("expression '" + e.text_ + "' nests too deeply");
  }
  e.code_ = std::make_shared<const std::vector<Op>>(std::move(code));
  return e;
}

bool Expression::uses(std::string_view variable) const {
  const auto it = std::find(vars_.begin(), vars_.end(), variable);
  return it != vars_.end() && used_[static_cast<std::size_t>(it - vars_.begin())];
}

double Expression::operator()(std::span<const double> vars) const {
  if (!code_) {
    throw PreconditionError("evaluating an empty expression");
  }
  if (vars.size() < vars_.size()) {
    throw PreconditionError("expression '" + text_ + "' needs " + std::to_string(vars_.size()) +
                            " variables");
  }
  std::array<double, kMaxStack> st;
  std::size_t sp = 0;
  for (const auto& op : *code_) {
    switch (op.code) {
      case Code::Const: st[sp++] = op.value; break;
      case Code::Var: st[sp++] = vars[op.arg]; break;
      case Code::Neg: st[sp - 1] = -st[sp - 1]; break;
      case Code::Fn1: st[sp - 1] = op.fn(st[sp - 1]); break;
      case Code::Min:
      case Code::Max: {
        const std::size_t base = sp - op.arg;
        double v = st[base];
        for (std::size_t i = base + 1; i < sp; ++i) {
          v = op.code == Code::Min ? std::min(v, st[i]) : std::max(v, st[i]);
        }
        sp = base;
        st[sp++] = v;
        break;
      }
      case Code::Select: {
        sp -= 3;
        st[sp] = st[sp] != 0.0 ? st[sp + 1] : st[sp + 2];
        ++sp;
        break;
      }
      default: {
        const double b = st[--sp];
        double& a = st[sp - 1];
        switch (op.code) {
          case Code::Add: a += b; break;
          case Code::Sub: a -= b; break;
          case Code::Mul: a *= b; break;
          case Code::Div: a /= b; break;
          case Code::Pow: a = std::pow(a, b); break;
          case Code::Lt: a = a < b; break;
          case Code::Le: a = a <= b; break;
          case Code::Gt: a = a > b; break;
          case Code::Ge: a = a >= b; break;
          case Code::Eq: a = a == b; break;
          case Code::Ne: a = a != b; break;
          default: break;
        }
      }
    }
  }
  return st[0];
}

RateFunction rate_from_expression(const std::string& name, const std::string& text, RateClass tag,
                                  std::vector<double> breakpoints) {
  const auto e = Expression::parse(text, {"s"});
  return RateFunction(name, [e](double s) { return e({s}); }, tag)
      .with_breakpoints(std::move(breakpoints));
}

}  // namespace iiss::expr
