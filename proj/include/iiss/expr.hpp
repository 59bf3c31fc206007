#pragma once

#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "iiss/ratefns.hpp"

namespace iiss::expr {

/// Compiled arithmetic expression over named variables.
///
/// Grammar: numbers, variables, the constants `pi` and `e`, `+ - * / ^`
/// (right-associative power), unary minus, comparisons `< <= > >= == !=`
/// (yielding 1 or 0), and the functions
///   abs sqrt cbrt exp log sin cos tan sinh cosh tanh sign  (one argument)
///   pow(a, b), min(a, ...), max(a, ...), if(cond, a, b).
/// `if` selects `a` when cond is nonzero; both branches are evaluated.
class Expression {
 public:
  Expression() = default;
  /// Throws ConfigError with the offending column on syntax errors or
  /// unknown identifiers.
  static Expression parse(std::string_view text, const std::vector<std::string>& variables);

  /// `vars` follows the order given to parse().
  double operator()(std::span<const double> vars) const;
  double operator()(std::initializer_list<double> vars) const {
    return (*this)(std::span<const double>(vars.begin(), vars.size()));
  }

  [[nodiscard]] const std::string& text() const noexcept { return text_; }
  [[nodiscard]] const std::vector<std::string>& variables() const noexcept { return vars_; }
  [[nodiscard]] bool uses(std::string_view variable) const;

  struct Op;  // postfix instruction, defined in the implementation

 private:
  std::shared_ptr<const std::vector<Op>> code_;
  std::string text_;
  std::vector<std::string> vars_;
  std::vector<bool> used_;
  std::size_t stack_ = 0;
};

/// Rate function s ↦ expr(s) with the given tag and declared breakpoints.
RateFunction rate_from_expression(const std::string& name, const std::string& text, RateClass tag,
                                  std::vector<double> breakpoints = {});

}  // namespace iiss::expr
