#pragma once

#include <array>
#include <map>
#include <memory>
#include <mutex>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace affgeo {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Syntax error; `offset` is the byte position in the source string.
struct ParseError : Error {
  ParseError(const std::string& msg, std::size_t offset);
  std::size_t offset;
};

/// Evaluation outside the admissible set (log of nonpositive, division by
/// zero, sqrt of negative).
struct EvalError : Error {
  using Error::Error;
};

enum class ExprKind { Const, Var, Add, Sub, Mul, Div, Pow, Neg, Call };
enum class Func { Exp, Log, Sin, Cos, Sinh, Cosh, Tanh, Sqrt };

struct ExprNode;
using ExprPtr = std::shared_ptr<const ExprNode>;

// Immutable AST node. Subtrees are shared; nothing mutates after build.
struct ExprNode {
  ExprKind kind;
  double value = 0.0;  // Const
  int index = 0;       // Var: 1-based coordinate; Pow: integer exponent
  Func func = Func::Exp;
  ExprPtr a, b;
};

ExprPtr make_const(double v);
ExprPtr make_var(int index);
ExprPtr make_add(ExprPtr a, ExprPtr b);
ExprPtr make_sub(ExprPtr a, ExprPtr b);
ExprPtr make_mul(ExprPtr a, ExprPtr b);
ExprPtr make_div(ExprPtr a, ExprPtr b);
ExprPtr make_pow(ExprPtr a, int exponent);
ExprPtr make_neg(ExprPtr a);
ExprPtr make_call(Func f, ExprPtr a);

/// Parse `src` over coordinates x1..xdim. Throws ParseError.
ExprPtr parse_expr(std::string_view src, int dim);

double eval_expr(const ExprNode& e, std::span<const double> x);

/// Exact derivative with respect to coordinate `k` (1-based).
ExprPtr diff_expr(const ExprPtr& e, int k);

/// Substitute coordinates: var i -> subs[i-1]. Result lives in the
/// coordinate space of the substituted expressions.
ExprPtr compose_expr(const ExprPtr& e, const std::vector<ExprPtr>& subs);

std::string expr_to_string(const ExprPtr& e);

/// A parsed scalar expression in chart coordinates with exact partial
/// derivatives up to order 3, cached per sorted multi-index.
class Field {
public:
  Field() = default;
  Field(ExprPtr expr, int dim);

  static Field parse(std::string_view src, int dim);

  int dim() const { return dim_; }
  bool valid() const { return expr_ != nullptr; }
  const ExprPtr& expr() const { return expr_; }

  double eval(std::span<const double> x) const;

  /// Exact partial derivative for a multi-index of coordinate indices
  /// (1-based, length <= 3). Order above 3 is rejected.
  Field derivative(std::span<const int> multi) const;
  Field derivative(std::initializer_list<int> multi) const;

  double eval_partial(std::span<const int> multi, std::span<const double> x) const;
  double eval_partial(std::initializer_list<int> multi, std::span<const double> x) const;

  std::string to_string() const { return expr_to_string(expr_); }

private:
  ExprPtr derivative_expr(std::span<const int> multi) const;

  struct Cache {
    std::mutex mu;
    std::map<std::array<int, 3>, ExprPtr> d;
  };

  ExprPtr expr_;
  int dim_ = 0;
  std::shared_ptr<Cache> cache_;
};

/// Small symbolic matrices (boundary frames, pulled-back metrics).
using ExprMatrix = std::vector<std::vector<ExprPtr>>;

/// Determinant by cofactor expansion; supported for sizes 1..3.
ExprPtr symbolic_det(const ExprMatrix& m);

/// Inverse as adjugate / det; supported for sizes 1..3.
ExprMatrix symbolic_inverse(const ExprMatrix& m);

/// |exact - 4th order central finite difference| for the given multi-index.
/// The stencil uses only Field::eval, so it is an independent oracle for the
/// symbolic derivatives.
double fd_check(const Field& f, std::span<const double> point,
                std::span<const int> multi, double h);
double fd_check(const Field& f, std::span<const double> point,
                std::initializer_list<int> multi, double h);

}  // namespace affgeo
