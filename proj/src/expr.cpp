#include "affgeo/expr.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <sstream>

namespace affgeo {

ParseError::ParseError(const std::string& msg, std::size_t off)
    : Error(msg + " (at byte " + std::to_string(off) + ")"), offset(off) {}

namespace {

ExprPtr node(ExprNode n) { return std::make_shared<const ExprNode>(std::move(n)); }

bool is_const(const ExprPtr& e, double v) {
  return e->kind == ExprKind::Const && e->value == v;
}

}  // namespace

ExprPtr make_const(double v) { return node({.kind = ExprKind::Const, .value = v}); }

ExprPtr make_var(int index) {
  if (index < 1) throw Error("coordinate index must be >= 1");
  return node({.kind = ExprKind::Var, .index = index});
}

ExprPtr make_add(ExprPtr a, ExprPtr b) {
  if (is_const(a, 0.0)) return b;
  if (is_const(b, 0.0)) return a;
  if (a->kind == ExprKind::Const && b->kind == ExprKind::Const)
    return make_const(a->value + b->value);
  return node({.kind = ExprKind::Add, .a = std::move(a), .b = std::move(b)});
}

ExprPtr make_sub(ExprPtr a, ExprPtr b) {
  if (is_const(b, 0.0)) return a;
  if (a->kind == ExprKind::Const && b->kind == ExprKind::Const)
    return make_const(a->value - b->value);
  if (is_const(a, 0.0)) return make_neg(std::move(b));
  return node({.kind = ExprKind::Sub, .a = std::move(a), .b = std::move(b)});
}

ExprPtr make_mul(ExprPtr a, ExprPtr b) {
  // 0*b folds to 0: multiplication by an exact zero constant is exact even
  // where b is singular, because such zeros only arise from structurally
  // vanishing derivative terms.
  if (is_const(a, 0.0) || is_const(b, 0.0)) return make_const(0.0);
  if (is_const(a, 1.0)) return b;
  if (is_const(b, 1.0)) return a;
  if (a->kind == ExprKind::Const && b->kind == ExprKind::Const)
    return make_const(a->value * b->value);
  return node({.kind = ExprKind::Mul, .a = std::move(a), .b = std::move(b)});
}

ExprPtr make_div(ExprPtr a, ExprPtr b) {
  if (is_const(b, 1.0)) return a;
  if (a->kind == ExprKind::Const && b->kind == ExprKind::Const) {
    if (b->value == 0.0) throw EvalError("division by constant zero");
    return make_const(a->value / b->value);
  }
  // No 0/b fold: b may vanish at evaluation points and the error must surface.
  return node({.kind = ExprKind::Div, .a = std::move(a), .b = std::move(b)});
}

ExprPtr make_pow(ExprPtr a, int exponent) {
  if (exponent == 0) return make_const(1.0);
  if (exponent == 1) return a;
  if (a->kind == ExprKind::Const)
    return make_const(std::pow(a->value, exponent));
  return node({.kind = ExprKind::Pow, .index = exponent, .a = std::move(a)});
}

ExprPtr make_neg(ExprPtr a) {
  if (a->kind == ExprKind::Const) return make_const(-a->value);
  if (a->kind == ExprKind::Neg) return a->a;
  return node({.kind = ExprKind::Neg, .a = std::move(a)});
}

ExprPtr make_call(Func f, ExprPtr a) {
  return node({.kind = ExprKind::Call, .func = f, .a = std::move(a)});
}

// ---------------------------------------------------------------------------
// Parser: recursive descent.
//   expr   := term (('+'|'-') term)*
//   term   := unary (('*'|'/') unary)*
//   unary  := '-' unary | power
//   power  := atom ('^' signed-integer)?
//   atom   := number | coordvar | func '(' expr ')' | '(' expr ')'
// ---------------------------------------------------------------------------

namespace {

struct Parser {
  std::string_view src;
  std::size_t pos = 0;
  int dim;

  void skip_ws() {
    while (pos < src.size() && std::isspace(static_cast<unsigned char>(src[pos]))) ++pos;
  }

  bool at_end() {
    skip_ws();
    return pos >= src.size();
  }

  char peek() {
    skip_ws();
    return pos < src.size() ? src[pos] : '\0';
  }

  bool accept(char c) {
    skip_ws();
    if (pos < src.size() && src[pos] == c) {
      ++pos;
      return true;
    }
    return false;
  }

  void expect(char c) {
    skip_ws();
    if (pos >= src.size() || src[pos] != c)
      throw ParseError(std::string("expected '") + c + "'", pos);
    ++pos;
  }

  ExprPtr parse_expr_rule() {
    ExprPtr e = parse_term();
    for (;;) {
      if (accept('+'))
        e = make_add(e, parse_term());
      else if (accept('-'))
        e = make_sub(e, parse_term());
      else
        return e;
    }
  }

  ExprPtr parse_term() {
    ExprPtr e = parse_unary();
    for (;;) {
      if (accept('*'))
        e = make_mul(e, parse_unary());
      else if (accept('/'))
        e = make_div(e, parse_unary());
      else
        return e;
    }
  }

  ExprPtr parse_unary() {
    if (accept('-')) return make_neg(parse_unary());
    return parse_power();
  }

  ExprPtr parse_power() {
    ExprPtr base = parse_atom();
    if (accept('^')) {
      int exp = parse_int_exponent();
      skip_ws();
      if (pos < src.size() && src[pos] == '^')
        throw ParseError("chained '^' requires parentheses", pos);
      return make_pow(base, exp);
    }
    return base;
  }

  int parse_int_exponent() {
    skip_ws();
    if (pos < src.size() && src[pos] == '(') {
      ++pos;
      int v = parse_int_exponent();
      expect(')');
      return v;
    }
    std::size_t start = pos;
    bool neg = false;
    if (pos < src.size() && (src[pos] == '+' || src[pos] == '-')) {
      neg = src[pos] == '-';
      ++pos;
    }
    if (pos >= src.size() || !std::isdigit(static_cast<unsigned char>(src[pos])))
      throw ParseError("exponent must be an integer", start);
    long v = 0;
    while (pos < src.size() && std::isdigit(static_cast<unsigned char>(src[pos]))) {
      v = v * 10 + (src[pos] - '0');
      if (v > 1000) throw ParseError("exponent too large", start);
      ++pos;
    }
    if (pos < src.size() && src[pos] == '.')
      throw ParseError("exponent must be an integer", start);
    return static_cast<int>(neg ? -v : v);
  }

  ExprPtr parse_atom() {
    skip_ws();
    if (pos >= src.size()) throw ParseError("unexpected end of input", pos);
    char c = src[pos];
    if (c == '(') {
      ++pos;
      ExprPtr e = parse_expr_rule();
      expect(')');
      return e;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return parse_number();
    if (std::isalpha(static_cast<unsigned char>(c))) return parse_name();
    throw ParseError(std::string("unexpected character '") + c + "'", pos);
  }

  ExprPtr parse_number() {
    std::size_t start = pos;
    while (pos < src.size() &&
           (std::isdigit(static_cast<unsigned char>(src[pos])) || src[pos] == '.'))
      ++pos;
    // Scientific notation: 1e-3, 2.5E+10
    if (pos < src.size() && (src[pos] == 'e' || src[pos] == 'E')) {
      std::size_t mark = pos;
      ++pos;
      if (pos < src.size() && (src[pos] == '+' || src[pos] == '-')) ++pos;
      if (pos < src.size() && std::isdigit(static_cast<unsigned char>(src[pos]))) {
        while (pos < src.size() && std::isdigit(static_cast<unsigned char>(src[pos]))) ++pos;
      } else {
        pos = mark;  // 'e' belongs to a following name, not this literal
      }
    }
    std::string text(src.substr(start, pos - start));
    try {
      std::size_t used = 0;
      double v = std::stod(text, &used);
      if (used != text.size()) throw ParseError("malformed number", start);
      return make_const(v);
    } catch (const std::invalid_argument&) {
      throw ParseError("malformed number", start);
    } catch (const std::out_of_range&) {
      throw ParseError("number out of range", start);
    }
  }

  ExprPtr parse_name() {
    std::size_t start = pos;
    while (pos < src.size() &&
           (std::isalnum(static_cast<unsigned char>(src[pos])) || src[pos] == '_'))
      ++pos;
    std::string_view name = src.substr(start, pos - start);

    if (name.size() >= 2 && name[0] == 'x' &&
        std::all_of(name.begin() + 1, name.end(),
                    [](char ch) { return std::isdigit(static_cast<unsigned char>(ch)); })) {
      int idx = 0;
      for (std::size_t i = 1; i < name.size(); ++i) idx = idx * 10 + (name[i] - '0');
      if (idx < 1 || idx > dim)
        throw ParseError("coordinate index out of range for dimension " +
                             std::to_string(dim),
                         start);
      return make_var(idx);
    }
    if (name == "pi") return make_const(M_PI);

    static const std::pair<std::string_view, Func> funcs[] = {
        {"exp", Func::Exp},   {"log", Func::Log},   {"sin", Func::Sin},
        {"cos", Func::Cos},   {"sinh", Func::Sinh}, {"cosh", Func::Cosh},
        {"tanh", Func::Tanh}, {"sqrt", Func::Sqrt}};
    for (auto [fname, f] : funcs) {
      if (name == fname) {
        expect('(');
        ExprPtr arg = parse_expr_rule();
        expect(')');
        return make_call(f, arg);
      }
    }
    throw ParseError("unknown name '" + std::string(name) + "'", start);
  }
};

}  // namespace

ExprPtr parse_expr(std::string_view src, int dim) {
  if (dim < 1) throw Error("dimension must be >= 1");
  Parser p{src, 0, dim};
  ExprPtr e = p.parse_expr_rule();
  if (!p.at_end()) throw ParseError("trailing input", p.pos);
  return e;
}

// ---------------------------------------------------------------------------
// Evaluation
// ---------------------------------------------------------------------------

double eval_expr(const ExprNode& e, std::span<const double> x) {
  switch (e.kind) {
    case ExprKind::Const:
      return e.value;
    case ExprKind::Var:
      if (e.index > static_cast<int>(x.size()))
        throw EvalError("evaluation point has too few coordinates");
      return x[e.index - 1];
    case ExprKind::Add:
      return eval_expr(*e.a, x) + eval_expr(*e.b, x);
    case ExprKind::Sub:
      return eval_expr(*e.a, x) - eval_expr(*e.b, x);
    case ExprKind::Mul:
      return eval_expr(*e.a, x) * eval_expr(*e.b, x);
    case ExprKind::Div: {
      double num = eval_expr(*e.a, x);
      double den = eval_expr(*e.b, x);
      if (den == 0.0) throw EvalError("division by zero");
      return num / den;
    }
    case ExprKind::Pow: {
      double base = eval_expr(*e.a, x);
      if (base == 0.0 && e.index < 0) throw EvalError("zero raised to negative power");
      return std::pow(base, e.index);
    }
    case ExprKind::Neg:
      return -eval_expr(*e.a, x);
    case ExprKind::Call: {
      double v = eval_expr(*e.a, x);
      switch (e.func) {
        case Func::Exp:
          return std::exp(v);
        case Func::Log:
          if (v <= 0.0) throw EvalError("log of nonpositive value");
          return std::log(v);
        case Func::Sin:
          return std::sin(v);
        case Func::Cos:
          return std::cos(v);
        case Func::Sinh:
          return std::sinh(v);
        case Func::Cosh:
          return std::cosh(v);
        case Func::Tanh:
          return std::tanh(v);
        case Func::Sqrt:
          if (v < 0.0) throw EvalError("sqrt of negative value");
          return std::sqrt(v);
      }
      throw Error("unreachable");
    }
  }
  throw Error("unreachable");
}

// ---------------------------------------------------------------------------
// Exact differentiation
// ---------------------------------------------------------------------------

ExprPtr diff_expr(const ExprPtr& e, int k) {
  switch (e->kind) {
    case ExprKind::Const:
      return make_const(0.0);
    case ExprKind::Var:
      return make_const(e->index == k ? 1.0 : 0.0);
    case ExprKind::Add:
      return make_add(diff_expr(e->a, k), diff_expr(e->b, k));
    case ExprKind::Sub:
      return make_sub(diff_expr(e->a, k), diff_expr(e->b, k));
    case ExprKind::Mul:
      return make_add(make_mul(diff_expr(e->a, k), e->b),
                      make_mul(e->a, diff_expr(e->b, k)));
    case ExprKind::Div:
      // (a/b)' = a'/b - a*b'/b^2
      return make_sub(make_div(diff_expr(e->a, k), e->b),
                      make_div(make_mul(e->a, diff_expr(e->b, k)), make_pow(e->b, 2)));
    case ExprKind::Pow:
      // (a^n)' = n*a^(n-1)*a'
      return make_mul(make_mul(make_const(e->index), make_pow(e->a, e->index - 1)),
                      diff_expr(e->a, k));
    case ExprKind::Neg:
      return make_neg(diff_expr(e->a, k));
    case ExprKind::Call: {
      ExprPtr da = diff_expr(e->a, k);
      ExprPtr outer;
      switch (e->func) {
        case Func::Exp:
          outer = make_call(Func::Exp, e->a);
          break;
        case Func::Log:
          return make_div(da, e->a);
        case Func::Sin:
          outer = make_call(Func::Cos, e->a);
          break;
        case Func::Cos:
          outer = make_neg(make_call(Func::Sin, e->a));
          break;
        case Func::Sinh:
          outer = make_call(Func::Cosh, e->a);
          break;
        case Func::Cosh:
          outer = make_call(Func::Sinh, e->a);
          break;
        case Func::Tanh:
          outer = make_sub(make_const(1.0), make_pow(make_call(Func::Tanh, e->a), 2));
          break;
        case Func::Sqrt:
          return make_div(da, make_mul(make_const(2.0), make_call(Func::Sqrt, e->a)));
      }
      return make_mul(outer, da);
    }
  }
  throw Error("unreachable");
}

ExprPtr compose_expr(const ExprPtr& e, const std::vector<ExprPtr>& subs) {
  switch (e->kind) {
    case ExprKind::Const:
      return e;
    case ExprKind::Var:
      if (e->index > static_cast<int>(subs.size()))
        throw Error("substitution list too short for coordinate x" +
                    std::to_string(e->index));
      return subs[e->index - 1];
    case ExprKind::Add:
      return make_add(compose_expr(e->a, subs), compose_expr(e->b, subs));
    case ExprKind::Sub:
      return make_sub(compose_expr(e->a, subs), compose_expr(e->b, subs));
    case ExprKind::Mul:
      return make_mul(compose_expr(e->a, subs), compose_expr(e->b, subs));
    case ExprKind::Div:
      return make_div(compose_expr(e->a, subs), compose_expr(e->b, subs));
    case ExprKind::Pow:
      return make_pow(compose_expr(e->a, subs), e->index);
    case ExprKind::Neg:
      return make_neg(compose_expr(e->a, subs));
    case ExprKind::Call:
      return make_call(e->func, compose_expr(e->a, subs));
  }
  throw Error("unreachable");
}

// ---------------------------------------------------------------------------
// Printing (round-trips through parse_expr)
// ---------------------------------------------------------------------------

namespace {

const char* func_name(Func f) {
  switch (f) {
    case Func::Exp: return "exp";
    case Func::Log: return "log";
    case Func::Sin: return "sin";
    case Func::Cos: return "cos";
    case Func::Sinh: return "sinh";
    case Func::Cosh: return "cosh";
    case Func::Tanh: return "tanh";
    case Func::Sqrt: return "sqrt";
  }
  return "?";
}

int precedence(const ExprNode& e) {
  switch (e.kind) {
    case ExprKind::Add:
    case ExprKind::Sub:
      return 1;
    case ExprKind::Mul:
    case ExprKind::Div:
      return 2;
    case ExprKind::Neg:
      return 3;
    case ExprKind::Pow:
      return 4;
    default:
      return 5;
  }
}

void print_rec(std::ostringstream& out, const ExprNode& e, int parent_prec,
               bool rhs_of_noncommutative) {
  int prec = precedence(e);
  bool need_paren =
      prec < parent_prec || (prec == parent_prec && rhs_of_noncommutative);
  if (need_paren) out << '(';
  switch (e.kind) {
    case ExprKind::Const: {
      std::ostringstream num;
      num.precision(17);
      num << e.value;
      std::string s = num.str();
      if (e.value < 0) {
        out << '(' << s << ')';
      } else {
        out << s;
      }
      break;
    }
    case ExprKind::Var:
      out << 'x' << e.index;
      break;
    case ExprKind::Add:
      print_rec(out, *e.a, 1, false);
      out << " + ";
      print_rec(out, *e.b, 1, false);
      break;
    case ExprKind::Sub:
      print_rec(out, *e.a, 1, false);
      out << " - ";
      print_rec(out, *e.b, 1, true);
      break;
    case ExprKind::Mul:
      print_rec(out, *e.a, 2, false);
      out << "*";
      print_rec(out, *e.b, 2, false);
      break;
    case ExprKind::Div:
      print_rec(out, *e.a, 2, false);
      out << "/";
      print_rec(out, *e.b, 2, true);
      break;
    case ExprKind::Pow:
      print_rec(out, *e.a, 5, false);
      out << '^';
      if (e.index < 0)
        out << '(' << e.index << ')';
      else
        out << e.index;
      break;
    case ExprKind::Neg:
      out << '-';
      print_rec(out, *e.a, 3, true);
      break;
    case ExprKind::Call:
      out << func_name(e.func) << '(';
      print_rec(out, *e.a, 0, false);
      out << ')';
      break;
  }
  if (need_paren) out << ')';
}

}  // namespace

std::string expr_to_string(const ExprPtr& e) {
  if (!e) return "<null>";
  std::ostringstream out;
  print_rec(out, *e, 0, false);
  return out.str();
}

// ---------------------------------------------------------------------------
// Field
// ---------------------------------------------------------------------------

Field::Field(ExprPtr expr, int dim)
    : expr_(std::move(expr)), dim_(dim), cache_(std::make_shared<Cache>()) {
  if (!expr_) throw Error("null expression");
  if (dim_ < 1) throw Error("dimension must be >= 1");
}

Field Field::parse(std::string_view src, int dim) {
  return Field(parse_expr(src, dim), dim);
}

double Field::eval(std::span<const double> x) const {
  if (!expr_) throw Error("empty field");
  if (static_cast<int>(x.size()) != dim_)
    throw Error("evaluation point dimension mismatch");
  return eval_expr(*expr_, x);
}

ExprPtr Field::derivative_expr(std::span<const int> multi) const {
  if (!expr_) throw Error("empty field");
  if (multi.size() > 3) throw Error("derivative order above 3 is not supported");
  for (int k : multi)
    if (k < 1 || k > dim_) throw Error("derivative index out of range");

  if (multi.empty()) return expr_;

  // Mixed partials commute for smooth expressions, so cache per sorted key.
  std::array<int, 3> key{0, 0, 0};
  for (std::size_t i = 0; i < multi.size(); ++i) key[i] = multi[i];
  std::sort(key.begin(), key.begin() + multi.size());

  std::scoped_lock lock(cache_->mu);
  auto it = cache_->d.find(key);
  if (it != cache_->d.end()) return it->second;

  ExprPtr d = expr_;
  for (std::size_t i = 0; i < multi.size(); ++i) d = diff_expr(d, key[i]);
  cache_->d.emplace(key, d);
  return d;
}

Field Field::derivative(std::span<const int> multi) const {
  return Field(derivative_expr(multi), dim_);
}

Field Field::derivative(std::initializer_list<int> multi) const {
  return derivative(std::span<const int>(multi.begin(), multi.size()));
}

double Field::eval_partial(std::span<const int> multi, std::span<const double> x) const {
  if (static_cast<int>(x.size()) != dim_)
    throw Error("evaluation point dimension mismatch");
  return eval_expr(*derivative_expr(multi), x);
}

double Field::eval_partial(std::initializer_list<int> multi,
                           std::span<const double> x) const {
  return eval_partial(std::span<const int>(multi.begin(), multi.size()), x);
}

// ---------------------------------------------------------------------------
// Symbolic matrix helpers
// ---------------------------------------------------------------------------

ExprPtr symbolic_det(const ExprMatrix& m) {
  const std::size_t n = m.size();
  for (const auto& row : m)
    if (row.size() != n) throw Error("matrix is not square");
  switch (n) {
    case 1:
      return m[0][0];
    case 2:
      return make_sub(make_mul(m[0][0], m[1][1]), make_mul(m[0][1], m[1][0]));
    case 3: {
      ExprPtr c0 = make_sub(make_mul(m[1][1], m[2][2]), make_mul(m[1][2], m[2][1]));
      ExprPtr c1 = make_sub(make_mul(m[1][0], m[2][2]), make_mul(m[1][2], m[2][0]));
      ExprPtr c2 = make_sub(make_mul(m[1][0], m[2][1]), make_mul(m[1][1], m[2][0]));
      return make_add(make_sub(make_mul(m[0][0], c0), make_mul(m[0][1], c1)),
                      make_mul(m[0][2], c2));
    }
    default:
      throw Error("symbolic determinant supports sizes 1..3");
  }
}

ExprMatrix symbolic_inverse(const ExprMatrix& m) {
  const std::size_t n = m.size();
  ExprPtr det = symbolic_det(m);
  ExprMatrix inv(n, std::vector<ExprPtr>(n));
  if (n == 1) {
    inv[0][0] = make_div(make_const(1.0), m[0][0]);
    return inv;
  }
  if (n == 2) {
    inv[0][0] = make_div(m[1][1], det);
    inv[0][1] = make_div(make_neg(m[0][1]), det);
    inv[1][0] = make_div(make_neg(m[1][0]), det);
    inv[1][1] = make_div(m[0][0], det);
    return inv;
  }
  if (n == 3) {
    auto minor2 = [&](std::size_t r0, std::size_t r1, std::size_t c0,
                      std::size_t c1) {
      return make_sub(make_mul(m[r0][c0], m[r1][c1]), make_mul(m[r0][c1], m[r1][c0]));
    };
    for (std::size_t i = 0; i < 3; ++i)
      for (std::size_t j = 0; j < 3; ++j) {
        std::size_t r0 = (j + 1) % 3, r1 = (j + 2) % 3;
        std::size_t c0 = (i + 1) % 3, c1 = (i + 2) % 3;
        if (r0 > r1) std::swap(r0, r1);
        if (c0 > c1) std::swap(c0, c1);
        // Cofactor with sign (-1)^{i+j}; transposed indexing gives adjugate.
        ExprPtr minor = minor2(r0, r1, c0, c1);
        if ((i + j) % 2 == 1) minor = make_neg(minor);
        inv[i][j] = make_div(minor, det);
      }
    return inv;
  }
  throw Error("symbolic inverse supports sizes 1..3");
}

// ---------------------------------------------------------------------------
// Finite-difference oracle
// ---------------------------------------------------------------------------

namespace {

// 4th-order central stencils for pure derivatives of order 1..3.
// Offsets (in units of h) and weights; weight scale divides by h^order.
struct Stencil {
  std::vector<std::pair<int, double>> taps;
  double scale;  // multiply sum of taps by scale / h^order
};

const Stencil& stencil_for(int order) {
  static const Stencil s1{{{-2, 1.0}, {-1, -8.0}, {1, 8.0}, {2, -1.0}}, 1.0 / 12.0};
  static const Stencil s2{
      {{-2, -1.0}, {-1, 16.0}, {0, -30.0}, {1, 16.0}, {2, -1.0}}, 1.0 / 12.0};
  static const Stencil s3{
      {{-3, 1.0}, {-2, -8.0}, {-1, 13.0}, {1, -13.0}, {2, 8.0}, {3, -1.0}},
      1.0 / 8.0};
  switch (order) {
    case 1: return s1;
    case 2: return s2;
    case 3: return s3;
  }
  throw Error("finite-difference order must be 1..3");
}

// Apply nested per-axis stencils for a multi-index grouped by axis.
double fd_eval(const Field& f, std::vector<double>& pt,
               const std::vector<std::pair<int, int>>& axes, std::size_t level,
               double h) {
  if (level == axes.size()) return f.eval(pt);
  auto [axis, order] = axes[level];
  const Stencil& st = stencil_for(order);
  double saved = pt[axis - 1];
  double acc = 0.0;
  for (auto [off, w] : st.taps) {
    pt[axis - 1] = saved + off * h;
    acc += w * fd_eval(f, pt, axes, level + 1, h);
  }
  pt[axis - 1] = saved;
  return acc * st.scale / std::pow(h, order);
}

}  // namespace

double fd_check(const Field& f, std::span<const double> point,
                std::span<const int> multi, double h) {
  if (multi.empty() || multi.size() > 3)
    throw Error("finite-difference check needs 1..3 derivative indices");
  std::vector<int> sorted(multi.begin(), multi.end());
  std::sort(sorted.begin(), sorted.end());
  std::vector<std::pair<int, int>> axes;  // (axis, order)
  for (int k : sorted) {
    if (!axes.empty() && axes.back().first == k)
      ++axes.back().second;
    else
      axes.emplace_back(k, 1);
  }
  std::vector<double> pt(point.begin(), point.end());
  double approx = fd_eval(f, pt, axes, 0, h);
  double exact = f.eval_partial(multi, point);
  return std::abs(exact - approx);
}

double fd_check(const Field& f, std::span<const double> point,
                std::initializer_list<int> multi, double h) {
  return fd_check(f, point, std::span<const int>(multi.begin(), multi.size()), h);
}

}  // namespace affgeo
