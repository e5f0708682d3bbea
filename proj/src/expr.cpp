#include "nholo/expr.hpp"

#include <array>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdlib>

namespace nholo {

ExprPtr make_number(double v) {
  auto n = std::make_shared<Node>();
  n->kind = Node::Kind::Number;
  n->number = v;
  return n;
}

ExprPtr make_coord(int idx) {
  auto n = std::make_shared<Node>();
  n->kind = Node::Kind::Coord;
  n->coord = idx;
  return n;
}

ExprPtr make_neg(ExprPtr a) {
  auto n = std::make_shared<Node>();
  n->kind = Node::Kind::Neg;
  n->a = std::move(a);
  return n;
}

ExprPtr make_binary(char op, ExprPtr a, ExprPtr b) {
  auto n = std::make_shared<Node>();
  n->kind = Node::Kind::Binary;
  n->op = op;
  n->a = std::move(a);
  n->b = std::move(b);
  return n;
}

ExprPtr make_call(Func f, ExprPtr a) {
  auto n = std::make_shared<Node>();
  n->kind = Node::Kind::Call;
  n->func = f;
  n->a = std::move(a);
  return n;
}

ExprPtr make_integral(ExprPtr integrand, int coord, double lower, int panels) {
  if (panels < 2 || panels % 2 != 0)
    throw Error("quadrature panels must be even and >= 2");
  auto n = std::make_shared<Node>();
  n->kind = Node::Kind::Integral;
  n->a = std::move(integrand);
  n->coord = coord;
  n->lower = lower;
  n->panels = panels;
  return n;
}

bool structurally_equal(const ExprPtr& a, const ExprPtr& b) {
  if (a == b) return true;
  if (!a || !b) return false;
  if (a->kind != b->kind) return false;
  switch (a->kind) {
    case Node::Kind::Number:
      return a->number == b->number;
    case Node::Kind::Coord:
      return a->coord == b->coord;
    case Node::Kind::Neg:
      return structurally_equal(a->a, b->a);
    case Node::Kind::Binary:
      return a->op == b->op && structurally_equal(a->a, b->a) &&
             structurally_equal(a->b, b->b);
    case Node::Kind::Call:
      return a->func == b->func && structurally_equal(a->a, b->a);
    case Node::Kind::Integral:
      return a->coord == b->coord && a->lower == b->lower &&
             a->panels == b->panels && structurally_equal(a->a, b->a);
  }
  return false;
}

ScalarField::ScalarField(Chart chart, ExprPtr body)
    : chart_(std::move(chart)), body_(std::move(body)) {}

// ---------------------------------------------------------------------------
// Parser
// ---------------------------------------------------------------------------

namespace {

struct FuncName {
  const char* name;
  Func func;
};

constexpr std::array<FuncName, 11> kFuncs = {{
    {"sin", Func::Sin},
    {"cos", Func::Cos},
    {"tan", Func::Tan},
    {"sinh", Func::Sinh},
    {"cosh", Func::Cosh},
    {"tanh", Func::Tanh},
    {"exp", Func::Exp},
    {"ln", Func::Ln},
    {"sqrt", Func::Sqrt},
    {"abs", Func::Abs},
    {"sign", Func::Sign},
}};

const char* func_name(Func f) {
  for (const auto& fn : kFuncs)
    if (fn.func == f) return fn.name;
  return "?";
}

class Parser {
 public:
  Parser(std::string_view src, const Chart& chart) : src_(src), chart_(chart) {}

  ExprPtr parse() {
    skip_ws();
    if (pos_ >= src_.size()) throw ParseError("empty expression", pos_);
    ExprPtr e = parse_sum();
    skip_ws();
    if (pos_ < src_.size())
      throw ParseError("unexpected trailing input", pos_);
    return e;
  }

 private:
  std::string_view src_;
  const Chart& chart_;
  std::size_t pos_ = 0;

  void skip_ws() {
    while (pos_ < src_.size() &&
           std::isspace(static_cast<unsigned char>(src_[pos_])))
      ++pos_;
  }

  bool peek(char c) {
    skip_ws();
    return pos_ < src_.size() && src_[pos_] == c;
  }

  bool accept(char c) {
    if (peek(c)) {
      ++pos_;
      return true;
    }
    return false;
  }

  void expect(char c) {
    if (!accept(c))
      throw ParseError(std::string("expected '") + c + "'", pos_);
  }

  ExprPtr parse_sum() {
    ExprPtr e = parse_term();
    for (;;) {
      if (accept('+'))
        e = make_binary('+', e, parse_term());
      else if (accept('-'))
        e = make_binary('-', e, parse_term());
      else
        return e;
    }
  }

  ExprPtr parse_term() {
    ExprPtr e = parse_unary();
    for (;;) {
      if (accept('*'))
        e = make_binary('*', e, parse_unary());
      else if (accept('/'))
        e = make_binary('/', e, parse_unary());
      else
        return e;
    }
  }

  ExprPtr parse_unary() {
    if (accept('-')) return make_neg(parse_unary());
    if (accept('+')) return parse_unary();
    return parse_power();
  }

  ExprPtr parse_power() {
    ExprPtr base = parse_atom();
    if (accept('^')) {
      // right associative; the exponent may itself be signed
      ExprPtr expnt = parse_unary();
      return make_binary('^', base, expnt);
    }
    return base;
  }

  ExprPtr parse_atom() {
    skip_ws();
    if (pos_ >= src_.size()) throw ParseError("unexpected end of input", pos_);
    char c = src_[pos_];
    if (c == '(') {
      ++pos_;
      ExprPtr e = parse_sum();
      expect(')');
      return e;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.')
      return parse_number();
    if (std::isalpha(static_cast<unsigned char>(c))) return parse_ident();
    throw ParseError(std::string("unexpected character '") + c + "'", pos_);
  }

  ExprPtr parse_number() {
    std::size_t start = pos_;
    while (pos_ < src_.size() &&
           (std::isdigit(static_cast<unsigned char>(src_[pos_])) ||
            src_[pos_] == '.'))
      ++pos_;
    if (pos_ < src_.size() && (src_[pos_] == 'e' || src_[pos_] == 'E')) {
      std::size_t mark = pos_;
      ++pos_;
      if (pos_ < src_.size() && (src_[pos_] == '+' || src_[pos_] == '-'))
        ++pos_;
      if (pos_ < src_.size() &&
          std::isdigit(static_cast<unsigned char>(src_[pos_]))) {
        while (pos_ < src_.size() &&
               std::isdigit(static_cast<unsigned char>(src_[pos_])))
          ++pos_;
      } else {
        pos_ = mark;  // 'e' belongs to a following identifier, not an exponent
      }
    }
    double v = 0;
    auto text = src_.substr(start, pos_ - start);
    auto res = std::from_chars(text.data(), text.data() + text.size(), v);
    if (res.ec != std::errc() || res.ptr != text.data() + text.size())
      throw ParseError("malformed number literal", start);
    return make_number(v);
  }

  ExprPtr parse_ident() {
    std::size_t start = pos_;
    while (pos_ < src_.size() &&
           (std::isalnum(static_cast<unsigned char>(src_[pos_])) ||
            src_[pos_] == '_'))
      ++pos_;
    std::string name(src_.substr(start, pos_ - start));
    if (peek('(')) {
      if (name == "integ") return parse_integral(start);
      for (const auto& fn : kFuncs) {
        if (name == fn.name) {
          expect('(');
          ExprPtr arg = parse_sum();
          expect(')');
          return make_call(fn.func, arg);
        }
      }
      throw ParseError("unknown function '" + name + "'", start);
    }
    int idx = chart_.find(name);
    if (idx < 0) throw ParseError("unknown identifier '" + name + "'", start);
    return make_coord(idx);
  }

  // integ(expr, coord, lower)
  ExprPtr parse_integral(std::size_t start) {
    expect('(');
    ExprPtr integrand = parse_sum();
    expect(',');
    skip_ws();
    std::size_t nstart = pos_;
    while (pos_ < src_.size() &&
           (std::isalnum(static_cast<unsigned char>(src_[pos_])) ||
            src_[pos_] == '_'))
      ++pos_;
    std::string cname(src_.substr(nstart, pos_ - nstart));
    int idx = chart_.find(cname);
    if (idx < 0)
      throw ParseError("unknown coordinate '" + cname + "'", nstart);
    expect(',');
    skip_ws();
    bool negate = accept('-');
    ExprPtr lo = parse_number();
    expect(')');
    (void)start;
    return make_integral(integrand, idx, negate ? -lo->number : lo->number);
  }
};

}  // namespace

ScalarField parse(std::string_view source, const Chart& chart) {
  Parser p(source, chart);
  return ScalarField(chart, p.parse());
}

// ---------------------------------------------------------------------------
// Printing
// ---------------------------------------------------------------------------

namespace {

std::string number_to_string(double v) {
  if (v < 0) return "-" + number_to_string(-v);
  std::array<char, 32> buf;
  auto res = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  return std::string(buf.data(), res.ptr);
}

int precedence(const Node& n) {
  switch (n.kind) {
    case Node::Kind::Binary:
      if (n.op == '+' || n.op == '-') return 1;
      if (n.op == '*' || n.op == '/') return 2;
      return 4;  // ^
    case Node::Kind::Neg:
      return 3;
    default:
      return 5;
  }
}

void print_node(const ExprPtr& e, const Chart& chart, std::string& out,
                int parent_prec, bool right_side) {
  int prec = precedence(*e);
  bool need_parens = prec < parent_prec ||
                     (prec == parent_prec && right_side &&
                      e->kind == Node::Kind::Binary && e->op != '^');
  if (need_parens) out += '(';
  switch (e->kind) {
    case Node::Kind::Number:
      out += number_to_string(e->number);
      break;
    case Node::Kind::Coord:
      out += chart.name(e->coord);
      break;
    case Node::Kind::Neg:
      out += '-';
      print_node(e->a, chart, out, prec + 1, false);
      break;
    case Node::Kind::Binary:
      // ^ is right associative: left operand needs parens at equal precedence
      print_node(e->a, chart, out, e->op == '^' ? prec + 1 : prec, false);
      out += e->op;
      print_node(e->b, chart, out, prec, e->op != '^');
      break;
    case Node::Kind::Call:
      out += func_name(e->func);
      out += '(';
      print_node(e->a, chart, out, 0, false);
      out += ')';
      break;
    case Node::Kind::Integral:
      out += "integ(";
      print_node(e->a, chart, out, 0, false);
      out += ',';
      out += chart.name(e->coord);
      out += ',';
      out += number_to_string(e->lower);
      out += ')';
      break;
  }
  if (need_parens) out += ')';
}

}  // namespace

std::string to_string(const ExprPtr& e, const Chart& chart) {
  std::string out;
  print_node(e, chart, out, 0, false);
  return out;
}

std::string to_string(const ScalarField& f) {
  return to_string(f.body(), f.chart());
}

// ---------------------------------------------------------------------------
// Differentiation
// ---------------------------------------------------------------------------

namespace {

ExprPtr diff_node(const ExprPtr& e, int coord);

ExprPtr mul(ExprPtr a, ExprPtr b) { return make_binary('*', a, b); }
ExprPtr dvd(ExprPtr a, ExprPtr b) { return make_binary('/', a, b); }
ExprPtr add(ExprPtr a, ExprPtr b) { return make_binary('+', a, b); }
ExprPtr sub(ExprPtr a, ExprPtr b) { return make_binary('-', a, b); }

ExprPtr diff_call(const ExprPtr& e, int coord) {
  ExprPtr u = e->a;
  ExprPtr du = diff_node(u, coord);
  ExprPtr outer;
  switch (e->func) {
    case Func::Sin:
      outer = make_call(Func::Cos, u);
      break;
    case Func::Cos:
      outer = make_neg(make_call(Func::Sin, u));
      break;
    case Func::Tan:
      outer = dvd(make_number(1), make_binary('^', make_call(Func::Cos, u),
                                              make_number(2)));
      break;
    case Func::Sinh:
      outer = make_call(Func::Cosh, u);
      break;
    case Func::Cosh:
      outer = make_call(Func::Sinh, u);
      break;
    case Func::Tanh:
      outer = dvd(make_number(1), make_binary('^', make_call(Func::Cosh, u),
                                              make_number(2)));
      break;
    case Func::Exp:
      outer = make_call(Func::Exp, u);
      break;
    case Func::Ln:
      outer = dvd(make_number(1), u);
      break;
    case Func::Sqrt:
      outer = dvd(make_number(1),
                  mul(make_number(2), make_call(Func::Sqrt, u)));
      break;
    case Func::Abs:
      // d|u| = sign(u) du; the kink at u = 0 is a domain matter, not ours
      outer = make_call(Func::Sign, u);
      break;
    case Func::Sign:
      return make_number(0);
  }
  return mul(outer, du);
}

ExprPtr diff_node(const ExprPtr& e, int coord) {
  switch (e->kind) {
    case Node::Kind::Number:
      return make_number(0);
    case Node::Kind::Coord:
      return make_number(e->coord == coord ? 1 : 0);
    case Node::Kind::Neg:
      return make_neg(diff_node(e->a, coord));
    case Node::Kind::Binary: {
      ExprPtr da = diff_node(e->a, coord);
      ExprPtr db = diff_node(e->b, coord);
      switch (e->op) {
        case '+':
          return add(da, db);
        case '-':
          return sub(da, db);
        case '*':
          return add(mul(da, e->b), mul(e->a, db));
        case '/':
          return dvd(sub(mul(da, e->b), mul(e->a, db)),
                     make_binary('^', e->b, make_number(2)));
        case '^': {
          if (e->b->kind == Node::Kind::Number) {
            double c = e->b->number;
            if (c == 0) return make_number(0);
            return mul(mul(make_number(c),
                           make_binary('^', e->a, make_number(c - 1))),
                       da);
          }
          // u^w = exp(w ln u): d = u^w (dw ln u + w du / u)
          return mul(e, add(mul(db, make_call(Func::Ln, e->a)),
                            dvd(mul(e->b, da), e->a)));
        }
      }
      throw Error("bad binary operator in differentiation");
    }
    case Node::Kind::Call:
      return diff_call(e, coord);
    case Node::Kind::Integral:
      if (e->coord == coord) return e->a;  // fundamental theorem
      return make_integral(diff_node(e->a, coord), e->coord, e->lower,
                           e->panels);
  }
  throw Error("bad node kind in differentiation");
}

}  // namespace

ScalarField differentiate(const ScalarField& f, int coord, int order) {
  if (order < 1) throw Error("derivative order must be >= 1");
  if (coord < 0 || coord >= f.chart().dim())
    throw Error("coordinate index out of range");
  ScalarField cur = f;
  for (int k = 0; k < order; ++k) {
    ScalarField next;
    {
      std::lock_guard<std::mutex> lock(cur.cache_->mu);
      auto it = cur.cache_->d.find(coord);
      if (it != cur.cache_->d.end()) {
        next = it->second;
      } else {
        next = ScalarField(cur.chart(),
                           simplify_expr(diff_node(cur.body(), coord)));
        cur.cache_->d.emplace(coord, next);
      }
    }
    cur = next;
  }
  return cur;
}

ScalarField differentiate(const ScalarField& f, std::string_view coord,
                          int order) {
  return differentiate(f, f.chart().index(coord), order);
}

// ---------------------------------------------------------------------------
// Simplification
// ---------------------------------------------------------------------------

namespace {

bool is_number(const ExprPtr& e, double v) {
  return e->kind == Node::Kind::Number && e->number == v;
}

ExprPtr simplify_node(const ExprPtr& e) {
  switch (e->kind) {
    case Node::Kind::Number:
    case Node::Kind::Coord:
      return e;
    case Node::Kind::Neg: {
      ExprPtr a = simplify_node(e->a);
      if (a->kind == Node::Kind::Number) return make_number(-a->number);
      if (a->kind == Node::Kind::Neg) return a->a;
      return a == e->a ? e : make_neg(a);
    }
    case Node::Kind::Call: {
      ExprPtr a = simplify_node(e->a);
      return a == e->a ? e : make_call(e->func, a);
    }
    case Node::Kind::Integral: {
      ExprPtr a = simplify_node(e->a);
      if (is_number(a, 0)) return make_number(0);
      return a == e->a ? e : make_integral(a, e->coord, e->lower, e->panels);
    }
    case Node::Kind::Binary: {
      ExprPtr a = simplify_node(e->a);
      ExprPtr b = simplify_node(e->b);
      if (a->kind == Node::Kind::Number && b->kind == Node::Kind::Number) {
        double x = a->number, y = b->number;
        switch (e->op) {
          case '+':
            return make_number(x + y);
          case '-':
            return make_number(x - y);
          case '*':
            return make_number(x * y);
          case '/':
            if (y != 0) return make_number(x / y);
            break;  // keep the node; evaluation reports the domain error
          case '^': {
            double r = std::pow(x, y);
            if (std::isfinite(r)) return make_number(r);
            break;
          }
        }
      }
      switch (e->op) {
        case '+':
          if (is_number(a, 0)) return b;
          if (is_number(b, 0)) return a;
          break;
        case '-':
          if (is_number(b, 0)) return a;
          if (is_number(a, 0)) return simplify_node(make_neg(b));
          break;
        case '*':
          if (is_number(a, 0) || is_number(b, 0)) return make_number(0);
          if (is_number(a, 1)) return b;
          if (is_number(b, 1)) return a;
          break;
        case '/':
          if (is_number(a, 0) && !is_number(b, 0)) return make_number(0);
          if (is_number(b, 1)) return a;
          break;
        case '^':
          if (is_number(b, 1)) return a;
          if (is_number(b, 0)) return make_number(1);
          break;
      }
      if (a == e->a && b == e->b) return e;
      return make_binary(e->op, a, b);
    }
  }
  return e;
}

}  // namespace

ExprPtr simplify_expr(const ExprPtr& e) { return simplify_node(e); }

ScalarField simplify(const ScalarField& f) {
  return ScalarField(f.chart(), simplify_node(f.body()));
}

// ---------------------------------------------------------------------------
// Evaluation
// ---------------------------------------------------------------------------

namespace {

[[noreturn]] void domain_fail(const ExprPtr& e, const Chart& chart,
                              const std::vector<double>& u,
                              const std::string& what) {
  std::string msg = "domain error: " + what + " in '" + to_string(e, chart) +
                    "' at (";
  for (std::size_t i = 0; i < u.size(); ++i) {
    if (i) msg += ", ";
    msg += chart.name(static_cast<int>(i)) + "=" + std::to_string(u[i]);
  }
  msg += ")";
  throw DomainError(msg);
}

double eval_node(const ExprPtr& e, const Chart& chart, std::vector<double>& u);

double eval_call(const ExprPtr& e, const Chart& chart, std::vector<double>& u) {
  double x = eval_node(e->a, chart, u);
  switch (e->func) {
    case Func::Sin:
      return std::sin(x);
    case Func::Cos:
      return std::cos(x);
    case Func::Tan:
      return std::tan(x);
    case Func::Sinh:
      return std::sinh(x);
    case Func::Cosh:
      return std::cosh(x);
    case Func::Tanh:
      return std::tanh(x);
    case Func::Exp:
      return std::exp(x);
    case Func::Ln:
      if (x <= 0) domain_fail(e, chart, u, "ln of nonpositive value");
      return std::log(x);
    case Func::Sqrt:
      if (x < 0) domain_fail(e, chart, u, "sqrt of negative value");
      return std::sqrt(x);
    case Func::Abs:
      return std::fabs(x);
    case Func::Sign:
      if (x == 0) domain_fail(e, chart, u, "sign at zero");
      return x > 0 ? 1.0 : -1.0;
  }
  throw Error("bad function in evaluation");
}

double eval_node(const ExprPtr& e, const Chart& chart, std::vector<double>& u) {
  switch (e->kind) {
    case Node::Kind::Number:
      return e->number;
    case Node::Kind::Coord:
      return u[e->coord];
    case Node::Kind::Neg:
      return -eval_node(e->a, chart, u);
    case Node::Kind::Binary: {
      double x = eval_node(e->a, chart, u);
      double y = eval_node(e->b, chart, u);
      switch (e->op) {
        case '+':
          return x + y;
        case '-':
          return x - y;
        case '*':
          return x * y;
        case '/':
          if (y == 0) domain_fail(e, chart, u, "division by zero");
          return x / y;
        case '^': {
          double r = std::pow(x, y);
          if (!std::isfinite(r))
            domain_fail(e, chart, u, "non-finite power result");
          return r;
        }
      }
      throw Error("bad binary operator in evaluation");
    }
    case Node::Kind::Call:
      return eval_call(e, chart, u);
    case Node::Kind::Integral: {
      // composite Simpson from e->lower to the current coordinate value
      double b = u[e->coord];
      double a = e->lower;
      int panels = e->panels;
      double h = (b - a) / panels;
      double saved = u[e->coord];
      double sum = 0;
      for (int k = 0; k <= panels; ++k) {
        u[e->coord] = a + k * h;
        double fv = eval_node(e->a, chart, u);
        double w = (k == 0 || k == panels) ? 1.0 : (k % 2 ? 4.0 : 2.0);
        sum += w * fv;
      }
      u[e->coord] = saved;
      double r = sum * h / 3.0;
      if (!std::isfinite(r))
        domain_fail(e, chart, u, "non-finite quadrature sample");
      return r;
    }
  }
  throw Error("bad node kind in evaluation");
}

}  // namespace

double evaluate(const ExprPtr& e, const Chart& chart, const Point& p) {
  if (p.dim() != chart.dim())
    throw Error("point dimension does not match chart");
  std::vector<double> u = p.u;
  return eval_node(e, chart, u);
}

double evaluate(const ScalarField& f, const Point& p) {
  return evaluate(f.body(), f.chart(), p);
}

// ---------------------------------------------------------------------------
// Field arithmetic
// ---------------------------------------------------------------------------

namespace {

const Chart& common_chart(const ScalarField& a, const ScalarField& b) {
  if (a.chart() != b.chart())
    throw Error("field arithmetic requires a common chart");
  return a.chart();
}

}  // namespace

ScalarField operator+(const ScalarField& a, const ScalarField& b) {
  return ScalarField(common_chart(a, b),
                     simplify_expr(make_binary('+', a.body(), b.body())));
}
ScalarField operator-(const ScalarField& a, const ScalarField& b) {
  return ScalarField(common_chart(a, b),
                     simplify_expr(make_binary('-', a.body(), b.body())));
}
ScalarField operator*(const ScalarField& a, const ScalarField& b) {
  return ScalarField(common_chart(a, b),
                     simplify_expr(make_binary('*', a.body(), b.body())));
}
ScalarField operator/(const ScalarField& a, const ScalarField& b) {
  return ScalarField(common_chart(a, b),
                     simplify_expr(make_binary('/', a.body(), b.body())));
}
ScalarField operator-(const ScalarField& a) {
  return ScalarField(a.chart(), simplify_expr(make_neg(a.body())));
}
ScalarField operator*(double c, const ScalarField& a) {
  return ScalarField(a.chart(),
                     simplify_expr(make_binary('*', make_number(c), a.body())));
}
ScalarField operator+(const ScalarField& a, double c) {
  return ScalarField(a.chart(),
                     simplify_expr(make_binary('+', a.body(), make_number(c))));
}
ScalarField operator-(const ScalarField& a, double c) {
  return ScalarField(a.chart(),
                     simplify_expr(make_binary('-', a.body(), make_number(c))));
}
ScalarField pow(const ScalarField& a, double expnt) {
  return ScalarField(
      a.chart(),
      simplify_expr(make_binary('^', a.body(), make_number(expnt))));
}
ScalarField apply(Func f, const ScalarField& a) {
  return ScalarField(a.chart(), simplify_expr(make_call(f, a.body())));
}
ScalarField constant(const Chart& chart, double v) {
  return ScalarField(chart, make_number(v));
}
ScalarField coordinate(const Chart& chart, std::string_view name) {
  return ScalarField(chart, make_coord(chart.index(name)));
}
ScalarField integral_field(const ScalarField& f, int coord, double lower,
                           int panels) {
  return ScalarField(f.chart(),
                     make_integral(f.body(), coord, lower, panels));
}

}  // namespace nholo
