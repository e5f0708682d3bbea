#pragma once

#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <string_view>
#include <vector>

#include "nholo/chart.hpp"

namespace nholo {

enum class Func {
  Sin,
  Cos,
  Tan,
  Sinh,
  Cosh,
  Tanh,
  Exp,
  Ln,
  Sqrt,
  Abs,
  Sign,
};

struct Node;
using ExprPtr = std::shared_ptr<const Node>;

/// Expression tree node. Immutable after construction; shared freely.
struct Node {
  enum class Kind { Number, Coord, Neg, Binary, Call, Integral };

  Kind kind;
  double number = 0.0;  // Number
  int coord = -1;       // Coord; also the integration coordinate for Integral
  char op = 0;          // Binary: one of + - * / ^
  Func func = Func::Sin;
  ExprPtr a, b;         // operands; Integral uses a = integrand
  double lower = 0.0;   // Integral lower bound
  int panels = 4096;    // Integral quadrature panels
};

ExprPtr make_number(double v);
ExprPtr make_coord(int idx);
ExprPtr make_neg(ExprPtr a);
ExprPtr make_binary(char op, ExprPtr a, ExprPtr b);
ExprPtr make_call(Func f, ExprPtr a);
/// Cumulative quadrature node: integral of `integrand` over `coord` from
/// `lower` to the coordinate's current value, composite Simpson with `panels`
/// panels.
ExprPtr make_integral(ExprPtr integrand, int coord, double lower,
                      int panels = 4096);

bool structurally_equal(const ExprPtr& a, const ExprPtr& b);

/// Symbolic expression over a chart's coordinates, evaluable to values and
/// exact derivatives of any order. Derivative results are memoized per field.
class ScalarField {
 public:
  ScalarField() = default;
  ScalarField(Chart chart, ExprPtr body);

  const Chart& chart() const { return chart_; }
  const ExprPtr& body() const { return body_; }
  bool empty() const { return body_ == nullptr; }

 private:
  Chart chart_;
  ExprPtr body_;

  struct DerivCache {
    std::mutex mu;
    std::map<int, ScalarField> d;
  };
  std::shared_ptr<DerivCache> cache_ = std::make_shared<DerivCache>();

  friend ScalarField differentiate(const ScalarField& f, int coord, int order);
};

/// Parse `source` against `chart`. Precedence ^ > unary - > * / > + -, left
/// associative except ^ (right associative). Throws ParseError with a byte
/// offset on malformed input or unknown identifiers.
ScalarField parse(std::string_view source, const Chart& chart);

std::string to_string(const ExprPtr& e, const Chart& chart);
std::string to_string(const ScalarField& f);

ScalarField differentiate(const ScalarField& f, int coord, int order = 1);
ScalarField differentiate(const ScalarField& f, std::string_view coord,
                          int order = 1);

/// Constant folding plus the identities 0+e, 1*e, 0*e, e^1, e/1, e-0, --e.
/// No deep rewriting.
ScalarField simplify(const ScalarField& f);
ExprPtr simplify_expr(const ExprPtr& e);

double evaluate(const ExprPtr& e, const Chart& chart, const Point& p);
double evaluate(const ScalarField& f, const Point& p);

/// Field-level arithmetic for building composite fields programmatically.
/// Both operands must share the chart.
ScalarField operator+(const ScalarField& a, const ScalarField& b);
ScalarField operator-(const ScalarField& a, const ScalarField& b);
ScalarField operator*(const ScalarField& a, const ScalarField& b);
ScalarField operator/(const ScalarField& a, const ScalarField& b);
ScalarField operator-(const ScalarField& a);
ScalarField operator*(double c, const ScalarField& a);
ScalarField operator+(const ScalarField& a, double c);
ScalarField operator-(const ScalarField& a, double c);
ScalarField pow(const ScalarField& a, double expnt);
ScalarField apply(Func f, const ScalarField& a);
ScalarField constant(const Chart& chart, double v);
ScalarField coordinate(const Chart& chart, std::string_view name);
/// Cumulative Simpson integral of `f` over coordinate `coord` starting at
/// `lower`; exact symbolic derivatives (fundamental theorem in the
/// integration variable, differentiation under the integral otherwise).
ScalarField integral_field(const ScalarField& f, int coord, double lower,
                           int panels = 4096);

}  // namespace nholo
