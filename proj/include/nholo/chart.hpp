#pragma once

#include <memory>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace nholo {

/// Base error type for the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Evaluation failed at a concrete point (division by zero, ln of a
/// nonpositive value, ...). Carries a description of the offending node.
class DomainError : public Error {
 public:
  using Error::Error;
};

class ParseError : public Error {
 public:
  ParseError(const std::string& msg, std::size_t offset)
      : Error(msg + " (at byte " + std::to_string(offset) + ")"),
        offset_(offset) {}
  std::size_t offset() const { return offset_; }

 private:
  std::size_t offset_;
};

class SingularMatrixError : public Error {
 public:
  SingularMatrixError(const std::string& msg, double cond_estimate)
      : Error(msg + " (condition estimate " + std::to_string(cond_estimate) +
              ")"),
        cond_(cond_estimate) {}
  double cond_estimate() const { return cond_; }

 private:
  double cond_;
};

/// Local coordinate chart u = (x^1..x^n, y^1..y^m). The first n names are the
/// horizontal coordinates, the remaining m the vertical ones.
class Chart {
 public:
  Chart() = default;
  Chart(int n, int m, std::vector<std::string> names);

  int n() const { return impl_->n; }
  int m() const { return impl_->m; }
  int dim() const { return impl_->n + impl_->m; }

  const std::string& name(int idx) const { return impl_->names[idx]; }
  const std::vector<std::string>& names() const { return impl_->names; }

  /// Index of a coordinate name, or -1 if unknown.
  int find(std::string_view name) const;
  /// Index of a coordinate name; throws on unknown names.
  int index(std::string_view name) const;

  bool is_h(int idx) const { return idx < impl_->n; }
  bool is_v(int idx) const { return idx >= impl_->n; }

  bool operator==(const Chart& o) const;
  bool operator!=(const Chart& o) const { return !(*this == o); }

 private:
  struct Impl {
    int n = 0, m = 0;
    std::vector<std::string> names;
  };
  std::shared_ptr<const Impl> impl_;
};

/// A point of the chart: coordinate values in chart order.
struct Point {
  std::vector<double> u;

  Point() = default;
  explicit Point(std::vector<double> coords) : u(std::move(coords)) {}
  double operator[](int i) const { return u[i]; }
  double& operator[](int i) { return u[i]; }
  int dim() const { return static_cast<int>(u.size()); }
};

}  // namespace nholo
