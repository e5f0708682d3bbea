#include "nholo/chart.hpp"

#include <algorithm>
#include <cctype>

namespace nholo {

namespace {

bool valid_identifier(const std::string& s) {
  if (s.empty()) return false;
  if (!std::isalpha(static_cast<unsigned char>(s[0]))) return false;
  return std::all_of(s.begin() + 1, s.end(), [](char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_';
  });
}

}  // namespace

Chart::Chart(int n, int m, std::vector<std::string> names) {
  if (n < 1 || m < 1) throw Error("chart requires n >= 1 and m >= 1");
  if (static_cast<int>(names.size()) != n + m)
    throw Error("chart requires n+m coordinate names");
  for (const auto& nm : names) {
    if (!valid_identifier(nm))
      throw Error("invalid coordinate identifier: '" + nm + "'");
  }
  for (std::size_t i = 0; i < names.size(); ++i)
    for (std::size_t j = i + 1; j < names.size(); ++j)
      if (names[i] == names[j])
        throw Error("duplicate coordinate name: '" + names[i] + "'");
  auto impl = std::make_shared<Impl>();
  impl->n = n;
  impl->m = m;
  impl->names = std::move(names);
  impl_ = impl;
}

int Chart::find(std::string_view name) const {
  for (int i = 0; i < dim(); ++i)
    if (impl_->names[i] == name) return i;
  return -1;
}

int Chart::index(std::string_view name) const {
  int i = find(name);
  if (i < 0) throw Error("unknown coordinate: '" + std::string(name) + "'");
  return i;
}

bool Chart::operator==(const Chart& o) const {
  if (impl_ == o.impl_) return true;
  if (!impl_ || !o.impl_) return false;
  return impl_->n == o.impl_->n && impl_->m == o.impl_->m &&
         impl_->names == o.impl_->names;
}

}  // namespace nholo
