#pragma once

#include <stdexcept>
#include <string>

namespace gliq {

// 1-based line/column; end is exclusive.
struct Span {
  int line = 0;
  int col = 0;
  int end_line = 0;
  int end_col = 0;

  bool valid() const { return line > 0; }
  std::string str() const { return std::to_string(line) + ":" + std::to_string(col); }
  static Span join(const Span& a, const Span& b) {
    if (!a.valid()) return b;
    if (!b.valid()) return a;
    return Span{a.line, a.col, b.end_line, b.end_col};
  }
  bool operator==(const Span&) const = default;
};

// Parse, name resolution and shape errors. Carries the offending span.
class SourceError : public std::runtime_error {
 public:
  SourceError(Span span, const std::string& msg) : std::runtime_error(msg), span_(span) {}
  const Span& span() const { return span_; }

 private:
  Span span_;
};

}  // namespace gliq
