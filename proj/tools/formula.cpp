#include "formula.hpp"

#include <algorithm>
#include <cctype>

#include "csv.hpp"

namespace umw::cli {
namespace {

class Lexer {
 public:
  explicit Lexer(const std::string& s) : s_(s) {}

  void skip() {
    while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
  }
  bool done() {
    skip();
    return pos_ >= s_.size();
  }
  bool accept(char c) {
    skip();
    if (pos_ < s_.size() && s_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }
  char peek() {
    skip();
    return pos_ < s_.size() ? s_[pos_] : '\0';
  }
  std::string name() {
    skip();
    const std::size_t b = pos_;
    while (pos_ < s_.size() && (std::isalnum(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '_' ||
                                s_[pos_] == '.')) {
      ++pos_;
    }
    if (b == pos_) fail("expected a column name");
    return s_.substr(b, pos_ - b);
  }
  int integer() {
    skip();
    const std::size_t b = pos_;
    while (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_]))) ++pos_;
    if (b == pos_ || pos_ - b > 3) fail("expected a small positive integer power");
    const int v = std::stoi(s_.substr(b, pos_ - b));
    if (v < 1) fail("power must be at least 1");
    return v;
  }
  int constant() {
    skip();
    const std::size_t b = pos_;
    while (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_]))) ++pos_;
    if (pos_ - b > 3) fail("constant too long");
    return std::stoi(s_.substr(b, pos_ - b));
  }
  [[noreturn]] void fail(const std::string& what) const {
    throw ParseError("formula '" + s_ + "', position " + std::to_string(pos_ + 1) + ": " + what);
  }

 private:
  const std::string& s_;
  std::size_t pos_ = 0;
};

bool is_number(const std::string& s) {
  return !s.empty() && std::all_of(s.begin(), s.end(), [](char c) { return std::isdigit(static_cast<unsigned char>(c)); });
}

}  // namespace

std::string Term::label() const {
  std::string out;
  for (const auto& f : factors) {
    if (!out.empty()) out += ':';
    out += f.column;
    if (f.power != 1) out += '^' + std::to_string(f.power);
  }
  return out;
}

std::vector<std::string> Formula::covariates() const {
  std::vector<std::string> out;
  for (const auto& t : terms) {
    for (const auto& f : t.factors) {
      if (std::find(out.begin(), out.end(), f.column) == out.end()) out.push_back(f.column);
    }
  }
  return out;
}

std::vector<std::string> Formula::column_names() const {
  std::vector<std::string> out;
  if (intercept) out.push_back("(Intercept)");
  for (const auto& t : terms) out.push_back(t.label());
  return out;
}

Formula parse_formula(const std::string& text) {
  Lexer lx(text);
  Formula f;
  f.response = lx.name();
  if (is_number(f.response)) lx.fail("response must be a column name");
  if (!lx.accept('~')) lx.fail("expected '~'");

  bool first = true;
  bool negate = false;
  while (true) {
    if (!first) {
      if (lx.done()) break;
      if (lx.accept('+')) {
        negate = false;
      } else if (lx.accept('-')) {
        negate = true;
      } else {
        lx.fail("expected '+' or '-'");
      }
    } else if (lx.accept('-')) {
      negate = true;
    }
    first = false;

    if (std::isdigit(static_cast<unsigned char>(lx.peek()))) {
      const int v = lx.constant();
      if (v == 1) {
        f.intercept = !negate;
      } else if (v == 0 && !negate) {
        f.intercept = false;
      } else {
        lx.fail("only +1, -1 and +0 are allowed as constants");
      }
      continue;
    }
    if (negate) lx.fail("only the intercept can be removed");

    Term term;
    do {
      Factor fac;
      fac.column = lx.name();
      if (is_number(fac.column)) lx.fail("constants cannot appear inside a term");
      if (lx.accept('^')) fac.power = lx.integer();
      auto same = std::find_if(term.factors.begin(), term.factors.end(),
                               [&](const Factor& x) { return x.column == fac.column; });
      if (same != term.factors.end()) {
        same->power += fac.power;
      } else {
        term.factors.push_back(fac);
      }
    } while (lx.accept(':'));

    const std::string label = term.label();
    if (std::none_of(f.terms.begin(), f.terms.end(), [&](const Term& t) { return t.label() == label; })) {
      f.terms.push_back(std::move(term));
    }
  }
  if (!f.intercept && f.terms.empty()) lx.fail("model has no columns");
  return f;
}

}  // namespace umw::cli
