#pragma once

// Model formulas: "y ~ a + b^2 + a:b^2", with an implicit intercept removed by "-1" (or "+0").

#include <string>
#include <vector>

#include <Eigen/Dense>

namespace umw::cli {

struct Factor {
  std::string column;
  int power = 1;
};

/// Product of factors; empty for the intercept.
struct Term {
  std::vector<Factor> factors;
  std::string label() const;
};

struct Formula {
  std::string response;
  bool intercept = true;
  std::vector<Term> terms;  // excluding the intercept

  /// Column names referenced by the terms, in order of first appearance.
  std::vector<std::string> covariates() const;
  /// Names of the design columns: "(Intercept)" then term labels.
  std::vector<std::string> column_names() const;
};

/// Throws ParseError (from csv.hpp) with the offending character position.
Formula parse_formula(const std::string& text);

/// Design matrix for the formula given a column accessor. `values(name)` must
/// return the n observations of that column.
template <class Accessor>
Eigen::MatrixXd build_design(const Formula& f, Eigen::Index n, Accessor&& values) {
  const Eigen::Index k = static_cast<Eigen::Index>(f.terms.size()) + (f.intercept ? 1 : 0);
  Eigen::MatrixXd X(n, k);
  Eigen::Index col = 0;
  if (f.intercept) X.col(col++).setOnes();
  for (const auto& term : f.terms) {
    Eigen::VectorXd c = Eigen::VectorXd::Ones(n);
    for (const auto& fac : term.factors) {
      const Eigen::VectorXd v = values(fac.column);
      c.array() *= v.array().pow(static_cast<double>(fac.power));
    }
    X.col(col++) = c;
  }
  return X;
}

}  // namespace umw::cli
