#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace umw {

enum class LinkKind { Logit, Probit, Cloglog, Loglog, Cauchit };

struct LinkValues {
  double g;   // g(mu)
  double d1;  // g'(mu)
  double d2;  // g''(mu)
};

/// Strictly increasing, twice differentiable map from (0,1) onto the real line.
class LinkFunction {
 public:
  explicit LinkFunction(LinkKind kind = LinkKind::Logit) noexcept : kind_(kind) {}

  /// Accepts logit, probit, cloglog, loglog, cauchit. Throws DomainError otherwise.
  static LinkFunction from_name(std::string_view name);
  static std::vector<std::string> names();

  LinkKind kind() const noexcept { return kind_; }
  std::string_view name() const noexcept;

  double link(double mu) const;
  double inverse(double eta) const noexcept;
  /// Derivative of the inverse link, d mu / d eta, evaluated at mu.
  double dmu_deta(double mu) const;
  LinkValues eval(double mu) const;

  friend bool operator==(const LinkFunction&, const LinkFunction&) = default;

 private:
  LinkKind kind_;
};

}  // namespace umw
