#include "umwkit/link.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "umwkit/errors.hpp"
#include "umwkit/inference.hpp"

namespace umw {
namespace {

constexpr double kPi = std::numbers::pi;

void require_unit(double mu) {
  if (!(mu > 0.0 && mu < 1.0)) {
    throw DomainError("link: mu = " + std::to_string(mu) + " is outside (0,1)");
  }
}

double normal_density(double z) { return std::exp(-0.5 * z * z) / std::sqrt(2.0 * kPi); }

}  // namespace

LinkFunction LinkFunction::from_name(std::string_view name) {
  if (name == "logit") return LinkFunction(LinkKind::Logit);
  if (name == "probit") return LinkFunction(LinkKind::Probit);
  if (name == "cloglog") return LinkFunction(LinkKind::Cloglog);
  if (name == "loglog") return LinkFunction(LinkKind::Loglog);
  if (name == "cauchit") return LinkFunction(LinkKind::Cauchit);
  throw DomainError("unknown link function '" + std::string(name) + "'");
}

std::vector<std::string> LinkFunction::names() { return {"logit", "probit", "cloglog", "loglog", "cauchit"}; }

std::string_view LinkFunction::name() const noexcept {
  switch (kind_) {
    case LinkKind::Logit: return "logit";
    case LinkKind::Probit: return "probit";
    case LinkKind::Cloglog: return "cloglog";
    case LinkKind::Loglog: return "loglog";
    case LinkKind::Cauchit: return "cauchit";
  }
  return "logit";
}

double LinkFunction::link(double mu) const { return eval(mu).g; }

double LinkFunction::inverse(double eta) const noexcept {
  switch (kind_) {
    case LinkKind::Logit:
      return eta >= 0.0 ? 1.0 / (1.0 + std::exp(-eta)) : std::exp(eta) / (1.0 + std::exp(eta));
    case LinkKind::Probit:
      return normal_cdf(eta);
    case LinkKind::Cloglog:
      return -std::expm1(-std::exp(eta));
    case LinkKind::Loglog:
      return std::exp(-std::exp(-eta));
    case LinkKind::Cauchit:
      return 0.5 + std::atan(eta) / kPi;
  }
  return 0.5;
}

double LinkFunction::dmu_deta(double mu) const { return 1.0 / eval(mu).d1; }

LinkValues LinkFunction::eval(double mu) const {
  require_unit(mu);
  switch (kind_) {
    case LinkKind::Logit: {
      const double v = mu * (1.0 - mu);
      return {std::log(mu) - std::log1p(-mu), 1.0 / v, (2.0 * mu - 1.0) / (v * v)};
    }
    case LinkKind::Probit: {
      const double z = normal_quantile(mu);
      const double phi = normal_density(z);
      return {z, 1.0 / phi, z / (phi * phi)};
    }
    case LinkKind::Cloglog: {
      const double a = 1.0 - mu;
      const double la = std::log1p(-mu);
      return {std::log(-la), -1.0 / (a * la), -(la + 1.0) / (a * a * la * la)};
    }
    case LinkKind::Loglog: {
      const double lm = std::log(mu);
      return {-std::log(-lm), -1.0 / (mu * lm), (lm + 1.0) / (mu * mu * lm * lm)};
    }
    case LinkKind::Cauchit: {
      const double g = std::tan(kPi * (mu - 0.5));
      const double d1 = kPi * (1.0 + g * g);
      return {g, d1, 2.0 * kPi * g * d1};
    }
  }
  return {0.0, 1.0, 0.0};
}

}  // namespace umw
