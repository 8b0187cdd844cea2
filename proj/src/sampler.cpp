#include "cskin/sampler.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <random>

namespace cskin {

std::string to_string(InitVariant v) {
  switch (v) {
    case InitVariant::PolynomialTail: return "polynomial";
    case InitVariant::ExponentialTail: return "exponential";
    case InitVariant::CompactVelocity: return "compact_velocity";
  }
  return "unknown";
}

InitVariant init_variant_from_string(const std::string& name) {
  if (name == "polynomial") return InitVariant::PolynomialTail;
  if (name == "exponential") return InitVariant::ExponentialTail;
  if (name == "compact_velocity") return InitVariant::CompactVelocity;
  throw DomainError("unknown initial variant '" + name + "'");
}

InitSpec InitSpec::polynomial(std::size_t dim, double D, double scale, bool recenter) {
  InitSpec s;
  s.variant = InitVariant::PolynomialTail;
  s.dim = dim;
  s.D = D;
  s.scale = scale;
  s.recenter = recenter;
  return s;
}

InitSpec InitSpec::exponential(std::size_t dim, double alpha, bool recenter) {
  InitSpec s;
  s.variant = InitVariant::ExponentialTail;
  s.dim = dim;
  s.alpha = alpha;
  s.recenter = recenter;
  return s;
}

InitSpec InitSpec::compact_velocity(std::size_t dim, double alpha, double p_inf, bool recenter) {
  InitSpec s;
  s.variant = InitVariant::CompactVelocity;
  s.dim = dim;
  s.alpha = alpha;
  s.p_inf = p_inf;
  s.recenter = recenter;
  return s;
}

void InitSpec::validate() const {
  if (dim == 0) throw DomainError("init.dim must be positive");
  if (!std::isfinite(scale) || !(scale > 0.0)) throw DomainError("init.scale must be positive");
  auto positive = [](const std::optional<double>& v) { return v && std::isfinite(*v) && *v > 0.0; };
  switch (variant) {
    case InitVariant::PolynomialTail:
      if (!D || !std::isfinite(*D) || !(*D >= 2.0)) throw DomainError("init.D must be >= 2");
      break;
    case InitVariant::ExponentialTail:
      if (!positive(alpha)) throw DomainError("init.alpha must be positive");
      break;
    case InitVariant::CompactVelocity:
      if (!positive(alpha)) throw DomainError("init.alpha must be positive");
      if (!positive(p_inf)) throw DomainError("init.p_inf must be positive");
      break;
  }
}

namespace {

constexpr std::array<double, 5> kGaussNodes{-0.9061798459386640, -0.5384693101056831, 0.0,
                                            0.5384693101056831, 0.9061798459386640};
constexpr std::array<double, 5> kGaussWeights{0.2369268850561891, 0.4786286704993665,
                                              0.5688888888888889, 0.4786286704993665,
                                              0.2369268850561891};

std::uint64_t splitmix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

class ParticleStream {
public:
  ParticleStream(std::uint64_t seed, std::uint64_t index) : engine_(stream_seed(seed, index)) {}

  // Uniform on [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  double normal() {
    if (cached_) {
      cached_ = false;
      return spare_;
    }
    const double u1 = 1.0 - uniform();  // (0, 1]
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double theta = 2.0 * std::numbers::pi * u2;
    spare_ = r * std::sin(theta);
    cached_ = true;
    return r * std::cos(theta);
  }

  // Uniform direction on the unit sphere, written into out.
  void direction(std::span<double> out) {
    double nrm = 0.0;
    do {
      for (double& c : out) c = normal();
      nrm = norm(out);
    } while (!(nrm > 0.0));
    for (double& c : out) c /= nrm;
  }

private:
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool cached_ = false;
};

void require_count(std::size_t n) {
  if (n == 0) throw DomainError("sample size must be positive");
}

void subtract_mean(std::span<double> data, std::size_t dim, std::size_t n) {
  // Two passes: the second removes the roundoff left by the first.
  for (int pass = 0; pass < 2; ++pass) {
    std::vector<double> m(dim, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t k = 0; k < dim; ++k) m[k] += data[i * dim + k];
    }
    for (std::size_t k = 0; k < dim; ++k) m[k] /= static_cast<double>(n);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t k = 0; k < dim; ++k) data[i * dim + k] -= m[k];
    }
  }
}

// Velocities uniform in the closed ball; rounding may push |v| one ulp past
// the radius, which the shrink loop undoes.
void ball_point(ParticleStream& rng, double radius, std::span<double> out) {
  rng.direction(out);
  const double r = radius * std::pow(rng.uniform(), 1.0 / static_cast<double>(out.size()));
  for (double& c : out) c *= r;
  while (norm(out) > radius) {
    for (double& c : out) c *= 1.0 - 0x1.0p-52;
  }
}

template <class DrawX, class DrawV>
Ensemble draw(const InitSpec& spec, std::size_t n, std::uint64_t seed, DrawX draw_x,
              DrawV draw_v) {
  Ensemble ens(spec.dim, n);
  for (std::size_t i = 0; i < n; ++i) {
    ParticleStream rng(seed, i);
    draw_x(rng, ens.position(i));
    draw_v(rng, ens.velocity(i));
  }
  return ens;
}

}  // namespace

std::uint64_t stream_seed(std::uint64_t seed, std::uint64_t index) {
  return splitmix64(seed ^ splitmix64(index + 0x632be59bd9b4e019ULL));
}

RadialLaw::RadialLaw(const std::function<double(double)>& density, double r_min, double r_max) {
  nodes_.reserve(kNodes);
  cdf_.reserve(kNodes);
  nodes_.push_back(0.0);
  const double log_lo = std::log(r_min);
  const double log_hi = std::log(r_max);
  for (std::size_t k = 0; k + 1 < kNodes; ++k) {
    const double f = static_cast<double>(k) / static_cast<double>(kNodes - 2);
    nodes_.push_back(std::exp(log_lo + f * (log_hi - log_lo)));
  }
  nodes_.back() = r_max;
  cdf_.push_back(0.0);
  for (std::size_t k = 1; k < kNodes; ++k) {
    const double a = nodes_[k - 1];
    const double b = nodes_[k];
    const double half = 0.5 * (b - a);
    const double mid = 0.5 * (a + b);
    double cell = 0.0;
    for (std::size_t g = 0; g < kGaussNodes.size(); ++g) {
      cell += kGaussWeights[g] * density(mid + half * kGaussNodes[g]);
    }
    cdf_.push_back(cdf_.back() + half * cell);
  }
  const double total = cdf_.back();
  if (!(total > 0.0) || !std::isfinite(total)) throw DomainError("radial density has no mass");
  for (double& c : cdf_) c /= total;
}

RadialLaw RadialLaw::polynomial(std::size_t dim, double D, double scale) {
  const double q = D + static_cast<double>(dim) + 1.0;
  const double d1 = static_cast<double>(dim) - 1.0;
  // Tail mass beyond r decays like (r/scale)^-(D+1); 1e17 of it is below 1e-16.
  const double r_max = scale * 10.0 * std::pow(10.0, 16.0 / (D + 1.0));
  return RadialLaw(
      [=](double r) { return std::pow(r, d1) * std::pow(1.0 + r / scale, -q); }, scale * 1e-6,
      r_max);
}

RadialLaw RadialLaw::exponential(std::size_t dim, double rate) {
  const double d1 = static_cast<double>(dim) - 1.0;
  const double r_max = (50.0 + 10.0 * static_cast<double>(dim)) / rate;
  return RadialLaw([=](double r) { return std::pow(r, d1) * std::exp(-rate * r); }, 1e-8 / rate,
                   r_max);
}

double RadialLaw::quantile(double u) const {
  if (!(u > 0.0)) return 0.0;
  auto it = std::upper_bound(cdf_.begin(), cdf_.end(), u);
  if (it == cdf_.end()) return nodes_.back();
  const std::size_t k = static_cast<std::size_t>(it - cdf_.begin());
  const double c0 = cdf_[k - 1];
  const double c1 = cdf_[k];
  const double f = (u - c0) / (c1 - c0);
  return nodes_[k - 1] + f * (nodes_[k] - nodes_[k - 1]);
}

Ensemble sample_polynomial(const InitSpec& spec, std::size_t n, std::uint64_t seed) {
  spec.validate();
  if (spec.variant != InitVariant::PolynomialTail) throw DomainError("expected a polynomial spec");
  require_count(n);
  const RadialLaw law = RadialLaw::polynomial(spec.dim, *spec.D, spec.scale);
  auto radial = [&](ParticleStream& rng, std::span<double> out) {
    rng.direction(out);
    const double r = law.quantile(rng.uniform());
    for (double& c : out) c *= r;
  };
  Ensemble ens = draw(spec, n, seed, radial, radial);
  if (spec.recenter) {
    subtract_mean(ens.positions(), spec.dim, n);
    subtract_mean(ens.velocities(), spec.dim, n);
  }
  return ens;
}

Ensemble sample_exponential(const InitSpec& spec, std::size_t n, std::uint64_t seed) {
  spec.validate();
  if (spec.variant != InitVariant::ExponentialTail) throw DomainError("expected an exponential spec");
  require_count(n);
  const RadialLaw law = RadialLaw::exponential(spec.dim, 2.0 * *spec.alpha);
  auto radial = [&](ParticleStream& rng, std::span<double> out) {
    rng.direction(out);
    const double r = law.quantile(rng.uniform());
    for (double& c : out) c *= r;
  };
  Ensemble ens = draw(spec, n, seed, radial, radial);
  if (spec.recenter) {
    subtract_mean(ens.positions(), spec.dim, n);
    subtract_mean(ens.velocities(), spec.dim, n);
  }
  return ens;
}

Ensemble sample_compact_velocity(const InitSpec& spec, std::size_t n, std::uint64_t seed) {
  spec.validate();
  if (spec.variant != InitVariant::CompactVelocity) {
    throw DomainError("expected a compact-velocity spec");
  }
  require_count(n);
  const RadialLaw law = RadialLaw::exponential(spec.dim, 2.0 * *spec.alpha);
  const double p_inf = *spec.p_inf;
  auto radial = [&](ParticleStream& rng, std::span<double> out) {
    rng.direction(out);
    const double r = law.quantile(rng.uniform());
    for (double& c : out) c *= r;
  };
  auto ball = [&](ParticleStream& rng, std::span<double> out) { ball_point(rng, p_inf, out); };
  Ensemble ens = draw(spec, n, seed, radial, ball);
  // Velocities keep their mean: shifting them could break |v| <= p_inf.
  if (spec.recenter) subtract_mean(ens.positions(), spec.dim, n);
  return ens;
}

Ensemble sample(const InitSpec& spec, std::size_t n, std::uint64_t seed) {
  switch (spec.variant) {
    case InitVariant::PolynomialTail: return sample_polynomial(spec, n, seed);
    case InitVariant::ExponentialTail: return sample_exponential(spec, n, seed);
    case InitVariant::CompactVelocity: return sample_compact_velocity(spec, n, seed);
  }
  throw DomainError("unknown initial variant");
}

MomentBudget verify_moment_budget(const Ensemble& ens, const InitSpec& spec) {
  spec.validate();
  if (ens.dim() != spec.dim) throw DomainError("ensemble dimension does not match InitSpec::dim");
  const double d = static_cast<double>(spec.dim);
  const std::size_t n = ens.size();
  MomentBudget b{};
  double sum = 0.0;
  switch (spec.variant) {
    case InitVariant::PolynomialTail: {
      const double D = *spec.D;
      for (std::size_t i = 0; i < n; ++i) {
        sum += std::pow(norm(ens.position(i)), D) + std::pow(norm(ens.velocity(i)), D);
      }
      b.kind = MomentBudget::Kind::Polynomial;
      b.order_or_rate = D;
      // E r^D = scale^D Gamma(d + D) / (Gamma(d) Gamma(D + 1)) per coordinate block.
      b.analytic_value = 2.0 * std::pow(spec.scale, D) *
                         std::exp(std::lgamma(d + D) - std::lgamma(d) - std::lgamma(D + 1.0));
      break;
    }
    case InitVariant::ExponentialTail: {
      const double a = *spec.alpha;
      for (std::size_t i = 0; i < n; ++i) {
        sum += std::exp(a * (norm(ens.position(i)) + norm(ens.velocity(i))));
      }
      b.kind = MomentBudget::Kind::Exponential;
      b.order_or_rate = a;
      b.analytic_value = std::pow(4.0, d);  // (E e^{alpha r})^2 under rate 2 alpha
      break;
    }
    case InitVariant::CompactVelocity: {
      const double a = *spec.alpha;
      for (std::size_t i = 0; i < n; ++i) sum += std::exp(a * norm(ens.position(i)));
      b.kind = MomentBudget::Kind::Exponential;
      b.order_or_rate = a;
      b.analytic_value = std::pow(2.0, d);
      break;
    }
  }
  b.empirical_value = sum / static_cast<double>(n);
  return b;
}

}  // namespace cskin
