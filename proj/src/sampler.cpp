#include "duopt/sampler.hpp"

#include <cmath>

#include "duopt/errors.hpp"

namespace duopt {

namespace {

constexpr std::uint64_t kGamma = 0x9E3779B97F4A7C15ull;

std::uint64_t splitmix_mix(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

std::uint64_t fnv1a(std::uint64_t h, const void* data, std::size_t len) {
  const auto* p = static_cast<const unsigned char*>(data);
  for (std::size_t i = 0; i < len; ++i) {
    h ^= p[i];
    h *= 0x00000100000001B3ull;
  }
  return h;
}

}  // namespace

std::uint64_t CounterRng::at(std::uint64_t i) const {
  return splitmix_mix(key_ + (i + 1) * kGamma);
}

double CounterRng::unit_at(std::uint64_t i) const {
  // 53 random bits, offset by half a ulp to stay inside (0, 1)
  return (static_cast<double>(at(i) >> 11) + 0.5) * 0x1.0p-53;
}

std::uint64_t derive_stream_key(std::uint64_t seed, std::string_view label, SampleRole role) {
  std::uint64_t h = 0xCBF29CE484222325ull;  // FNV-1a offset basis
  unsigned char seed_bytes[8];
  for (int i = 0; i < 8; ++i) seed_bytes[i] = static_cast<unsigned char>(seed >> (8 * i));
  h = fnv1a(h, seed_bytes, sizeof(seed_bytes));
  const unsigned char sep = 0x1F;
  h = fnv1a(h, &sep, 1);
  h = fnv1a(h, label.data(), label.size());
  h = fnv1a(h, &sep, 1);
  const unsigned char role_byte = role == SampleRole::Training ? 0 : 1;
  h = fnv1a(h, &role_byte, 1);
  return splitmix_mix(h);
}

double normal_quantile(double u) {
  // AS 241 algorithm PPND16
  if (!(u > 0.0 && u < 1.0)) fail("PreconditionFailure", "normal_quantile needs u in (0,1)");
  const double q = u - 0.5;
  if (std::fabs(q) <= 0.425) {
    const double r = 0.180625 - q * q;
    return q *
           (((((((2.5090809287301226727e+3 * r + 3.3430575583588128105e+4) * r +
                 6.7265770927008700853e+4) * r + 4.5921953931549871457e+4) * r +
               1.3731693765509461125e+4) * r + 1.9715909503065514427e+3) * r +
             1.3314166789178437745e+2) * r + 3.3871328727963666080e+0) /
           (((((((5.2264952788528545610e+3 * r + 2.8729085735721942674e+4) * r +
                 3.9307895800092710610e+4) * r + 2.1213794301586595867e+4) * r +
               5.3941960214247511077e+3) * r + 6.8718700749205790830e+2) * r +
             4.2313330701600911252e+1) * r + 1.0);
  }
  double r = q < 0.0 ? u : 1.0 - u;
  r = std::sqrt(-std::log(r));
  double value;
  if (r <= 5.0) {
    r -= 1.6;
    value = (((((((7.74545014278341407640e-4 * r + 2.27238449892691845833e-2) * r +
                  2.41780725177450611770e-1) * r + 1.27045825245236838258e+0) * r +
                3.64784832476320460504e+0) * r + 5.76949722146069140550e+0) * r +
              4.63033784615654529590e+0) * r + 1.42343711074968357734e+0) /
            (((((((1.05075007164441684324e-9 * r + 5.47593808499534494600e-4) * r +
                  1.51986665636164571966e-2) * r + 1.48103976427480074590e-1) * r +
                6.89767334985100004550e-1) * r + 1.67638483018380384940e+0) * r +
              2.05319162663775882187e+0) * r + 1.0);
  } else {
    r -= 5.0;
    value = (((((((2.01033439929228813265e-7 * r + 2.71155556874348757815e-5) * r +
                  1.24266094738807843860e-3) * r + 2.65321895265761230930e-2) * r +
                2.96560571828504891230e-1) * r + 1.78482653991729133580e+0) * r +
              5.46378491116411436990e+0) * r + 6.65790464350110377720e+0) /
            (((((((2.04426310338993978564e-15 * r + 1.42151175831644588870e-7) * r +
                  1.84631831751005468180e-5) * r + 7.86869131145613259100e-4) * r +
                1.48753612908506148525e-2) * r + 1.36929880922735805310e-1) * r +
              5.99832206555887937690e-1) * r + 1.0);
  }
  return q < 0.0 ? -value : value;
}

SampleFamily sample_family_from_string(const std::string& s) {
  if (s == "lognormal" || s == "Lognormal") return SampleFamily::Lognormal;
  if (s == "normal" || s == "Normal") return SampleFamily::Normal;
  if (s == "uniform" || s == "Uniform") return SampleFamily::Uniform;
  fail("PreconditionFailure", "unknown sample family '" + s + "'");
}

std::string sample_family_to_string(SampleFamily f) {
  switch (f) {
    case SampleFamily::Lognormal: return "lognormal";
    case SampleFamily::Normal: return "normal";
    case SampleFamily::Uniform: return "uniform";
  }
  return "?";
}

namespace {

double round_half_even(double v) { return std::nearbyint(v); }

double draw_entry(const GeneratorConfig& cfg, double mean, double unit) {
  switch (cfg.family) {
    case SampleFamily::Lognormal: {
      const double sigma2 = std::log1p(cfg.cv * cfg.cv);
      const double sigma = std::sqrt(sigma2);
      const double mu = std::log(mean) - 0.5 * sigma2;
      return std::exp(mu + sigma * normal_quantile(unit));
    }
    case SampleFamily::Normal:
      return mean + cfg.cv * std::fabs(mean) * normal_quantile(unit);
    case SampleFamily::Uniform:
      return mean * (1.0 + cfg.halfwidth_rel * (2.0 * unit - 1.0));
  }
  return mean;
}

}  // namespace

SampleSet generate_samples(const std::vector<ParameterSpec>& nominal,
                           const GeneratorConfig& config, SampleRole role) {
  if (config.n < 1) fail("SampleSizeInvalid", "sample count must be >= 1");
  if (config.family != SampleFamily::Uniform && (!(config.cv > 0.0) || !std::isfinite(config.cv)))
    fail("PreconditionFailure", "cv must be finite and > 0");
  SampleSet out;
  out.role = role;
  out.sample_size = config.n;
  for (const auto& spec : nominal) {
    ParameterSpec p = spec;
    if (!p.is_random) {
      p.samples.reset();
      out.parameters.push_back(std::move(p));
      continue;
    }
    if (config.family == SampleFamily::Lognormal)
      for (std::int64_t i = 0; i < spec.value.size(); ++i)
        if (spec.value.flat(i) <= 0.0)
          fail("NonPositiveMean", "parameter '" + spec.symbol +
                                      "' has a non-positive nominal entry; lognormal sampling "
                                      "needs means > 0");
    const CounterRng rng(derive_stream_key(config.seed, spec.symbol, role));
    const std::int64_t entries = spec.value.size();
    std::vector<Tensor> samples;
    samples.reserve(static_cast<std::size_t>(config.n));
    Tensor mean(spec.value.shape());
    for (std::int64_t k = 0; k < config.n; ++k) {
      Tensor s(spec.value.shape());
      for (std::int64_t j = 0; j < entries; ++j) {
        const double u = rng.unit_at(static_cast<std::uint64_t>(k * entries + j));
        double v = draw_entry(config, spec.value.flat(j), u);
        if (config.round_integers && spec.type == VarKind::Integer) v = round_half_even(v);
        if (config.clip_nonnegative && spec.is_non_negative) v = std::max(v, 0.0);
        s.flat(j) = v;
        mean.flat(j) += v;
      }
      samples.push_back(std::move(s));
    }
    for (std::int64_t j = 0; j < entries; ++j)
      mean.flat(j) /= static_cast<double>(config.n);
    p.value = std::move(mean);
    p.samples = std::move(samples);
    out.parameters.push_back(std::move(p));
  }
  return out;
}

std::vector<Tensor> perturb_relative(const Tensor& nominal, double rho, std::uint64_t seed,
                                     std::int64_t n) {
  if (rho < 0.0) fail("PreconditionFailure", "rho must be >= 0");
  if (n < 1) fail("PreconditionFailure", "n must be >= 1");
  const CounterRng rng(derive_stream_key(seed, "perturb", SampleRole::Testing));
  std::vector<Tensor> out;
  out.reserve(static_cast<std::size_t>(n));
  const std::int64_t entries = nominal.size();
  for (std::int64_t k = 0; k < n; ++k) {
    Tensor t(nominal.shape());
    for (std::int64_t j = 0; j < entries; ++j) {
      const double u = 2.0 * rng.unit_at(static_cast<std::uint64_t>(k * entries + j)) - 1.0;
      t.flat(j) = nominal.flat(j) * (1.0 + rho * u);
    }
    out.push_back(std::move(t));
  }
  return out;
}

}  // namespace duopt
