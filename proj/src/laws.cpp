#include "brw/laws.hpp"

#include <cmath>
#include <limits>
#include <sstream>

namespace brw {

namespace {

constexpr double kMassTolerance = 1e-6;
constexpr double kMeanTolerance = 1e-9;

double to_double(const std::string& text, const std::string& context) {
  std::size_t used = 0;
  double value = 0.0;
  try {
    value = std::stod(text, &used);
  } catch (const std::exception&) {
    throw Error(Errc::BadLawSpec, "bad number '" + text + "' in " + context);
  }
  if (used != text.size()) throw Error(Errc::BadLawSpec, "bad number '" + text + "' in " + context);
  return value;
}

std::int64_t to_int(const std::string& text, const std::string& context) {
  std::size_t used = 0;
  long long value = 0;
  try {
    value = std::stoll(text, &used);
  } catch (const std::exception&) {
    throw Error(Errc::BadLawSpec, "bad integer '" + text + "' in " + context);
  }
  if (used != text.size()) throw Error(Errc::BadLawSpec, "bad integer '" + text + "' in " + context);
  return value;
}

std::vector<std::pair<std::string, std::string>> split_pairs(const std::string& body,
                                                             const std::string& spec) {
  std::vector<std::pair<std::string, std::string>> out;
  std::stringstream ss(body);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const auto eq = item.find('=');
    if (eq == std::string::npos || eq == 0 || eq + 1 == item.size())
      throw Error(Errc::BadLawSpec, "expected key=value in '" + spec + "'");
    out.emplace_back(item.substr(0, eq), item.substr(eq + 1));
  }
  if (out.empty()) throw Error(Errc::BadLawSpec, "empty parameter list in '" + spec + "'");
  return out;
}

template <class Factory>
auto surface(const std::string& spec, Factory&& make) {
  try {
    return make();
  } catch (const Error& e) {
    if (e.code() == Errc::BadLawSpec) throw;
    throw Error(Errc::BadLawSpec, "'" + spec + "' rejected (" + e.what() + ")");
  }
}

}  // namespace

// ---------------------------------------------------------------------------

DiscreteSampler::DiscreteSampler(std::int64_t offset, const Eigen::VectorXd& probs) : offset_(offset) {
  const auto n = static_cast<std::size_t>(probs.size());
  threshold_.assign(n, 0.0);
  alias_.assign(n, 0);
  for (std::size_t i = 0; i < n; ++i)
    if (probs[i] > 0.0) support_.emplace_back(offset + static_cast<std::int64_t>(i), probs[i]);

  // Vose's alias construction.
  std::vector<double> scaled(n);
  std::vector<std::uint32_t> small, large;
  for (std::size_t i = 0; i < n; ++i) {
    scaled[i] = probs[i] * static_cast<double>(n);
    (scaled[i] < 1.0 ? small : large).push_back(static_cast<std::uint32_t>(i));
  }
  while (!small.empty() && !large.empty()) {
    const auto s = small.back();
    small.pop_back();
    const auto l = large.back();
    threshold_[s] = scaled[s];
    alias_[s] = l;
    scaled[l] = (scaled[l] + scaled[s]) - 1.0;
    if (scaled[l] < 1.0) {
      large.pop_back();
      small.push_back(l);
    }
  }
  for (auto i : large) threshold_[i] = 1.0, alias_[i] = i;
  // Leftovers here are rounding residue; their bucket keeps itself.
  for (auto i : small) threshold_[i] = 1.0, alias_[i] = i;
}

std::int64_t DiscreteSampler::sum_of(std::int64_t count, RngStream& rng) const {
  std::int64_t total = 0;
  multinomial(count, rng, [&](std::int64_t value, std::int64_t n) {
    if (value != 0 && n > std::numeric_limits<std::int64_t>::max() / std::abs(value))
      throw Error(Errc::ParticleOverflow, "offspring total overflows 64 bits");
    const std::int64_t add = value * n;
    if (add > 0 && total > std::numeric_limits<std::int64_t>::max() - add)
      throw Error(Errc::ParticleOverflow, "offspring total overflows 64 bits");
    total += add;
  });
  return total;
}

// ---------------------------------------------------------------------------

OffspringLaw make_offspring_law(const std::map<std::int64_t, double>& probs, std::string label,
                                double truncation_error) {
  if (probs.empty()) throw Error(Errc::NotNormalized, "empty offspring law");
  if (probs.begin()->first < 0) throw Error(Errc::OutOfRange, "offspring counts must be nonnegative");
  const std::int64_t k_max = probs.rbegin()->first;
  Eigen::VectorXd p = Eigen::VectorXd::Zero(k_max + 1);
  for (const auto& [k, pk] : probs) {
    if (!(pk >= 0.0) || !std::isfinite(pk))
      throw Error(Errc::NotNormalized, "probability of " + std::to_string(k) + " is negative");
    p[k] = pk;
  }
  const double mass = p.sum();
  if (std::abs(mass - 1.0) > kMassTolerance)
    throw Error(Errc::NotNormalized, "offspring probabilities sum to " + std::to_string(mass));
  p /= mass;

  const Eigen::ArrayXd k = Eigen::ArrayXd::LinSpaced(k_max + 1, 0.0, static_cast<double>(k_max));
  const double mean = (k * p.array()).sum();
  if (std::abs(mean - 1.0) > kMeanTolerance)
    throw Error(Errc::NotCritical, "offspring mean is " + std::to_string(mean));
  const double second = (k * k * p.array()).sum();
  const double variance = second - 1.0;
  if (!(variance > 1e-15)) throw Error(Errc::DegenerateVariance, "offspring variance is zero");

  auto data = std::make_shared<OffspringLaw::Data>();
  data->probs = p;
  data->mean = mean;
  data->variance = variance;
  data->third_moment = (k * k * k * p.array()).sum();
  data->truncation_error = truncation_error;
  data->label = std::move(label);

  // tail_j = P(X > j), summed from the top so small tails keep full precision.
  data->tail = Eigen::VectorXd::Zero(std::max<std::int64_t>(k_max, 1));
  double acc = 0.0;
  for (std::int64_t j = k_max - 1; j >= 0; --j) {
    acc += p[j + 1];
    data->tail[j] = acc;
  }
  data->tail2 = Eigen::VectorXd::Zero(data->tail.size());
  acc = 0.0;
  for (Eigen::Index j = data->tail.size() - 2; j >= 0; --j) {
    acc += data->tail[j + 1];
    data->tail2[j] = acc;
  }
  data->sampler = DiscreteSampler(0, p);

  OffspringLaw law;
  law.data_ = std::move(data);
  return law;
}

StepLaw make_step_law_dense(std::int64_t min_step, Eigen::VectorXd probs, std::string label,
                            double moment_order) {
  if (probs.size() == 0) throw Error(Errc::NotNormalized, "empty step law");
  if ((probs.array() < 0.0).any() || !probs.allFinite())
    throw Error(Errc::NotNormalized, "negative step probability");
  const double mass = probs.sum();
  if (std::abs(mass - 1.0) > kMassTolerance)
    throw Error(Errc::NotNormalized, "step probabilities sum to " + std::to_string(mass));
  probs /= mass;

  const Eigen::ArrayXd x = Eigen::ArrayXd::LinSpaced(probs.size(), static_cast<double>(min_step),
                                                     static_cast<double>(min_step + probs.size() - 1));
  const double mean = (x * probs.array()).sum();
  if (std::abs(mean) > kMeanTolerance) throw Error(Errc::NonzeroDrift, "step mean is " + std::to_string(mean));
  const double variance = (x * x * probs.array()).sum();
  if (!(variance > 1e-15)) throw Error(Errc::DegenerateVariance, "step variance is zero");

  auto data = std::make_shared<StepLaw::Data>();
  data->min_step = min_step;
  data->mean = mean;
  data->variance = variance;
  data->moment_order = moment_order;
  data->label = std::move(label);
  data->at_least = Eigen::VectorXd::Zero(probs.size());
  double acc = 0.0;
  for (Eigen::Index i = probs.size() - 1; i >= 0; --i) {
    acc += probs[i];
    data->at_least[i] = acc;
  }
  data->sampler = DiscreteSampler(min_step, probs);
  data->probs = std::move(probs);

  StepLaw law;
  law.data_ = std::move(data);
  return law;
}

StepLaw make_step_law(const std::map<std::int64_t, double>& probs, std::string label) {
  if (probs.empty()) throw Error(Errc::NotNormalized, "empty step law");
  const std::int64_t lo = probs.begin()->first;
  const std::int64_t hi = probs.rbegin()->first;
  Eigen::VectorXd p = Eigen::VectorXd::Zero(hi - lo + 1);
  for (const auto& [x, ax] : probs) p[x - lo] = ax;
  return make_step_law_dense(lo, std::move(p), std::move(label), std::numeric_limits<double>::infinity());
}

StepLaw heavy_tail_step_law(double epsilon, std::int64_t cutoff) {
  if (!(epsilon > 0.0 && epsilon < 2.0)) throw Error(Errc::OutOfRange, "heavy-tail epsilon must lie in (0,2)");
  if (cutoff < 1000) throw Error(Errc::CutoffTooSmall, "heavy-tail cutoff must be at least 1000");
  Eigen::VectorXd p = Eigen::VectorXd::Zero(2 * cutoff + 1);
  const double exponent = -(5.0 - epsilon);
  for (std::int64_t x = 1; x <= cutoff; ++x) {
    const double w = std::pow(static_cast<double>(x), exponent);
    p[cutoff + x] = w;
    p[cutoff - x] = w;
  }
  // Sum smallest terms first.
  double mass = 0.0;
  for (std::int64_t x = cutoff; x >= 1; --x) mass += 2.0 * p[cutoff + x];
  p /= mass;
  std::ostringstream label;
  label << "heavy:eps=" << epsilon << ",cutoff=" << cutoff;
  return make_step_law_dense(-cutoff, std::move(p), label.str(), 4.0 - epsilon);
}

OffspringLaw double_or_nothing() { return make_offspring_law({{0, 0.5}, {2, 0.5}}, "don"); }

OffspringLaw geometric_offspring(int k_max) {
  std::map<std::int64_t, double> p;
  double kept = 0.0;
  for (int k = 0; k <= k_max; ++k) {
    p[k] = std::ldexp(1.0, -(k + 1));
    kept += p[k];
  }
  for (auto& [k, pk] : p) pk /= kept;
  return make_offspring_law(p, "geom", std::ldexp(1.0, -(k_max + 1)));
}

OffspringLaw poisson_offspring(int k_max) {
  std::map<std::int64_t, double> p;
  double term = std::exp(-1.0);
  double kept = 0.0;
  for (int k = 0; k <= k_max; ++k) {
    if (k > 0) term /= k;
    p[k] = term;
    kept += term;
  }
  // Discarded mass, bounded by the first omitted term times e.
  const double discarded = term / (k_max + 1) * std::exp(1.0);
  for (auto& [k, pk] : p) pk /= kept;
  return make_offspring_law(p, "poisson", discarded);
}

StepLaw rademacher() { return make_step_law({{-1, 0.5}, {1, 0.5}}, "rademacher"); }

StepLaw lazy_step(double hold) {
  if (!(hold >= 0.0 && hold < 1.0)) throw Error(Errc::OutOfRange, "lazy holding probability must lie in [0,1)");
  std::ostringstream label;
  label << "lazy:q=" << hold;
  return make_step_law({{-1, 0.5 * (1.0 - hold)}, {0, hold}, {1, 0.5 * (1.0 - hold)}}, label.str());
}

ModelParams make_model(OffspringLaw offspring, StepLaw step) {
  ModelParams params;
  const double sigma2 = offspring.variance();
  const double eta2 = step.variance();
  params.c_const = 6.0 * eta2 / sigma2;
  params.beta = std::sqrt(sigma2 / (6.0 * eta2));
  params.offspring = std::move(offspring);
  params.step = std::move(step);
  return params;
}

Eigen::ArrayXd q_apply(const OffspringLaw& law, const Eigen::ArrayXd& s) {
  if ((s < 0.0).any() || (s > 1.0).any()) throw Error(Errc::OutOfRange, "argument must lie in [0,1]");
  return s.unaryExpr([&law](double v) { return q_unchecked(law, v); });
}

// ---------------------------------------------------------------------------

OffspringLaw parse_offspring_spec(const std::string& spec) {
  if (spec == "don") return double_or_nothing();
  if (spec == "geom") return geometric_offspring();
  if (spec == "poisson") return poisson_offspring();
  if (spec.rfind("table:", 0) == 0) {
    std::map<std::int64_t, double> p;
    for (const auto& [k, v] : split_pairs(spec.substr(6), spec)) {
      const auto key = to_int(k, spec);
      if (p.count(key)) throw Error(Errc::BadLawSpec, "duplicate entry in '" + spec + "'");
      p[key] = to_double(v, spec);
    }
    return surface(spec, [&] { return make_offspring_law(p, spec); });
  }
  throw Error(Errc::BadLawSpec, "unknown offspring law '" + spec + "'");
}

StepLaw parse_step_spec(const std::string& spec) {
  if (spec == "rademacher") return rademacher();
  if (spec.rfind("lazy:", 0) == 0) {
    const auto pairs = split_pairs(spec.substr(5), spec);
    if (pairs.size() != 1 || pairs[0].first != "q") throw Error(Errc::BadLawSpec, "expected lazy:q=Q");
    const double hold = to_double(pairs[0].second, spec);
    return surface(spec, [&] { return lazy_step(hold); });
  }
  if (spec.rfind("heavy:", 0) == 0) {
    double eps = std::numeric_limits<double>::quiet_NaN();
    std::int64_t cutoff = -1;
    for (const auto& [k, v] : split_pairs(spec.substr(6), spec)) {
      if (k == "eps") eps = to_double(v, spec);
      else if (k == "cutoff") cutoff = to_int(v, spec);
      else throw Error(Errc::BadLawSpec, "unknown heavy-tail key '" + k + "'");
    }
    if (std::isnan(eps) || cutoff < 0) throw Error(Errc::BadLawSpec, "expected heavy:eps=E,cutoff=N");
    return surface(spec, [&] { return heavy_tail_step_law(eps, cutoff); });
  }
  if (spec.rfind("table:", 0) == 0) {
    std::map<std::int64_t, double> p;
    for (const auto& [k, v] : split_pairs(spec.substr(6), spec)) {
      const auto key = to_int(k, spec);
      if (p.count(key)) throw Error(Errc::BadLawSpec, "duplicate entry in '" + spec + "'");
      p[key] = to_double(v, spec);
    }
    return surface(spec, [&] { return make_step_law(p, spec); });
  }
  throw Error(Errc::BadLawSpec, "unknown step law '" + spec + "'");
}

}  // namespace brw
