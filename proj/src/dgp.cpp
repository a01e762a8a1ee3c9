#include "catid/dgp.hpp"

#include "catid/rng.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

namespace catid {

namespace {

constexpr double kSimplexTolerance = 1e-12;

[[noreturn]] void invalid(const std::string &msg) {
  throw Error(ErrorKind::invalid_argument, "invalid DGP spec: " + msg);
}

bool is_probability(double v) { return v >= 0.0 && v <= 1.0; }

void check_simplex(const Vectord &v, std::size_t q, const std::string &what) {
  if (static_cast<std::size_t>(v.size()) != q)
    invalid(what + " has length " + std::to_string(v.size()) + ", expected " +
            std::to_string(q));
  for (Eigen::Index k = 0; k < v.size(); ++k)
    if (!is_probability(v(k)))
      invalid(what + " has an entry outside [0, 1]");
  if (std::abs(v.sum() - 1.0) > kSimplexTolerance)
    invalid(what + " does not sum to 1");
}

} // namespace

std::vector<std::string> default_categories(std::size_t q) {
  std::vector<std::string> out;
  for (std::size_t k = 0; k < q; ++k)
    out.push_back("c" + std::to_string(k + 1));
  return out;
}

ZPair<double> DgpSpec::propensities() const {
  ZPair<double> p = ZPair<double>::Zero();
  for (const auto &t : types) {
    p(0) += t.mass * t.pd0;
    p(1) += t.mass * t.pd1;
  }
  return p;
}

void DgpSpec::validate() const {
  if (q() < 2)
    invalid("needs at least two categories");
  if (types.empty())
    invalid("needs at least one latent type");
  double total = 0.0;
  for (std::size_t i = 0; i < types.size(); ++i) {
    const auto &t = types[i];
    const auto name = "type " + std::to_string(i);
    if (!(t.mass > 0.0))
      invalid(name + " mass must be positive");
    if (!is_probability(t.pd0) || !is_probability(t.pd1))
      invalid(name + " take-up probabilities must lie in [0, 1]");
    check_simplex(t.py0, q(), name + " py0");
    check_simplex(t.py1, q(), name + " py1");
    total += t.mass;
  }
  if (std::abs(total - 1.0) > kSimplexTolerance)
    invalid("type masses do not sum to 1");
}

DgpDiagnostics diagnostics(const DgpSpec &spec) {
  spec.validate();
  const auto q = static_cast<Eigen::Index>(spec.q());
  DgpDiagnostics out;
  out.p = spec.propensities();
  out.pi0 = Vectord::Zero(q);
  out.pi1 = Vectord::Zero(q);
  std::array<ZTabled, 2> cross = {ZTabled::Zero(q, 2), ZTabled::Zero(q, 2)};
  for (const auto &t : spec.types) {
    out.pi0 += t.mass * t.py0;
    out.pi1 += t.mass * t.py1;
    const double pd[2] = {t.pd0, t.pd1};
    for (int z = 0; z < 2; ++z) {
      cross[0].col(z) += t.mass * t.py0.array() * pd[z];
      cross[1].col(z) += t.mass * t.py1.array() * pd[z];
    }
  }
  for (int d = 0; d < 2; ++d) {
    const Vectord &pi = d == 1 ? out.pi1 : out.pi0;
    out.cov[d].resize(q, 2);
    for (int z = 0; z < 2; ++z)
      out.cov[d].col(z) = cross[d].col(z) - pi.array() * out.p(z);
  }
  out.delta = out.cov[1] - out.cov[0];

  const auto head = out.delta.topRows(q - 1);
  out.similarity = out.delta.abs().maxCoeff() <= 1e-12;
  out.monotonic = (head >= -1e-12).all();
  out.kappa_min = head.abs().maxCoeff();

  double p0 = out.p(0), p1 = out.p(1);
  ZTabled delta = out.delta;
  if (p1 < p0) {
    std::swap(p0, p1);
    delta = delta.rowwise().reverse().eval();
  }
  double worst = 0.0;
  for (Eigen::Index k = 0; k + 1 < q; ++k) {
    const double e1 = delta(k, 1) * (1.0 - p0) - delta(k, 0) * (1.0 - p1);
    const double e0 = delta(k, 0) * p1 - delta(k, 1) * p0;
    worst = std::max({worst, std::abs(e1), std::abs(e0)});
  }
  out.kappa_effective = worst;
  return out;
}

namespace {

std::uint32_t draw_category(CounterRng &rng, const Vectord &probs) {
  const double u = rng.uniform();
  double acc = 0.0;
  const auto last = probs.size() - 1;
  for (Eigen::Index k = 0; k < last; ++k) {
    acc += probs(k);
    if (u < acc)
      return static_cast<std::uint32_t>(k);
  }
  return static_cast<std::uint32_t>(last);
}

} // namespace

Dataset sample(const DgpSpec &spec, std::size_t n, double z_probability,
               std::uint64_t seed) {
  spec.validate();
  if (n == 0)
    throw Error(ErrorKind::invalid_argument,
                "sample size must be positive (empty dataset)");
  if (!(z_probability > 0.0 && z_probability < 1.0))
    throw Error(ErrorKind::invalid_argument,
                "instrument probability must lie in (0, 1)");
  std::vector<double> cumulative(spec.types.size());
  double acc = 0.0;
  for (std::size_t t = 0; t < spec.types.size(); ++t)
    cumulative[t] = (acc += spec.types[t].mass);

  std::vector<Record> records(n);
  for (std::size_t i = 0; i < n; ++i) {
    CounterRng rng(seed, i);
    const double u = rng.uniform();
    auto it = std::upper_bound(cumulative.begin(), cumulative.end(), u);
    const auto t = std::min<std::size_t>(
        static_cast<std::size_t>(it - cumulative.begin()),
        spec.types.size() - 1);
    const auto &type = spec.types[t];
    Record &r = records[i];
    r.z = rng.bernoulli(z_probability) ? 1 : 0;
    r.d = rng.bernoulli(r.z == 1 ? type.pd1 : type.pd0) ? 1 : 0;
    r.y = draw_category(rng, r.d == 1 ? type.py1 : type.py0);
  }
  return Dataset(spec.categories, std::move(records));
}

Dataset population_dataset(const DgpSpec &spec, double z_probability) {
  const auto m = exact_moments(spec);
  std::vector<Record> records;
  for (std::uint32_t k = 0; k < spec.q(); ++k)
    for (std::uint8_t d = 0; d < 2; ++d)
      for (std::uint8_t z = 0; z < 2; ++z) {
        const double pz = z == 1 ? z_probability : 1.0 - z_probability;
        const double w = m.joint[d](k, z) * pz;
        if (w > 0.0)
          records.push_back(Record{k, d, z, std::nullopt, w});
      }
  return Dataset(spec.categories, std::move(records), false, true);
}

const char *to_string(ProfileKind kind) {
  switch (kind) {
  case ProfileKind::similarity:
    return "similarity";
  case ProfileKind::monotonic:
    return "monotonic";
  case ProfileKind::bounded:
    return "bounded";
  case ProfileKind::equal_gap:
    return "equal_gap";
  }
  return "unknown";
}

// ---------------------------------------------------------------------------
// Random spec generation

namespace {

double uniform(CounterRng &rng, double lo, double hi) {
  return lo + (hi - lo) * rng.uniform();
}

Vectord dirichlet_flat(CounterRng &rng, Eigen::Index size) {
  Vectord v(size);
  for (Eigen::Index i = 0; i < size; ++i)
    v(i) = -std::log1p(-rng.uniform());
  return v / v.sum();
}

std::optional<DgpSpec> propose(CounterRng &rng, const GridProfile &profile,
                               const GridOptions &options) {
  const auto q = static_cast<Eigen::Index>(
      options.q_min + rng.below(options.q_max - options.q_min + 1));
  const auto types = static_cast<Eigen::Index>(2 + rng.below(3));

  const Vectord mass = dirichlet_flat(rng, types);
  std::vector<double> score(static_cast<std::size_t>(types));
  for (auto &s : score)
    s = rng.uniform();
  std::sort(score.begin(), score.end());

  // Both propensities nondecreasing in the score, so Cov(s, D_z) >= 0.
  std::vector<double> pd0(score.size()), pd1(score.size());
  for (std::size_t t = 0; t < score.size(); ++t)
    pd0[t] = uniform(rng, 0.02, 0.6);
  std::sort(pd0.begin(), pd0.end());
  if (profile.kind == ProfileKind::equal_gap) {
    // Constant shift: Cov(s, D_0) = Cov(s, D_1).
    const double shift = uniform(rng, 0.1, 0.38);
    for (std::size_t t = 0; t < score.size(); ++t)
      pd1[t] = pd0[t] + shift;
  } else {
    double running = 0.0;
    for (std::size_t t = 0; t < score.size(); ++t) {
      running =
          std::max(running, std::min(0.98, pd0[t] + uniform(rng, 0.1, 0.5)));
      pd1[t] = running;
    }
  }
  if (rng.bernoulli(0.5))
    std::swap(pd0, pd1);

  const Vectord b0 = dirichlet_flat(rng, q);
  const Vectord b1 = dirichlet_flat(rng, q);

  double mean_score = 0.0;
  for (Eigen::Index t = 0; t < types; ++t)
    mean_score += mass(t) * score[static_cast<std::size_t>(t)];

  // g_t: zero across categories and zero mass-weighted mean across types.
  Eigen::MatrixXd g(types, q);
  for (Eigen::Index t = 0; t < types; ++t)
    for (Eigen::Index k = 0; k < q; ++k)
      g(t, k) = uniform(rng, -1.0, 1.0);
  g.colwise() -= g.rowwise().mean();
  g.rowwise() -= mass.transpose() * g;

  Vectord slope = Vectord::Zero(q);
  if (profile.kind != ProfileKind::similarity) {
    for (Eigen::Index k = 0; k + 1 < q; ++k)
      slope(k) = profile.kind == ProfileKind::monotonic
                     ? uniform(rng, 0.0, 1.0)
                     : uniform(rng, -1.0, 1.0);
    slope(q - 1) = -slope.head(q - 1).sum();
  }
  Eigen::MatrixXd h(types, q);
  for (Eigen::Index t = 0; t < types; ++t)
    h.row(t) = (score[static_cast<std::size_t>(t)] - mean_score) *
               slope.transpose();

  const double h_scale = uniform(rng, 0.2, 1.0);
  for (const double lambda : {1.0, 0.5, 0.25, 0.1, 0.05, 0.02}) {
    DgpSpec spec;
    spec.categories = default_categories(static_cast<std::size_t>(q));
    bool valid = true;
    for (Eigen::Index t = 0; t < types && valid; ++t) {
      LatentType lt;
      lt.mass = mass(t);
      lt.pd0 = pd0[static_cast<std::size_t>(t)];
      lt.pd1 = pd1[static_cast<std::size_t>(t)];
      lt.py0 = b0 + lambda * g.row(t).transpose();
      lt.py1 = b1 + lambda * (g.row(t) + h_scale * h.row(t)).transpose();
      valid = (lt.py0.array() >= 0.0).all() && (lt.py1.array() >= 0.0).all();
      spec.types.push_back(std::move(lt));
    }
    if (!valid)
      continue;
    if (profile.kind == ProfileKind::bounded ||
        profile.kind == ProfileKind::equal_gap) {
      // delta is linear in the slope scale: rescale toward a target gap.
      const double target = uniform(rng, 0.0, 1.0) * profile.kappa;
      const double current = diagnostics(spec).kappa_min;
      if (current > target && current > 0.0) {
        const double shrink = target / current;
        for (Eigen::Index t = 0; t < types; ++t) {
          auto &lt = spec.types[static_cast<std::size_t>(t)];
          lt.py1 = b1 + lambda * (g.row(t) + shrink * h_scale * h.row(t))
                                     .transpose();
        }
      }
    }
    for (auto &lt : spec.types) {
      lt.py0 /= lt.py0.sum();
      lt.py1 /= lt.py1.sum();
    }
    return spec;
  }
  return std::nullopt;
}

bool matches(const DgpSpec &spec, const GridProfile &profile,
             const GridOptions &options) {
  try {
    spec.validate();
  } catch (const Error &) {
    return false;
  }
  const auto p = spec.propensities();
  if (std::abs(p(1) - p(0)) < options.min_relevance)
    return false;
  const auto diag = diagnostics(spec);
  switch (profile.kind) {
  case ProfileKind::similarity:
    return diag.similarity;
  case ProfileKind::monotonic:
    return diag.monotonic;
  case ProfileKind::bounded:
    return diag.kappa_min <= profile.kappa;
  case ProfileKind::equal_gap:
    return diag.kappa_min <= profile.kappa &&
           ((diag.delta.col(0) - diag.delta.col(1)).abs() <= 1e-12).all();
  }
  return false;
}

} // namespace

std::vector<DgpSpec> spec_grid(GridProfile profile, std::size_t count,
                               std::uint64_t seed, const GridOptions &options) {
  if (count == 0)
    throw Error(ErrorKind::invalid_argument, "spec_grid count must be >= 1");
  if (options.q_min < 2 || options.q_max < options.q_min)
    throw Error(ErrorKind::invalid_argument, "invalid category-count range");
  if ((profile.kind == ProfileKind::bounded ||
       profile.kind == ProfileKind::equal_gap) &&
      !(profile.kappa >= 0.0 && profile.kappa < 0.5))
    throw Error(ErrorKind::invalid_argument, "kappa must lie in [0, 0.5)");

  const std::size_t budget = count * options.attempts_per_spec;
  std::vector<DgpSpec> out;
  std::size_t attempts = 0;
  while (out.size() < count) {
    if (attempts == budget) {
      std::ostringstream os;
      os << "spec_grid rejection budget exhausted for profile "
         << to_string(profile.kind) << ": accepted " << out.size() << " of "
         << attempts << " proposals (acceptance rate "
         << static_cast<double>(out.size()) / static_cast<double>(attempts)
         << ")";
      throw Error(ErrorKind::invalid_argument, os.str());
    }
    CounterRng rng(seed, attempts++);
    auto spec = propose(rng, profile, options);
    if (spec && matches(*spec, profile, options))
      out.push_back(std::move(*spec));
  }
  return out;
}

ObservedMomentsd random_moments(std::uint64_t seed, std::uint64_t index,
                                std::size_t q, double min_relevance) {
  if (q < 2 || !(min_relevance >= 0.0 && min_relevance < 1.0))
    throw Error(ErrorKind::invalid_argument, "invalid random_moments request");
  CounterRng rng(seed, index);
  double p0 = 0.0, p1 = 0.0;
  do {
    p0 = rng.uniform();
    p1 = rng.uniform();
  } while (std::abs(p1 - p0) < min_relevance);
  const auto rows = static_cast<Eigen::Index>(q);
  ZTabled untreated(rows, 2), treated(rows, 2);
  const double p[2] = {p0, p1};
  for (int z = 0; z < 2; ++z) {
    treated.col(z) = p[z] * dirichlet_flat(rng, rows).array();
    untreated.col(z) = (1.0 - p[z]) * dirichlet_flat(rng, rows).array();
  }
  auto m = ObservedMomentsd::from_joint(untreated, treated);
  m.p << p0, p1;
  m.n_z.setConstant(std::numeric_limits<double>::infinity());
  return m;
}

} // namespace catid
