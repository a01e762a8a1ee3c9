#include "catid/inference.hpp"

#include "catid/rng.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <optional>
#include <thread>

namespace catid {

void BootstrapConfig::validate() const {
  if (replicates < 1)
    throw Error(ErrorKind::invalid_argument, "bootstrap needs >= 1 replicate");
  if (!(ci_level > 0.0 && ci_level < 1.0))
    throw Error(ErrorKind::invalid_argument, "ci level must lie in (0, 1)");
}

double quantile_type7(std::span<const double> sorted, double prob) {
  if (sorted.empty())
    throw Error(ErrorKind::invalid_argument, "quantile of empty sample");
  const double h = static_cast<double>(sorted.size() - 1) * prob;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  if (lo + 1 >= sorted.size())
    return sorted.back();
  return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[lo + 1] - sorted[lo]);
}

std::vector<std::uint32_t> resample_multiplicity(const Dataset &ds,
                                                 std::uint64_t seed,
                                                 std::uint64_t replicate) {
  CounterRng rng(seed, replicate);
  std::vector<std::uint32_t> counts(ds.size(), 0);
  if (!ds.has_stratum()) {
    for (std::size_t i = 0; i < ds.size(); ++i)
      ++counts[rng.below(ds.size())];
    return counts;
  }
  for (const auto s : ds.strata()) {
    std::vector<std::size_t> members;
    for (std::size_t i = 0; i < ds.size(); ++i)
      if (ds.records()[i].stratum == s)
        members.push_back(i);
    for (std::size_t j = 0; j < members.size(); ++j)
      ++counts[members[rng.below(members.size())]];
  }
  return counts;
}

void percentile_intervals(BootstrapResult &result, double ci_level) {
  const auto cols = result.replicate_values.cols();
  result.ci_level = ci_level;
  result.ci_lower.resize(cols);
  result.ci_upper.resize(cols);
  const double alpha = (1.0 - ci_level) / 2.0;
  std::vector<double> column;
  for (Eigen::Index j = 0; j < cols; ++j) {
    const auto c = result.replicate_values.col(j);
    column.assign(c.data(), c.data() + c.size());
    std::sort(column.begin(), column.end());
    result.ci_lower(j) = quantile_type7(column, alpha);
    result.ci_upper(j) = quantile_type7(column, 1.0 - alpha);
  }
}

namespace {

struct Outcome {
  std::optional<Vectord> values;
  std::string reason;
  std::exception_ptr error;
  bool internal = false;
};

Outcome run_replicate(const Dataset &ds, const Estimand &estimand,
                      const BootstrapConfig &cfg, std::size_t r) {
  Outcome out;
  const auto counts = resample_multiplicity(ds, cfg.seed, r);
  try {
    Vectord v = estimand.evaluate(ds, counts);
    if (!v.allFinite()) {
      out.reason = "non_finite";
      out.error = std::make_exception_ptr(
          Error(ErrorKind::validation, "replicate produced non-finite values"));
    } else {
      out.values = std::move(v);
    }
  } catch (const Error &e) {
    out.reason = to_string(e.kind());
    out.error = std::current_exception();
  } catch (...) {
    out.internal = true;
    out.error = std::current_exception();
  }
  return out;
}

} // namespace

BootstrapResult bootstrap(const Dataset &ds, const Estimand &estimand,
                          const BootstrapConfig &cfg) {
  cfg.validate();
  for (const auto &diag : validate_support(ds))
    if (diag.severity == SupportDiagnostic::Severity::error)
      throw Error(ErrorKind::no_instrument_variation, diag.message);

  BootstrapResult result;
  result.estimand = estimand.name;
  result.components = estimand.components;
  const std::vector<std::uint32_t> ones(ds.size(), 1);
  result.point = estimand.evaluate(ds, ones);

  std::vector<Outcome> outcomes(cfg.replicates);
  const unsigned workers =
      std::max(1u, std::min<unsigned>(cfg.threads,
                                      static_cast<unsigned>(cfg.replicates)));
  if (workers == 1) {
    for (std::size_t r = 0; r < cfg.replicates; ++r)
      outcomes[r] = run_replicate(ds, estimand, cfg, r);
  } else {
    std::vector<std::jthread> pool;
    for (unsigned w = 0; w < workers; ++w)
      pool.emplace_back([&, w] {
        for (std::size_t r = w; r < cfg.replicates; r += workers)
          outcomes[r] = run_replicate(ds, estimand, cfg, r);
      });
  }

  // Gather in replicate-index order.
  std::vector<const Vectord *> used;
  for (const auto &o : outcomes) {
    if (o.values) {
      used.push_back(&*o.values);
      continue;
    }
    if (o.internal || cfg.on_degenerate == OnDegenerate::fail)
      std::rethrow_exception(o.error);
    ++result.skip_reasons[o.reason];
  }
  result.replicates_used = used.size();
  result.replicates_skipped = cfg.replicates - used.size();
  if (used.empty())
    throw Error(ErrorKind::validation,
                "all " + std::to_string(cfg.replicates) +
                    " bootstrap replicates were degenerate");

  result.replicate_values.resize(static_cast<Eigen::Index>(used.size()),
                                 result.point.size());
  for (std::size_t r = 0; r < used.size(); ++r)
    result.replicate_values.row(static_cast<Eigen::Index>(r)) =
        used[r]->transpose();
  percentile_intervals(result, cfg.ci_level);
  return result;
}

} // namespace catid
