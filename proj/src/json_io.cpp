#include "catid/json_io.hpp"

#include <cmath>

namespace catid {

namespace {

json number(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

json optional_vector(const std::vector<std::optional<double>> &v) {
  json out = json::array();
  for (const auto &x : v)
    out.push_back(x ? number(*x) : json(nullptr));
  return out;
}

json z_table(const ZTabled &t) {
  json out = json::array();
  for (Eigen::Index k = 0; k < t.rows(); ++k)
    out.push_back({number(t(k, 0)), number(t(k, 1))});
  return out;
}

Vectord read_vector(const json &j) {
  Vectord v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i)
    v(static_cast<Eigen::Index>(i)) = j.at(i).get<double>();
  return v;
}

} // namespace

json to_json(const Vectord &v) {
  json out = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i)
    out.push_back(number(v(i)));
  return out;
}

json to_json(const ObservedMomentsd &m) {
  json joint = json::array();
  for (Eigen::Index k = 0; k < m.q; ++k)
    joint.push_back({{number(m.joint[0](k, 0)), number(m.joint[0](k, 1))},
                     {number(m.joint[1](k, 0)), number(m.joint[1](k, 1))}});
  return {{"q", m.q},
          {"p", {number(m.p(0)), number(m.p(1))}},
          {"joint", joint},
          {"mu", z_table(m.mu)},
          {"n_z", {number(m.n_z(0)), number(m.n_z(1))}},
          {"swapped_z", m.swapped_z}};
}

json to_json(const PotentialDistributionsd &pd) {
  json flags = json::array();
  for (Eigen::Index k = 0; k < pd.omega_out_of_range.rows(); ++k)
    flags.push_back(
        {pd.omega_out_of_range(k, 0), pd.omega_out_of_range(k, 1)});
  return {{"pi1", to_json(pd.pi1)},
          {"pi0", to_json(pd.pi0)},
          {"pi1_raw", to_json(pd.raw_pi1)},
          {"pi0_raw", to_json(pd.raw_pi0)},
          {"omega", z_table(pd.omega)},
          {"omega_out_of_range", flags},
          {"testable_ok", {{"d0", pd.testable_ok[0]}, {"d1", pd.testable_ok[1]}}},
          {"truncated", pd.truncated},
          {"swapped_z", pd.swapped_z}};
}

json bounds_table(const IntervalBoundsd &b, bool truncated) {
  const auto &lo = truncated ? b.lower : b.raw_lower;
  const auto &hi = truncated ? b.upper : b.raw_upper;
  const auto row = [](const ArmTabled &t, int d) {
    return to_json(Vectord(t.row(d).transpose()));
  };
  return {{"lower", {{"pi1", row(lo, 1)}, {"pi0", row(lo, 0)}}},
          {"upper", {{"pi1", row(hi, 1)}, {"pi0", row(hi, 0)}}}};
}

json to_json(const EffectEstimatesd &e) {
  json out = json::object();
  if (e.ate.size() > 0) {
    out["ate"] = to_json(e.ate);
    out["rr"] = optional_vector(e.rr);
    out["log_odds"] = optional_vector(e.log_odds);
    out["used_raw"] = e.used_raw;
    out["testable_warning"] = e.testable_warning;
  }
  if (e.ate_bounds) {
    out["ate_bounds"] = {{"lower", to_json(e.ate_bounds->lower)},
                         {"upper", to_json(e.ate_bounds->upper)},
                         {"raw_lower", to_json(e.ate_bounds->raw_lower)},
                         {"raw_upper", to_json(e.ate_bounds->raw_upper)},
                         {"method", "conservative, not shown sharp"}};
  }
  return out;
}

json to_json(const BootstrapResult &r) {
  json components = json::object();
  for (std::size_t j = 0; j < r.components.size(); ++j) {
    const auto i = static_cast<Eigen::Index>(j);
    components[r.components[j]] = {{"point", number(r.point(i))},
                                   {"ci_lower", number(r.ci_lower(i))},
                                   {"ci_upper", number(r.ci_upper(i))}};
  }
  json reasons = json::object();
  for (const auto &[k, v] : r.skip_reasons)
    reasons[k] = v;
  return {{"estimand", r.estimand},
          {"method", "percentile"},
          {"quantile_type", 7},
          {"ci_level", r.ci_level},
          {"replicates_used", r.replicates_used},
          {"replicates_skipped", r.replicates_skipped},
          {"skip_reasons", reasons},
          {"components", components}};
}

json to_json(const DgpDiagnostics &d) {
  return {{"pi1", to_json(d.pi1)},
          {"pi0", to_json(d.pi0)},
          {"p", {number(d.p(0)), number(d.p(1))}},
          {"cov", {{"d0", z_table(d.cov[0])}, {"d1", z_table(d.cov[1])}}},
          {"delta", z_table(d.delta)},
          {"assumption_flags",
           {{"similarity", d.similarity},
            {"monotonic", d.monotonic},
            {"kappa_min", number(d.kappa_min)},
            {"kappa_effective", number(d.kappa_effective)}}}};
}

json to_json(const SelfcheckReport &r) {
  json props = json::array();
  std::size_t failed = 0;
  for (const auto &p : r.properties) {
    props.push_back({{"name", p.name},
                     {"checked", p.checked},
                     {"failed", p.failed},
                     {"worst_violation", number(p.worst)},
                     {"tolerance", p.tolerance},
                     {"passed", p.passed()}});
    failed += p.passed() ? 0 : 1;
  }
  return {{"count", r.count},
          {"seed", r.seed},
          {"properties", props},
          {"properties_passed", r.properties.size() - failed},
          {"properties_failed", failed},
          {"all_passed", r.all_passed()}};
}

json to_json(const DgpSpec &spec) {
  json types = json::array();
  for (const auto &t : spec.types)
    types.push_back({{"mass", t.mass},
                     {"pd0", t.pd0},
                     {"pd1", t.pd1},
                     {"py0", to_json(t.py0)},
                     {"py1", to_json(t.py1)}});
  return {{"q", spec.q()}, {"categories", spec.categories}, {"types", types}};
}

DgpSpec dgp_spec_from_json(const json &j) {
  try {
    DgpSpec spec;
    const auto &types = j.at("types");
    if (j.contains("categories"))
      spec.categories = j.at("categories").get<std::vector<std::string>>();
    else if (j.contains("q"))
      spec.categories = default_categories(j.at("q").get<std::size_t>());
    else if (!types.empty())
      spec.categories = default_categories(types.at(0).at("py0").size());
    if (j.contains("q") && j.at("q").get<std::size_t>() != spec.q())
      throw Error(ErrorKind::validation,
                  "DGP spec: q does not match the number of categories");
    for (const auto &t : types) {
      LatentType lt;
      lt.mass = t.at("mass").get<double>();
      lt.pd0 = t.at("pd0").get<double>();
      lt.pd1 = t.at("pd1").get<double>();
      lt.py0 = read_vector(t.at("py0"));
      lt.py1 = read_vector(t.at("py1"));
      spec.types.push_back(std::move(lt));
    }
    spec.validate();
    return spec;
  } catch (const json::exception &e) {
    throw Error(ErrorKind::validation,
                std::string("malformed DGP spec JSON: ") + e.what());
  }
}

} // namespace catid
