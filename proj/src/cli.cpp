#include "catid/cli.hpp"

#include "catid/data.hpp"
#include "catid/dgp.hpp"
#include "catid/json_io.hpp"
#include "catid/pipeline.hpp"
#include "catid/selfcheck.hpp"

#include <CLI11.hpp>
#include <openssl/evp.h>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>

namespace catid {

std::string sha256_file(const std::string &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in)
    throw Error(ErrorKind::io, "cannot open '" + path + "'");
  std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(),
                                                              EVP_MD_CTX_free);
  EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr);
  char buf[1 << 14];
  while (in) {
    in.read(buf, sizeof buf);
    EVP_DigestUpdate(ctx.get(), buf, static_cast<std::size_t>(in.gcount()));
  }
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_DigestFinal_ex(ctx.get(), digest, &len);
  std::ostringstream os;
  for (unsigned i = 0; i < len; ++i)
    os << std::hex << std::setw(2) << std::setfill('0') << int(digest[i]);
  return os.str();
}

namespace {

struct CommonOptions {
  std::string input;
  std::vector<std::string> categories;
  std::string baseline;
  std::optional<std::uint32_t> stratum;
  double tolerance = kDefaultWeakIvTolerance;
  bool no_truncate = false;
  bool raw_effects = false;
  bool no_timestamp = false;
  bool table = false;
};

struct BootstrapOptions {
  std::size_t replicates = 0;
  std::optional<std::uint64_t> seed;
  double ci = 0.95;
  std::string on_degenerate = "skip";
  unsigned threads = 1;
};

struct Options {
  CommonOptions common;
  BootstrapOptions boot;
  std::string assumption = "none";
  std::optional<double> kappa;
  std::vector<double> kappa_grid;
  double null_value = 0.0;
  std::string spec_path;
  std::size_t n = 0;
  double pz = 0.5;
  std::optional<std::uint64_t> seed;
  std::string out_path;
  bool diagnostics = false;
  std::size_t count = 50;
};

void add_common(CLI::App *cmd, CommonOptions &c) {
  cmd->add_option("-i,--input", c.input, "CSV with header y,d,z[,stratum][,weight]")
      ->required();
  cmd->add_option("--categories", c.categories,
                  "explicit category ordering (comma separated)")
      ->delimiter(',');
  cmd->add_option("--baseline", c.baseline,
                  "baseline (normalization) category label");
  cmd->add_option("--stratum", c.stratum, "restrict to one stratum");
  cmd->add_option("--tolerance", c.tolerance,
                  "weak-instrument tolerance on |p1 - p0|")
      ->check(CLI::PositiveNumber);
  cmd->add_flag("--no-truncate", c.no_truncate,
                "report raw point estimates without truncation");
  cmd->add_flag("--raw-effects", c.raw_effects,
                "compute effects from raw point estimates");
  cmd->add_flag("--no-timestamp", c.no_timestamp,
                "omit the manifest timestamp");
  cmd->add_flag("--table", c.table, "print a human-readable table instead of JSON");
}

void add_bootstrap(CLI::App *cmd, BootstrapOptions &b) {
  cmd->add_option("--bootstrap", b.replicates, "bootstrap replicates (0 = off)");
  cmd->add_option("--seed", b.seed, "bootstrap seed (required with --bootstrap)");
  cmd->add_option("--ci", b.ci, "confidence level")->check(CLI::Range(0.0, 1.0));
  cmd->add_option("--on-degenerate", b.on_degenerate,
                  "degenerate replicate policy")
      ->check(CLI::IsMember({"skip", "fail"}));
  cmd->add_option("--threads", b.threads, "bootstrap worker threads");
}

std::string timestamp_utc() {
  const auto now = std::chrono::system_clock::to_time_t(
      std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

json config_echo(const CLI::App *cmd) {
  json out = json::object();
  for (const CLI::Option *opt : cmd->get_options()) {
    const std::string name = opt->get_name(false, true);
    if (name.empty() || opt->get_lnames().empty())
      continue;
    const std::string &key = opt->get_lnames().front();
    if (key == "help" || opt->count() == 0)
      continue;
    if (opt->get_type_size() == 0) {
      out[key] = true;
      continue;
    }
    const auto &res = opt->results();
    if (res.size() == 1)
      out[key] = res.front();
    else
      out[key] = res;
  }
  return out;
}

json manifest(const CLI::App *cmd, const std::string &input, bool timestamp,
              const json &seeds, std::optional<bool> swapped_z) {
  json m = {{"subcommand", cmd->get_name()},
            {"input_digest",
             input.empty() ? json(nullptr) : json("sha256:" + sha256_file(input))},
            {"config", config_echo(cmd)},
            {"version", kVersion},
            {"seeds", seeds}};
  m["swapped_z"] = swapped_z ? json(*swapped_z) : json(nullptr);
  m["timestamp"] = timestamp ? json(timestamp_utc()) : json(nullptr);
  return m;
}

Dataset load(const CommonOptions &c) {
  LoadOptions lo;
  if (!c.categories.empty())
    lo.category_map = c.categories;
  if (!c.baseline.empty())
    lo.baseline = c.baseline;
  return load_dataset_file(c.input, lo);
}

EstimandConfig config_from(const CommonOptions &c, Assumption a,
                           std::optional<double> kappa) {
  EstimandConfig cfg;
  cfg.assumption = a;
  cfg.kappa = kappa;
  cfg.weak_iv_tolerance = c.tolerance;
  cfg.truncate = !c.no_truncate;
  cfg.validate();
  return cfg;
}

std::optional<BootstrapConfig> bootstrap_config(const BootstrapOptions &b) {
  if (b.replicates == 0)
    return std::nullopt;
  if (!b.seed)
    throw Error(ErrorKind::invalid_argument, "--bootstrap requires --seed");
  BootstrapConfig cfg;
  cfg.replicates = b.replicates;
  cfg.seed = *b.seed;
  cfg.ci_level = b.ci;
  cfg.on_degenerate = b.on_degenerate == "fail" ? OnDegenerate::fail
                                                : OnDegenerate::skip;
  cfg.threads = std::max(1u, b.threads);
  cfg.validate();
  return cfg;
}

json seeds_json(const std::optional<BootstrapConfig> &boot) {
  json s = json::object();
  if (boot)
    s["bootstrap"] = boot->seed;
  return s;
}

json diagnostics_json(const Dataset &ds) {
  json out = json::array();
  for (const auto &d : validate_support(ds))
    out.push_back(
        {{"severity", d.severity == SupportDiagnostic::Severity::error ? "error"
                                                                   : "warning"},
         {"stratum", d.stratum ? json(*d.stratum) : json(nullptr)},
         {"message", d.message}});
  return out;
}

json strata_json(const std::vector<StratumResult> &strata) {
  json out = json::array();
  for (const auto &s : strata)
    out.push_back({{"stratum", s.stratum ? json(*s.stratum) : json(nullptr)},
                   {"share", s.share},
                   {"swapped_z", s.moments.swapped_z}});
  return out;
}

bool any_swapped(const std::vector<StratumResult> &strata) {
  for (const auto &s : strata)
    if (s.moments.swapped_z)
      return true;
  return false;
}

void print_row(std::ostream &out, const std::string &label, double a, double b,
               double c) {
  auto cell = [](double v, int width) {
    char buf[32];
    if (std::isnan(v))
      std::snprintf(buf, sizeof buf, "%*s", width, "");
    else
      std::snprintf(buf, sizeof buf, "%*.4f", width, v);
    return std::string(buf);
  };
  out << label << std::string(label.size() < 28 ? 28 - label.size() : 1, ' ')
      << ' ' << cell(a, 14) << ' ' << cell(b, 10) << ' ' << cell(c, 10) << '\n';
}

void print_header(std::ostream &out, const char *a, const char *b,
                  const char *c) {
  char buf[160];
  std::snprintf(buf, sizeof buf, "%-28s %14s %10s %10s\n", "", a, b, c);
  out << buf;
}

// ---------------------------------------------------------------------------

int cmd_moments(const CLI::App *cmd, const Options &o, std::ostream &out) {
  const Dataset ds = load(o.common);
  auto m = estimate_moments(ds, o.common.stratum);
  if (m.p(1) != m.p(0))
    m = orient_instrument(m);
  json j = to_json(m);
  j["categories"] = ds.categories();
  j["support"] = diagnostics_json(ds);
  j["manifest"] =
      manifest(cmd, o.common.input, !o.common.no_timestamp, json::object(),
               m.swapped_z);
  out << j.dump(2) << '\n';
  return kExitOk;
}

int cmd_estimate(const CLI::App *cmd, const Options &o, std::ostream &out) {
  const Dataset ds = load(o.common);
  const auto cfg = config_from(o.common, Assumption::similarity, std::nullopt);
  const auto boot = bootstrap_config(o.boot);
  const Scope scope{o.common.stratum};
  const std::vector<std::uint32_t> ones(ds.size(), 1);
  const auto a = analyze_point(ds, ones, cfg, scope, o.common.raw_effects);

  std::optional<BootstrapResult> br;
  if (boot)
    br = bootstrap(ds, point_estimand(ds, cfg, scope, o.common.raw_effects),
                   *boot);

  if (o.common.table) {
    const auto q = a.combined.pi1.size();
    const auto pct = [](double level) {
      char buf[16];
      std::snprintf(buf, sizeof buf, "%g%%", 100.0 * level);
      return std::string(buf);
    };
    const double alpha = br ? (1.0 - br->ci_level) / 2 : 0.0;
    const std::string lo_label = pct(alpha), hi_label = pct(1.0 - alpha);
    print_header(out, "Point Estimate", br ? lo_label.c_str() : "",
                 br ? hi_label.c_str() : "");
    for (Eigen::Index k = 0; k < q; ++k) {
      const auto &c = ds.categories()[static_cast<std::size_t>(k)];
      const double v[3] = {a.combined.pi1(k), a.combined.pi0(k),
                           a.effects.ate(k)};
      const std::string names[3] = {"P(Y1=" + c + ")", "P(Y0=" + c + ")",
                                    "ATE(" + c + ")"};
      for (int r = 0; r < 3; ++r) {
        const auto idx = r * q + k;
        print_row(out, names[r], v[r], br ? br->ci_lower(idx) : NAN,
                  br ? br->ci_upper(idx) : NAN);
      }
    }
    return kExitOk;
  }

  json j = to_json(a.combined);
  j["categories"] = ds.categories();
  j["residuals"] = {{"plug_back", a.plug_back_residual},
                    {"omega_consistency", a.omega_residual}};
  j["effects"] = to_json(a.effects);
  j["support"] = diagnostics_json(ds);
  if (a.strata.size() > 1) {
    json per = strata_json(a.strata);
    for (std::size_t s = 0; s < per.size(); ++s)
      per[s]["estimates"] = to_json(a.per_stratum[s]);
    j["strata"] = per;
  }
  if (br)
    j["bootstrap"] = to_json(*br);
  j["manifest"] = manifest(cmd, o.common.input, !o.common.no_timestamp,
                           seeds_json(boot), any_swapped(a.strata));
  out << j.dump(2) << '\n';
  return kExitOk;
}

json sweep_json(const Dataset &ds, const EstimandConfig &base,
                const std::vector<double> &grid, const Scope &scope) {
  json sweep = json::array();
  const std::vector<std::uint32_t> ones(ds.size(), 1);
  for (const double kappa : grid) {
    auto cfg = base;
    cfg.assumption = Assumption::bounded;
    cfg.kappa = kappa;
    const auto a = analyze_bounds(ds, ones, cfg, scope);
    sweep.push_back({{"kappa", kappa},
                     {"bounds_raw", bounds_table(a.combined, false)},
                     {"bounds_truncated", bounds_table(a.combined, true)},
                     {"ate_bounds", to_json(a.effects)["ate_bounds"]}});
  }
  return sweep;
}

json breakdown_json(const Dataset &ds, const ObservedMomentsd &m,
                    double null_value, double tolerance) {
  json out = json::array();
  for (Eigen::Index k = 0; k < m.q; ++k) {
    const auto analytic = breakdown_kappa(m, k, null_value, tolerance);
    const auto bisected =
        breakdown_kappa_bisection(m, k, null_value, 1.0, 200, tolerance);
    out.push_back(
        {{"category", ds.categories()[static_cast<std::size_t>(k)]},
         {"kappa", analytic ? json(*analytic) : json(nullptr)},
         {"kappa_bisection",
          bisected && std::isfinite(*bisected) ? json(*bisected) : json(nullptr)},
         {"admissible", analytic ? json(*analytic < 0.5) : json(nullptr)}});
  }
  return out;
}

int cmd_bounds(const CLI::App *cmd, const Options &o, std::ostream &out) {
  const Dataset ds = load(o.common);
  const auto assumption = parse_assumption(o.assumption);
  if (assumption == Assumption::similarity)
    throw Error(ErrorKind::invalid_argument,
                "--assumption must be none, monotonic or bounded");
  std::optional<double> kappa = o.kappa;
  if (assumption == Assumption::bounded && !kappa && !o.kappa_grid.empty())
    kappa = o.kappa_grid.front();
  const auto cfg = config_from(o.common, assumption, kappa);
  const auto boot = bootstrap_config(o.boot);
  const Scope scope{o.common.stratum};
  const std::vector<std::uint32_t> ones(ds.size(), 1);
  const auto a = analyze_bounds(ds, ones, cfg, scope);

  std::optional<BootstrapResult> br;
  if (boot)
    br = bootstrap(ds, bounds_estimand(ds, cfg, scope), *boot);

  if (o.common.table) {
    print_header(out, "Lower", "Upper", "");
    for (Eigen::Index k = 0; k < a.combined.q(); ++k) {
      const auto &c = ds.categories()[static_cast<std::size_t>(k)];
      print_row(out, "P(Y1=" + c + ")", a.combined.lower(1, k),
                a.combined.upper(1, k), NAN);
      print_row(out, "P(Y0=" + c + ")", a.combined.lower(0, k),
                a.combined.upper(0, k), NAN);
      print_row(out, "ATE(" + c + ")", a.effects.ate_bounds->lower(k),
                a.effects.ate_bounds->upper(k), NAN);
    }
    return kExitOk;
  }

  json j;
  j["regime"] = to_string(a.combined.regime);
  j["kappa"] = a.combined.kappa ? json(*a.combined.kappa) : json(nullptr);
  j["categories"] = ds.categories();
  j["bounds_raw"] = bounds_table(a.combined, false);
  j["bounds_truncated"] = bounds_table(a.combined, true);
  json crossed = json::array();
  for (Eigen::Index k = 0; k < a.combined.q(); ++k)
    crossed.push_back({{"pi1", bool(a.combined.crossed(1, k))},
                       {"pi0", bool(a.combined.crossed(0, k))}});
  j["crossed"] = crossed;
  const json effects = to_json(a.effects);
  j["ate_bounds"] = effects["ate_bounds"];
  j["effects"] = effects;
  if (assumption == Assumption::bounded && a.strata.size() == 1)
    j["breakdown_kappa"] = breakdown_json(ds, a.strata.front().moments, 0.0,
                                          cfg.weak_iv_tolerance);
  else
    j["breakdown_kappa"] = nullptr;
  if (!o.kappa_grid.empty())
    j["sweep"] = sweep_json(ds, cfg, o.kappa_grid, scope);
  if (a.strata.size() > 1)
    j["strata"] = strata_json(a.strata);
  if (br)
    j["bootstrap"] = to_json(*br);
  j["manifest"] = manifest(cmd, o.common.input, !o.common.no_timestamp,
                           seeds_json(boot), any_swapped(a.strata));
  out << j.dump(2) << '\n';
  return kExitOk;
}

int cmd_sensitivity(const CLI::App *cmd, const Options &o, std::ostream &out) {
  const Dataset ds = load(o.common);
  const auto cfg = config_from(o.common, Assumption::bounded,
                               o.kappa_grid.empty() ? std::nullopt
                                                    : std::optional(o.kappa_grid.front()));
  const Scope scope{o.common.stratum};
  const std::vector<std::uint32_t> ones(ds.size(), 1);
  const auto strata = scoped_moments(ds, ones, scope);
  // Validates the grid (nonempty, ascending, admissible).
  (void)kappa_sweep(strata.front().moments, o.kappa_grid, cfg.weak_iv_tolerance);

  json j;
  j["categories"] = ds.categories();
  j["grid"] = o.kappa_grid;
  j["null_value"] = o.null_value;
  j["sweep"] = sweep_json(ds, cfg, o.kappa_grid, scope);
  if (strata.size() == 1)
    j["breakdown_kappa"] = breakdown_json(ds, strata.front().moments,
                                          o.null_value, cfg.weak_iv_tolerance);
  else
    j["breakdown_kappa"] = nullptr;
  j["manifest"] = manifest(cmd, o.common.input, !o.common.no_timestamp,
                           json::object(), any_swapped(strata));
  out << j.dump(2) << '\n';
  return kExitOk;
}

int cmd_simulate(const CLI::App *cmd, const Options &o, std::ostream &out) {
  std::ifstream in(o.spec_path);
  if (!in)
    throw Error(ErrorKind::io, "cannot open '" + o.spec_path + "'");
  json raw;
  try {
    in >> raw;
  } catch (const json::exception &e) {
    throw Error(ErrorKind::validation,
                std::string("malformed DGP spec JSON: ") + e.what());
  }
  const DgpSpec spec = dgp_spec_from_json(raw);
  const json seeds = o.seed ? json{{"sample", *o.seed}} : json::object();

  if (o.diagnostics) {
    json j = to_json(diagnostics(spec));
    j["categories"] = spec.categories;
    j["exact_moments"] = to_json(exact_moments(spec));
    j["manifest"] =
        manifest(cmd, o.spec_path, !o.common.no_timestamp, seeds, std::nullopt);
    out << j.dump(2) << '\n';
    if (o.n == 0)
      return kExitOk;
  }
  if (o.n == 0)
    throw Error(ErrorKind::invalid_argument, "--n must be positive");
  if (!o.seed)
    throw Error(ErrorKind::invalid_argument, "simulate requires --seed");
  const Dataset ds = sample(spec, o.n, o.pz, *o.seed);
  if (o.out_path.empty()) {
    if (o.diagnostics)
      throw Error(ErrorKind::invalid_argument,
                  "--diagnostics with --n requires --out");
    save_dataset(ds, out);
    return kExitOk;
  }
  std::ofstream file(o.out_path, std::ios::binary);
  if (!file)
    throw Error(ErrorKind::io, "cannot write '" + o.out_path + "'");
  save_dataset(ds, file);
  file.close();
  if (!o.diagnostics) {
    json j = {{"out", o.out_path},
              {"n", o.n},
              {"pz", o.pz},
              {"output_digest", "sha256:" + sha256_file(o.out_path)}};
    j["manifest"] =
        manifest(cmd, o.spec_path, !o.common.no_timestamp, seeds, std::nullopt);
    out << j.dump(2) << '\n';
  }
  return kExitOk;
}

int cmd_selfcheck(const CLI::App *cmd, const Options &o, std::ostream &out,
                  std::ostream &err) {
  const std::uint64_t seed = o.seed.value_or(1);
  const auto report = run_selfcheck(o.count, seed);
  json j = to_json(report);
  j["manifest"] = manifest(cmd, "", !o.common.no_timestamp,
                           json{{"selfcheck", seed}}, std::nullopt);
  out << j.dump(2) << '\n';
  for (const auto &p : report.properties)
    err << (p.passed() ? "PASS " : "FAIL ") << p.name << " (" << p.failed
        << "/" << p.checked << " failed)\n";
  return report.all_passed() ? kExitOk : kExitPropertyFailure;
}

// ---------------------------------------------------------------------------
// JSON config files: top-level keys apply to every subcommand, keys under an
// object named after the subcommand override them. Command-line flags win.

bool has_flag(const std::vector<std::string> &args, const std::string &flag) {
  for (const auto &a : args)
    if (a == flag || a.rfind(flag + "=", 0) == 0)
      return true;
  return false;
}

void append_config(std::vector<std::string> &args, const json &object,
                   const std::string &subcommand) {
  std::vector<std::pair<std::string, json>> items;
  for (auto it = object.begin(); it != object.end(); ++it)
    if (!it.value().is_object())
      items.emplace_back(it.key(), it.value());
  if (object.contains(subcommand) && object.at(subcommand).is_object())
    for (auto it = object.at(subcommand).begin();
         it != object.at(subcommand).end(); ++it) {
      std::erase_if(items, [&](const auto &p) { return p.first == it.key(); });
      items.emplace_back(it.key(), it.value());
    }
  std::vector<std::string> extra;
  for (const auto &[key, value] : items) {
    const std::string flag = key.rfind("--", 0) == 0 ? key : "--" + key;
    if (has_flag(args, flag))
      continue;
    if (value.is_boolean()) {
      if (value.get<bool>())
        extra.push_back(flag);
      continue;
    }
    std::string text;
    if (value.is_string()) {
      text = value.get<std::string>();
    } else if (value.is_array()) {
      for (std::size_t i = 0; i < value.size(); ++i) {
        if (i)
          text += ',';
        text += value[i].is_string() ? value[i].get<std::string>()
                                     : value[i].dump();
      }
    } else {
      text = value.dump();
    }
    extra.push_back(flag);
    extra.push_back(text);
  }
  args.insert(args.end(), extra.begin(), extra.end());
}

std::vector<std::string> expand_config(std::vector<std::string> args) {
  std::string path;
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (args[i] == "--config" && i + 1 < args.size()) {
      path = args[i + 1];
      args.erase(args.begin() + static_cast<std::ptrdiff_t>(i),
                 args.begin() + static_cast<std::ptrdiff_t>(i + 2));
      break;
    }
    if (args[i].rfind("--config=", 0) == 0) {
      path = args[i].substr(9);
      args.erase(args.begin() + static_cast<std::ptrdiff_t>(i));
      break;
    }
  }
  if (path.empty())
    return args;
  std::ifstream in(path);
  if (!in)
    throw Error(ErrorKind::io, "cannot open config '" + path + "'");
  json config;
  try {
    in >> config;
  } catch (const json::exception &e) {
    throw Error(ErrorKind::validation,
                std::string("malformed config JSON: ") + e.what());
  }
  if (!config.is_object())
    throw Error(ErrorKind::validation, "config must be a JSON object");
  const std::string subcommand = args.empty() ? "" : args.front();
  append_config(args, config, subcommand);
  return args;
}

int exit_code_for(ErrorKind kind) {
  return kind == ErrorKind::weak_instrument ? kExitWeakInstrument
                                            : kExitValidation;
}

} // namespace

int run_cli(const std::vector<std::string> &raw_args, std::ostream &out,
            std::ostream &err) {
  CLI::App app{"Identification of categorical potential-outcome distributions "
               "with a binary instrument",
               "catid"};
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(1);
  Options o;

  auto *moments = app.add_subcommand("moments", "observed moments as JSON");
  add_common(moments, o.common);

  auto *estimate =
      app.add_subcommand("estimate", "point identification and effects");
  add_common(estimate, o.common);
  add_bootstrap(estimate, o.boot);

  auto *bounds = app.add_subcommand("bounds", "partial-identification bounds");
  add_common(bounds, o.common);
  add_bootstrap(bounds, o.boot);
  bounds->add_option("--assumption", o.assumption, "none|monotonic|bounded")
      ->check(CLI::IsMember({"none", "monotonic", "bounded"}));
  bounds->add_option("--kappa", o.kappa, "bounded-association constant");
  bounds->add_option("--kappa-grid", o.kappa_grid, "kappa values (comma separated)")
      ->delimiter(',');

  auto *sensitivity =
      app.add_subcommand("sensitivity", "bounded-association kappa sweep");
  add_common(sensitivity, o.common);
  sensitivity->add_option("--kappa-grid", o.kappa_grid, "ascending kappa values")
      ->delimiter(',')
      ->required();
  sensitivity->add_option("--null", o.null_value, "null ATE value for breakdown");

  auto *simulate = app.add_subcommand("simulate", "sample from a DGP spec");
  simulate->add_option("--spec", o.spec_path, "JSON DGP spec")->required();
  simulate->add_option("--n", o.n, "sample size");
  simulate->add_option("--pz", o.pz, "P(Z = 1)");
  simulate->add_option("--seed", o.seed, "sampling seed");
  simulate->add_option("--out", o.out_path, "output CSV path");
  simulate->add_flag("--diagnostics", o.diagnostics,
                     "print population diagnostics");
  simulate->add_flag("--no-timestamp", o.common.no_timestamp,
                     "omit the manifest timestamp");

  auto *selfcheck = app.add_subcommand("selfcheck", "run oracle property suites");
  selfcheck->add_option("--count", o.count, "specs per profile")
      ->check(CLI::PositiveNumber);
  selfcheck->add_option("--seed", o.seed, "suite seed");
  selfcheck->add_flag("--no-timestamp", o.common.no_timestamp,
                      "omit the manifest timestamp");

  try {
    const auto args = expand_config(raw_args);
    std::vector<std::string> argv_storage = {"catid"};
    argv_storage.insert(argv_storage.end(), args.begin(), args.end());
    std::vector<char *> argv;
    for (auto &a : argv_storage)
      argv.push_back(a.data());
    try {
      app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::ParseError &e) {
      const int code = app.exit(e, out, err);
      return code == 0 ? kExitOk : kExitValidation;
    }

    if (moments->parsed())
      return cmd_moments(moments, o, out);
    if (estimate->parsed())
      return cmd_estimate(estimate, o, out);
    if (bounds->parsed())
      return cmd_bounds(bounds, o, out);
    if (sensitivity->parsed())
      return cmd_sensitivity(sensitivity, o, out);
    if (simulate->parsed())
      return cmd_simulate(simulate, o, out);
    if (selfcheck->parsed())
      return cmd_selfcheck(selfcheck, o, out, err);
  } catch (const Error &e) {
    err << "error: " << e.what() << '\n';
    return exit_code_for(e.kind());
  } catch (const std::exception &e) {
    err << "internal error: " << e.what() << '\n';
    return kExitInternal;
  }
  return kExitInternal;
}

} // namespace catid
