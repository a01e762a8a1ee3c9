#include "catid/data.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <set>
#include <sstream>
#include <unordered_map>

namespace catid {

const char *to_string(ErrorKind kind) {
  switch (kind) {
  case ErrorKind::validation:
    return "validation";
  case ErrorKind::no_instrument_variation:
    return "no_instrument_variation";
  case ErrorKind::empty_stratum:
    return "empty_stratum";
  case ErrorKind::weak_instrument:
    return "weak_instrument";
  case ErrorKind::invalid_argument:
    return "invalid_argument";
  case ErrorKind::io:
    return "io";
  }
  return "unknown";
}

namespace {

std::string weak_message(double p0, double p1, double tol) {
  std::ostringstream os;
  os.precision(17);
  os << "weak instrument: |p1 - p0| < tolerance (p0=" << p0 << ", p1=" << p1
     << ", tolerance=" << tol << ")";
  return os.str();
}

} // namespace

WeakInstrumentError::WeakInstrumentError(double p0, double p1,
                                         double tolerance)
    : Error(ErrorKind::weak_instrument, weak_message(p0, p1, tolerance)),
      p0_(p0), p1_(p1), tolerance_(tolerance) {}

Dataset::Dataset(std::vector<std::string> categories,
                 std::vector<Record> records, bool has_stratum,
                 bool has_weight)
    : categories_(std::move(categories)), records_(std::move(records)),
      has_stratum_(has_stratum), has_weight_(has_weight) {
  if (categories_.size() < 2)
    throw Error(ErrorKind::validation,
                "outcome needs at least two categories, got " +
                    std::to_string(categories_.size()));
  std::set<std::string> seen(categories_.begin(), categories_.end());
  if (seen.size() != categories_.size())
    throw Error(ErrorKind::validation, "category labels must be unique");
  if (records_.empty())
    throw Error(ErrorKind::validation, "dataset has no records");

  bool z_seen[2] = {false, false};
  for (std::size_t i = 0; i < records_.size(); ++i) {
    const Record &r = records_[i];
    const auto where = "record " + std::to_string(i) + ": ";
    if (r.y >= categories_.size())
      throw Error(ErrorKind::validation, where + "category index out of range");
    if (r.d > 1)
      throw Error(ErrorKind::validation, where + "d must be 0 or 1");
    if (r.z > 1)
      throw Error(ErrorKind::validation, where + "z must be 0 or 1");
    if (!(r.weight > 0.0) || !std::isfinite(r.weight))
      throw Error(ErrorKind::validation, where + "weight must be positive");
    if (r.stratum.has_value() != has_stratum_)
      throw Error(ErrorKind::validation,
                  where + "stratum presence inconsistent with dataset");
    if (!has_weight_ && r.weight != 1.0)
      throw Error(ErrorKind::validation,
                  where + "non-unit weight in unweighted dataset");
    z_seen[r.z] = true;
  }
  if (!z_seen[0] || !z_seen[1])
    throw Error(ErrorKind::no_instrument_variation,
                "instrument has no variation");
}

std::vector<std::uint32_t> Dataset::strata() const {
  if (!has_stratum_)
    return {};
  std::set<std::uint32_t> s;
  for (const auto &r : records_)
    s.insert(*r.stratum);
  return {s.begin(), s.end()};
}

const char *to_string(Assumption a) {
  switch (a) {
  case Assumption::similarity:
    return "similarity";
  case Assumption::monotonic:
    return "monotonic";
  case Assumption::bounded:
    return "bounded";
  case Assumption::none:
    return "none";
  }
  return "unknown";
}

Assumption parse_assumption(const std::string &name) {
  if (name == "similarity")
    return Assumption::similarity;
  if (name == "monotonic")
    return Assumption::monotonic;
  if (name == "bounded")
    return Assumption::bounded;
  if (name == "none")
    return Assumption::none;
  throw Error(ErrorKind::invalid_argument, "unknown assumption '" + name + "'");
}

void EstimandConfig::validate() const {
  if (!(weak_iv_tolerance > 0.0))
    throw Error(ErrorKind::invalid_argument,
                "weak-instrument tolerance must be positive");
  if (assumption == Assumption::bounded) {
    if (!kappa)
      throw Error(ErrorKind::invalid_argument,
                  "bounded association requires kappa");
    if (!(*kappa >= 0.0 && *kappa < 0.5))
      throw Error(ErrorKind::invalid_argument, "kappa must lie in [0, 0.5)");
  }
}

// ---------------------------------------------------------------------------
// CSV

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t'))
    s.remove_prefix(1);
  while (!s.empty() &&
         (s.back() == ' ' || s.back() == '\t' || s.back() == '\r'))
    s.remove_suffix(1);
  return s;
}

std::vector<std::string_view> split(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = line.find(',', start);
    out.push_back(trim(line.substr(start, pos - start)));
    if (pos == std::string_view::npos)
      break;
    start = pos + 1;
  }
  return out;
}

[[noreturn]] void row_error(std::size_t line_no, const std::string &msg) {
  throw Error(ErrorKind::validation,
              "row " + std::to_string(line_no) + ": " + msg);
}

std::uint8_t parse_binary(std::string_view field, const char *name,
                          std::size_t line_no) {
  if (field == "0")
    return 0;
  if (field == "1")
    return 1;
  row_error(line_no, std::string(name) + " must be 0 or 1, got '" +
                         std::string(field) + "'");
}

struct RawRow {
  std::string label;
  std::uint8_t d, z;
  std::optional<std::uint32_t> stratum;
  double weight;
  std::size_t line_no;
};

} // namespace

Dataset load_dataset(std::istream &in, const LoadOptions &options) {
  std::string line;
  std::size_t line_no = 0;
  std::vector<std::string_view> header;
  std::string header_line;
  while (std::getline(in, header_line)) {
    ++line_no;
    if (!trim(header_line).empty())
      break;
  }
  if (trim(header_line).empty())
    throw Error(ErrorKind::validation, "missing header row");
  header = split(header_line);
  if (header.size() < 3 || header[0] != "y" || header[1] != "d" ||
      header[2] != "z")
    throw Error(ErrorKind::validation,
                "header must start with y,d,z (got '" +
                    std::string(trim(header_line)) + "')");
  int stratum_col = -1, weight_col = -1;
  for (std::size_t c = 3; c < header.size(); ++c) {
    if (header[c] == "stratum" && stratum_col < 0 && weight_col < 0)
      stratum_col = static_cast<int>(c);
    else if (header[c] == "weight" && weight_col < 0)
      weight_col = static_cast<int>(c);
    else
      throw Error(ErrorKind::validation,
                  "unexpected header column '" + std::string(header[c]) + "'");
  }

  std::vector<RawRow> rows;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty())
      continue;
    const auto fields = split(line);
    if (fields.size() != header.size())
      row_error(line_no, "expected " + std::to_string(header.size()) +
                             " fields, got " + std::to_string(fields.size()));
    RawRow row;
    row.line_no = line_no;
    if (fields[0].empty())
      row_error(line_no, "missing y");
    row.label = std::string(fields[0]);
    row.d = parse_binary(fields[1], "d", line_no);
    row.z = parse_binary(fields[2], "z", line_no);
    if (stratum_col >= 0) {
      const auto f = fields[static_cast<std::size_t>(stratum_col)];
      std::uint32_t s = 0;
      const auto [ptr, ec] = std::from_chars(f.data(), f.data() + f.size(), s);
      if (f.empty() || ec != std::errc{} || ptr != f.data() + f.size())
        row_error(line_no, "stratum must be a nonnegative integer, got '" +
                               std::string(f) + "'");
      row.stratum = s;
    }
    row.weight = 1.0;
    if (weight_col >= 0) {
      const auto f = fields[static_cast<std::size_t>(weight_col)];
      double w = 0.0;
      const auto [ptr, ec] = std::from_chars(f.data(), f.data() + f.size(), w);
      if (f.empty() || ec != std::errc{} || ptr != f.data() + f.size())
        row_error(line_no, "weight is not a number: '" + std::string(f) + "'");
      if (!(w > 0.0) || !std::isfinite(w))
        row_error(line_no, "weight must be positive, got '" + std::string(f) +
                               "'");
      row.weight = w;
    }
    rows.push_back(std::move(row));
  }
  if (rows.empty())
    throw Error(ErrorKind::validation, "dataset has no records");

  std::vector<std::string> categories;
  if (options.category_map) {
    categories = *options.category_map;
  } else {
    std::set<std::string> seen;
    for (const auto &r : rows)
      if (seen.insert(r.label).second)
        categories.push_back(r.label);
  }
  if (options.baseline) {
    const auto it =
        std::find(categories.begin(), categories.end(), *options.baseline);
    if (it == categories.end())
      throw Error(ErrorKind::validation,
                  "baseline category '" + *options.baseline + "' not found");
    std::rotate(it, it + 1, categories.end());
  }

  std::unordered_map<std::string, std::uint32_t> index;
  for (std::size_t k = 0; k < categories.size(); ++k)
    index.emplace(categories[k], static_cast<std::uint32_t>(k));

  std::vector<Record> records;
  records.reserve(rows.size());
  for (const auto &r : rows) {
    const auto it = index.find(r.label);
    if (it == index.end())
      row_error(r.line_no, "unknown category '" + r.label + "'");
    records.push_back(Record{it->second, r.d, r.z, r.stratum, r.weight});
  }
  return Dataset(std::move(categories), std::move(records), stratum_col >= 0,
                 weight_col >= 0);
}

Dataset load_dataset_file(const std::string &path,
                          const LoadOptions &options) {
  std::ifstream in(path, std::ios::binary);
  if (!in)
    throw Error(ErrorKind::io, "cannot open '" + path + "'");
  return load_dataset(in, options);
}

void save_dataset(const Dataset &ds, std::ostream &out) {
  out << "y,d,z";
  if (ds.has_stratum())
    out << ",stratum";
  if (ds.has_weight())
    out << ",weight";
  out << '\n';
  char buf[64];
  for (const auto &r : ds.records()) {
    out << ds.categories()[r.y] << ',' << int(r.d) << ',' << int(r.z);
    if (ds.has_stratum())
      out << ',' << *r.stratum;
    if (ds.has_weight()) {
      const auto res = std::to_chars(buf, buf + sizeof buf, r.weight);
      out << ',' << std::string_view(buf, res.ptr - buf);
    }
    out << '\n';
  }
}

// ---------------------------------------------------------------------------
// Support diagnostics

std::array<std::array<std::size_t, 2>, 2>
treatment_counts(const Dataset &ds, std::optional<std::uint32_t> stratum) {
  std::array<std::array<std::size_t, 2>, 2> counts{};
  for (const auto &r : ds.records())
    if (!stratum || r.stratum == stratum)
      ++counts[r.d][r.z];
  return counts;
}

namespace {

void scoped_support(const Dataset &ds, std::optional<std::uint32_t> stratum,
                    std::vector<SupportDiagnostic> &out) {
  const std::size_t q = ds.q();
  std::vector<std::size_t> cells(q * 4, 0);
  for (const auto &r : ds.records())
    if (!stratum || r.stratum == stratum)
      ++cells[(r.y * 2 + r.d) * 2 + r.z];
  const auto counts = treatment_counts(ds, stratum);
  const std::string scope =
      stratum ? "stratum " + std::to_string(*stratum) + ": " : "";

  for (int z = 0; z < 2; ++z) {
    if (counts[0][z] + counts[1][z] == 0) {
      out.push_back({SupportDiagnostic::Severity::error, stratum,
                     scope + "instrument has no variation (no Z=" +
                         std::to_string(z) + " rows)"});
      return;
    }
  }
  for (int z = 0; z < 2; ++z)
    for (int d = 0; d < 2; ++d)
      if (counts[d][z] == 0)
        out.push_back({SupportDiagnostic::Severity::warning, stratum,
                       scope + "cell D=" + std::to_string(d) +
                           ",Z=" + std::to_string(z) + " empty"});
  for (std::size_t k = 0; k < q; ++k)
    for (int d = 0; d < 2; ++d)
      for (int z = 0; z < 2; ++z)
        if (counts[d][z] > 0 && cells[(k * 2 + d) * 2 + z] == 0)
          out.push_back({SupportDiagnostic::Severity::warning, stratum,
                         scope + "cell Y=" + ds.categories()[k] +
                             ",D=" + std::to_string(d) + ",Z=" +
                             std::to_string(z) + " empty"});
}

} // namespace

std::vector<SupportDiagnostic> validate_support(const Dataset &ds) {
  std::vector<SupportDiagnostic> out;
  scoped_support(ds, std::nullopt, out);
  for (const auto s : ds.strata())
    scoped_support(ds, s, out);
  return out;
}

} // namespace catid
