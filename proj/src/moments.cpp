#include "catid/moments.hpp"

#include <algorithm>
#include <numeric>
#include <string>
#include <vector>

namespace catid {

namespace {

std::size_t cell_index(std::size_t k, int d, int z) {
  return (k * 2 + static_cast<std::size_t>(d)) * 2 + static_cast<std::size_t>(z);
}

ObservedMomentsd finish(std::size_t q, const std::vector<double> &cells,
                        const ZPair<double> &n_eff,
                        std::optional<std::uint32_t> stratum) {
  ZPair<double> total = ZPair<double>::Zero();
  ZPair<double> treated = ZPair<double>::Zero();
  for (std::size_t k = 0; k < q; ++k)
    for (int z = 0; z < 2; ++z) {
      total(z) += cells[cell_index(k, 0, z)] + cells[cell_index(k, 1, z)];
      treated(z) += cells[cell_index(k, 1, z)];
    }
  if (total(0) <= 0.0 || total(1) <= 0.0) {
    if (total(0) <= 0.0 && total(1) <= 0.0)
      throw Error(ErrorKind::empty_stratum,
                  "stratum " + std::to_string(stratum.value_or(0)) +
                      " has no records");
    throw Error(ErrorKind::no_instrument_variation,
                std::string("instrument has no variation") +
                    (stratum ? " in stratum " + std::to_string(*stratum) : ""));
  }

  ObservedMomentsd m;
  m.q = static_cast<Eigen::Index>(q);
  for (int d = 0; d < 2; ++d)
    m.joint[d].resize(m.q, 2);
  for (std::size_t k = 0; k < q; ++k)
    for (int d = 0; d < 2; ++d)
      for (int z = 0; z < 2; ++z)
        m.joint[d](static_cast<Eigen::Index>(k), z) =
            cells[cell_index(k, d, z)] / total(z);
  m.mu = m.joint[0] + m.joint[1];
  m.p = treated / total;
  m.n_z = n_eff;
  return m;
}

} // namespace

ObservedMomentsd estimate_moments(const Dataset &ds,
                                  std::optional<std::uint32_t> stratum) {
  const std::size_t q = ds.q();
  std::vector<double> cells(q * 4, 0.0);
  ZPair<double> n_eff = ZPair<double>::Zero();

  if (!ds.has_weight()) {
    std::vector<std::uint64_t> counts(q * 4, 0);
    for (const auto &r : ds.records())
      if (!stratum || r.stratum == stratum)
        ++counts[cell_index(r.y, r.d, r.z)];
    for (std::size_t c = 0; c < cells.size(); ++c)
      cells[c] = static_cast<double>(counts[c]);
    for (std::size_t k = 0; k < q; ++k)
      for (int z = 0; z < 2; ++z)
        n_eff(z) += cells[cell_index(k, 0, z)] + cells[cell_index(k, 1, z)];
    return finish(q, cells, n_eff, stratum);
  }

  // Sorting each cell's weights makes the totals independent of record order.
  std::vector<std::vector<double>> weights(q * 4);
  for (const auto &r : ds.records())
    if (!stratum || r.stratum == stratum)
      weights[cell_index(r.y, r.d, r.z)].push_back(r.weight);
  ZPair<double> sum_sq = ZPair<double>::Zero();
  ZPair<double> sum = ZPair<double>::Zero();
  for (std::size_t c = 0; c < weights.size(); ++c) {
    auto &w = weights[c];
    std::sort(w.begin(), w.end());
    cells[c] = std::accumulate(w.begin(), w.end(), 0.0);
    const int z = static_cast<int>(c % 2);
    sum(z) += cells[c];
    for (const double x : w)
      sum_sq(z) += x * x;
  }
  for (int z = 0; z < 2; ++z)
    n_eff(z) = sum_sq(z) > 0.0 ? sum(z) * sum(z) / sum_sq(z) : 0.0;
  return finish(q, cells, n_eff, stratum);
}

ObservedMomentsd estimate_moments(const Dataset &ds,
                                  std::span<const std::uint32_t> multiplicity,
                                  std::optional<std::uint32_t> stratum) {
  if (multiplicity.size() != ds.size())
    throw Error(ErrorKind::invalid_argument,
                "multiplicity length does not match dataset size");
  const std::size_t q = ds.q();
  std::vector<double> cells(q * 4, 0.0);
  ZPair<double> sum = ZPair<double>::Zero();
  ZPair<double> sum_sq = ZPair<double>::Zero();
  const auto &records = ds.records();
  for (std::size_t i = 0; i < records.size(); ++i) {
    const auto &r = records[i];
    if (multiplicity[i] == 0 || (stratum && r.stratum != stratum))
      continue;
    const double m = static_cast<double>(multiplicity[i]);
    cells[cell_index(r.y, r.d, r.z)] += m * r.weight;
    sum(r.z) += m * r.weight;
    sum_sq(r.z) += m * r.weight * r.weight;
  }
  ZPair<double> n_eff = ZPair<double>::Zero();
  for (int z = 0; z < 2; ++z)
    n_eff(z) = sum_sq(z) > 0.0 ? sum(z) * sum(z) / sum_sq(z) : 0.0;
  return finish(q, cells, n_eff, stratum);
}

} // namespace catid
