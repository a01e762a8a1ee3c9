#ifndef CATID_JSON_IO_HPP
#define CATID_JSON_IO_HPP

#include "catid/dgp.hpp"
#include "catid/effects.hpp"
#include "catid/inference.hpp"
#include "catid/partial_id.hpp"
#include "catid/pipeline.hpp"
#include "catid/point_id.hpp"
#include "catid/selfcheck.hpp"

#include <json.hpp>

namespace catid {

using json = nlohmann::ordered_json;

/// Non-finite values become null.
json to_json(const Vectord &v);
json to_json(const ObservedMomentsd &m);
json to_json(const PotentialDistributionsd &pd);
/// {lower: {pi1, pi0}, upper: {pi1, pi0}} from either the raw or the
/// truncated tables.
json bounds_table(const IntervalBoundsd &b, bool truncated);
json to_json(const EffectEstimatesd &e);
json to_json(const BootstrapResult &r);
json to_json(const DgpDiagnostics &d);
json to_json(const SelfcheckReport &r);

json to_json(const DgpSpec &spec);
/// Accepts {"categories": [...]?, "q": n?, "types": [{mass, pd0, pd1, py0, py1}]}.
DgpSpec dgp_spec_from_json(const json &j);

} // namespace catid

#endif // CATID_JSON_IO_HPP
