#pragma once

#include <nlohmann/json.hpp>

#include "nis/harness.hpp"
#include "nis/markov.hpp"
#include "nis/ninits.hpp"
#include "nis/nis.hpp"
#include "nis/vmfnm.hpp"

namespace nis {

void to_json(nlohmann::json& j, const VmfnComponent& c);
void from_json(const nlohmann::json& j, VmfnComponent& c);
void to_json(nlohmann::json& j, const VmfnmParams& p);
void from_json(const nlohmann::json& j, VmfnmParams& p);

void to_json(nlohmann::json& j, const ChainState& s);
void to_json(nlohmann::json& j, const ChainRunRecord& r);
void to_json(nlohmann::json& j, const NinitsTrace& t);
void to_json(nlohmann::json& j, const NisIteration& it);
void to_json(nlohmann::json& j, const RunRecord& r);
void to_json(nlohmann::json& j, const SummaryTable& s);

/// Scalar outcome and iteration trace; points are omitted.
nlohmann::json result_summary_json(const NisResult& result);

/// Everything needed for plots: chain-run clouds, final chains and the
/// importance-sample pool in Cartesian coordinates.
nlohmann::json figure_data_json(const NisResult& result);

}  // namespace nis
