#pragma once

#include "driftscope/attributes.hpp"
#include "driftscope/influence.hpp"
#include "driftscope/neighbourhood.hpp"
#include "driftscope/normalize.hpp"
#include "driftscope/partial.hpp"
#include "driftscope/prototypes.hpp"
#include "driftscope/sweeps.hpp"
#include "driftscope/synth.hpp"

#include "json.hpp"

#include <filesystem>
#include <string>
#include <vector>

namespace driftscope {

// JSON forms used in report.json. Optional values become null.
nlohmann::json to_json(const Prototype& p, const std::vector<std::string>& names);
nlohmann::json to_json(const NormalizationStats& s);
nlohmann::json to_json(const PrototypeNeighbours& n);
nlohmann::json to_json(const PartialPrototype& p, const std::vector<std::string>& names);
nlohmann::json to_json(const ImportanceVector& v);
nlohmann::json to_json(const FaithfulnessRecord& r);
nlohmann::json to_json(const TradeoffRecord& r);
nlohmann::json to_json(const AlignmentPoint& p);
nlohmann::json to_json(const AttributeTable& t);
nlohmann::json to_json(const Separability& s);
nlohmann::json to_json(const EnsembleConfig& c);
// Ground truth of a generated mixture pair: specs, shared angles, centers,
// drawn proportions, realized counts and the expected NSPD per cluster.
nlohmann::json groundtruth_json(const MixturePair& pair, const MixturePairSpec& spec_x, const MixturePairSpec& spec_y,
                                int which_case);

// Plot-data CSV writers; the header of each file is its column contract.
// prototype_id,provenance,label,<feature...>
std::string prototypes_csv(const std::vector<Prototype>& prototypes, const std::vector<std::string>& names);
// prototype_id,count_d,count_dp,proportion_d,proportion_dp,mean_distance_d,mean_distance_dp,nspd,nsdd
std::string neighbourhood_csv(const NeighbourhoodStats& stats);
// prototype_id,position,feature,value,score,neighbours_d,neighbours_dp
std::string partial_csv(const std::vector<PartialPrototype>& partials, const std::vector<Prototype>& prototypes,
                        const std::vector<std::string>& names);
// k,selection,rta,gpa,variance,prototypes,seeds
std::string faithfulness_csv(const FaithfulnessSweep& sweep);
// sample,c1,c2,c3,k,rank_difference,absolute_rank,value_deviation
std::string tradeoff_csv(const TradeoffSweep& sweep);
// fraction,removed,alignment,planted_removed
std::string alignment_csv(const AlignmentSweep& sweep);
// row,score,oracle
std::string influence_validation_csv(const InfluenceValidation& v);
// dataset,row,score,selected
std::string influence_scores_csv(const InfluenceReport& r);

void write_text(const std::filesystem::path& path, const std::string& text);

} // namespace driftscope
