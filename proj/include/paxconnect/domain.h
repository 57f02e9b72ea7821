/*
 * Copyright 2026 The Paxconnect Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

// Connection records, the four decision-support stages and their feature
// schemas, and the deterministic feature-engineering transforms.
//
// Timestamps are integer minutes since the Unix epoch. Day of week uses
// 0 = Monday ... 6 = Sunday.

#ifndef PAXCONNECT_DOMAIN_H_
#define PAXCONNECT_DOMAIN_H_

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace paxconnect {

using Minutes = std::int64_t;

// Schengen classification of the (origin, destination) pair.
enum class TrafficNetwork { kSS, kSN, kNS, kNN };

enum class Sex { kFemale, kMale, kUnknown };

enum class DsmStage { kStrategic, kPreTactical, kTactical, kPostOperations };

enum class ConnectionTimeKind { kScheduled, kPerceived, kActual };

enum class FeatureKind { kNumeric, kCategorical };

// Model features. Names are the canonical column strings, see FeatureName().
enum class Feature {
  kTpFrom,
  kTpTo,
  kTrafficNetwork,
  kDepDay,
  kDepMonthDay,
  kBoardingDelta,
  kNBus,
  kSex,
  kAge,
  kIsGroup,
  kClassFrom,
  kClassTo,
  kSchConnTime,
  kPerceivedConnTime,
  kActualConnTime,
};

inline constexpr int kNumFeatures = 15;

// One passenger connection at the hub. Every field except the label may be
// absent; absent values are removed by listwise deletion before training.
struct ConnectionRecord {
  std::optional<std::string> arrival_flight;    // "TP From"
  std::optional<std::string> departure_flight;  // "TP To"
  std::optional<bool> origin_schengen;
  std::optional<bool> destination_schengen;
  std::optional<int> departure_weekday;    // 0..6, 0 = Monday
  std::optional<int> departure_month_day;  // 1..31
  std::optional<Minutes> scheduled_on_blocks;
  std::optional<Minutes> actual_on_blocks;
  std::optional<Minutes> scheduled_off_blocks;
  std::optional<Minutes> actual_off_blocks;
  std::optional<Sex> sex;
  std::optional<int> age;
  std::optional<bool> is_group;
  std::optional<std::string> class_from;
  std::optional<std::string> class_to;
  std::optional<int> boarding_delta;
  std::optional<int> n_bus;
  bool missed = false;

  std::optional<TrafficNetwork> traffic_network() const;

  friend bool operator==(const ConnectionRecord&,
                         const ConnectionRecord&) = default;
};

struct ConnectionTimes {
  std::optional<Minutes> scheduled;
  std::optional<Minutes> perceived;
  std::optional<Minutes> actual;
};

TrafficNetwork TrafficNetworkOf(bool origin_schengen, bool destination_schengen);
std::string_view TrafficNetworkName(TrafficNetwork network);
std::optional<TrafficNetwork> ParseTrafficNetwork(std::string_view text);
// Inverse of TrafficNetworkOf: {origin_schengen, destination_schengen}.
std::pair<bool, bool> SchengenFlags(TrafficNetwork network);

std::string_view SexName(Sex sex);
std::optional<Sex> ParseSex(std::string_view text);

// scheduled = sched_off - sched_on, perceived = sched_off - actual_on,
// actual = actual_off - actual_on. A quantity is absent when one of its
// timestamps is absent. Negative values are kept.
ConnectionTimes ComputeConnectionTimes(const ConnectionRecord& record);

std::string_view StageName(DsmStage stage);
// Accepts "strategic", "pre-tactical"/"pretactical", "tactical",
// "post-operations"/"postoperations", case-insensitive.
std::optional<DsmStage> ParseStage(std::string_view text);
inline constexpr DsmStage kAllStages[] = {
    DsmStage::kStrategic, DsmStage::kPreTactical, DsmStage::kTactical,
    DsmStage::kPostOperations};

std::string_view FeatureName(Feature feature);
std::optional<Feature> ParseFeature(std::string_view name);
FeatureKind KindOf(Feature feature);

// Features available at each stage, in canonical table order.
std::vector<Feature> StageFeatures(DsmStage stage);

// The connection-time feature of a stage and the quantity it carries.
Feature ConnectionTimeFeature(DsmStage stage);
ConnectionTimeKind ConnectionTimeKindOf(DsmStage stage);
std::string_view ConnectionTimeKindName(ConnectionTimeKind kind);

// Raw (pre-encoding) value of a feature: numbers for numeric features,
// category tokens for categorical ones.
using RawValue = std::variant<double, std::string>;

// Returns nullopt when the feature cannot be computed for this record.
std::optional<RawValue> ExtractFeature(const ConnectionRecord& record,
                                       Feature feature);

// Checks the domain ranges (age, weekday, month day, schedule ordering).
bool SatisfiesDomainInvariants(const ConnectionRecord& record);

}  // namespace paxconnect

#endif  // PAXCONNECT_DOMAIN_H_
