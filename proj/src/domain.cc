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

#include "paxconnect/domain.h"

#include <algorithm>
#include <array>
#include <cctype>
#include <string>

namespace paxconnect {
namespace {

std::string Lower(std::string_view text) {
  std::string out(text);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return std::tolower(c); });
  return out;
}

constexpr std::array<std::string_view, kNumFeatures> kFeatureNames = {
    "TP From",   "TP To",          "Traffic Network", "Dep. Day",
    "Dep. Month Day", "Boarding Delta", "N Bus",       "Sex",
    "Age",       "Is Group",       "Class From",      "Class To",
    "Sch. Conn. Time", "Perceived Conn. Time", "Actual Conn. Time",
};

}  // namespace

std::optional<TrafficNetwork> ConnectionRecord::traffic_network() const {
  if (!origin_schengen || !destination_schengen) return std::nullopt;
  return TrafficNetworkOf(*origin_schengen, *destination_schengen);
}

TrafficNetwork TrafficNetworkOf(bool origin_schengen,
                                bool destination_schengen) {
  if (origin_schengen) {
    return destination_schengen ? TrafficNetwork::kSS : TrafficNetwork::kSN;
  }
  return destination_schengen ? TrafficNetwork::kNS : TrafficNetwork::kNN;
}

std::string_view TrafficNetworkName(TrafficNetwork network) {
  switch (network) {
    case TrafficNetwork::kSS:
      return "SS";
    case TrafficNetwork::kSN:
      return "SN";
    case TrafficNetwork::kNS:
      return "NS";
    case TrafficNetwork::kNN:
      return "NN";
  }
  return "";
}

std::optional<TrafficNetwork> ParseTrafficNetwork(std::string_view text) {
  if (text == "SS") return TrafficNetwork::kSS;
  if (text == "SN") return TrafficNetwork::kSN;
  if (text == "NS") return TrafficNetwork::kNS;
  if (text == "NN") return TrafficNetwork::kNN;
  return std::nullopt;
}

std::pair<bool, bool> SchengenFlags(TrafficNetwork network) {
  switch (network) {
    case TrafficNetwork::kSS:
      return {true, true};
    case TrafficNetwork::kSN:
      return {true, false};
    case TrafficNetwork::kNS:
      return {false, true};
    case TrafficNetwork::kNN:
      return {false, false};
  }
  return {false, false};
}

std::string_view SexName(Sex sex) {
  switch (sex) {
    case Sex::kFemale:
      return "F";
    case Sex::kMale:
      return "M";
    case Sex::kUnknown:
      return "unknown";
  }
  return "";
}

std::optional<Sex> ParseSex(std::string_view text) {
  const std::string lower = Lower(text);
  if (lower == "f") return Sex::kFemale;
  if (lower == "m") return Sex::kMale;
  if (lower == "unknown" || lower == "u") return Sex::kUnknown;
  return std::nullopt;
}

ConnectionTimes ComputeConnectionTimes(const ConnectionRecord& record) {
  ConnectionTimes times;
  if (record.scheduled_off_blocks && record.scheduled_on_blocks) {
    times.scheduled = *record.scheduled_off_blocks - *record.scheduled_on_blocks;
  }
  if (record.scheduled_off_blocks && record.actual_on_blocks) {
    times.perceived = *record.scheduled_off_blocks - *record.actual_on_blocks;
  }
  if (record.actual_off_blocks && record.actual_on_blocks) {
    times.actual = *record.actual_off_blocks - *record.actual_on_blocks;
  }
  return times;
}

std::string_view StageName(DsmStage stage) {
  switch (stage) {
    case DsmStage::kStrategic:
      return "strategic";
    case DsmStage::kPreTactical:
      return "pre-tactical";
    case DsmStage::kTactical:
      return "tactical";
    case DsmStage::kPostOperations:
      return "post-operations";
  }
  return "";
}

std::optional<DsmStage> ParseStage(std::string_view text) {
  const std::string lower = Lower(text);
  if (lower == "strategic") return DsmStage::kStrategic;
  if (lower == "pre-tactical" || lower == "pretactical") {
    return DsmStage::kPreTactical;
  }
  if (lower == "tactical") return DsmStage::kTactical;
  if (lower == "post-operations" || lower == "postoperations") {
    return DsmStage::kPostOperations;
  }
  return std::nullopt;
}

std::string_view FeatureName(Feature feature) {
  return kFeatureNames[static_cast<int>(feature)];
}

std::optional<Feature> ParseFeature(std::string_view name) {
  for (int i = 0; i < kNumFeatures; ++i) {
    if (kFeatureNames[i] == name) return static_cast<Feature>(i);
  }
  return std::nullopt;
}

FeatureKind KindOf(Feature feature) {
  switch (feature) {
    case Feature::kTpFrom:
    case Feature::kTpTo:
    case Feature::kTrafficNetwork:
    case Feature::kSex:
    case Feature::kClassFrom:
    case Feature::kClassTo:
      return FeatureKind::kCategorical;
    default:
      return FeatureKind::kNumeric;
  }
}

std::vector<Feature> StageFeatures(DsmStage stage) {
  std::vector<Feature> features = {Feature::kTpFrom, Feature::kTpTo,
                                   Feature::kTrafficNetwork, Feature::kDepDay,
                                   Feature::kDepMonthDay};
  if (stage == DsmStage::kPostOperations) {
    features.push_back(Feature::kBoardingDelta);
    features.push_back(Feature::kNBus);
  }
  if (stage != DsmStage::kStrategic) {
    features.insert(features.end(),
                    {Feature::kSex, Feature::kAge, Feature::kIsGroup,
                     Feature::kClassFrom, Feature::kClassTo});
  }
  features.push_back(ConnectionTimeFeature(stage));
  return features;
}

Feature ConnectionTimeFeature(DsmStage stage) {
  switch (ConnectionTimeKindOf(stage)) {
    case ConnectionTimeKind::kScheduled:
      return Feature::kSchConnTime;
    case ConnectionTimeKind::kPerceived:
      return Feature::kPerceivedConnTime;
    case ConnectionTimeKind::kActual:
      return Feature::kActualConnTime;
  }
  return Feature::kSchConnTime;
}

ConnectionTimeKind ConnectionTimeKindOf(DsmStage stage) {
  switch (stage) {
    case DsmStage::kStrategic:
    case DsmStage::kPreTactical:
      return ConnectionTimeKind::kScheduled;
    case DsmStage::kTactical:
      return ConnectionTimeKind::kPerceived;
    case DsmStage::kPostOperations:
      return ConnectionTimeKind::kActual;
  }
  return ConnectionTimeKind::kScheduled;
}

std::string_view ConnectionTimeKindName(ConnectionTimeKind kind) {
  switch (kind) {
    case ConnectionTimeKind::kScheduled:
      return "scheduled";
    case ConnectionTimeKind::kPerceived:
      return "perceived";
    case ConnectionTimeKind::kActual:
      return "actual";
  }
  return "";
}

std::optional<RawValue> ExtractFeature(const ConnectionRecord& record,
                                       Feature feature) {
  auto number = [](const auto& field) -> std::optional<RawValue> {
    if (!field) return std::nullopt;
    return RawValue(static_cast<double>(*field));
  };
  auto token = [](const std::optional<std::string>& field)
      -> std::optional<RawValue> {
    if (!field) return std::nullopt;
    return RawValue(*field);
  };
  switch (feature) {
    case Feature::kTpFrom:
      return token(record.arrival_flight);
    case Feature::kTpTo:
      return token(record.departure_flight);
    case Feature::kTrafficNetwork: {
      const auto network = record.traffic_network();
      if (!network) return std::nullopt;
      return RawValue(std::string(TrafficNetworkName(*network)));
    }
    case Feature::kDepDay:
      return number(record.departure_weekday);
    case Feature::kDepMonthDay:
      return number(record.departure_month_day);
    case Feature::kBoardingDelta:
      return number(record.boarding_delta);
    case Feature::kNBus:
      return number(record.n_bus);
    case Feature::kSex:
      if (!record.sex) return std::nullopt;
      return RawValue(std::string(SexName(*record.sex)));
    case Feature::kAge:
      return number(record.age);
    case Feature::kIsGroup:
      if (!record.is_group) return std::nullopt;
      return RawValue(*record.is_group ? 1.0 : 0.0);
    case Feature::kClassFrom:
      return token(record.class_from);
    case Feature::kClassTo:
      return token(record.class_to);
    case Feature::kSchConnTime:
      return number(ComputeConnectionTimes(record).scheduled);
    case Feature::kPerceivedConnTime:
      return number(ComputeConnectionTimes(record).perceived);
    case Feature::kActualConnTime:
      return number(ComputeConnectionTimes(record).actual);
  }
  return std::nullopt;
}

bool SatisfiesDomainInvariants(const ConnectionRecord& record) {
  if (record.age && (*record.age < 0 || *record.age > 120)) return false;
  if (record.departure_weekday &&
      (*record.departure_weekday < 0 || *record.departure_weekday > 6)) {
    return false;
  }
  if (record.departure_month_day &&
      (*record.departure_month_day < 1 || *record.departure_month_day > 31)) {
    return false;
  }
  if (record.scheduled_on_blocks && record.scheduled_off_blocks &&
      *record.scheduled_off_blocks < *record.scheduled_on_blocks) {
    return false;
  }
  if (record.boarding_delta && *record.boarding_delta < 0) return false;
  if (record.n_bus && *record.n_bus < 0) return false;
  return true;
}

}  // namespace paxconnect
