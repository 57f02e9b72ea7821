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

// Seeded synthetic hub-and-spoke connection generator.
//
// Flights follow a fixed daily schedule over one year. Every passenger
// connection receives a miss label drawn from a logistic ground-truth model:
//
//   logit = intercept
//         + kTimeCoefficient * (perceived + kDepartureDelayCredit * max(0, dep_delay))
//         + traffic_network offset         (SS < SN < NN < NS)
//         + kAgeCoefficient * max(0, age - kAgePivot)
//         + kGroupCoefficient * is_group
//         + kPremiumCabinCoefficient * (premium cabin on either leg)
//         + kBusCoefficient * (n_bus > 0)
//         + kBoardingCoefficient * (boarding_delta - kBoardingPivot)
//         + arrival / departure flight random effects
//         + passenger noise
//
// The intercept is solved by bisection so that the expected miss rate equals
// the configured minority fraction. Connection time carries the largest
// logit spread of all terms.

#ifndef PAXCONNECT_SYNTHGEN_H_
#define PAXCONNECT_SYNTHGEN_H_

#include <cstddef>
#include <cstdint>
#include <vector>

#include "paxconnect/domain.h"

namespace paxconnect::synth {

inline constexpr double kTimeCoefficient = -0.07;  // per minute
inline constexpr double kDepartureDelayCredit = 0.15;
inline constexpr double kTrafficOffsetSS = 0.0;
inline constexpr double kTrafficOffsetSN = 1.5;
inline constexpr double kTrafficOffsetNN = 2.2;
inline constexpr double kTrafficOffsetNS = 4.0;
inline constexpr double kAgePivot = 45.0;
inline constexpr double kAgeCoefficient = 0.10;  // per year above the pivot
inline constexpr double kGroupCoefficient = -1.2;
inline constexpr double kPremiumCabinCoefficient = -0.7;
inline constexpr double kBusCoefficient = 1.0;
inline constexpr double kBoardingPivot = 30.0;
inline constexpr double kBoardingCoefficient = 0.03;
inline constexpr double kFlightEffectSd = 1.2;
inline constexpr double kPassengerNoiseSd = 0.5;  // scaled by noise_scale

struct SynthConfig {
  std::uint64_t seed = 1;
  std::size_t n_rows = 200000;
  double target_minority_fraction = 0.0585;
  int n_arrival_flights = 240;
  int n_departure_flights = 240;
  // Probability that a record has one optional field blanked. At most 0.04.
  double missingness_rate = 0.02;
  // Multiplies the arrival-delay and passenger noise.
  double noise_scale = 1.0;

  // Throws ConfigError on out-of-range fields.
  void Validate() const;
};

// Per-record logit decomposition, exposed for tests and diagnostics.
struct LogitTerms {
  double time = 0.0;
  double traffic = 0.0;
  double passenger = 0.0;  // age, group, cabin
  double flight = 0.0;     // flight random effects, bus, boarding
  double noise = 0.0;
};

struct SyntheticData {
  std::vector<ConnectionRecord> records;
  std::vector<LogitTerms> terms;
  std::vector<double> miss_probability;
  double intercept = 0.0;
};

// Deterministic in `config`.
SyntheticData GenerateDetailed(const SynthConfig& config);

std::vector<ConnectionRecord> Generate(const SynthConfig& config);

}  // namespace paxconnect::synth

#endif  // PAXCONNECT_SYNTHGEN_H_
