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

#include "paxconnect/synthgen.h"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <random>
#include <string>

#include "paxconnect/errors.h"

namespace paxconnect::synth {
namespace {

constexpr int kDaysPerYear = 365;
constexpr int kMinConnection = 35;
constexpr int kMaxConnection = 480;
constexpr double kConnectionDecay = 110.0;  // minutes
constexpr double kDayEffectSd = 6.0;        // minutes of arrival delay

struct ArrivalFlight {
  std::string code;
  bool origin_schengen;
  int time_of_day;
  double mean_delay;
  double delay_sd;
  double effect;
};

struct DepartureFlight {
  std::string code;
  bool destination_schengen;
  int time_of_day;
  double mean_delay;
  int n_bus;
  int boarding_base;
  double effect;
};

double Sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

std::string Designator(int number) {
  char buffer[16];
  std::snprintf(buffer, sizeof(buffer), "TP%04d", number);
  return buffer;
}

double TrafficOffset(TrafficNetwork network) {
  switch (network) {
    case TrafficNetwork::kSS:
      return kTrafficOffsetSS;
    case TrafficNetwork::kSN:
      return kTrafficOffsetSN;
    case TrafficNetwork::kNN:
      return kTrafficOffsetNN;
    case TrafficNetwork::kNS:
      return kTrafficOffsetNS;
  }
  return 0.0;
}

std::string Cabin(std::mt19937_64& rng) {
  const double u = std::uniform_real_distribution<double>(0.0, 1.0)(rng);
  if (u < 0.82) return "Y";
  if (u < 0.90) return "W";
  return "C";
}

// Solves mean(sigmoid(b + base_i)) = target for b.
double SolveIntercept(const std::vector<double>& base, double target) {
  double lo = -60.0;
  double hi = 60.0;
  for (int iter = 0; iter < 200; ++iter) {
    const double mid = 0.5 * (lo + hi);
    double mean = 0.0;
    for (const double v : base) mean += Sigmoid(mid + v);
    mean /= static_cast<double>(base.size());
    if (mean < target) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

}  // namespace

void SynthConfig::Validate() const {
  if (n_rows < 1) throw ConfigError("synth: n_rows must be >= 1");
  if (!(target_minority_fraction > 0.0 && target_minority_fraction < 1.0)) {
    throw ConfigError("synth: target_minority_fraction must be in (0, 1)");
  }
  if (n_arrival_flights < 1 || n_departure_flights < 1) {
    throw ConfigError("synth: flight counts must be >= 1");
  }
  if (!(missingness_rate >= 0.0 && missingness_rate <= 0.04)) {
    throw ConfigError("synth: missingness_rate must be in [0, 0.04]");
  }
  if (!(noise_scale > 0.0) || !std::isfinite(noise_scale)) {
    throw ConfigError("synth: noise_scale must be > 0");
  }
}

SyntheticData GenerateDetailed(const SynthConfig& config) {
  config.Validate();
  std::mt19937_64 rng(config.seed);
  std::uniform_real_distribution<double> uniform(0.0, 1.0);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::exponential_distribution<double> exponential(1.0);

  // Daily flight schedule.
  std::vector<ArrivalFlight> arrivals;
  for (int i = 0; i < config.n_arrival_flights; ++i) {
    ArrivalFlight flight;
    flight.code = Designator(1000 + i);
    flight.origin_schengen = uniform(rng) < 0.55;
    flight.time_of_day = std::uniform_int_distribution<int>(300, 1320)(rng);
    flight.mean_delay =
        uniform(rng) < 0.25 ? 25.0 * exponential(rng) : 2.0 + 4.0 * normal(rng);
    flight.delay_sd = 6.0 + 12.0 * uniform(rng);
    flight.effect = kFlightEffectSd * normal(rng);
    arrivals.push_back(std::move(flight));
  }
  std::vector<DepartureFlight> departures;
  for (int i = 0; i < config.n_departure_flights; ++i) {
    DepartureFlight flight;
    flight.code = Designator(5000 + i);
    flight.destination_schengen = uniform(rng) < 0.55;
    flight.time_of_day = std::uniform_int_distribution<int>(360, 1430)(rng);
    flight.mean_delay = 8.0 * exponential(rng);
    flight.n_bus = uniform(rng) < 0.3
                       ? std::uniform_int_distribution<int>(1, 3)(rng)
                       : 0;
    flight.boarding_base = std::uniform_int_distribution<int>(20, 45)(rng);
    flight.effect = kFlightEffectSd * normal(rng);
    departures.push_back(std::move(flight));
  }

  std::vector<double> day_effect(kDaysPerYear);
  for (auto& effect : day_effect) effect = kDayEffectSd * normal(rng);

  // Feasible onward flights for each arrival, favouring short connections.
  std::vector<std::vector<int>> onward(arrivals.size());
  std::vector<std::discrete_distribution<int>> onward_choice(arrivals.size());
  std::vector<int> connectable;
  for (std::size_t a = 0; a < arrivals.size(); ++a) {
    std::vector<double> weights;
    for (std::size_t d = 0; d < departures.size(); ++d) {
      const int connection = departures[d].time_of_day - arrivals[a].time_of_day;
      if (connection >= kMinConnection && connection <= kMaxConnection) {
        onward[a].push_back(static_cast<int>(d));
        weights.push_back(std::exp(-(connection - kMinConnection) / kConnectionDecay));
      }
    }
    if (!weights.empty()) {
      onward_choice[a] =
          std::discrete_distribution<int>(weights.begin(), weights.end());
      connectable.push_back(static_cast<int>(a));
    }
  }
  if (connectable.empty()) {
    throw ConfigError("synth: schedule has no feasible connection");
  }

  using namespace std::chrono;
  const sys_days first_day = year{2019} / January / 1;
  const Minutes epoch_minutes_first_day =
      duration_cast<minutes>(first_day.time_since_epoch()).count();

  SyntheticData out;
  out.records.resize(config.n_rows);
  out.terms.resize(config.n_rows);
  std::vector<double> base_logit(config.n_rows);
  std::uniform_int_distribution<int> pick_arrival(
      0, static_cast<int>(connectable.size()) - 1);
  std::uniform_int_distribution<int> pick_day(0, kDaysPerYear - 1);

  for (std::size_t i = 0; i < config.n_rows; ++i) {
    const auto& arrival = arrivals[connectable[pick_arrival(rng)]];
    const std::size_t a = &arrival - arrivals.data();
    const auto& departure = departures[onward[a][onward_choice[a](rng)]];
    const int day = pick_day(rng);
    const sys_days date = first_day + days{day};
    const year_month_day ymd{date};

    ConnectionRecord& r = out.records[i];
    r.arrival_flight = arrival.code;
    r.departure_flight = departure.code;
    r.origin_schengen = arrival.origin_schengen;
    r.destination_schengen = departure.destination_schengen;
    r.departure_weekday = static_cast<int>(weekday{date}.iso_encoding()) - 1;
    r.departure_month_day = static_cast<int>(static_cast<unsigned>(ymd.day()));

    const Minutes day_start = epoch_minutes_first_day + Minutes{day} * 1440;
    double arrival_delay =
        arrival.mean_delay + day_effect[day] +
        config.noise_scale * arrival.delay_sd * normal(rng);
    if (uniform(rng) < 0.04) arrival_delay += 35.0 * exponential(rng);
    const double departure_delay =
        std::max(-5.0, departure.mean_delay + 6.0 * normal(rng));
    r.scheduled_on_blocks = day_start + arrival.time_of_day;
    r.actual_on_blocks =
        *r.scheduled_on_blocks + static_cast<Minutes>(std::lround(arrival_delay));
    r.scheduled_off_blocks = day_start + departure.time_of_day;
    r.actual_off_blocks = *r.scheduled_off_blocks +
                          static_cast<Minutes>(std::lround(departure_delay));

    const double sex_draw = uniform(rng);
    r.sex = sex_draw < 0.48 ? Sex::kFemale
                            : (sex_draw < 0.96 ? Sex::kMale : Sex::kUnknown);
    if (uniform(rng) < 0.05) {
      r.age = std::uniform_int_distribution<int>(2, 17)(rng);
    } else {
      r.age = static_cast<int>(
          std::clamp(std::lround(42.0 + 15.0 * normal(rng)), 18L, 90L));
    }
    r.is_group = uniform(rng) < 0.15;
    r.class_from = Cabin(rng);
    r.class_to = uniform(rng) < 0.7 ? *r.class_from : Cabin(rng);
    r.n_bus = departure.n_bus;
    r.boarding_delta =
        std::max(0, departure.boarding_base +
                        static_cast<int>(std::lround(4.0 * normal(rng))));

    const double perceived =
        static_cast<double>(*r.scheduled_off_blocks - *r.actual_on_blocks);
    LogitTerms& terms = out.terms[i];
    terms.time = kTimeCoefficient *
                 (perceived + kDepartureDelayCredit *
                                  std::max(0.0, std::round(departure_delay)));
    terms.traffic = TrafficOffset(*r.traffic_network());
    terms.passenger =
        kAgeCoefficient * std::max(0.0, *r.age - kAgePivot) +
        (*r.is_group ? kGroupCoefficient : 0.0) +
        ((*r.class_from != "Y" || *r.class_to != "Y") ? kPremiumCabinCoefficient
                                                      : 0.0);
    terms.flight = arrival.effect + departure.effect +
                   (*r.n_bus > 0 ? kBusCoefficient : 0.0) +
                   kBoardingCoefficient * (*r.boarding_delta - kBoardingPivot);
    terms.noise = config.noise_scale * kPassengerNoiseSd * normal(rng);
    base_logit[i] =
        terms.time + terms.traffic + terms.passenger + terms.flight + terms.noise;
  }

  out.intercept = SolveIntercept(base_logit, config.target_minority_fraction);
  out.miss_probability.resize(config.n_rows);
  for (std::size_t i = 0; i < config.n_rows; ++i) {
    out.miss_probability[i] = Sigmoid(out.intercept + base_logit[i]);
    out.records[i].missed = uniform(rng) < out.miss_probability[i];
  }

  // Values missing completely at random: at most one blanked field per record.
  for (auto& r : out.records) {
    if (!(uniform(rng) < config.missingness_rate)) continue;
    switch (std::uniform_int_distribution<int>(0, 8)(rng)) {
      case 0:
        r.age.reset();
        break;
      case 1:
        r.sex.reset();
        break;
      case 2:
        r.is_group.reset();
        break;
      case 3:
        r.class_from.reset();
        break;
      case 4:
        r.class_to.reset();
        break;
      case 5:
        r.boarding_delta.reset();
        break;
      case 6:
        r.n_bus.reset();
        break;
      case 7:
        r.actual_on_blocks.reset();
        break;
      default:
        r.actual_off_blocks.reset();
        break;
    }
  }
  return out;
}

std::vector<ConnectionRecord> Generate(const SynthConfig& config) {
  return GenerateDetailed(config).records;
}

}  // namespace paxconnect::synth
