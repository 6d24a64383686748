// Copyright 2026 The hammerlab Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cstdint>
#include <functional>
#include <queue>
#include <random>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "hammerlab/error.hpp"

namespace hammerlab {

// Wide intermediate for products of picosecond counts.
__extension__ using u128 = unsigned __int128;

using Picoseconds = std::uint64_t;

inline constexpr std::uint64_t kPsPerSecond = 1'000'000'000'000ULL;
inline constexpr Picoseconds kPsPerMs = 1'000'000'000ULL;

struct ClockDomain {
  std::string name;
  std::uint64_t frequency_hz = 0;

  // Throws kConfig when the frequency is zero.
  void validate() const;
};

// Global simulated time in integer picoseconds. Per-domain cycle counts are
// derived, never stored, so domains cannot drift apart.
class VirtualClock {
 public:
  VirtualClock() = default;
  explicit VirtualClock(Picoseconds now) : now_ps_(now) {}

  Picoseconds now_ps() const { return now_ps_; }

  // floor(now_ps * f / 1e12)
  std::uint64_t cycles(const ClockDomain& domain) const;

  void advance(const ClockDomain& domain, std::uint64_t cycles);
  void advance_ps(Picoseconds delta);
  // Moves to an absolute time; moving backwards is a contract violation.
  void advance_to(Picoseconds t);

 private:
  Picoseconds now_ps_ = 0;
};

// Value-returning form of VirtualClock::advance.
VirtualClock advance(VirtualClock clock, const ClockDomain& domain,
                     std::uint64_t cycles);

// cycles * 1e12 / f rounded to the nearest picosecond.
Picoseconds cycles_to_ps(const ClockDomain& domain, std::uint64_t cycles);
Picoseconds cycles_to_ps(const ClockDomain& domain, double cycles);

std::uint64_t cycles_between(Picoseconds a, Picoseconds b,
                             const ClockDomain& domain);

inline double ps_to_seconds(Picoseconds ps) {
  return static_cast<double>(ps) / static_cast<double>(kPsPerSecond);
}

inline Picoseconds ms_to_ps(double ms) {
  return static_cast<Picoseconds>(ms * static_cast<double>(kPsPerMs) + 0.5);
}

// ---------------------------------------------------------------------------
// Distribution specs. Latencies and model parameters are configuration data
// written as e.g. "point(142)", "uniform(139,145)", "tnormal(153,2,148,158)".

struct PointDist {
  double value;
};

struct UniformIntDist {
  std::int64_t lo;
  std::int64_t hi;
};

struct TruncNormalDist {
  double mean;
  double sd;
  double lo;
  double hi;
};

// exp(N(mu, sigma^2)), untruncated.
struct LogNormalDist {
  double mu;
  double sigma;
};

class Distribution {
 public:
  using Spec =
      std::variant<PointDist, UniformIntDist, TruncNormalDist, LogNormalDist>;

  Distribution() : spec_(PointDist{0.0}) {}
  Distribution(Spec spec);  // NOLINT: implicit on purpose for brace-init

  static Distribution point(double v) { return Distribution(PointDist{v}); }
  static Distribution uniform(std::int64_t lo, std::int64_t hi) {
    return Distribution(UniformIntDist{lo, hi});
  }
  static Distribution tnormal(double mean, double sd, double lo, double hi) {
    return Distribution(TruncNormalDist{mean, sd, lo, hi});
  }
  static Distribution lognormal(double mu, double sigma) {
    return Distribution(LogNormalDist{mu, sigma});
  }

  // Throws kConfig on malformed text or an empty support.
  static Distribution parse(std::string_view text);

  const Spec& spec() const { return spec_; }
  double min() const;
  double max() const;
  double mean() const;
  double variance() const;
  std::string to_string() const;

  // Returns a copy scaled by `factor` (support and moments scale with it).
  Distribution scaled(double factor) const;

  bool operator==(const Distribution& other) const;

 private:
  Spec spec_;
};

// One independent stream per actor. Identical (seed, stream, call sequence)
// yields identical output.
class SeededRng {
 public:
  SeededRng(std::uint64_t seed, std::uint64_t stream);

  std::uint64_t seed() const { return seed_; }
  std::uint64_t stream() const { return stream_; }

  std::uint64_t next_u64() { return engine_(); }
  double uniform01();
  std::int64_t uniform_int(std::int64_t lo, std::int64_t hi);
  double normal(double mean = 0.0, double sd = 1.0);
  bool bernoulli(double p) { return uniform01() < p; }
  double sample(const Distribution& dist);

 private:
  std::uint64_t seed_;
  std::uint64_t stream_;
  std::mt19937_64 engine_;
};

double sample(SeededRng& rng, const Distribution& dist);

// Stable 64-bit hash for naming streams and counter-based draws.
std::uint64_t mix64(std::uint64_t x);
std::uint64_t hash_combine(std::uint64_t a, std::uint64_t b);
std::uint64_t hash_name(std::string_view name);
// Maps a hash to (0, 1).
double unit_interval(std::uint64_t h);
// Standard normal deviate derived from a hash (Box-Muller over two draws).
double normal_from_hash(std::uint64_t h);

// Splits a master seed into named actor streams.
class RngFactory {
 public:
  explicit RngFactory(std::uint64_t master_seed) : master_(master_seed) {}

  std::uint64_t master_seed() const { return master_; }
  SeededRng stream(std::string_view actor) const;
  SeededRng stream(std::string_view actor, std::uint64_t index) const;

 private:
  std::uint64_t master_;
};

// ---------------------------------------------------------------------------
// Discrete-event scheduler.

struct LogEntry {
  Picoseconds time;
  std::string actor;
  std::string op;
  std::string detail;
};

class EventLog {
 public:
  void set_enabled(bool on) { enabled_ = on; }
  bool enabled() const { return enabled_; }

  void record(Picoseconds t, std::string_view actor, std::string_view op,
              std::string_view detail = {});
  const std::vector<LogEntry>& entries() const { return entries_; }
  void clear() { entries_.clear(); }

  // One event per line: "<time_ps> <actor> <op> <detail>".
  std::string render() const;

 private:
  bool enabled_ = false;
  std::vector<LogEntry> entries_;
};

class Simulation {
 public:
  using Action = std::function<void()>;

  explicit Simulation(std::uint64_t seed) : rngs_(seed) {}

  VirtualClock& clock() { return clock_; }
  const VirtualClock& clock() const { return clock_; }
  Picoseconds now() const { return clock_.now_ps(); }
  EventLog& log() { return log_; }
  const RngFactory& rngs() const { return rngs_; }

  // Events at equal times run in scheduling order.
  void schedule(Picoseconds at, std::string actor, Action action);
  void schedule_in(Picoseconds delay, std::string actor, Action action) {
    schedule(now() + delay, std::move(actor), std::move(action));
  }

  // Runs events with time <= limit, then parks the clock at limit.
  void run_until(Picoseconds limit);
  // Runs until the queue drains.
  void run();
  bool idle() const { return queue_.empty(); }
  std::size_t pending() const { return queue_.size(); }

 private:
  struct Event {
    Picoseconds time;
    std::uint64_t seq;
    std::string actor;
    Action action;
  };
  struct Later {
    bool operator()(const Event& a, const Event& b) const {
      return a.time != b.time ? a.time > b.time : a.seq > b.seq;
    }
  };

  void dispatch(Event ev);

  VirtualClock clock_;
  RngFactory rngs_;
  EventLog log_;
  std::priority_queue<Event, std::vector<Event>, Later> queue_;
  std::uint64_t next_seq_ = 0;
};

}  // namespace hammerlab
