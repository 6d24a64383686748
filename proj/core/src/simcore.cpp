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

#include "hammerlab/simcore.hpp"

#include <charconv>
#include <cmath>
#include <limits>
#include <sstream>

#include <fmt/format.h>

namespace hammerlab {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kConfig: return "config";
    case ErrorKind::kContract: return "contract";
    case ErrorKind::kAddress: return "address";
    case ErrorKind::kRange: return "range";
    case ErrorKind::kProtocol: return "protocol";
    case ErrorKind::kAllocation: return "allocation";
    case ErrorKind::kTimeout: return "timeout";
    case ErrorKind::kRecoveryFailed: return "recovery-failed";
    case ErrorKind::kConstructionFailed: return "construction-failed";
    case ErrorKind::kInsufficientSample: return "insufficient-sample";
    case ErrorKind::kIo: return "io";
  }
  return "unknown";
}

void ClockDomain::validate() const {
  if (frequency_hz == 0) {
    fail(ErrorKind::kConfig, "clock domain '" + name + "' has zero frequency");
  }
}

namespace {

constexpr u128 kMaxPs = std::numeric_limits<Picoseconds>::max();

}  // namespace

std::uint64_t VirtualClock::cycles(const ClockDomain& domain) const {
  return cycles_between(0, now_ps_, domain);
}

Picoseconds cycles_to_ps(const ClockDomain& domain, std::uint64_t cycles) {
  domain.validate();
  const u128 num = static_cast<u128>(cycles) * kPsPerSecond;
  const u128 ps = (num + domain.frequency_hz / 2) / domain.frequency_hz;
  if (ps > kMaxPs) {
    fail(ErrorKind::kConfig, "picosecond timeline overflow");
  }
  return static_cast<Picoseconds>(ps);
}

Picoseconds cycles_to_ps(const ClockDomain& domain, double cycles) {
  domain.validate();
  if (!(cycles >= 0.0)) {
    fail(ErrorKind::kContract, "negative cycle count");
  }
  const double ps = cycles * 1e12 / static_cast<double>(domain.frequency_hz);
  if (ps >= 1.8e19) {
    fail(ErrorKind::kConfig, "picosecond timeline overflow");
  }
  return static_cast<Picoseconds>(std::llround(ps));
}

void VirtualClock::advance(const ClockDomain& domain, std::uint64_t cycles) {
  advance_ps(cycles_to_ps(domain, cycles));
}

void VirtualClock::advance_ps(Picoseconds delta) {
  if (delta > std::numeric_limits<Picoseconds>::max() - now_ps_) {
    fail(ErrorKind::kConfig, "picosecond timeline overflow");
  }
  now_ps_ += delta;
}

void VirtualClock::advance_to(Picoseconds t) {
  if (t < now_ps_) {
    fail(ErrorKind::kContract,
         fmt::format("clock cannot move backwards ({} < {})", t, now_ps_));
  }
  now_ps_ = t;
}

VirtualClock advance(VirtualClock clock, const ClockDomain& domain,
                     std::uint64_t cycles) {
  clock.advance(domain, cycles);
  return clock;
}

std::uint64_t cycles_between(Picoseconds a, Picoseconds b,
                             const ClockDomain& domain) {
  domain.validate();
  if (b < a) {
    fail(ErrorKind::kContract, "negative interval in cycles_between");
  }
  const u128 num = static_cast<u128>(b - a) * domain.frequency_hz;
  return static_cast<std::uint64_t>(num / kPsPerSecond);
}

// ---------------------------------------------------------------------------

namespace {

constexpr double kInvSqrt2 = 0.70710678118654752440;
constexpr double kInvSqrt2Pi = 0.39894228040143267794;

double phi(double x) { return kInvSqrt2Pi * std::exp(-0.5 * x * x); }
double big_phi(double x) { return 0.5 * std::erfc(-x * kInvSqrt2); }

void check_support(const Distribution::Spec& spec) {
  std::visit(
      [](const auto& d) {
        using T = std::decay_t<decltype(d)>;
        if constexpr (std::is_same_v<T, PointDist>) {
          if (!std::isfinite(d.value)) {
            fail(ErrorKind::kConfig, "point distribution is not finite");
          }
        } else if constexpr (std::is_same_v<T, UniformIntDist>) {
          if (d.lo > d.hi) {
            fail(ErrorKind::kConfig,
                 fmt::format("uniform({},{}) has empty support", d.lo, d.hi));
          }
        } else if constexpr (std::is_same_v<T, LogNormalDist>) {
          if (!std::isfinite(d.mu) || !(d.sigma >= 0.0) ||
              !std::isfinite(d.sigma)) {
            fail(ErrorKind::kConfig, "lognormal needs finite mu, sigma >= 0");
          }
        } else {
          if (!(d.lo <= d.hi) || !(d.sd >= 0.0) || !std::isfinite(d.mean)) {
            fail(ErrorKind::kConfig, "tnormal has empty support");
          }
          if (d.sd > 0.0) {
            const double z = big_phi((d.hi - d.mean) / d.sd) -
                             big_phi((d.lo - d.mean) / d.sd);
            if (z < 1e-12) {
              fail(ErrorKind::kConfig, "tnormal support has no mass");
            }
          } else if (d.mean < d.lo || d.mean > d.hi) {
            fail(ErrorKind::kConfig, "degenerate tnormal outside its bounds");
          }
        }
      },
      spec);
}

std::vector<double> parse_args(std::string_view body) {
  std::vector<double> out;
  std::size_t pos = 0;
  while (pos <= body.size()) {
    std::size_t comma = body.find(',', pos);
    if (comma == std::string_view::npos) comma = body.size();
    std::string token(body.substr(pos, comma - pos));
    std::size_t b = token.find_first_not_of(" \t");
    std::size_t e = token.find_last_not_of(" \t");
    if (b == std::string::npos) {
      fail(ErrorKind::kConfig, "empty distribution argument");
    }
    token = token.substr(b, e - b + 1);
    char* end = nullptr;
    double v = std::strtod(token.c_str(), &end);
    if (end == token.c_str() || *end != '\0') {
      fail(ErrorKind::kConfig, "bad distribution argument '" + token + "'");
    }
    out.push_back(v);
    pos = comma + 1;
  }
  return out;
}

std::string fmt_num(double v) {
  if (v == std::floor(v) && std::fabs(v) < 1e15) {
    return fmt::format("{}", static_cast<long long>(v));
  }
  return fmt::format("{}", v);
}

}  // namespace

Distribution::Distribution(Spec spec) : spec_(spec) { check_support(spec_); }

Distribution Distribution::parse(std::string_view text) {
  std::string s;
  for (char c : text) {
    if (c != ' ' && c != '\t') s.push_back(c);
  }
  const auto open = s.find('(');
  if (open == std::string::npos) {
    auto args = parse_args(s);
    return point(args.at(0));
  }
  if (s.empty() || s.back() != ')') {
    fail(ErrorKind::kConfig, "malformed distribution '" + std::string(text) + "'");
  }
  const std::string name = s.substr(0, open);
  const auto args =
      parse_args(std::string_view(s).substr(open + 1, s.size() - open - 2));
  if (name == "point" && args.size() == 1) return point(args[0]);
  if (name == "uniform" && args.size() == 2) {
    if (args[0] != std::floor(args[0]) || args[1] != std::floor(args[1])) {
      fail(ErrorKind::kConfig, "uniform bounds must be integers");
    }
    return uniform(static_cast<std::int64_t>(args[0]),
                   static_cast<std::int64_t>(args[1]));
  }
  if (name == "tnormal" && args.size() == 4) {
    return tnormal(args[0], args[1], args[2], args[3]);
  }
  if (name == "lognormal" && args.size() == 2) {
    return lognormal(args[0], args[1]);
  }
  fail(ErrorKind::kConfig, "unknown distribution '" + std::string(text) + "'");
}

double Distribution::min() const {
  return std::visit(
      [](const auto& d) -> double {
        using T = std::decay_t<decltype(d)>;
        if constexpr (std::is_same_v<T, PointDist>) return d.value;
        else if constexpr (std::is_same_v<T, UniformIntDist>)
          return static_cast<double>(d.lo);
        else if constexpr (std::is_same_v<T, LogNormalDist>)
          return d.sigma > 0.0 ? 0.0 : std::exp(d.mu);
        else
          return d.sd > 0.0 ? d.lo : d.mean;
      },
      spec_);
}

double Distribution::max() const {
  return std::visit(
      [](const auto& d) -> double {
        using T = std::decay_t<decltype(d)>;
        if constexpr (std::is_same_v<T, PointDist>) return d.value;
        else if constexpr (std::is_same_v<T, UniformIntDist>)
          return static_cast<double>(d.hi);
        else if constexpr (std::is_same_v<T, LogNormalDist>)
          return d.sigma > 0.0 ? std::numeric_limits<double>::infinity()
                               : std::exp(d.mu);
        else
          return d.sd > 0.0 ? d.hi : d.mean;
      },
      spec_);
}

double Distribution::mean() const {
  return std::visit(
      [](const auto& d) -> double {
        using T = std::decay_t<decltype(d)>;
        if constexpr (std::is_same_v<T, PointDist>) {
          return d.value;
        } else if constexpr (std::is_same_v<T, UniformIntDist>) {
          return 0.5 * (static_cast<double>(d.lo) + static_cast<double>(d.hi));
        } else if constexpr (std::is_same_v<T, LogNormalDist>) {
          return std::exp(d.mu + 0.5 * d.sigma * d.sigma);
        } else {
          if (d.sd == 0.0) return d.mean;
          const double a = (d.lo - d.mean) / d.sd;
          const double b = (d.hi - d.mean) / d.sd;
          const double z = big_phi(b) - big_phi(a);
          return d.mean + d.sd * (phi(a) - phi(b)) / z;
        }
      },
      spec_);
}

double Distribution::variance() const {
  return std::visit(
      [](const auto& d) -> double {
        using T = std::decay_t<decltype(d)>;
        if constexpr (std::is_same_v<T, PointDist>) {
          return 0.0;
        } else if constexpr (std::is_same_v<T, UniformIntDist>) {
          const double n = static_cast<double>(d.hi - d.lo + 1);
          return (n * n - 1.0) / 12.0;
        } else if constexpr (std::is_same_v<T, LogNormalDist>) {
          const double s2 = d.sigma * d.sigma;
          return std::expm1(s2) * std::exp(2.0 * d.mu + s2);
        } else {
          if (d.sd == 0.0) return 0.0;
          const double a = (d.lo - d.mean) / d.sd;
          const double b = (d.hi - d.mean) / d.sd;
          const double z = big_phi(b) - big_phi(a);
          const double m = (phi(a) - phi(b)) / z;
          return d.sd * d.sd * (1.0 + (a * phi(a) - b * phi(b)) / z - m * m);
        }
      },
      spec_);
}

std::string Distribution::to_string() const {
  return std::visit(
      [](const auto& d) -> std::string {
        using T = std::decay_t<decltype(d)>;
        if constexpr (std::is_same_v<T, PointDist>) {
          return "point(" + fmt_num(d.value) + ")";
        } else if constexpr (std::is_same_v<T, UniformIntDist>) {
          return fmt::format("uniform({},{})", d.lo, d.hi);
        } else if constexpr (std::is_same_v<T, LogNormalDist>) {
          return "lognormal(" + fmt_num(d.mu) + "," + fmt_num(d.sigma) + ")";
        } else {
          return "tnormal(" + fmt_num(d.mean) + "," + fmt_num(d.sd) + "," +
                 fmt_num(d.lo) + "," + fmt_num(d.hi) + ")";
        }
      },
      spec_);
}

Distribution Distribution::scaled(double f) const {
  return std::visit(
      [f](const auto& d) -> Distribution {
        using T = std::decay_t<decltype(d)>;
        if constexpr (std::is_same_v<T, PointDist>) {
          return point(d.value * f);
        } else if constexpr (std::is_same_v<T, UniformIntDist>) {
          const double mid = 0.5 * static_cast<double>(d.lo + d.hi) * f;
          const double half = 0.5 * static_cast<double>(d.hi - d.lo) * f;
          return tnormal(mid, half / std::sqrt(3.0), mid - half, mid + half);
        } else if constexpr (std::is_same_v<T, LogNormalDist>) {
          if (!(f > 0.0)) fail(ErrorKind::kConfig, "lognormal scale must be > 0");
          return lognormal(d.mu + std::log(f), d.sigma);
        } else {
          return tnormal(d.mean * f, d.sd * f, d.lo * f, d.hi * f);
        }
      },
      spec_);
}

bool Distribution::operator==(const Distribution& other) const {
  return to_string() == other.to_string();
}

// ---------------------------------------------------------------------------

std::uint64_t mix64(std::uint64_t x) {
  // splitmix64 finalizer
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t hash_combine(std::uint64_t a, std::uint64_t b) {
  return mix64(a ^ (mix64(b) + 0x632be59bd9b4e019ULL + (a << 6) + (a >> 2)));
}

std::uint64_t hash_name(std::string_view name) {
  std::uint64_t h = 0xcbf29ce484222325ULL;  // FNV-1a
  for (unsigned char c : name) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

double unit_interval(std::uint64_t h) {
  return (static_cast<double>(h >> 11) + 0.5) * 0x1.0p-53;
}

double normal_from_hash(std::uint64_t h) {
  const double u1 = unit_interval(h);
  const double u2 = unit_interval(mix64(h ^ 0x5851f42d4c957f2dULL));
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586 * u2);
}

SeededRng::SeededRng(std::uint64_t seed, std::uint64_t stream)
    : seed_(seed), stream_(stream), engine_(hash_combine(seed, stream)) {}

double SeededRng::uniform01() {
  return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
}

std::int64_t SeededRng::uniform_int(std::int64_t lo, std::int64_t hi) {
  if (lo > hi) fail(ErrorKind::kConfig, "uniform_int with empty support");
  std::uniform_int_distribution<std::int64_t> dist(lo, hi);
  return dist(engine_);
}

double SeededRng::normal(double mean, double sd) {
  std::normal_distribution<double> dist(mean, sd);
  return dist(engine_);
}

double SeededRng::sample(const Distribution& dist) {
  return std::visit(
      [this](const auto& d) -> double {
        using T = std::decay_t<decltype(d)>;
        if constexpr (std::is_same_v<T, PointDist>) {
          return d.value;
        } else if constexpr (std::is_same_v<T, UniformIntDist>) {
          return static_cast<double>(uniform_int(d.lo, d.hi));
        } else if constexpr (std::is_same_v<T, LogNormalDist>) {
          return std::exp(normal(d.mu, d.sigma));
        } else {
          if (d.sd == 0.0) return d.mean;
          for (int i = 0; i < 10000; ++i) {
            const double v = normal(d.mean, d.sd);
            if (v >= d.lo && v <= d.hi) return v;
          }
          // Support far in the tail; fall back to a uniform draw over it.
          return d.lo + (d.hi - d.lo) * uniform01();
        }
      },
      dist.spec());
}

double sample(SeededRng& rng, const Distribution& dist) {
  return rng.sample(dist);
}

SeededRng RngFactory::stream(std::string_view actor) const {
  return SeededRng(master_, hash_name(actor));
}

SeededRng RngFactory::stream(std::string_view actor,
                             std::uint64_t index) const {
  return SeededRng(master_, hash_combine(hash_name(actor), index));
}

// ---------------------------------------------------------------------------

void EventLog::record(Picoseconds t, std::string_view actor,
                      std::string_view op, std::string_view detail) {
  if (!enabled_) return;
  entries_.push_back(
      LogEntry{t, std::string(actor), std::string(op), std::string(detail)});
}

std::string EventLog::render() const {
  std::string out;
  for (const auto& e : entries_) {
    out += fmt::format("{} {} {}", e.time, e.actor, e.op);
    if (!e.detail.empty()) {
      out += ' ';
      out += e.detail;
    }
    out += '\n';
  }
  return out;
}

void Simulation::schedule(Picoseconds at, std::string actor, Action action) {
  if (at < now()) {
    fail(ErrorKind::kContract, "cannot schedule an event in the past");
  }
  queue_.push(Event{at, next_seq_++, std::move(actor), std::move(action)});
}

void Simulation::dispatch(Event ev) {
  clock_.advance_to(ev.time);
  log_.record(ev.time, ev.actor, "event");
  ev.action();
}

void Simulation::run_until(Picoseconds limit) {
  while (!queue_.empty() && queue_.top().time <= limit) {
    Event ev = queue_.top();
    queue_.pop();
    dispatch(std::move(ev));
  }
  if (limit > now()) clock_.advance_to(limit);
}

void Simulation::run() {
  while (!queue_.empty()) {
    Event ev = queue_.top();
    queue_.pop();
    dispatch(std::move(ev));
  }
}

}  // namespace hammerlab
