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

#include <doctest.h>

#include <cmath>
#include <limits>

#include "hammerlab/simcore.hpp"

using namespace hammerlab;

namespace {
const ClockDomain kFpga{"fpga", 200'000'000};
const ClockDomain kCpu{"cpu", 3'400'000'000};

// Independent oracle: exact rational rounding with 128-bit integers.
Picoseconds ps_oracle(std::uint64_t cycles, std::uint64_t hz) {
  const unsigned __int128 num = static_cast<unsigned __int128>(cycles) * kPsPerSecond;
  return static_cast<Picoseconds>((num + hz / 2) / hz);
}
}  // namespace

TEST_SUITE("simcore") {

TEST_CASE("advance converts cycles to rounded picoseconds") {
  CHECK(advance(VirtualClock{}, kFpga, 1).now_ps() == 5000);
  CHECK(advance(VirtualClock{}, kCpu, 0).now_ps() == 0);
  CHECK(advance(VirtualClock{}, kCpu, 311).now_ps() == ps_oracle(311, 3'400'000'000));
  CHECK(ps_oracle(311, 3'400'000'000) == 91471);
  for (std::uint64_t c : {1ULL, 7ULL, 12345ULL, 999'999'937ULL}) {
    CHECK(advance(VirtualClock{}, kCpu, c).now_ps() == ps_oracle(c, kCpu.frequency_hz));
  }
}

TEST_CASE("advance overflow is a configuration error") {
  VirtualClock c(std::numeric_limits<Picoseconds>::max() - 10);
  try {
    c.advance(kFpga, 1'000'000);
    FAIL("expected overflow");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::kConfig);
  }
}

TEST_CASE("clock never moves backwards") {
  VirtualClock c(1000);
  CHECK_THROWS_AS(c.advance_to(999), Error);
  c.advance_to(1000);
  CHECK(c.now_ps() == 1000);
}

TEST_CASE("cycle counter is floor(now * f / 1e12)") {
  CHECK(VirtualClock(4999).cycles(kFpga) == 0);
  CHECK(VirtualClock(5000).cycles(kFpga) == 1);
  CHECK(VirtualClock(kPsPerSecond).cycles(kCpu) == 3'400'000'000ULL);
}

TEST_CASE("cycles_between") {
  CHECK(cycles_between(0, kPsPerSecond, kFpga) == 200'000'000);
  CHECK(cycles_between(0, 0, kCpu) == 0);
  CHECK(cycles_between(0, 5000, kFpga) == 1);
  try {
    cycles_between(10, 5, kFpga);
    FAIL("expected contract error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::kContract);
  }
}

TEST_CASE("seconds to cycles and back loses less than one period") {
  SeededRng rng(3, 4);
  for (int i = 0; i < 1000; ++i) {
    const Picoseconds t = static_cast<Picoseconds>(rng.uniform_int(0, 1'000'000'000'000'000LL));
    for (const auto* d : {&kFpga, &kCpu}) {
      const std::uint64_t cyc = VirtualClock(t).cycles(*d);
      const Picoseconds back = cycles_to_ps(*d, cyc);
      const double period = 1e12 / static_cast<double>(d->frequency_hz);
      CHECK(static_cast<double>(t) - static_cast<double>(back) < period + 1);
      CHECK(back <= t + 1);
    }
  }
}

TEST_CASE("distribution samples stay in support") {
  SeededRng rng(1, 2);
  CHECK(rng.sample(Distribution::point(142)) == 142);
  const auto u = Distribution::uniform(139, 145);
  const auto tn = Distribution::tnormal(153, 2, 148, 158);
  bool lo = false;
  bool hi = false;
  for (int i = 0; i < 20000; ++i) {
    const double a = rng.sample(u);
    CHECK(a >= 139);
    CHECK(a <= 145);
    CHECK(a == std::floor(a));
    lo = lo || a == 139;
    hi = hi || a == 145;
    const double b = rng.sample(tn);
    CHECK(b >= 148);
    CHECK(b <= 158);
  }
  CHECK(lo);
  CHECK(hi);
}

TEST_CASE("truncated normal mean matches a rejection-sampling oracle") {
  SeededRng a(9, 1);
  std::normal_distribution<double> nd(153, 2);
  std::mt19937_64 eng(77);
  double oracle = 0;
  int n = 0;
  while (n < 200000) {
    const double x = nd(eng);
    if (x < 150 || x > 158) continue;
    oracle += x;
    ++n;
  }
  oracle /= n;
  const auto d = Distribution::tnormal(153, 2, 150, 158);
  double sum = 0;
  for (int i = 0; i < 200000; ++i) sum += a.sample(d);
  CHECK(sum / 200000 == doctest::Approx(oracle).epsilon(0.002));
  CHECK(d.mean() == doctest::Approx(oracle).epsilon(0.002));
}

TEST_CASE("empty support is a configuration error") {
  for (auto make : {+[] { return Distribution::uniform(5, 4); },
                    +[] { return Distribution::tnormal(0, 1, 3, 2); },
                    +[] { return Distribution::tnormal(0, 1, 50, 60); }}) {
    try {
      make();
      FAIL("expected error");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::kConfig);
    }
  }
}

TEST_CASE("distribution specs parse and print") {
  for (const char* s : {"point(142)", "uniform(139,145)", "tnormal(153,2,148,158)",
                        "lognormal(12.5,0.5)"}) {
    const auto d = Distribution::parse(s);
    CHECK(Distribution::parse(d.to_string()) == d);
  }
  CHECK(Distribution::parse(" uniform( 1 , 3 ) ") == Distribution::uniform(1, 3));
  CHECK_THROWS_AS(Distribution::parse("gamma(1,2)"), Error);
  CHECK_THROWS_AS(Distribution::parse("uniform(1)"), Error);
}

TEST_CASE("lognormal moments") {
  const auto d = Distribution::lognormal(1.0, 0.5);
  CHECK(d.mean() == doctest::Approx(std::exp(1.125)));
  SeededRng rng(5, 5);
  double sum = 0;
  for (int i = 0; i < 100000; ++i) sum += rng.sample(d);
  CHECK(sum / 100000 == doctest::Approx(d.mean()).epsilon(0.01));
}

TEST_CASE("seeded streams are reproducible and independent") {
  SeededRng a(42, 7);
  SeededRng b(42, 7);
  SeededRng c(42, 8);
  int same_c = 0;
  for (int i = 0; i < 100; ++i) {
    const auto x = a.next_u64();
    CHECK(x == b.next_u64());
    same_c += x == c.next_u64();
  }
  CHECK(same_c == 0);

  // Adding an actor does not perturb another actor's stream.
  RngFactory f(11);
  auto s1 = f.stream("victim");
  const auto first = s1.next_u64();
  auto other = f.stream("attacker");
  other.next_u64();
  CHECK(f.stream("victim").next_u64() == first);
}

TEST_CASE("events run in time order, ties in scheduling order") {
  Simulation sim(1);
  std::vector<int> order;
  sim.schedule(300, "a", [&] { order.push_back(3); });
  sim.schedule(100, "b", [&] { order.push_back(1); });
  sim.schedule(100, "c", [&] { order.push_back(2); });
  sim.run_until(200);
  CHECK(sim.now() == 200);
  CHECK(order == std::vector<int>{1, 2});
  sim.run();
  CHECK(order == std::vector<int>{1, 2, 3});
  CHECK(sim.now() == 300);
  CHECK_THROWS_AS(sim.schedule(10, "late", [] {}), Error);
}

TEST_CASE("equal seeds give byte-identical event logs") {
  auto run = [](std::uint64_t seed) {
    Simulation sim(seed);
    sim.log().set_enabled(true);
    auto rng = sim.rngs().stream("actor");
    std::function<void(int)> step = [&](int left) {
      if (left == 0) return;
      const auto d = static_cast<Picoseconds>(rng.uniform_int(1, 1000));
      sim.schedule_in(d, "actor", [&, left] { step(left - 1); });
    };
    step(200);
    sim.run();
    return sim.log().render();
  };
  const auto a = run(5);
  CHECK(!a.empty());
  CHECK(a == run(5));
  CHECK(a != run(6));
}

}  // TEST_SUITE
