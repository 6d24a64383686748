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

#include <cstdint>
#include <numeric>
#include <vector>

#include "hammerlab/rsa.hpp"

using namespace hammerlab;

namespace {

// Plain 64-bit oracles, independent of the big-integer library.
std::uint64_t powmod(std::uint64_t b, std::uint64_t e, std::uint64_t m) {
  std::uint64_t r = 1 % m;
  b %= m;
  while (e > 0) {
    if (e & 1U) r = r * b % m;
    b = b * b % m;
    e >>= 1;
  }
  return r;
}

std::int64_t inverse(std::int64_t a, std::int64_t m) {
  std::int64_t t = 0, nt = 1, r = m, nr = a % m;
  while (nr != 0) {
    const std::int64_t q = r / nr;
    t = std::exchange(nt, t - q * nt);
    r = std::exchange(nr, r - q * nr);
  }
  return r == 1 ? (t < 0 ? t + m : t) : -1;
}

bool prime_oracle(std::uint64_t n) {
  if (n < 2) return false;
  for (std::uint64_t d = 2; d * d <= n; ++d) {
    if (n % d == 0) return false;
  }
  return true;
}

std::vector<std::uint64_t> primes_below(std::uint64_t n) {
  std::vector<std::uint64_t> out;
  for (std::uint64_t i = 3; i < n; ++i) {
    if (prime_oracle(i)) out.push_back(i);
  }
  return out;
}

RsaKey toy_key() { return RsaKey::from_primes(11, 13, 7); }

std::uint64_t u64(const BigInt& v) { return v.get_ui(); }

}  // namespace

TEST_SUITE("rsa") {

TEST_CASE("toy key fields match the extended-gcd oracle") {
  const RsaKey k = toy_key();
  CHECK(k.N == 143);
  CHECK(k.e == 7);
  CHECK(k.d == 103);
  CHECK(k.d == inverse(7, 120));
  CHECK(k.d_p == 3);
  CHECK(k.d_q == 7);
  CHECK(k.q_inv == 6);
  CHECK(k.q_inv == inverse(13, 11));
  CHECK_NOTHROW(k.validate());
}

TEST_CASE("toy signature and faulty recombination") {
  const RsaKey k = toy_key();
  const auto s = sign_crt(2, k);
  CHECK(s.value == 63);
  CHECK(powmod(2, 103, 143) == 63);
  CHECK(sign_crt(2, k, BigInt(5)).value == 63);

  FaultSpec f;
  f.branch = Branch::kP;
  f.forced_value = BigInt(9);
  const auto bad = sign_crt(2, k, std::nullopt, &f);
  // 11 + 13 * ((9 - 11) * 6 mod 11)
  const std::int64_t oracle = 11 + 13 * ((((9 - 11) * 6) % 11 + 11) % 11);
  CHECK(oracle == 141);
  CHECK(bad.value == 141);
}

TEST_CASE("Bellcore recovery on the toy key") {
  const auto [p, q] = bellcore_recover_pair(63, 141, 143);
  CHECK(std::gcd(141 - 63, 143) == 13);
  CHECK(((p == 11 && q == 13) || (p == 13 && q == 11)));
  const auto [p1, q1] = bellcore_recover_single(141, 2, 7, 143);
  CHECK((p1 * q1) == 143);
  CHECK(std::gcd((powmod(141, 7, 143) + 143 - 2) % 143, std::uint64_t{143}) == 13);
  try {
    bellcore_recover_pair(63, 63, 143);
    FAIL("expected recovery failure");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::kRecoveryFailed);
  }
  CHECK_THROWS_AS(bellcore_recover_single(63, 2, 7, 143), Error);
}

TEST_CASE("verify against the modular-power oracle") {
  CHECK(verify(63, 2, 7, 143));
  CHECK_FALSE(verify(141, 2, 7, 143));
  CHECK(verify(0, 0, 65537, 143));
}

TEST_CASE("sign_crt rejects messages outside (0, N) and bad blinding") {
  const RsaKey k = toy_key();
  CHECK_THROWS_AS(sign_crt(0, k), Error);
  CHECK_THROWS_AS(sign_crt(143, k), Error);
  CHECK_THROWS_AS(sign_crt(2, k, BigInt(13)), Error);
}

TEST_CASE("CRT signing equals direct exponentiation on toy keys") {
  // Every pair of primes below 64, every message.
  const auto small = primes_below(64);
  std::uint64_t checked = 0;
  for (std::size_t i = 0; i < small.size(); ++i) {
    for (std::size_t j = 0; j < small.size(); ++j) {
      if (i == j) continue;
      const RsaKey k = RsaKey::from_primes(small[i], small[j], 3);
      const std::uint64_t n = u64(k.N);
      const std::uint64_t d = u64(k.d);
      for (std::uint64_t m = 1; m < n; ++m) {
        if (u64(sign_crt(m, k).value) != powmod(m, d, n)) {
          FAIL("mismatch for p=" << small[i] << " q=" << small[j] << " m=" << m);
        }
        ++checked;
      }
    }
  }
  CHECK(checked > 100'000);
  // A sample of larger toy keys below 2^10, still every message.
  const auto big = primes_below(1024);
  SeededRng rng(3, 0);
  for (int t = 0; t < 6; ++t) {
    const auto p = big[rng.uniform_int(100, big.size() - 1)];
    auto q = p;
    while (q == p) q = big[rng.uniform_int(100, big.size() - 1)];
    const RsaKey k = RsaKey::from_primes(p, q);
    const std::uint64_t n = u64(k.N);
    const std::uint64_t d = u64(k.d);
    std::uint64_t bad = 0;
    for (std::uint64_t m = 1; m < n; ++m) bad += u64(sign_crt(m, k).value) != powmod(m, d, n);
    CHECK(bad == 0);
  }
}

TEST_CASE("blinding never changes the signature") {
  const RsaKey k = toy_key();
  for (std::uint64_t m = 1; m < 143; m += 7) {
    const BigInt plain = sign_crt(m, k).value;
    for (std::uint64_t r = 1; r < 143; ++r) {
      if (std::gcd(r, std::uint64_t{143}) != 1) continue;
      CHECK(sign_crt(m, k, BigInt(r)).value == plain);
    }
  }
}

TEST_CASE("keygen output satisfies the key invariants") {
  SeededRng rng(11, 0);
  const RsaKey k = keygen(1024, rng);
  CHECK_NOTHROW(k.validate());
  CHECK(mpz_sizeinbase(k.N.get_mpz_t(), 2) >= 1023);
  CHECK(k.e == 65537);
  // Fermat oracle over a few bases.
  for (unsigned base : {2U, 3U, 5U, 7U, 11U}) {
    for (const BigInt* pr : {&k.p, &k.q}) {
      BigInt r;
      const BigInt b(base);
      const BigInt ex = *pr - 1;
      mpz_powm(r.get_mpz_t(), b.get_mpz_t(), ex.get_mpz_t(), pr->get_mpz_t());
      CHECK(r == 1);
    }
  }
  BigInt one = (k.d * k.e) % ((k.p - 1) * (k.q - 1));
  CHECK(one == 1);
  const BigInt m = random_below(k.N, rng);
  CHECK(verify(sign_crt(m, k).value, m, k.e, k.N));
  CHECK_THROWS_AS(keygen(15, rng), Error);
}

TEST_CASE("key text round trip") {
  SeededRng rng(2, 0);
  const RsaKey k = keygen(256, rng);
  const RsaKey back = RsaKey::from_text(k.to_text());
  CHECK(back.N == k.N);
  CHECK(back.d_q == k.d_q);
  CHECK(back.q_inv == k.q_inv);
  const std::string text = k.to_text();
  CHECK(std::count(text.begin(), text.end(), '\n') == 8);
}

TEST_CASE("byte encoding round trip") {
  SeededRng rng(4, 0);
  for (int i = 0; i < 50; ++i) {
    const BigInt v = random_bits(500, rng);
    CHECK(from_bytes(to_bytes(v, 64)) == v);
  }
  try {
    to_bytes(BigInt(1) << 64, 8);
    FAIL("expected range error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::kRange);
  }
}

TEST_CASE("Bellcore recovery with single-branch faults on random keys") {
  SeededRng rng(7, 0);
  for (int t = 0; t < 100; ++t) {
    const RsaKey k = keygen(512, rng);
    const BigInt m = random_below(k.N - 1, rng) + 1;
    const Branch br = t % 2 == 0 ? Branch::kP : Branch::kQ;
    FaultSpec f;
    f.branch = br;
    f.xor_mask = BigInt(1) << static_cast<unsigned>(rng.uniform_int(0, 200));
    const BigInt r1 = random_below(k.N - 2, rng) + 2;
    const BigInt r2 = random_below(k.N - 2, rng) + 2;
    const auto good = sign_crt(m, k, r1);
    const auto bad = sign_crt(m, k, r2, &f);
    REQUIRE(good.value != bad.value);
    const BigInt expect = br == Branch::kP ? k.q : k.p;  // the untouched factor
    const auto [a, b] = bellcore_recover_pair(good.value, bad.value, k.N);
    CHECK((a == expect || b == expect));
    CHECK(a * b == k.N);
    const auto [c, d] = bellcore_recover_single(bad.value, m, k.e, k.N);
    CHECK(c * d == k.N);
  }
}

TEST_CASE("dram-resident exponent faults propagate into the signature") {
  DramConfig dc;
  dc.geometry = DramGeometry{4, 64, 4096};
  Dram dram(dc, 1);
  SeededRng rng(9, 0);
  const RsaKey k = keygen(512, rng);
  const BigInt m = 12345;
  DramResidentExponent dq(dram, 0x8000, 128);
  dq.store(k.d_q, 0);
  CHECK(dq.load(1000) == k.d_q);

  FaultSpec f;
  f.branch = Branch::kQ;
  f.mode = FaultMode::kDramResident;
  f.exponent = &dq;
  f.when = 2000;
  CHECK(sign_crt(m, k, std::nullopt, &f).value == sign_crt(m, k).value);

  // Corrupt one bit of the stored exponent.
  auto bytes = dram.read_bits(0x8000, 128, 3000);
  bytes[5] ^= 0x10;
  dram.write_bits(0x8000, bytes, 4000);
  f.when = 5000;
  const auto bad = sign_crt(m, k, BigInt(3), &f);
  CHECK_FALSE(verify(bad.value, m, k.e, k.N));
  const auto [a, b] = bellcore_recover_pair(sign_crt(m, k).value, bad.value, k.N);
  CHECK((a == k.p || b == k.p));
  CHECK_THROWS_AS(sign_crt(m, k, std::nullopt, [] {
                    static FaultSpec s;
                    s.mode = FaultMode::kDramResident;
                    return &s;
                  }()),
                  Error);
}

TEST_CASE("verification withholds every faulty signature") {
  SeededRng rng(13, 0);
  const RsaKey k = keygen(256, rng);
  int released = 0;
  for (int t = 0; t < 200; ++t) {
    const BigInt m = random_below(k.N - 1, rng) + 1;
    FaultSpec f;
    f.branch = t % 2 == 0 ? Branch::kP : Branch::kQ;
    f.xor_mask = BigInt(1) << static_cast<unsigned>(t % 64);
    const auto s = sign_crt(m, k, std::nullopt, &f);
    if (s.value != sign_crt(m, k).value && verify(s.value, m, k.e, k.N)) ++released;
  }
  CHECK(released == 0);
}

}  // TEST_SUITE
