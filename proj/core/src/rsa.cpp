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

#include "hammerlab/rsa.hpp"

#include <sstream>

#include <fmt/format.h>

namespace hammerlab {

namespace {

BigInt mod(const BigInt& a, const BigInt& m) {
  BigInt r;
  mpz_mod(r.get_mpz_t(), a.get_mpz_t(), m.get_mpz_t());
  return r;
}

BigInt powm(const BigInt& b, const BigInt& e, const BigInt& m) {
  BigInt r;
  mpz_powm(r.get_mpz_t(), b.get_mpz_t(), e.get_mpz_t(), m.get_mpz_t());
  return r;
}

std::optional<BigInt> invert(const BigInt& a, const BigInt& m) {
  BigInt r;
  if (mpz_invert(r.get_mpz_t(), a.get_mpz_t(), m.get_mpz_t()) == 0) {
    return std::nullopt;
  }
  return r;
}

BigInt gcd(const BigInt& a, const BigInt& b) {
  BigInt r;
  mpz_gcd(r.get_mpz_t(), a.get_mpz_t(), b.get_mpz_t());
  return r;
}

bool is_prime(const BigInt& v) {
  return mpz_probab_prime_p(v.get_mpz_t(), 30) > 0;
}

BigInt random_prime(unsigned bits, SeededRng& rng) {
  for (;;) {
    BigInt c = random_bits(bits, rng);
    mpz_setbit(c.get_mpz_t(), bits - 1);
    if (bits >= 2) mpz_setbit(c.get_mpz_t(), bits - 2);
    mpz_setbit(c.get_mpz_t(), 0);
    if (is_prime(c)) return c;
  }
}

std::pair<BigInt, BigInt> split(const BigInt& g, const BigInt& n) {
  if (g == 1 || g == n) {
    fail(ErrorKind::kRecoveryFailed,
         "gcd is trivial; the fault did not isolate one CRT branch");
  }
  BigInt other = n / g;
  if (other < g) return {other, g};
  return {g, other};
}

}  // namespace

BigInt random_bits(unsigned bits, SeededRng& rng) {
  BigInt v = 0;
  for (unsigned done = 0; done < bits; done += 64) {
    v <<= 64;
    const std::uint64_t w = rng.next_u64();
    BigInt word;
    mpz_import(word.get_mpz_t(), 1, 1, sizeof(w), 0, 0, &w);
    v += word;
  }
  const unsigned extra = (bits + 63) / 64 * 64 - bits;
  v >>= extra;
  return v;
}

BigInt random_below(const BigInt& bound, SeededRng& rng) {
  if (bound <= 0) fail(ErrorKind::kContract, "random_below needs a positive bound");
  const auto bits = static_cast<unsigned>(mpz_sizeinbase(bound.get_mpz_t(), 2));
  for (;;) {
    BigInt v = random_bits(bits, rng);
    if (v < bound) return v;
  }
}

RsaKey RsaKey::from_primes(const BigInt& p, const BigInt& q, BigInt e) {
  if (p == q || !is_prime(p) || !is_prime(q)) {
    fail(ErrorKind::kConfig, "key needs two distinct primes");
  }
  const BigInt phi = (p - 1) * (q - 1);
  if (e < 3) e = 3;
  if (e % 2 == 0) e += 1;
  while (gcd(e, phi) != 1) e += 2;
  RsaKey k;
  k.p = p;
  k.q = q;
  k.N = p * q;
  k.e = e;
  k.d = *invert(e, phi);
  k.d_p = mod(k.d, p - 1);
  k.d_q = mod(k.d, q - 1);
  auto qi = invert(q, p);
  if (!qi) fail(ErrorKind::kConfig, "q not invertible mod p");
  k.q_inv = *qi;
  return k;
}

void RsaKey::validate() const {
  auto need = [](bool ok, const char* what) {
    if (!ok) fail(ErrorKind::kContract, std::string("rsa key: ") + what);
  };
  need(N == p * q, "N != p*q");
  need(p != q && is_prime(p) && is_prime(q), "p, q must be distinct primes");
  const BigInt phi = (p - 1) * (q - 1);
  BigInt l;
  mpz_lcm(l.get_mpz_t(), BigInt(p - 1).get_mpz_t(), BigInt(q - 1).get_mpz_t());
  need(mod(d * e, phi) == 1 || mod(d * e, l) == 1, "d*e != 1");
  need(d_p == mod(d, p - 1), "d_p != d mod (p-1)");
  need(d_q == mod(d, q - 1), "d_q != d mod (q-1)");
  need(mod(q * q_inv, p) == 1, "q_inv is not q^-1 mod p");
}

std::string RsaKey::to_text() const {
  std::string out;
  for (const BigInt* v : {&p, &q, &N, &e, &d, &d_p, &d_q, &q_inv}) {
    out += v->get_str(10);
    out += '\n';
  }
  return out;
}

RsaKey RsaKey::from_text(const std::string& text) {
  std::istringstream in(text);
  RsaKey k;
  std::string line;
  for (BigInt* v : {&k.p, &k.q, &k.N, &k.e, &k.d, &k.d_p, &k.d_q, &k.q_inv}) {
    if (!std::getline(in, line) || v->set_str(line, 10) != 0) {
      fail(ErrorKind::kConfig, "malformed key text");
    }
  }
  return k;
}

RsaKey keygen(unsigned bits, SeededRng& rng) {
  if (bits < 16 || bits % 2 != 0) {
    fail(ErrorKind::kConfig, "key size must be even and >= 16 bits");
  }
  for (;;) {
    const BigInt p = random_prime(bits / 2, rng);
    const BigInt q = random_prime(bits / 2, rng);
    if (p == q) continue;
    return RsaKey::from_primes(p, q, 65537);
  }
}

// ---------------------------------------------------------------------------

void DramResidentExponent::store(const BigInt& v, Picoseconds when) {
  const auto bytes = to_bytes(v, bytes_);
  dram_.write_bits(addr_, bytes, when);
}

BigInt DramResidentExponent::load(Picoseconds when) const {
  return from_bytes(dram_.read_bits(addr_, bytes_, when));
}

Signature sign_crt(const BigInt& m, const RsaKey& key,
                   const std::optional<BigInt>& blinding,
                   const FaultSpec* fault) {
  if (m <= 0 || m >= key.N) {
    fail(ErrorKind::kRange, "message must satisfy 0 < m < N");
  }
  BigInt mb = m;
  std::optional<BigInt> r_inv;
  if (blinding) {
    r_inv = invert(*blinding, key.N);
    if (!r_inv || mod(*blinding, key.N) == 0) {
      fail(ErrorKind::kContract, "blinding factor not invertible mod N");
    }
    mb = mod(m * powm(*blinding, key.e, key.N), key.N);
  }
  BigInt dp = key.d_p;
  BigInt dq = key.d_q;
  if (fault != nullptr && fault->mode == FaultMode::kDramResident) {
    if (fault->exponent == nullptr) {
      fail(ErrorKind::kContract, "dram-resident fault without an exponent source");
    }
    (fault->branch == Branch::kP ? dp : dq) = fault->exponent->load(fault->when);
  }
  BigInt sp = powm(mb, dp, key.p);
  BigInt sq = powm(mb, dq, key.q);
  if (fault != nullptr && fault->mode == FaultMode::kDirect) {
    BigInt& target = fault->branch == Branch::kP ? sp : sq;
    const BigInt& prime = fault->branch == Branch::kP ? key.p : key.q;
    if (fault->forced_value) {
      target = mod(*fault->forced_value, prime);
    } else {
      BigInt x;
      mpz_xor(x.get_mpz_t(), target.get_mpz_t(), fault->xor_mask.get_mpz_t());
      target = mod(x, prime);
    }
  }
  // S = S_q + q * ((S_p - S_q) * q_inv mod p)
  BigInt s = sq + key.q * mod((sp - sq) * key.q_inv, key.p);
  Signature out;
  if (blinding) {
    s = mod(s * *r_inv, key.N);
    out.blinded_with = *blinding;
  }
  out.value = s;
  return out;
}

std::pair<BigInt, BigInt> bellcore_recover_pair(const BigInt& s,
                                                const BigInt& s_faulty,
                                                const BigInt& n) {
  BigInt diff = s - s_faulty;
  mpz_abs(diff.get_mpz_t(), diff.get_mpz_t());
  return split(gcd(diff, n), n);
}

std::pair<BigInt, BigInt> bellcore_recover_single(const BigInt& s_faulty,
                                                  const BigInt& m,
                                                  const BigInt& e,
                                                  const BigInt& n) {
  const BigInt t = mod(powm(s_faulty, e, n) - m, n);
  return split(gcd(t, n), n);
}

bool verify(const BigInt& s, const BigInt& m, const BigInt& e, const BigInt& n) {
  return powm(s, e, n) == mod(m, n);
}

std::vector<std::uint8_t> to_bytes(const BigInt& v, std::size_t len) {
  if (v < 0 || mpz_sizeinbase(v.get_mpz_t(), 256) > len) {
    if (v != 0) fail(ErrorKind::kRange, "integer does not fit the byte width");
  }
  std::vector<std::uint8_t> out(len, 0);
  std::size_t count = 0;
  mpz_export(out.data(), &count, -1, 1, 0, 0, v.get_mpz_t());
  return out;
}

BigInt from_bytes(const std::vector<std::uint8_t>& bytes) {
  BigInt v;
  if (!bytes.empty()) {
    mpz_import(v.get_mpz_t(), bytes.size(), -1, 1, 0, 0, bytes.data());
  }
  return v;
}

}  // namespace hammerlab
