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
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <gmpxx.h>

#include "hammerlab/dram.hpp"
#include "hammerlab/simcore.hpp"

namespace hammerlab {

using BigInt = mpz_class;

struct RsaKey {
  BigInt p, q, N, e, d, d_p, d_q, q_inv;

  // Throws kContract naming the first violated key invariant.
  void validate() const;
  // Decimal fields p,q,N,e,d,d_p,d_q,q_inv, one per line.
  std::string to_text() const;
  static RsaKey from_text(const std::string& text);
  // Derives the remaining fields from two primes; e is bumped to the next
  // odd value coprime with phi(N) if needed.
  static RsaKey from_primes(const BigInt& p, const BigInt& q, BigInt e = 65537);
};

struct Signature {
  BigInt value;
  std::optional<BigInt> blinded_with;
};

enum class Branch { kP, kQ };
enum class FaultMode { kDirect, kDramResident };

// Source of a CRT exponent stored in simulated DRAM. Each load re-reads the
// bytes, so disturbance errors reach the exponentiation.
class DramResidentExponent {
 public:
  DramResidentExponent(Dram& dram, PhysAddr addr, std::size_t bytes)
      : dram_(dram), addr_(addr), bytes_(bytes) {}
  void store(const BigInt& v, Picoseconds when);
  BigInt load(Picoseconds when) const;
  PhysAddr address() const { return addr_; }
  std::size_t bytes() const { return bytes_; }

 private:
  Dram& dram_;
  PhysAddr addr_;
  std::size_t bytes_;
};

struct FaultSpec {
  Branch branch = Branch::kP;
  FaultMode mode = FaultMode::kDirect;
  // Direct mode: the branch result is replaced by forced_value when set,
  // otherwise XORed with xor_mask and reduced.
  std::optional<BigInt> forced_value;
  BigInt xor_mask = 1;
  // Dram-resident mode: exponent of the chosen branch is loaded from here.
  const DramResidentExponent* exponent = nullptr;
  Picoseconds when = 0;
};

RsaKey keygen(unsigned bits, SeededRng& rng);
BigInt random_below(const BigInt& bound, SeededRng& rng);
BigInt random_bits(unsigned bits, SeededRng& rng);

Signature sign_crt(const BigInt& m, const RsaKey& key,
                   const std::optional<BigInt>& blinding = std::nullopt,
                   const FaultSpec* fault = nullptr);

std::pair<BigInt, BigInt> bellcore_recover_pair(const BigInt& s,
                                                const BigInt& s_faulty,
                                                const BigInt& n);
std::pair<BigInt, BigInt> bellcore_recover_single(const BigInt& s_faulty,
                                                  const BigInt& m,
                                                  const BigInt& e,
                                                  const BigInt& n);
bool verify(const BigInt& s, const BigInt& m, const BigInt& e, const BigInt& n);

// Fixed-width little-endian encoding; throws kRange if v does not fit.
std::vector<std::uint8_t> to_bytes(const BigInt& v, std::size_t len);
BigInt from_bytes(const std::vector<std::uint8_t>& bytes);

}  // namespace hammerlab
