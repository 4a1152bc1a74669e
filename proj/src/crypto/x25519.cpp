#include "swarmcast/crypto/x25519.hpp"

#include <cstring>

namespace swarmcast::crypto {

namespace {

// Field arithmetic mod p = 2^255 - 19 with five 51-bit limbs and
// 128-bit intermediate products.
using u128 = unsigned __int128;

constexpr std::uint64_t kMask51 = (std::uint64_t(1) << 51) - 1;

struct Fe {
  std::uint64_t v[5];
};

Fe fe_from_bytes(const std::uint8_t s[32]) {
  auto load64 = [](const std::uint8_t* p) {
    std::uint64_t r = 0;
    for (int i = 7; i >= 0; --i) {
      r = (r << 8) | p[i];
    }
    return r;
  };
  Fe h;
  h.v[0] = load64(s) & kMask51;
  h.v[1] = (load64(s + 6) >> 3) & kMask51;
  h.v[2] = (load64(s + 12) >> 6) & kMask51;
  h.v[3] = (load64(s + 19) >> 1) & kMask51;
  h.v[4] = (load64(s + 24) >> 12) & kMask51;  // masks the top bit per RFC 7748
  return h;
}

void fe_to_bytes(std::uint8_t s[32], const Fe& f) {
  // Carry, then subtract p once if the value is >= p, giving the unique
  // representative in [0, p).
  std::uint64_t t[5];
  std::memcpy(t, f.v, sizeof t);

  for (int pass = 0; pass < 2; ++pass) {
    t[1] += t[0] >> 51; t[0] &= kMask51;
    t[2] += t[1] >> 51; t[1] &= kMask51;
    t[3] += t[2] >> 51; t[2] &= kMask51;
    t[4] += t[3] >> 51; t[3] &= kMask51;
    t[0] += 19 * (t[4] >> 51); t[4] &= kMask51;
  }

  // Compute t - p and keep it when no borrow occurred.
  std::uint64_t q = (t[0] + 19) >> 51;
  q = (t[1] + q) >> 51;
  q = (t[2] + q) >> 51;
  q = (t[3] + q) >> 51;
  q = (t[4] + q) >> 51;

  t[0] += 19 * q;
  t[1] += t[0] >> 51; t[0] &= kMask51;
  t[2] += t[1] >> 51; t[1] &= kMask51;
  t[3] += t[2] >> 51; t[2] &= kMask51;
  t[4] += t[3] >> 51; t[3] &= kMask51;
  t[4] &= kMask51;

  std::uint64_t packed[4];
  packed[0] = t[0] | (t[1] << 51);
  packed[1] = (t[1] >> 13) | (t[2] << 38);
  packed[2] = (t[2] >> 26) | (t[3] << 25);
  packed[3] = (t[3] >> 39) | (t[4] << 12);
  for (int i = 0; i < 4; ++i) {
    for (int j = 0; j < 8; ++j) {
      s[8 * i + j] = static_cast<std::uint8_t>(packed[i] >> (8 * j));
    }
  }
}

Fe fe_add(const Fe& a, const Fe& b) {
  Fe r;
  for (int i = 0; i < 5; ++i) {
    r.v[i] = a.v[i] + b.v[i];
  }
  return r;
}

Fe fe_sub(const Fe& a, const Fe& b) {
  // Add 2p before subtracting to keep limbs non-negative.
  Fe r;
  r.v[0] = a.v[0] + 0xfffffffffffdau - b.v[0];
  r.v[1] = a.v[1] + 0xffffffffffffeu - b.v[1];
  r.v[2] = a.v[2] + 0xffffffffffffeu - b.v[2];
  r.v[3] = a.v[3] + 0xffffffffffffeu - b.v[3];
  r.v[4] = a.v[4] + 0xffffffffffffeu - b.v[4];
  return r;
}

void fe_carry(Fe& r, u128 t0, u128 t1, u128 t2, u128 t3, u128 t4) {
  // All carries stay in 128-bit arithmetic; the 19-fold of the top carry
  // cannot overflow there for any sum of five 51x57-bit products.
  u128 c;
  c = t0 >> 51; t0 &= kMask51; t1 += c;
  c = t1 >> 51; t1 &= kMask51; t2 += c;
  c = t2 >> 51; t2 &= kMask51; t3 += c;
  c = t3 >> 51; t3 &= kMask51; t4 += c;
  c = t4 >> 51; t4 &= kMask51; t0 += c * 19;
  c = t0 >> 51; t0 &= kMask51; t1 += c;
  r.v[0] = static_cast<std::uint64_t>(t0);
  r.v[1] = static_cast<std::uint64_t>(t1);
  r.v[2] = static_cast<std::uint64_t>(t2);
  r.v[3] = static_cast<std::uint64_t>(t3);
  r.v[4] = static_cast<std::uint64_t>(t4);
}

Fe fe_mul(const Fe& a, const Fe& b) {
  const u128 a0 = a.v[0], a1 = a.v[1], a2 = a.v[2], a3 = a.v[3], a4 = a.v[4];
  const std::uint64_t b0 = b.v[0], b1 = b.v[1], b2 = b.v[2], b3 = b.v[3],
                      b4 = b.v[4];
  const std::uint64_t b1_19 = b1 * 19, b2_19 = b2 * 19, b3_19 = b3 * 19,
                      b4_19 = b4 * 19;

  const u128 t0 = a0 * b0 + a1 * b4_19 + a2 * b3_19 + a3 * b2_19 + a4 * b1_19;
  const u128 t1 = a0 * b1 + a1 * b0 + a2 * b4_19 + a3 * b3_19 + a4 * b2_19;
  const u128 t2 = a0 * b2 + a1 * b1 + a2 * b0 + a3 * b4_19 + a4 * b3_19;
  const u128 t3 = a0 * b3 + a1 * b2 + a2 * b1 + a3 * b0 + a4 * b4_19;
  const u128 t4 = a0 * b4 + a1 * b3 + a2 * b2 + a3 * b1 + a4 * b0;

  Fe r;
  fe_carry(r, t0, t1, t2, t3, t4);
  return r;
}

Fe fe_square(const Fe& a) { return fe_mul(a, a); }

Fe fe_mul_small(const Fe& a, std::uint64_t k) {
  const u128 t0 = static_cast<u128>(a.v[0]) * k;
  const u128 t1 = static_cast<u128>(a.v[1]) * k;
  const u128 t2 = static_cast<u128>(a.v[2]) * k;
  const u128 t3 = static_cast<u128>(a.v[3]) * k;
  const u128 t4 = static_cast<u128>(a.v[4]) * k;
  Fe r;
  fe_carry(r, t0, t1, t2, t3, t4);
  return r;
}

Fe fe_invert(const Fe& z) {
  // z^(p-2) = z^(2^255 - 21) via the standard addition chain.
  Fe z2 = fe_square(z);                  // 2
  Fe t = fe_square(z2);                  // 4
  t = fe_square(t);                      // 8
  Fe z9 = fe_mul(t, z);                  // 9
  Fe z11 = fe_mul(z9, z2);               // 11
  t = fe_square(z11);                    // 22
  Fe z2_5_0 = fe_mul(t, z9);             // 31 = 2^5 - 2^0

  t = z2_5_0;
  for (int i = 0; i < 5; ++i) {
    t = fe_square(t);
  }
  Fe z2_10_0 = fe_mul(t, z2_5_0);        // 2^10 - 2^0

  t = z2_10_0;
  for (int i = 0; i < 10; ++i) {
    t = fe_square(t);
  }
  Fe z2_20_0 = fe_mul(t, z2_10_0);       // 2^20 - 2^0

  t = z2_20_0;
  for (int i = 0; i < 20; ++i) {
    t = fe_square(t);
  }
  Fe z2_40_0 = fe_mul(t, z2_20_0);       // 2^40 - 2^0

  t = z2_40_0;
  for (int i = 0; i < 10; ++i) {
    t = fe_square(t);
  }
  Fe z2_50_0 = fe_mul(t, z2_10_0);       // 2^50 - 2^0

  t = z2_50_0;
  for (int i = 0; i < 50; ++i) {
    t = fe_square(t);
  }
  Fe z2_100_0 = fe_mul(t, z2_50_0);      // 2^100 - 2^0

  t = z2_100_0;
  for (int i = 0; i < 100; ++i) {
    t = fe_square(t);
  }
  t = fe_mul(t, z2_100_0);               // 2^200 - 2^0

  for (int i = 0; i < 50; ++i) {
    t = fe_square(t);
  }
  t = fe_mul(t, z2_50_0);                // 2^250 - 2^0

  for (int i = 0; i < 5; ++i) {
    t = fe_square(t);
  }
  return fe_mul(t, z11);                 // 2^255 - 21
}

void fe_cswap(Fe& a, Fe& b, std::uint64_t swap) {
  const std::uint64_t mask = 0 - swap;
  for (int i = 0; i < 5; ++i) {
    const std::uint64_t x = mask & (a.v[i] ^ b.v[i]);
    a.v[i] ^= x;
    b.v[i] ^= x;
  }
}

}  // namespace

Key256 x25519(const Key256& scalar, const Key256& u_point) {
  std::uint8_t e[32];
  std::memcpy(e, scalar.data(), 32);
  e[0] &= 248;
  e[31] &= 127;
  e[31] |= 64;

  const Fe x1 = fe_from_bytes(u_point.data());
  Fe x2{{1, 0, 0, 0, 0}};
  Fe z2{{0, 0, 0, 0, 0}};
  Fe x3 = x1;
  Fe z3{{1, 0, 0, 0, 0}};
  std::uint64_t swap = 0;

  for (int pos = 254; pos >= 0; --pos) {
    const std::uint64_t bit = (e[pos / 8] >> (pos & 7)) & 1;
    swap ^= bit;
    fe_cswap(x2, x3, swap);
    fe_cswap(z2, z3, swap);
    swap = bit;

    const Fe a = fe_add(x2, z2);
    const Fe aa = fe_square(a);
    const Fe b = fe_sub(x2, z2);
    const Fe bb = fe_square(b);
    const Fe e_ = fe_sub(aa, bb);
    const Fe c = fe_add(x3, z3);
    const Fe d = fe_sub(x3, z3);
    const Fe da = fe_mul(d, a);
    const Fe cb = fe_mul(c, b);

    x3 = fe_square(fe_add(da, cb));
    z3 = fe_mul(x1, fe_square(fe_sub(da, cb)));
    x2 = fe_mul(aa, bb);
    z2 = fe_mul(e_, fe_add(aa, fe_mul_small(e_, 121665)));
  }
  fe_cswap(x2, x3, swap);
  fe_cswap(z2, z3, swap);

  const Fe out = fe_mul(x2, fe_invert(z2));
  Key256 result;
  fe_to_bytes(result.data(), out);
  return result;
}

Key256 x25519_base(const Key256& scalar) {
  Key256 base{};
  base[0] = 9;
  return x25519(scalar, base);
}

bool x25519_output_is_zero(const Key256& output) {
  std::uint8_t acc = 0;
  for (std::uint8_t b : output) {
    acc |= b;
  }
  return acc == 0;
}

KeyPair generate_keypair(const Key256& seed) {
  return KeyPair{seed, x25519_base(seed)};
}

}  // namespace swarmcast::crypto
