#include "cli/sha256.hpp"

#include "pcfeat/types.hpp"

#include <array>
#include <cstdint>
#include <cstdio>
#include <cstring>

namespace pcfeat::cli {
namespace {

constexpr std::array<std::uint32_t, 64> kRoundConst = {
    0x428a2f98, 0x71374491, 0xb5c0fbcf, 0xe9b5dba5, 0x3956c25b, 0x59f111f1,
    0x923f82a4, 0xab1c5ed5, 0xd807aa98, 0x12835b01, 0x243185be, 0x550c7dc3,
    0x72be5d74, 0x80deb1fe, 0x9bdc06a7, 0xc19bf174, 0xe49b69c1, 0xefbe4786,
    0x0fc19dc6, 0x240ca1cc, 0x2de92c6f, 0x4a7484aa, 0x5cb0a9dc, 0x76f988da,
    0x983e5152, 0xa831c66d, 0xb00327c8, 0xbf597fc7, 0xc6e00bf3, 0xd5a79147,
    0x06ca6351, 0x14292967, 0x27b70a85, 0x2e1b2138, 0x4d2c6dfc, 0x53380d13,
    0x650a7354, 0x766a0abb, 0x81c2c92e, 0x92722c85, 0xa2bfe8a1, 0xa81a664b,
    0xc24b8b70, 0xc76c51a3, 0xd192e819, 0xd6990624, 0xf40e3585, 0x106aa070,
    0x19a4c116, 0x1e376c08, 0x2748774c, 0x34b0bcb5, 0x391c0cb3, 0x4ed8aa4a,
    0x5b9cca4f, 0x682e6ff3, 0x748f82ee, 0x78a5636f, 0x84c87814, 0x8cc70208,
    0x90befffa, 0xa4506ceb, 0xbef9a3f7, 0xc67178f2};

std::uint32_t rotr(std::uint32_t v, int s) {
  return (v >> s) | (v << (32 - s));
}

struct Sha256 {
  std::uint32_t state[8] = {0x6a09e667, 0xbb67ae85, 0x3c6ef372, 0xa54ff53a,
                            0x510e527f, 0x9b05688c, 0x1f83d9ab, 0x5be0cd19};
  std::uint64_t total_bytes = 0;
  unsigned char block[64];
  std::size_t fill = 0;

  void compress(const unsigned char* p) {
    std::uint32_t w[64];
    for (int t = 0; t < 16; ++t) {
      w[t] = (std::uint32_t(p[4 * t]) << 24) | (std::uint32_t(p[4 * t + 1]) << 16) |
             (std::uint32_t(p[4 * t + 2]) << 8) | std::uint32_t(p[4 * t + 3]);
    }
    for (int t = 16; t < 64; ++t) {
      const std::uint32_t s0 =
          rotr(w[t - 15], 7) ^ rotr(w[t - 15], 18) ^ (w[t - 15] >> 3);
      const std::uint32_t s1 =
          rotr(w[t - 2], 17) ^ rotr(w[t - 2], 19) ^ (w[t - 2] >> 10);
      w[t] = w[t - 16] + s0 + w[t - 7] + s1;
    }
    std::uint32_t a = state[0], b = state[1], c = state[2], d = state[3];
    std::uint32_t e = state[4], f = state[5], g = state[6], h = state[7];
    for (int t = 0; t < 64; ++t) {
      const std::uint32_t s1 = rotr(e, 6) ^ rotr(e, 11) ^ rotr(e, 25);
      const std::uint32_t ch = (e & f) ^ (~e & g);
      const std::uint32_t t1 = h + s1 + ch + kRoundConst[std::size_t(t)] + w[t];
      const std::uint32_t s0 = rotr(a, 2) ^ rotr(a, 13) ^ rotr(a, 22);
      const std::uint32_t maj = (a & b) ^ (a & c) ^ (b & c);
      const std::uint32_t t2 = s0 + maj;
      h = g;
      g = f;
      f = e;
      e = d + t1;
      d = c;
      c = b;
      b = a;
      a = t1 + t2;
    }
    state[0] += a;
    state[1] += b;
    state[2] += c;
    state[3] += d;
    state[4] += e;
    state[5] += f;
    state[6] += g;
    state[7] += h;
  }

  void update(const void* data, std::size_t len) {
    const unsigned char* p = static_cast<const unsigned char*>(data);
    total_bytes += len;
    if (fill > 0) {
      const std::size_t take = std::min(len, sizeof(block) - fill);
      std::memcpy(block + fill, p, take);
      fill += take;
      p += take;
      len -= take;
      if (fill == sizeof(block)) {
        compress(block);
        fill = 0;
      }
    }
    while (len >= sizeof(block)) {
      compress(p);
      p += sizeof(block);
      len -= sizeof(block);
    }
    if (len > 0) {
      std::memcpy(block, p, len);
      fill = len;
    }
  }

  std::string hex_digest() {
    const std::uint64_t bits = total_bytes * 8;
    const unsigned char one = 0x80;
    update(&one, 1);
    const unsigned char zero = 0x00;
    while (fill != 56) {
      update(&zero, 1);
    }
    unsigned char len_be[8];
    for (int i = 0; i < 8; ++i) {
      len_be[i] = static_cast<unsigned char>(bits >> (56 - 8 * i));
    }
    // Bypass total_bytes bookkeeping; the length block closes the stream.
    std::memcpy(block + fill, len_be, 8);
    compress(block);
    std::string out(64, '0');
    const char* digits = "0123456789abcdef";
    for (int i = 0; i < 8; ++i) {
      for (int b = 0; b < 8; ++b) {
        out[std::size_t(8 * i + b)] =
            digits[(state[i] >> (28 - 4 * b)) & 0xF];
      }
    }
    return out;
  }
};

}  // namespace

std::string sha256_hex(const void* data, std::size_t len) {
  Sha256 ctx;
  ctx.update(data, len);
  return ctx.hex_digest();
}

std::string sha256_file(const std::string& path) {
  std::FILE* f = std::fopen(path.c_str(), "rb");
  if (f == nullptr) {
    throw IoError("cannot open " + path);
  }
  Sha256 ctx;
  char buf[65536];
  std::size_t got = 0;
  while ((got = std::fread(buf, 1, sizeof(buf), f)) > 0) {
    ctx.update(buf, got);
  }
  const bool bad = std::ferror(f) != 0;
  std::fclose(f);
  if (bad) {
    throw IoError("read failure on " + path);
  }
  return ctx.hex_digest();
}

}  // namespace pcfeat::cli
