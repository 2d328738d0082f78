#pragma once
// Reproducible random streams.
//
// Every Monte Carlo replica owns a stream identified by (seed, stream
// index). The generator is PCG32 (64-bit LCG state, stream selected
// through the increment), so the draw sequence for a given identity is
// the same on every platform and in every process. Replica streams
// reserve the low 3 bits of the stream index for purpose sub-streams
// (field normals, edge uniforms, ...), so one replica can own up to 8
// independent streams.
//
// Two access patterns are provided:
//   - sequential draws (uniform / normal / normal_fill) from the PCG
//     state, used where the consumption order is fixed by contract;
//   - order-independent draws uniform_at(i), a stateless SplitMix64
//     evaluation at counter i, used for per-edge uniforms so that lazy
//     and eager overlay evaluation see identical values.
//
// Normals come from a 128-layer ziggurat over the PCG stream. The layer
// tables are built once at startup from closed-form constants.

#include <array>
#include <cmath>
#include <cstdint>

namespace gff2d {

inline std::uint64_t mix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

namespace detail {

struct ZigguratTables {
  std::array<std::uint32_t, 128> kn{};
  std::array<double, 128> wn{};
  std::array<double, 128> fn{};
  static constexpr double tail_x = 3.442619855899;

  ZigguratTables() {
    const double m = 2147483648.0;  // 2^31
    double dn = tail_x, tn = tail_x;
    const double vn = 9.91256303526217e-3;
    double q = vn / std::exp(-0.5 * dn * dn);
    kn[0] = std::uint32_t((dn / q) * m);
    kn[1] = 0;
    wn[0] = q / m;
    wn[127] = dn / m;
    fn[0] = 1.0;
    fn[127] = std::exp(-0.5 * dn * dn);
    for (int i = 126; i >= 1; --i) {
      dn = std::sqrt(-2.0 * std::log(vn / dn + std::exp(-0.5 * dn * dn)));
      kn[i + 1] = std::uint32_t((dn / tn) * m);
      tn = dn;
      fn[i] = std::exp(-0.5 * dn * dn);
      wn[i] = dn / m;
    }
  }
};

inline const ZigguratTables& ziggurat() {
  static const ZigguratTables t;
  return t;
}

}  // namespace detail

struct RngStream {
  std::uint64_t seed = 0;    // identity, echoed into output records
  std::uint64_t stream = 0;  // identity
  std::uint64_t state = 0;   // PCG32 state
  std::uint64_t inc = 1;     // PCG32 increment (odd)
  std::uint64_t ix_key = 0;  // base for order-independent draws

  static RngStream make(std::uint64_t seed, std::uint64_t stream) {
    RngStream r;
    r.seed = seed;
    r.stream = stream;
    r.inc = (stream << 1) | 1u;
    r.state = 0;
    r.next_u32();
    r.state += mix64(seed);
    r.next_u32();
    r.ix_key = mix64(mix64(seed) ^ (stream * 0xda3e39cb94b95bdbULL));
    return r;
  }

  std::uint32_t next_u32() {
    const std::uint64_t old = state;
    state = old * 6364136223846793005ULL + inc;
    const std::uint32_t xorshifted = std::uint32_t(((old >> 18) ^ old) >> 27);
    const std::uint32_t rot = std::uint32_t(old >> 59);
    return (xorshifted >> rot) | (xorshifted << ((32 - rot) & 31));
  }

  // Jump the sequential state forward by delta draws in O(log delta).
  void advance(std::uint64_t delta) {
    std::uint64_t cur_mult = 6364136223846793005ULL, cur_plus = inc;
    std::uint64_t acc_mult = 1, acc_plus = 0;
    while (delta > 0) {
      if (delta & 1) {
        acc_mult *= cur_mult;
        acc_plus = acc_plus * cur_mult + cur_plus;
      }
      cur_plus = (cur_mult + 1) * cur_plus;
      cur_mult *= cur_mult;
      delta >>= 1;
    }
    state = acc_mult * state + acc_plus;
  }

  // Uniform on (0,1); never returns an endpoint.
  double uniform() { return (next_u32() + 0.5) * 0x1p-32; }

  // Stateless uniform attached to counter i: the i-th output of a
  // SplitMix64 sequence keyed by this stream's identity. Independent of
  // any sequential draws and of evaluation order.
  double uniform_at(std::uint64_t i) const {
    const std::uint64_t h = mix64(ix_key + i * 0x9e3779b97f4a7c15ULL);
    return (h >> 11) * 0x1p-53;
  }

  double normal() {
    const auto& t = detail::ziggurat();
    for (;;) {
      const std::int32_t hz = std::int32_t(next_u32());
      const int iz = hz & 127;
      const std::uint32_t az = hz < 0 ? -std::uint32_t(hz) : std::uint32_t(hz);
      if (az < t.kn[iz]) return hz * t.wn[iz];
      if (iz == 0) {
        // tail beyond x = tail_x
        const double r = detail::ZigguratTables::tail_x;
        double x, y;
        do {
          x = -std::log(uniform()) / r;
          y = -std::log(uniform());
        } while (y + y < x * x);
        return hz > 0 ? r + x : -(r + x);
      }
      const double x = hz * t.wn[iz];
      if (t.fn[iz] + uniform() * (t.fn[iz - 1] - t.fn[iz]) <
          std::exp(-0.5 * x * x))
        return x;
    }
  }

  void normal_fill(double* dst, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) dst[i] = normal();
  }
};

// Purpose sub-stream ids inside one replica's block of 8 streams.
enum class StreamPurpose : std::uint64_t {
  field = 0,     // normals for the field sample
  edges = 1,     // per-edge overlay uniforms (order-independent draws)
  scratch = 2,   // anything else a kernel needs
};

// Replica r of a base stream: a fresh identity in the same seed, with
// the low 3 bits of the stream index left free for purposes.
inline RngStream spawn_replica_stream(const RngStream& base, std::uint64_t replica) {
  return RngStream::make(base.seed, ((base.stream >> 3) + 1 + replica) << 3);
}

inline RngStream purpose_stream(const RngStream& replica_stream, StreamPurpose p) {
  return RngStream::make(replica_stream.seed,
                         replica_stream.stream | std::uint64_t(p));
}

}  // namespace gff2d
