#pragma once

#include <iosfwd>
#include <string>

#include "onebit/quantizer.hpp"

namespace onebit {

// Binary OneBitBatch layout, all integers and doubles little-endian:
//
//   offset  size  field
//   0       4     magic "OBIT"
//   4       2     format version (1)
//   6       1     flags, bit 0 = complex (second sign plane present)
//   7       1     reserved (0)
//   8       4     M (channels, u32)
//   12      8     N (samples, u64)
//   20      8     seed (u64)
//   28      ...   schedule record
//   ...     ...   sign planes: Re then Im; each plane is M rows of
//                 ceil(N / 8) bytes, bit (t % 8) of byte t / 8 set for +1
//
// Schedule record:
//   u8 kind (0 zero, 1 constant, 2 staircase, 3 gaussian_dither, 4 sine,
//   5 explicit), then the kind payload:
//     constant:        f64 value
//     staircase:       u32 l, f64 level[l]
//     gaussian_dither: f64 mean, f64 stddev[M]
//     sine:            f64 amplitude, f64 period, f64 offset
//     explicit:        f64 v[M][N] (row-major)
//   followed by f64 scale[M] for every kind.
void write_batch_binary(std::ostream& out, const OneBitBatch& batch);
OneBitBatch read_batch_binary(std::istream& in);

void save_batch(const std::string& path, const OneBitBatch& batch);
OneBitBatch load_batch(const std::string& path);

// Debug CSV: header "t,x1..xM[,xi1..xiM],v1..vM", one row per sample.
// Dither schedules write the recorded mean thresholds.
void write_batch_csv(std::ostream& out, const OneBitBatch& batch);

}  // namespace onebit
