#pragma once

#include <string>

#include "wgi/forward_model.hpp"
#include "wgi/imaging.hpp"

namespace wgi {

// Little-endian binary containers. Every reader checks the magic tag and
// version and throws InputError on truncated or foreign files.
//
//   data    "WGID" u32 version, u32 receivers, u32 components, u32 ids[],
//           f64 (x1, x2)[receivers], u8 noise flag [f64 snr, u64 seed, f64 sigma],
//           f64 (re, im)[receivers * components], receiver-major
//   matrix  "WGIM" u32 version, u64 scenario hash, u64 rows, u64 cols, f64 voxel
//           volume, i32 mode budget, u32 parameterization, u32 variant, grid,
//           array layout as above, f64 (re, im)[rows * cols] row-major
//   image   "WGIV" u32 version, grid, u32 parameterization, u32 channels,
//           f64 (re, im)[voxels * channels]
//   grid    f64 origin[3], f64 pitch_cross, f64 pitch_range, i32 counts[3]

void write_data(const DataVector& d, const std::string& path);
DataVector read_data(const std::string& path);
/// receiver,x1,x2,component,re,im
void write_data_csv(const DataVector& d, const std::string& path);

void write_matrix(const SensingMatrix& F, const std::string& path);
SensingMatrix read_matrix(const std::string& path);
/// Reads only the header fields (F left empty).
SensingMatrix read_matrix_header(const std::string& path);

void write_image(const ImageVolume& img, const std::string& path);
ImageVolume read_image(const std::string& path);

/// u,v,value with the in-plane axis names in the header.
void write_slice_csv(const Slice& s, const std::string& path);
/// 8-bit binary PGM, linearly scaled to the slice maximum; v increases upwards.
void write_slice_pgm(const Slice& s, const std::string& path);

/// Git-style blob SHA-1 ("blob <size>\0" + contents), hex encoded.
std::string git_blob_sha1(const std::string& path);

}  // namespace wgi
