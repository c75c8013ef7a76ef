#pragma once

#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "cubist/geometry.hpp"
#include "cubist/image.hpp"
#include "cubist/metrics.hpp"
#include "cubist/robust.hpp"
#include "cubist/superquadric.hpp"

namespace cubist {

// ---------------------------------------------------------------------------
// Depth maps. PFM: grayscale "Pf", negative scale = little endian, rows
// stored bottom-to-top; bit-exact round trip. CSV: "width,height" header
// followed by one row per line; "nan" marks invalid pixels.

DepthMap load_pfm(std::istream& in);
void save_pfm(const DepthMap& depth, std::ostream& out);
DepthMap load_depth_csv(std::istream& in);
void save_depth_csv(const DepthMap& depth, std::ostream& out);

/// Dispatches on the file extension (.pfm or .csv).
DepthMap load_depth(const std::string& path);
void save_depth(const DepthMap& depth, const std::string& path);

Intrinsics load_intrinsics(const std::string& path);
void save_intrinsics(const Intrinsics& K, const std::string& path);

// ---------------------------------------------------------------------------
// Sampling weight maps. Binary layout: magic "WMB1", uint32 Q / width /
// height, Q float64 selection weights (normalized on load), then Q
// row-major float32 maps. Maps at 1/8 resolution are upsampled by nearest
// neighbor; per-point weights follow the backprojection index map.

WeightMaps load_weight_maps(const std::string& path, int image_width,
                            int image_height,
                            std::span<const std::int64_t> pixel_index);
void save_weight_maps(std::span<const std::vector<float>> maps,
                      std::span<const double> selection, int width, int height,
                      const std::string& path);

// ---------------------------------------------------------------------------
// Primitive sets. Canonical JSON: sorted keys, floats at nine significant
// digits, so identical inputs always produce byte-identical files.

std::string cuboids_to_json(std::span<const Cuboid> set);
std::vector<Cuboid> cuboids_from_json(const std::string& text);
std::vector<Cuboid> load_cuboids(const std::string& path);
void save_cuboids(std::span<const Cuboid> set, const std::string& path);

std::vector<Superquadric> superquadrics_from_json(const std::string& text);
std::vector<Superquadric> load_superquadrics(const std::string& path);

std::string report_to_json(const EvalReport& report);
EvalReport report_from_json(const std::string& text);

std::string diagnostics_to_jsonl(std::span<const RoundDiagnostics> rounds);

/// Triangle mesh of the cuboid set: 8 vertices and 12 outward-facing
/// triangles per cuboid, deterministic ordering.
void export_obj(std::span<const Cuboid> set, const std::string& path);

/// Binary PGM (P5) image of a coverage mask.
void save_mask_pgm(std::span<const std::uint8_t> mask, int width, int height,
                   const std::string& path);

/// Canonical float formatting used across all JSON output.
std::string format_number(double value);

std::string read_file(const std::string& path);
void write_file(const std::string& path, const std::string& contents);

}  // namespace cubist
