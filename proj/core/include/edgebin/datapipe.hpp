#pragma once

#include <array>
#include <filesystem>
#include <string>
#include <vector>

#include "edgebin/tensor.hpp"

namespace edgebin {

// ---- dataset manifests ----

struct ManifestEntry {
    std::string path;
    std::string label;   // one of the seven bin classes
    std::string source;  // "trashnet" | "collected"

    bool operator==(const ManifestEntry&) const = default;
};

struct DatasetManifest {
    std::vector<ManifestEntry> entries;

    bool operator==(const DatasetManifest&) const = default;
};

// CSV rows `path,label,source`, one optional header line.
DatasetManifest read_manifest(const std::filesystem::path& csv);
void write_manifest(const DatasetManifest& m, const std::filesystem::path& csv);

struct SplitRatios {
    double train = 0.7;
    double val = 0.15;
    double test = 0.15;
};

struct SplitResult {
    DatasetManifest train;
    DatasetManifest val;
    DatasetManifest test;
};

// Stratified per-class split. Within each class the subset sizes are the
// largest-remainder apportionment of the ratios, so each deviates from the
// exact fraction by less than one item and the three parts partition the
// input exactly. Deterministic under `seed`.
SplitResult split(const DatasetManifest& manifest, const SplitRatios& ratios, uint64_t seed);

// ---- images ----

// P6 binary pixmap with 8-bit channels -> HWC f32 tensor in [0,1] (v / 255).
Tensor load_image(const std::filesystem::path& ppm);
// Debug writer; round-trips load_image output exactly for 8-bit data.
void save_image(const Tensor& image, const std::filesystem::path& ppm);

// Standard bilinear resize, half-pixel (corner-aligned=false) convention,
// edge-clamped sampling.
Tensor resize_bilinear(const Tensor& image, int out_w, int out_h);

Tensor flip_horizontal(const Tensor& image);
Tensor flip_vertical(const Tensor& image);

// Inverse-mapped affine warp with bilinear sampling; out-of-frame samples
// are zero. The 2x2 matrix and offset map output pixel centers to source
// pixel centers relative to the image center.
Tensor warp_affine(const Tensor& image, const std::array<double, 4>& m, double tx, double ty);

// ---- augmentation ----

enum class FlipMode { None, Horizontal, Vertical, Both };

struct AugmentConfig {
    FlipMode flip = FlipMode::None;
    double max_rotation_deg = 0.0;      // [0, 180]
    double max_translation_frac = 0.0;  // [0, 1], per axis
    double max_zoom_frac = 0.0;         // [0, 1]; scale drawn from [1-z, 1+z]
    double max_shear_frac = 0.0;        // [0, 1]
    uint64_t seed = 0;
};

// Augmentation used for the Jetson training recipe:
// flips both axes, rotation to 180 deg, translation to 10%, zoom to 75%.
AugmentConfig jetson_augment_config();
// Augmentation used for the K210 training recipe:
// shift to 20%, rotation to 180 deg, shear to 50%.
AugmentConfig k210_augment_config();

// Applies flip/rotation/translation/zoom/shear drawn uniformly within the
// config bounds. Same (config, draw_seed) always yields the same output;
// the output shape equals the input shape and values stay in [0,1].
Tensor augment(const Tensor& image, const AugmentConfig& config, uint64_t draw_seed);

}  // namespace edgebin
