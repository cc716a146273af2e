#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "care/eval.hpp"
#include "care/synthgen.hpp"
#include "care/types.hpp"

namespace care::io {

inline constexpr std::uint16_t kVolumeFormatVersion = 1;

// Binary volume file, little-endian:
//   magic "CVOL" | u16 version | u8 flags (bit 0: labels) | u64 n
//   | f32 g_a[n] | f32 g_b[n] | packed y_a | packed y_b
// Labels are packed LSB-first, ceil(n/8) bytes per channel. Probabilities
// round-trip at 32-bit precision.
void write_volume(const std::filesystem::path& path, const InstanceVolume& v);
InstanceVolume read_volume(const std::filesystem::path& path);

struct ManifestEntry {
    std::string id;
    std::string file;  // path relative to the manifest
    std::size_t n_pixels = 0;
    bool has_labels = false;
    std::map<std::string, std::string> metadata;
};

struct DatasetManifest {
    int format_version = 1;
    std::vector<ManifestEntry> instances;
};

void write_manifest(const std::filesystem::path& path, const DatasetManifest& manifest);
DatasetManifest read_manifest(const std::filesystem::path& path);

// Reads the entry's volume relative to manifest_dir and cross-checks the
// pixel count against the manifest.
InstanceVolume load_instance(const std::filesystem::path& manifest_dir, const ManifestEntry& entry);

// Flat key=value text files ('#' starts a comment).
std::map<std::string, std::string> read_kv(const std::filesystem::path& path);
SynthConfig read_synth_config(const std::filesystem::path& path);

// Fitted profile plus everything estimate needs to reproduce a table.
struct ProfileFile {
    CalibrationProfile profile;
    BudgetSplit split;
    double lambda = 1.0;
    bool lambda_fallback = false;
    UncertaintyKind u_kind = UncertaintyKind::SizeScaled;
    double epsilon = 1e-6;
    double voxel_volume = 0.0;
    std::size_t n_bins = kDefaultEceBins;
    bool coverage_met = true;
};

void write_profile(const std::filesystem::path& path, const ProfileFile& profile);
ProfileFile read_profile(const std::filesystem::path& path);

struct ResultRow {
    std::string id;
    IntervalEstimate interval;
};

// Comma-separated results table with the header
// id,r_hat,lower,upper,width,method,alpha,delta,degenerate
void write_results(const std::filesystem::path& path, std::span<const ResultRow> rows);
std::vector<ResultRow> read_results(const std::filesystem::path& path);

// Shortest-exact decimal text for a double ("%.17g"); stable across reruns.
std::string format_double(double value);

} // namespace care::io
