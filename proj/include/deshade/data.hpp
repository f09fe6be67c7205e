// SPDX-License-Identifier: Apache-2.0
//
// Dataset discovery and loading. Datasets follow the community A/B/C
// layout: subdirectories A (shadow), B (mask), C (shadow-free) with
// matching filenames, under <root>/<split>/ (or <root>/ directly when the
// split directory does not exist).
#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "deshade/imaging.hpp"

namespace deshade::data {

struct Triple {
    std::string id;
    img::Image shadow;
    img::Image free;
    img::Image mask;  // binary, 1 channel; empty when has_masks is false
    std::string origin = "real";
};

struct DatasetSpec {
    std::filesystem::path root;
    std::string split = "train";
    bool has_masks = true;
};

// Eagerly loads every valid triple in stable filename order. Samples with a
// missing counterpart or an A/C dimension mismatch are skipped with a
// warning; more than 10% skipped is a hard error. Ground-truth masks are
// re-binarized at 0.5 on load.
std::vector<Triple> load_triples(const DatasetSpec& spec);

// mask = binarize_matte(derive_matte(shadow, free), threshold), written per
// id into mask_dir. Returns the number of masks written.
std::size_t derive_srd_masks(const std::filesystem::path& shadow_dir,
                             const std::filesystem::path& free_dir,
                             const std::filesystem::path& mask_dir,
                             float threshold = 0.95f);

// Deterministic batch-of-one sampler: (seed, step) picks the sample and a
// uniform short-side target in [resize_min, resize_max]; all three elements
// are resized identically (mask via nearest + re-binarization).
Triple training_batch(const std::vector<Triple>& triples, unsigned seed,
                      long step, int resize_min = 256, int resize_max = 480);

// Synthesized-dataset manifest: one JSON record per line
// (id, paths, origin, provenance, seed).
struct ManifestRecord {
    std::string id, shadow_path, mask_path, free_path, origin;
    nlohmann::json provenance;
};
void append_manifest(const std::filesystem::path& manifest,
                     const ManifestRecord& rec);
std::vector<ManifestRecord> read_manifest(const std::filesystem::path& manifest);

// Real triples plus manifest-listed synthesized triples; unreadable synth
// samples are skipped with a warning.
std::vector<Triple> merge_datasets(std::vector<Triple> real,
                                   const std::filesystem::path& synth_manifest);

// Per-epoch shuffle order under a fixed seed.
std::vector<std::size_t> epoch_order(std::size_t n, unsigned seed, int epoch);

}  // namespace deshade::data
