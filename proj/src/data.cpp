// SPDX-License-Identifier: Apache-2.0
#include "deshade/data.hpp"

#include "deshade/smgan.hpp"

#include <algorithm>
#include <fstream>
#include <random>

namespace deshade::data {

namespace fs = std::filesystem;

namespace {

fs::path split_dir(const DatasetSpec& spec) {
    const fs::path with_split = spec.root / spec.split;
    return fs::is_directory(with_split) ? with_split : spec.root;
}

std::vector<std::string> png_ids(const fs::path& dir) {
    std::vector<std::string> ids;
    for (auto& e : fs::directory_iterator(dir))
        if (e.is_regular_file() && e.path().extension() == ".png")
            ids.push_back(e.path().filename().string());
    std::sort(ids.begin(), ids.end());
    return ids;
}

std::uint64_t mix(std::uint64_t a, std::uint64_t b) {
    // splitmix64 over the pair, for decorrelated per-step streams
    std::uint64_t z = a * 0x9e3779b97f4a7c15ull + b;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
}

}  // namespace

std::vector<Triple> load_triples(const DatasetSpec& spec) {
    const fs::path base = split_dir(spec);
    const fs::path a = base / "A", b = base / "B", c = base / "C";
    require(fs::is_directory(a) && fs::is_directory(c),
            "dataset root missing A/ or C/ under " + base.string());
    if (spec.has_masks)
        require(fs::is_directory(b), "dataset root missing B/ under " + base.string());

    const auto ids = png_ids(a);
    require(!ids.empty(), "no PNG samples under " + a.string());
    std::vector<Triple> out;
    std::size_t skipped = 0;
    for (const auto& id : ids) {
        const fs::path pa = a / id, pb = b / id, pc = c / id;
        if (!fs::exists(pc) || (spec.has_masks && !fs::exists(pb))) {
            log_warn("skipping " + id + ": missing counterpart file");
            ++skipped;
            continue;
        }
        try {
            Triple t;
            t.id = fs::path(id).stem().string();
            t.shadow = img::load_png(pa.string());
            t.free = img::load_png(pc.string());
            if (t.shadow.shape != t.free.shape) {
                log_warn("skipping " + id + ": A/C dimension mismatch");
                ++skipped;
                continue;
            }
            if (spec.has_masks) {
                auto m = img::load_png(pb.string());
                if (m.shape.c != 1 || m.shape.h != t.shadow.shape.h ||
                    m.shape.w != t.shadow.shape.w) {
                    log_warn("skipping " + id + ": bad mask shape");
                    ++skipped;
                    continue;
                }
                t.mask = img::threshold_mask(m);
            }
            out.push_back(std::move(t));
        } catch (const std::exception& e) {
            log_warn("skipping " + id + ": " + e.what());
            ++skipped;
        }
    }
    require(skipped * 10 <= ids.size(),
            "more than 10% of samples skipped under " + base.string());
    return out;
}

std::size_t derive_srd_masks(const fs::path& shadow_dir, const fs::path& free_dir,
                             const fs::path& mask_dir, float threshold) {
    require(fs::is_directory(shadow_dir) && fs::is_directory(free_dir),
            "derive_srd_masks: missing input directory");
    fs::create_directories(mask_dir);
    std::size_t written = 0;
    for (const auto& id : png_ids(shadow_dir)) {
        const fs::path pf = free_dir / id;
        if (!fs::exists(pf)) {
            log_warn("derive_srd_masks: no shadow-free pair for " + id);
            continue;
        }
        try {
            const auto shadow = img::load_png((shadow_dir / id).string());
            const auto free = img::load_png(pf.string());
            require(shadow.shape == free.shape, "pair dimension mismatch");
            const auto mask =
                img::binarize_matte(deshade::derive_matte(shadow, free), threshold);
            img::save_png((mask_dir / id).string(), mask);
            ++written;
        } catch (const std::exception& e) {
            log_warn("derive_srd_masks: skipping " + id + ": " + e.what());
        }
    }
    return written;
}

Triple training_batch(const std::vector<Triple>& triples, unsigned seed,
                      long step, int resize_min, int resize_max) {
    require(!triples.empty(), "training_batch: empty dataset");
    require(resize_min >= 8 && resize_max >= resize_min,
            "training_batch: invalid resize range");
    std::mt19937_64 rng(mix(seed, static_cast<std::uint64_t>(step)));
    const auto& src =
        triples[std::uniform_int_distribution<std::size_t>(0, triples.size() - 1)(rng)];
    const int target =
        std::uniform_int_distribution<int>(resize_min, resize_max)(rng);

    Triple out;
    out.id = src.id;
    out.origin = src.origin;
    out.shadow = img::resize_preserve_aspect(src.shadow, target);
    out.free = img::resize_preserve_aspect(src.free, target);
    if (!src.mask.empty()) {
        auto m = img::resize_nearest(src.mask, out.shadow.shape.h,
                                     out.shadow.shape.w);
        out.mask = img::threshold_mask(m);
    }
    return out;
}

void append_manifest(const fs::path& manifest, const ManifestRecord& rec) {
    std::ofstream os(manifest, std::ios::app);
    require(os.good(), "cannot write manifest: " + manifest.string());
    nlohmann::json j{{"id", rec.id},
                     {"shadow", rec.shadow_path},
                     {"mask", rec.mask_path},
                     {"free", rec.free_path},
                     {"origin", rec.origin},
                     {"provenance", rec.provenance}};
    os << j.dump() << "\n";
}

std::vector<ManifestRecord> read_manifest(const fs::path& manifest) {
    std::ifstream is(manifest);
    require(is.good(), "cannot open manifest: " + manifest.string());
    std::vector<ManifestRecord> out;
    std::string line;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        const auto j = nlohmann::json::parse(line);
        ManifestRecord r;
        r.id = j.at("id");
        r.shadow_path = j.at("shadow");
        r.mask_path = j.at("mask");
        r.free_path = j.at("free");
        r.origin = j.value("origin", "synth");
        r.provenance = j.value("provenance", nlohmann::json::object());
        out.push_back(std::move(r));
    }
    return out;
}

std::vector<Triple> merge_datasets(std::vector<Triple> real,
                                   const fs::path& synth_manifest) {
    for (const auto& rec : read_manifest(synth_manifest)) {
        try {
            Triple t;
            t.id = rec.id;
            t.origin = rec.origin;
            t.shadow = img::load_png(rec.shadow_path);
            t.free = img::load_png(rec.free_path);
            t.mask = img::threshold_mask(img::load_png(rec.mask_path));
            require(t.shadow.shape == t.free.shape, "A/C dimension mismatch");
            real.push_back(std::move(t));
        } catch (const std::exception& e) {
            log_warn("merge_datasets: skipping " + rec.id + ": " + e.what());
        }
    }
    return real;
}

std::vector<std::size_t> epoch_order(std::size_t n, unsigned seed, int epoch) {
    std::vector<std::size_t> order(n);
    for (std::size_t i = 0; i < n; ++i) order[i] = i;
    std::mt19937_64 rng(mix(seed, 0xe0c5 + static_cast<std::uint64_t>(epoch)));
    std::shuffle(order.begin(), order.end(), rng);
    return order;
}

}  // namespace deshade::data
