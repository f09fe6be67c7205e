// SPDX-License-Identifier: Apache-2.0
//
// deshade: shadow removal / detection / synthesis command line.
#include <CLI11.hpp>

#include <filesystem>
#include <iostream>

#include "deshade/trainer.hpp"

namespace fs = std::filesystem;
using namespace deshade;

namespace {

struct CommonArgs {
    std::string config_file;
    std::string dataset_root;
    std::string split = "train";
    std::string out_dir = "out";
    std::string checkpoint;
    std::string variant = "dhan";
    std::string mode = "removal";
    std::string augment_manifest;
    unsigned seed = 0;
    bool seed_given = false;
};

void add_common(CLI::App* cmd, CommonArgs& a) {
    cmd->add_option("--config", a.config_file, "key = value config file");
    cmd->add_option("--seed", a.seed, "RNG seed")->each([&](const std::string&) {
        a.seed_given = true;
    });
    cmd->add_option("--dataset-root", a.dataset_root, "dataset root (A/B/C layout)");
    cmd->add_option("--split", a.split, "dataset split (train|test)");
    cmd->add_option("--out-dir", a.out_dir, "output directory");
    cmd->add_option("--checkpoint", a.checkpoint, "checkpoint archive path");
    cmd->add_option("--variant", a.variant, "can|han|dhan");
    cmd->add_option("--mode", a.mode, "removal|detect");
    cmd->add_option("--augment-manifest", a.augment_manifest,
                    "manifest of synthesized triples to merge in");
}

train::TrainConfig build_config(const CommonArgs& a) {
    train::TrainConfig cfg;
    if (!a.config_file.empty()) train::apply_config_file(cfg, a.config_file);
    if (a.seed_given) cfg.seed = a.seed;
    cfg.out_dir = a.out_dir;
    cfg.dhan.variant = variant_from_string(a.variant);
    cfg.dhan.mode = a.mode == "detect" ? Mode::detection_only : Mode::removal_joint;
    return cfg;
}

std::vector<data::Triple> load_dataset(const CommonArgs& a, bool need_masks) {
    require(!a.dataset_root.empty(), "missing --dataset-root");
    data::DatasetSpec spec{a.dataset_root, a.split, need_masks};
    auto triples = data::load_triples(spec);
    if (!a.augment_manifest.empty())
        triples = data::merge_datasets(std::move(triples), a.augment_manifest);
    return triples;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"ghost-free shadow removal toolkit"};
    app.require_subcommand(1);

    CommonArgs args;
    bool identity = false, per_pixel = false, rms_mode = false, grid = false;
    int k_masks = 3;
    std::string free_dir, mask_dir, input_path;

    auto* c_train = app.add_subcommand("train-removal", "train the removal network");
    auto* c_detect = app.add_subcommand("train-detect", "train the detection-only network");
    auto* c_synth = app.add_subcommand("train-synth", "train the shadow matting GAN");
    auto* c_aug = app.add_subcommand("synth-dataset", "synthesize an augmented dataset");
    auto* c_eval = app.add_subcommand("eval", "evaluate a checkpoint on a dataset");
    auto* c_infer = app.add_subcommand("infer", "run inference on images");
    for (auto* c : {c_train, c_detect, c_synth, c_aug, c_eval, c_infer})
        add_common(c, args);

    c_aug->add_option("--free-dir", free_dir, "shadow-free image pool")->required();
    c_aug->add_option("--mask-dir", mask_dir, "shadow mask pool")->required();
    c_aug->add_option("-k", k_masks, "masks per free image (default 3)");
    c_eval->add_flag("--identity", identity, "score the shadow input itself");
    c_eval->add_flag("--per-pixel", per_pixel, "pool regions across the set");
    c_eval->add_flag("--rms", rms_mode, "strict root-mean-square LAB error");
    c_infer->add_option("--input", input_path, "image file or directory")->required();
    c_infer->add_flag("--grid", grid, "also write input|mask|prediction grids");

    CLI11_PARSE(app, argc, argv);

    try {
        if (c_train->parsed()) {
            auto cfg = build_config(args);
            auto triples = load_dataset(args, /*need_masks=*/true);
            if (!args.checkpoint.empty()) cfg.init_checkpoint = args.checkpoint;
            auto res = train::train_removal(cfg, triples);
            std::cout << "done: " << res.logs.size() << " steps, checkpoint "
                      << res.last_checkpoint.string() << "\n";
        } else if (c_detect->parsed()) {
            auto cfg = build_config(args);
            auto res = train::train_detection(cfg, load_dataset(args, true));
            std::cout << "done: " << res.logs.size() << " steps, checkpoint "
                      << res.last_checkpoint.string() << "\n";
        } else if (c_synth->parsed()) {
            auto cfg = build_config(args);
            auto res = train::train_smgan(cfg, load_dataset(args, true));
            std::cout << "done: " << res.logs.size() << " steps, checkpoint "
                      << res.last_checkpoint.string() << "\n";
        } else if (c_aug->parsed()) {
            require(!args.checkpoint.empty(), "missing --checkpoint");
            auto gen = train::load_smgan_checkpoint(args.checkpoint);
            const auto n = train::augment_dataset(free_dir, mask_dir, gen,
                                                  args.out_dir, k_masks, args.seed);
            std::cout << "wrote " << n << " synthesized triples under "
                      << args.out_dir << "\n";
        } else if (c_eval->parsed()) {
            auto triples = load_dataset(args, true);
            fs::create_directories(args.out_dir);
            const fs::path csv = fs::path(args.out_dir) / "eval.csv";
            if (args.mode == "detect") {
                require(!args.checkpoint.empty(), "missing --checkpoint");
                auto model = train::load_dhan_checkpoint(args.checkpoint);
                auto agg = train::evaluate_detection(model, triples, csv);
                std::cout << "images=" << agg.images
                          << " BER=" << (agg.ber ? std::to_string(*agg.ber) : "-")
                          << " S=" << (agg.ber_s ? std::to_string(*agg.ber_s) : "-")
                          << " NS=" << (agg.ber_ns ? std::to_string(*agg.ber_ns) : "-")
                          << "\n";
            } else {
                train::EvalOptions opts;
                opts.identity = identity;
                opts.per_pixel_aggregate = per_pixel;
                opts.lab_mode = rms_mode ? metrics::LabErrorMode::rms
                                         : metrics::LabErrorMode::mean_abs;
                std::optional<DhanModel<float>> model;
                if (!identity) {
                    require(!args.checkpoint.empty(), "missing --checkpoint");
                    model.emplace(train::load_dhan_checkpoint(args.checkpoint));
                }
                auto agg = train::evaluate_removal(
                    model ? &*model : nullptr, triples, csv, opts);
                auto str = [](const std::optional<double>& v) {
                    return v ? std::to_string(*v) : std::string("-");
                };
                std::cout << "images=" << agg.images << " S=" << str(agg.rmse_s)
                          << " NS=" << str(agg.rmse_ns)
                          << " RMSE=" << str(agg.rmse_all)
                          << " PSNR-S=" << str(agg.psnr_s)
                          << " SSIM-S=" << str(agg.ssim_s) << "\n";
            }
            std::cout << "per-image report: " << csv.string() << "\n";
        } else if (c_infer->parsed()) {
            require(!args.checkpoint.empty(), "missing --checkpoint");
            auto model = train::load_dhan_checkpoint(args.checkpoint);
            std::vector<fs::path> inputs;
            if (fs::is_directory(input_path)) {
                for (auto& e : fs::directory_iterator(input_path))
                    if (e.path().extension() == ".png") inputs.push_back(e.path());
                std::sort(inputs.begin(), inputs.end());
            } else {
                inputs.push_back(input_path);
            }
            const auto n = train::infer(model, inputs, args.out_dir, grid);
            std::cout << "wrote outputs for " << n << " image(s) under "
                      << args.out_dir << "\n";
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
