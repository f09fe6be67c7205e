// SPDX-License-Identifier: Apache-2.0
//
// Optimization loops for shadow removal, detection, and shadow synthesis,
// plus evaluation, inference, and dataset augmentation drivers.
#pragma once

#include <filesystem>
#include <optional>
#include <vector>

#include "deshade/adversarial.hpp"
#include "deshade/checkpoint.hpp"
#include "deshade/data.hpp"
#include "deshade/dhan.hpp"
#include "deshade/losses.hpp"
#include "deshade/metrics.hpp"
#include "deshade/smgan.hpp"

namespace deshade::train {

struct TrainConfig {
    double lr_generator = 2e-4;
    double lr_discriminator = 1e-4;
    double beta1 = 0.9, beta2 = 0.999;
    int epochs = 150;  // 100 for synthesis, 60 for augmented removal
    unsigned seed = 0;
    int checkpoint_every = 1;  // epochs
    long max_steps = -1;       // cap for smoke runs; -1 means epochs*dataset
    int resize_min = 256, resize_max = 480;
    bool use_adversarial = true;
    LossWeights weights;
    DhanConfig dhan;
    SmganConfig smgan;
    ExtractorConfig loss_extractor;  // perceptual-loss feature stages
    int disc_base_channels = 64;
    std::filesystem::path out_dir = "out";
    std::optional<std::filesystem::path> init_checkpoint;
};

// key = value schema; unknown keys are an error. See README for the list.
void apply_config_file(TrainConfig& cfg, const std::filesystem::path& file);

struct StepLog {
    long step;
    double total, adv, perceptual, bce;
};

struct TrainResult {
    std::vector<StepLog> logs;
    std::filesystem::path last_checkpoint;
};

// --- checkpoints -------------------------------------------------------------

void save_dhan_checkpoint(const std::filesystem::path& path,
                          const DhanModel<float>& model,
                          const PatchDiscriminator<float>* disc, long step);
DhanModel<float> load_dhan_checkpoint(const std::filesystem::path& path);

void save_smgan_checkpoint(const std::filesystem::path& path,
                           const MattingGenerator<float>& gen,
                           const PatchDiscriminator<float>* disc, long step);
MattingGenerator<float> load_smgan_checkpoint(const std::filesystem::path& path);

// --- training ----------------------------------------------------------------

TrainResult train_removal(const TrainConfig& cfg,
                          const std::vector<data::Triple>& triples);
TrainResult train_detection(const TrainConfig& cfg,
                            const std::vector<data::Triple>& triples);
TrainResult train_smgan(const TrainConfig& cfg,
                        const std::vector<data::Triple>& triples);

// --- evaluation & inference --------------------------------------------------

struct EvalOptions {
    bool identity = false;  // score the shadow input itself
    metrics::LabErrorMode lab_mode = metrics::LabErrorMode::mean_abs;
    bool per_pixel_aggregate = false;  // pool regions across the set
};

struct RemovalAggregate {
    std::optional<double> rmse_s, rmse_ns, rmse_all, psnr_s, ssim_s;
    std::size_t images = 0;
};

RemovalAggregate evaluate_removal(const DhanModel<float>* model,
                                  const std::vector<data::Triple>& triples,
                                  const std::filesystem::path& csv_path,
                                  const EvalOptions& opts = {});

struct DetectionAggregate {
    std::optional<double> ber, ber_s, ber_ns;
    std::size_t images = 0;
};

DetectionAggregate evaluate_detection(const DhanModel<float>& model,
                                      const std::vector<data::Triple>& triples,
                                      const std::filesystem::path& csv_path);

// Writes <stem>_pred.png and <stem>_mask.png (plus an input|mask|prediction
// grid when requested) for each readable input.
std::size_t infer(const DhanModel<float>& model,
                  const std::vector<std::filesystem::path>& inputs,
                  const std::filesystem::path& out_dir, bool grid = false);

// --- augmentation ------------------------------------------------------------

// For each shadow-free image, draws k masks (without replacement when the
// pool allows), synthesizes shadows, and writes A/B/C plus a manifest under
// out_root. Returns the number of triples written.
std::size_t augment_dataset(const std::filesystem::path& free_dir,
                            const std::filesystem::path& mask_dir,
                            const MattingGenerator<float>& gen,
                            const std::filesystem::path& out_root, int k,
                            unsigned seed);

}  // namespace deshade::train
