// SPDX-License-Identifier: Apache-2.0
#include "deshade/trainer.hpp"

#include <cmath>
#include <fstream>
#include <iostream>
#include <sstream>

namespace deshade::train {

namespace fs = std::filesystem;

namespace {

std::vector<int> parse_int_list(const std::string& s) {
    std::vector<int> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) out.push_back(std::stoi(item));
    return out;
}

struct CsvLog {
    std::ofstream os;
    explicit CsvLog(const fs::path& path) : os(path) {
        require(os.good(), "cannot write log: " + path.string());
        os << "step,total,adv,perceptual,bce\n";
    }
    void row(const StepLog& l) {
        os << l.step << "," << l.total << "," << l.adv << "," << l.perceptual
           << "," << l.bce << "\n";
        os.flush();
    }
};

Var<float> zero_scalar() { return make_var<float>(Tensor<float>(1, 1, 1)); }

fs::path epoch_ckpt_path(const fs::path& out_dir, int epoch) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "ckpt_epoch_%04d.ckpt", epoch);
    return out_dir / buf;
}

}  // namespace

void apply_config_file(TrainConfig& cfg, const fs::path& file) {
    std::ifstream is(file);
    require(is.good(), "cannot open config file: " + file.string());
    std::string line;
    int lineno = 0;
    while (std::getline(is, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        const auto eq = line.find('=');
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        require(eq != std::string::npos,
                "config line " + std::to_string(lineno) + ": expected key = value");
        auto trim = [](std::string s) {
            const auto a = s.find_first_not_of(" \t\r");
            const auto b = s.find_last_not_of(" \t\r");
            return a == std::string::npos ? std::string() : s.substr(a, b - a + 1);
        };
        const std::string key = trim(line.substr(0, eq));
        const std::string val = trim(line.substr(eq + 1));
        if (key == "lr_generator") cfg.lr_generator = std::stod(val);
        else if (key == "lr_discriminator") cfg.lr_discriminator = std::stod(val);
        else if (key == "beta1") cfg.beta1 = std::stod(val);
        else if (key == "beta2") cfg.beta2 = std::stod(val);
        else if (key == "epochs") cfg.epochs = std::stoi(val);
        else if (key == "seed") cfg.seed = static_cast<unsigned>(std::stoul(val));
        else if (key == "checkpoint_every") cfg.checkpoint_every = std::stoi(val);
        else if (key == "max_steps") cfg.max_steps = std::stol(val);
        else if (key == "resize_min") cfg.resize_min = std::stoi(val);
        else if (key == "resize_max") cfg.resize_max = std::stoi(val);
        else if (key == "use_adversarial") cfg.use_adversarial = val == "true" || val == "1";
        else if (key == "lambda_perceptual") cfg.weights.lambda_perceptual = std::stod(val);
        else if (key == "alpha_attention") cfg.weights.alpha_attention = std::stod(val);
        else if (key == "depth") cfg.dhan.depth = std::stoi(val);
        else if (key == "base_channels") cfg.dhan.base_channels = std::stoi(val);
        else if (key == "variant") cfg.dhan.variant = variant_from_string(val);
        else if (key == "mode")
            cfg.dhan.mode = val == "detect" ? Mode::detection_only : Mode::removal_joint;
        else if (key == "leaky_slope") cfg.dhan.leaky_slope = std::stod(val);
        else if (key == "spp_scales") cfg.dhan.spp_scales = parse_int_list(val);
        else if (key == "matte_channels") {
            cfg.dhan.matte_channels = std::stoi(val);
            cfg.smgan.matte_channels = std::stoi(val);
        } else if (key == "extractor_channels")
            cfg.dhan.extractor.stage_channels = parse_int_list(val);
        else if (key == "loss_extractor_channels")
            cfg.loss_extractor.stage_channels = parse_int_list(val);
        else if (key == "smgan_base_channels") cfg.smgan.base_channels = std::stoi(val);
        else if (key == "res_blocks") cfg.smgan.res_blocks = std::stoi(val);
        else if (key == "disc_base_channels") cfg.disc_base_channels = std::stoi(val);
        else
            throw std::runtime_error("config line " + std::to_string(lineno) +
                                     ": unknown key '" + key + "'");
    }
}

// --- checkpoints -------------------------------------------------------------

void save_dhan_checkpoint(const fs::path& path, const DhanModel<float>& model,
                          const PatchDiscriminator<float>* disc, long step) {
    ckpt::Archive a;
    a.meta = {{"kind", "dhan"},
              {"config", model.cfg.to_json()},
              {"seed", model.seed},
              {"step", step}};
    a.tensors = model.params.state_dict();
    for (auto& [name, t] : model.extractor->params.state_dict())
        a.tensors.emplace("extractor." + name, t);
    if (disc)
        for (auto& [name, t] : disc->params.state_dict()) a.tensors.emplace(name, t);
    ckpt::save(path.string(), a);
}

DhanModel<float> load_dhan_checkpoint(const fs::path& path) {
    const auto a = ckpt::load(path.string());
    require(a.meta.value("kind", "") == "dhan",
            "checkpoint kind mismatch: expected a dhan checkpoint in " +
                path.string());
    DhanModel<float> model(DhanConfig::from_json(a.meta.at("config")),
                           a.meta.at("seed").get<unsigned>());
    ckpt::load_params_named(model.params, a);
    ckpt::load_params(model.extractor->params, a, "extractor.");
    return model;
}

void save_smgan_checkpoint(const fs::path& path, const MattingGenerator<float>& gen,
                           const PatchDiscriminator<float>* disc, long step) {
    ckpt::Archive a;
    a.meta = {{"kind", "smgan"},
              {"config", gen.cfg.to_json()},
              {"seed", gen.seed},
              {"step", step}};
    a.tensors = gen.params.state_dict();
    if (disc)
        for (auto& [name, t] : disc->params.state_dict()) a.tensors.emplace(name, t);
    ckpt::save(path.string(), a);
}

MattingGenerator<float> load_smgan_checkpoint(const fs::path& path) {
    const auto a = ckpt::load(path.string());
    require(a.meta.value("kind", "") == "smgan",
            "checkpoint kind mismatch: expected an smgan checkpoint in " +
                path.string());
    MattingGenerator<float> gen(SmganConfig::from_json(a.meta.at("config")),
                                a.meta.at("seed").get<unsigned>());
    ckpt::load_params_named(gen.params, a);
    return gen;
}

// --- training ----------------------------------------------------------------

namespace {

// Shared alternating-step loop shell: epoch accounting, CSV logging,
// per-epoch checkpoints, non-finite abort with the last checkpoint kept.
template <class StepFn, class SaveFn>
TrainResult run_loop(const TrainConfig& cfg, std::size_t dataset_size,
                     StepFn step_fn, SaveFn save_fn) {
    require(dataset_size > 0, "training: empty dataset");
    fs::create_directories(cfg.out_dir);
    CsvLog log(cfg.out_dir / "train_log.csv");
    TrainResult result;
    long step = 0;
    const long cap = cfg.max_steps >= 0
                         ? cfg.max_steps
                         : static_cast<long>(cfg.epochs) * dataset_size;
    for (int epoch = 1; epoch <= cfg.epochs && step < cap; ++epoch) {
        for (std::size_t i = 0; i < dataset_size && step < cap; ++i) {
            ++step;
            StepLog l = step_fn(step);
            if (!std::isfinite(l.total)) {
                const std::string kept =
                    result.last_checkpoint.empty()
                        ? "none"
                        : result.last_checkpoint.string();
                throw std::runtime_error(
                    "training aborted at step " + std::to_string(step) +
                    ": non-finite loss (last good checkpoint: " + kept + ")");
            }
            log.row(l);
            result.logs.push_back(l);
        }
        if (epoch % cfg.checkpoint_every == 0 || step >= cap) {
            result.last_checkpoint = epoch_ckpt_path(cfg.out_dir, epoch);
            save_fn(result.last_checkpoint, step);
        }
    }
    if (result.last_checkpoint.empty()) {
        result.last_checkpoint = epoch_ckpt_path(cfg.out_dir, cfg.epochs);
        save_fn(result.last_checkpoint, step);
    }
    return result;
}

}  // namespace

TrainResult train_removal(const TrainConfig& cfg,
                          const std::vector<data::Triple>& triples) {
    require(!triples.empty(), "train_removal: empty dataset");
    DhanConfig dcfg = cfg.dhan;
    dcfg.mode = Mode::removal_joint;
    DhanModel<float> model = cfg.init_checkpoint
                                 ? load_dhan_checkpoint(*cfg.init_checkpoint)
                                 : DhanModel<float>(dcfg, cfg.seed);
    require(model.cfg.mode == Mode::removal_joint,
            "train_removal: init checkpoint is not a removal model");
    auto loss_ext = StageExtractor<float>::random_init(cfg.loss_extractor,
                                                       cfg.seed ^ 0x5151u);
    PatchDiscriminator<float> disc({6, cfg.disc_base_channels}, cfg.seed ^ 0x7777u);
    Adam<float> opt_g(static_cast<float>(cfg.lr_generator),
                      static_cast<float>(cfg.beta1), static_cast<float>(cfg.beta2));
    Adam<float> opt_d(static_cast<float>(cfg.lr_discriminator),
                      static_cast<float>(cfg.beta1), static_cast<float>(cfg.beta2));

    auto step_fn = [&](long step) {
        const auto t = data::training_batch(triples, cfg.seed, step,
                                            cfg.resize_min, cfg.resize_max);
        auto out = model.forward(t.shadow);
        auto shadow_const = make_var<float>(t.shadow);
        auto free_const = make_var<float>(t.free);

        auto perc = perceptual_loss(out.pred, free_const, loss_ext, cfg.weights);
        auto bce = t.mask.empty() ? zero_scalar()
                                  : attention_bce(out.mask, t.mask);
        Var<float> adv = zero_scalar();
        if (cfg.use_adversarial) {
            auto fake_logits = disc.discriminate(shadow_const, out.pred);
            adv = ops::bce_logits_const(fake_logits, 1.0f);
        }
        auto parts = generator_objective(adv, perc, bce, cfg.weights);
        model.params.zero_grad();
        backward(parts.total);
        opt_g.step(model.params);

        if (cfg.use_adversarial) {
            auto real_logits = disc.discriminate(shadow_const, free_const);
            auto fake_logits = disc.discriminate(shadow_const, detach(out.pred));
            auto terms = gan_loss_terms(real_logits, fake_logits);
            disc.params.zero_grad();
            backward(terms.d_term);
            opt_d.step(disc.params);
        }
        return StepLog{step, static_cast<double>(parts.total->scalar()),
                       static_cast<double>(parts.adv->scalar()),
                       static_cast<double>(parts.perceptual->scalar()),
                       static_cast<double>(parts.bce->scalar())};
    };
    auto save_fn = [&](const fs::path& path, long step) {
        save_dhan_checkpoint(path, model, &disc, step);
    };
    return run_loop(cfg, triples.size(), step_fn, save_fn);
}

TrainResult train_detection(const TrainConfig& cfg,
                            const std::vector<data::Triple>& triples) {
    require(!triples.empty(), "train_detection: empty dataset");
    for (const auto& t : triples)
        require(!t.mask.empty(), "train_detection: dataset has no masks");
    DhanConfig dcfg = cfg.dhan;
    dcfg.mode = Mode::detection_only;
    DhanModel<float> model(dcfg, cfg.seed);
    Adam<float> opt(static_cast<float>(cfg.lr_generator),
                    static_cast<float>(cfg.beta1), static_cast<float>(cfg.beta2));

    auto step_fn = [&](long step) {
        const auto t = data::training_batch(triples, cfg.seed, step,
                                            cfg.resize_min, cfg.resize_max);
        auto out = model.forward(t.shadow);
        auto bce = attention_bce(out.mask, t.mask);
        auto total = ops::weighted_sum<float>(
            {{bce, static_cast<float>(cfg.weights.alpha_attention)}});
        model.params.zero_grad();
        backward(total);
        opt.step(model.params);
        return StepLog{step, static_cast<double>(total->scalar()), 0.0, 0.0,
                       static_cast<double>(bce->scalar())};
    };
    auto save_fn = [&](const fs::path& path, long step) {
        save_dhan_checkpoint(path, model, nullptr, step);
    };
    return run_loop(cfg, triples.size(), step_fn, save_fn);
}

TrainResult train_smgan(const TrainConfig& cfg,
                        const std::vector<data::Triple>& triples) {
    require(!triples.empty(), "train_smgan: empty dataset");
    for (const auto& t : triples)
        require(!t.mask.empty(), "train_smgan: dataset has no masks");
    MattingGenerator<float> gen(cfg.smgan, cfg.seed);
    auto loss_ext = StageExtractor<float>::random_init(cfg.loss_extractor,
                                                       cfg.seed ^ 0x5151u);
    PatchDiscriminator<float> disc({6, cfg.disc_base_channels}, cfg.seed ^ 0x7777u);
    Adam<float> opt_g(static_cast<float>(cfg.lr_generator),
                      static_cast<float>(cfg.beta1), static_cast<float>(cfg.beta2));
    Adam<float> opt_d(static_cast<float>(cfg.lr_discriminator),
                      static_cast<float>(cfg.beta1), static_cast<float>(cfg.beta2));

    auto step_fn = [&](long step) {
        const auto t = data::training_batch(triples, cfg.seed, step,
                                            cfg.resize_min, cfg.resize_max);
        auto free_const = make_var<float>(t.free);
        auto shadow_const = make_var<float>(t.shadow);
        auto matte = gen.forward(t.free, t.mask);
        auto synth = ops::gate(free_const, matte);  // Eq.: shadow' = matte * free

        auto perc = perceptual_loss(synth, shadow_const, loss_ext, cfg.weights);
        Var<float> adv = zero_scalar();
        if (cfg.use_adversarial) {
            auto fake_logits = disc.discriminate(free_const, synth);
            adv = ops::bce_logits_const(fake_logits, 1.0f);
        }
        auto total = ops::weighted_sum<float>(
            {{adv, 1.0f},
             {perc, static_cast<float>(cfg.weights.lambda_perceptual)}});
        gen.params.zero_grad();
        backward(total);
        opt_g.step(gen.params);

        if (cfg.use_adversarial) {
            auto real_logits = disc.discriminate(free_const, shadow_const);
            auto fake_logits = disc.discriminate(free_const, detach(synth));
            auto terms = gan_loss_terms(real_logits, fake_logits);
            disc.params.zero_grad();
            backward(terms.d_term);
            opt_d.step(disc.params);
        }
        return StepLog{step, static_cast<double>(total->scalar()),
                       static_cast<double>(adv->scalar()),
                       static_cast<double>(perc->scalar()), 0.0};
    };
    auto save_fn = [&](const fs::path& path, long step) {
        save_smgan_checkpoint(path, gen, &disc, step);
    };
    return run_loop(cfg, triples.size(), step_fn, save_fn);
}

// --- evaluation --------------------------------------------------------------

namespace {

std::string opt_str(const std::optional<double>& v) {
    return v ? std::to_string(*v) : std::string();
}

}  // namespace

RemovalAggregate evaluate_removal(const DhanModel<float>* model,
                                  const std::vector<data::Triple>& triples,
                                  const fs::path& csv_path,
                                  const EvalOptions& opts) {
    require(model != nullptr || opts.identity,
            "evaluate_removal: no model and identity mode off");
    std::ofstream os(csv_path);
    require(os.good(), "cannot write report: " + csv_path.string());
    os << "id,rmse_s,rmse_ns,rmse_all,psnr_s,ssim_s\n";

    RemovalAggregate agg;
    double sum_s = 0, sum_ns = 0, sum_all = 0, sum_psnr = 0, sum_ssim = 0;
    double wsum_s = 0, wsum_ns = 0;
    std::size_t n_s = 0, n_ns = 0, n_all = 0, n_psnr = 0;
    for (const auto& t : triples) {
        img::Image pred =
            opts.identity ? t.shadow
                          : img::clamp01(model->forward(t.shadow).pred->value);
        const auto lab =
            metrics::lab_region_error(pred, t.free, t.mask, opts.lab_mode);
        std::optional<double> psnr, ssim;
        if (lab.n_s > 0) {
            psnr = metrics::psnr_region(pred, t.free, t.mask);
            ssim = metrics::ssim_region(pred, t.free, t.mask);
        }
        os << t.id << "," << opt_str(lab.s) << "," << opt_str(lab.ns) << ","
           << opt_str(lab.all) << "," << opt_str(psnr) << "," << opt_str(ssim)
           << "\n";
        if (lab.s) {
            sum_s += opts.per_pixel_aggregate ? *lab.s * lab.n_s : *lab.s;
            wsum_s += lab.n_s;
            ++n_s;
        }
        if (lab.ns) {
            sum_ns += opts.per_pixel_aggregate ? *lab.ns * lab.n_ns : *lab.ns;
            wsum_ns += lab.n_ns;
            ++n_ns;
        }
        if (lab.all) {
            sum_all += opts.per_pixel_aggregate
                           ? *lab.all * (lab.n_s + lab.n_ns)
                           : *lab.all;
            ++n_all;
        }
        if (psnr) {
            sum_psnr += *psnr;
            sum_ssim += *ssim;
            ++n_psnr;
        }
        ++agg.images;
    }
    if (n_s)
        agg.rmse_s = opts.per_pixel_aggregate ? sum_s / wsum_s : sum_s / n_s;
    if (n_ns)
        agg.rmse_ns = opts.per_pixel_aggregate ? sum_ns / wsum_ns : sum_ns / n_ns;
    if (n_all)
        agg.rmse_all = opts.per_pixel_aggregate ? (sum_s + sum_ns) / (wsum_s + wsum_ns)
                                                : sum_all / n_all;
    if (n_psnr) {
        agg.psnr_s = sum_psnr / n_psnr;
        agg.ssim_s = sum_ssim / n_psnr;
    }
    os << "aggregate," << opt_str(agg.rmse_s) << "," << opt_str(agg.rmse_ns)
       << "," << opt_str(agg.rmse_all) << "," << opt_str(agg.psnr_s) << ","
       << opt_str(agg.ssim_s) << "\n";
    return agg;
}

DetectionAggregate evaluate_detection(const DhanModel<float>& model,
                                      const std::vector<data::Triple>& triples,
                                      const fs::path& csv_path) {
    std::ofstream os(csv_path);
    require(os.good(), "cannot write report: " + csv_path.string());
    os << "id,ber,ber_s,ber_ns\n";
    DetectionAggregate agg;
    double sum = 0, sum_s = 0, sum_ns = 0;
    std::size_t n = 0, ns = 0, nns = 0;
    for (const auto& t : triples) {
        require(!t.mask.empty(), "evaluate_detection: sample without mask: " + t.id);
        const auto out = model.forward(t.shadow);
        const auto rep = metrics::ber(out.mask->value, t.mask);
        os << t.id << "," << opt_str(rep.ber) << "," << opt_str(rep.ber_s) << ","
           << opt_str(rep.ber_ns) << "\n";
        if (rep.ber) { sum += *rep.ber; ++n; }
        if (rep.ber_s) { sum_s += *rep.ber_s; ++ns; }
        if (rep.ber_ns) { sum_ns += *rep.ber_ns; ++nns; }
        ++agg.images;
    }
    if (n) agg.ber = sum / n;
    if (ns) agg.ber_s = sum_s / ns;
    if (nns) agg.ber_ns = sum_ns / nns;
    os << "aggregate," << opt_str(agg.ber) << "," << opt_str(agg.ber_s) << ","
       << opt_str(agg.ber_ns) << "\n";
    return agg;
}

std::size_t infer(const DhanModel<float>& model,
                  const std::vector<fs::path>& inputs, const fs::path& out_dir,
                  bool grid) {
    fs::create_directories(out_dir);
    std::size_t written = 0;
    for (const auto& path : inputs) {
        img::Image input;
        try {
            input = img::load_png(path.string());
        } catch (const std::exception& e) {
            log_warn("infer: skipping " + path.string() + ": " + e.what());
            continue;
        }
        const auto out = model.forward(input);
        const std::string stem = path.stem().string();
        img::Image mask = out.mask->value;
        img::save_png((out_dir / (stem + "_mask.png")).string(), mask);
        img::Image pred;
        if (out.pred) {
            pred = img::clamp01(out.pred->value);
            img::save_png((out_dir / (stem + "_pred.png")).string(), pred);
        }
        if (grid && out.pred) {
            const int h = input.shape.h, w = input.shape.w;
            img::Image g(h, 3 * w, 3);
            for (int y = 0; y < h; ++y)
                for (int x = 0; x < w; ++x)
                    for (int c = 0; c < 3; ++c) {
                        g.at(y, x, c) = input.at(y, x, c);
                        g.at(y, w + x, c) = mask.at(y, x, 0);
                        g.at(y, 2 * w + x, c) = pred.at(y, x, c);
                    }
            img::save_png((out_dir / (stem + "_grid.png")).string(), g);
        }
        ++written;
    }
    return written;
}

// --- augmentation ------------------------------------------------------------

namespace {

std::uint64_t mix64(std::uint64_t a, std::uint64_t b) {
    std::uint64_t z = a * 0x9e3779b97f4a7c15ull + b;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
}

img::Image to_single_channel(const img::Image& m) {
    if (m.shape.c == 1) return m;
    img::Image out(m.shape.h, m.shape.w, 1);
    for (int y = 0; y < m.shape.h; ++y)
        for (int x = 0; x < m.shape.w; ++x) {
            float v = 0;
            for (int c = 0; c < m.shape.c; ++c) v += m.at(y, x, c);
            out.at(y, x, 0) = v / m.shape.c;
        }
    return out;
}

}  // namespace

std::size_t augment_dataset(const fs::path& free_dir, const fs::path& mask_dir,
                            const MattingGenerator<float>& gen,
                            const fs::path& out_root, int k, unsigned seed) {
    require(k >= 1, "augment_dataset: k must be >= 1");
    auto list_pngs = [](const fs::path& dir) {
        std::vector<fs::path> out;
        require(fs::is_directory(dir), "augment_dataset: missing directory " +
                                           dir.string());
        for (auto& e : fs::directory_iterator(dir))
            if (e.is_regular_file() && e.path().extension() == ".png")
                out.push_back(e.path());
        std::sort(out.begin(), out.end());
        return out;
    };
    const auto free_pool = list_pngs(free_dir);
    const auto mask_pool = list_pngs(mask_dir);
    require(!free_pool.empty() && !mask_pool.empty(),
            "augment_dataset: empty free or mask pool");

    fs::create_directories(out_root / "A");
    fs::create_directories(out_root / "B");
    fs::create_directories(out_root / "C");
    const fs::path manifest = out_root / "manifest.jsonl";

    std::size_t written = 0;
    for (std::size_t fi = 0; fi < free_pool.size(); ++fi) {
        img::Image free;
        try {
            free = img::load_png(free_pool[fi].string());
        } catch (const std::exception& e) {
            log_warn("augment_dataset: skipping " + free_pool[fi].string() +
                     ": " + e.what());
            continue;
        }
        // k masks, without replacement when the pool allows
        std::mt19937_64 rng(mix64(seed, fi));
        std::vector<std::size_t> picks;
        if (mask_pool.size() >= static_cast<std::size_t>(k)) {
            std::vector<std::size_t> idx(mask_pool.size());
            for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
            std::shuffle(idx.begin(), idx.end(), rng);
            picks.assign(idx.begin(), idx.begin() + k);
        } else {
            std::uniform_int_distribution<std::size_t> d(0, mask_pool.size() - 1);
            for (int j = 0; j < k; ++j) picks.push_back(d(rng));
        }
        for (int j = 0; j < k; ++j) {
            const auto& mask_path = mask_pool[picks[j]];
            try {
                auto mask = to_single_channel(img::load_png(mask_path.string()));
                mask = img::threshold_mask(
                    img::resize_nearest(mask, free.shape.h, free.shape.w));
                auto [shadow, matte] = gen.synthesize(free, mask);

                const std::string id = free_pool[fi].stem().string() + "__" +
                                       std::to_string(j) + ".png";
                const fs::path pa = out_root / "A" / id;
                const fs::path pb = out_root / "B" / id;
                const fs::path pc = out_root / "C" / id;
                img::save_png(pa.string(), shadow);
                img::save_png(pb.string(), mask);
                img::save_png(pc.string(), free);
                data::append_manifest(
                    manifest,
                    {id, pa.string(), pb.string(), pc.string(), "synthetic",
                     {{"free", free_pool[fi].string()},
                      {"mask", mask_path.string()},
                      {"generator_seed", gen.seed},
                      {"seed", seed}}});
                ++written;
            } catch (const std::exception& e) {
                log_warn("augment_dataset: skipping mask " + mask_path.string() +
                         ": " + e.what());
            }
        }
    }
    return written;
}

}  // namespace deshade::train
