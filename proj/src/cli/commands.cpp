#include "crowdnoise/cli/commands.hpp"

#include "crowdnoise/binary_io.hpp"
#include "crowdnoise/engine/checkpoint.hpp"
#include "crowdnoise/errors.hpp"
#include "crowdnoise/labelcraft/dataset.hpp"
#include "crowdnoise/labelcraft/density.hpp"
#include "crowdnoise/labelcraft/formats.hpp"
#include "crowdnoise/metrics/report.hpp"
#include "crowdnoise/modelzoo/builders.hpp"
#include "crowdnoise/modelzoo/predict.hpp"
#include "crowdnoise/pipeline/experiment.hpp"
#include "crowdnoise/pipeline/labels.hpp"
#include "crowdnoise/random.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <iostream>
#include <optional>

namespace fs = std::filesystem;
using nlohmann::json;

namespace crowdnoise::cli {

namespace {

// Bad input discovered after flag parsing that is still a usage problem.
struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct Globals {
    std::optional<std::uint64_t> seed;
    std::string out;
    std::string config;
    std::size_t threads = 1;
    bool quiet = false;
};

json read_config(const std::string& path) {
    if (path.empty()) throw UsageError("--config is required");
    std::string text;
    try {
        text = io::read_text(path);
    } catch (const IoError& e) {
        throw UsageError(std::string("cannot read config: ") + e.what());
    }
    try {
        return json::parse(text);
    } catch (const json::parse_error& e) {
        throw UsageError("cannot parse config " + path + ": " + e.what());
    }
}

fs::path require_out(const Globals& g) {
    if (g.out.empty()) throw UsageError("--out is required");
    std::error_code ec;
    fs::create_directories(g.out, ec);
    if (ec) throw IoError(g.out, ec.message());
    return g.out;
}

std::uint64_t seed_or(const Globals& g, std::uint64_t fallback) { return g.seed.value_or(fallback); }

pipeline::ProgressFn progress_to(std::ostream& err, bool quiet) {
    if (quiet) return {};
    return [&err](const std::string& line) { err << line << '\n'; };
}

// Runs `fn` as the named stage so that runtime failures report where they happened.
template <typename Fn>
void as_stage(const std::string& name, Fn&& fn) {
    try {
        fn();
    } catch (const pipeline::StageError&) {
        throw;
    } catch (const UsageError&) {
        throw;
    } catch (const InvalidArgument&) {
        throw;
    } catch (const std::exception& e) {
        throw pipeline::StageError(name, e.what());
    }
}

std::vector<labelcraft::DensityMap> ground_truth(const labelcraft::DatasetManifest& gt) {
    std::vector<labelcraft::DensityMap> maps;
    for (const auto& e : gt.images) maps.push_back(labelcraft::read_density(e.density_q_path));
    return maps;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Crowd-counting label-noise experiments on synthetic scenes", "crowdnoise"};
    app.set_version_flag("--version",
                         "crowdnoise 1.0.0\n"
                         "checkpoint format NNCK v" + std::to_string(engine::kCheckpointVersion) + "\n"
                         "density format DMAP v" + std::to_string(labelcraft::kDensityFormatVersion) + "\n"
                         "images PGM (P5, 8-bit); annotations JSON [[x, y], ...]; manifests, configs and reports JSON");

    Globals g;
    std::uint64_t seed_value = 0;
    auto* seed_opt = app.add_option("--seed", seed_value, "Master seed; per-stage seeds are derived from it");
    app.add_option("--out", g.out, "Output directory (created if absent)");
    app.add_option("--config", g.config, "JSON config file");
    app.add_option("--threads", g.threads, "Worker threads; results do not depend on it")->check(CLI::PositiveNumber);
    app.add_flag("--quiet", g.quiet, "Suppress progress output");
    app.require_subcommand(1);

    // gen-data
    auto* gen = app.add_subcommand("gen-data", "Synthesize a dataset from a scene config");
    gen->fallthrough();
    std::size_t gen_n = 0;
    double gen_sigma = labelcraft::kDefaultSigma;
    gen->add_option("-n,--n-images", gen_n, "Number of images (overrides the config)");
    gen->add_option("--sigma", gen_sigma, "Gaussian sigma for the density maps")->check(CLI::PositiveNumber);

    // make-labels
    auto* mk = app.add_subcommand("make-labels", "Render perfect or missing-dot labels for a dataset");
    mk->fallthrough();
    std::string mk_manifest, mk_regime = "perfect";
    double mk_fraction = 0.3, mk_sigma = labelcraft::kDefaultSigma;
    mk->add_option("--manifest", mk_manifest, "Dataset manifest")->required();
    mk->add_option("--regime", mk_regime, "perfect | missing")->check(CLI::IsMember({"perfect", "missing"}));
    mk->add_option("--fraction", mk_fraction, "Fraction of dots removed per image")->check(CLI::Range(0.0, 1.0));
    mk->add_option("--sigma", mk_sigma, "Gaussian sigma")->check(CLI::PositiveNumber);

    // train
    auto* tr = app.add_subcommand("train", "Train a model on a label set");
    tr->fallthrough();
    std::string tr_images, tr_labels, tr_val, tr_model = "mcnn";
    double tr_width = 1.0;
    pipeline::TrainConfig tr_config;
    tr->add_option("--images", tr_images, "Manifest of the training images")->required();
    tr->add_option("--labels", tr_labels, "Label manifest for the training images (default: --images)");
    tr->add_option("--val", tr_val, "Manifest of validation images with perfect labels")->required();
    tr->add_option("--model", tr_model, "csrnet_lite | mcnn")->check(CLI::IsMember({"csrnet_lite", "mcnn"}));
    tr->add_option("--width", tr_width, "Channel width multiplier")->check(CLI::PositiveNumber);
    tr->add_option("--lr", tr_config.lr, "Adam learning rate")->check(CLI::PositiveNumber);
    tr->add_option("--batch-size", tr_config.batch_size, "Mini-batch size")->check(CLI::PositiveNumber);
    tr->add_option("--epochs", tr_config.max_epochs, "Maximum epochs")->check(CLI::PositiveNumber);
    tr->add_option("--patience", tr_config.patience, "Early-stopping patience in epochs")->check(CLI::PositiveNumber);
    bool tr_no_augment = false;
    tr->add_flag("--no-augment", tr_no_augment, "Disable brightness, contrast and flip augmentation");

    // annotate
    auto* an = app.add_subcommand("annotate", "Write annotator predictions as imperfect labels");
    an->fallthrough();
    std::string an_checkpoint, an_manifest;
    an->add_option("--checkpoint", an_checkpoint, "Annotator checkpoint")->required();
    an->add_option("--manifest", an_manifest, "Dataset manifest")->required();

    // eval
    auto* ev = app.add_subcommand("eval", "Score predictions against ground truth");
    ev->fallthrough();
    std::string ev_gt, ev_pred, ev_checkpoint, ev_dataset = "synthetic", ev_model, ev_regime;
    std::size_t ev_grid = 4;
    ev->add_option("--gt", ev_gt, "Ground-truth manifest")->required();
    auto* ev_pred_opt = ev->add_option("--pred", ev_pred, "Label manifest holding the predictions");
    auto* ev_ckpt_opt = ev->add_option("--checkpoint", ev_checkpoint, "Checkpoint to predict with");
    ev_pred_opt->excludes(ev_ckpt_opt);
    ev->add_option("--dataset", ev_dataset, "Dataset name for the table");
    ev->add_option("--model", ev_model, "Model name for the table");
    ev->add_option("--labels", ev_regime, "Label regime for the table");
    ev->add_option("--grid", ev_grid, "GAME grid size")->check(CLI::PositiveNumber);

    // experiment
    auto* ex = app.add_subcommand("experiment", "Run the full label-regime experiment from a config");
    ex->fallthrough();

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kExitOk : kExitUsage;
    }
    if (seed_opt->count() > 0) g.seed = seed_value;

    const auto progress = progress_to(err, g.quiet);
    try {
        if (gen->parsed()) {
            json j = read_config(g.config);
            if (!j.is_object()) throw InvalidArgument("config: top level must be an object");
            json wrapped = j.contains("scene") ? j : json{{"scene", j}};
            if (g.seed) {
                wrapped["seed"] = *g.seed;
                wrapped["scene"].erase("seed");
            }
            const auto config = pipeline::experiment_config_from_json(wrapped);
            const std::size_t n = gen_n > 0 ? gen_n : config.n_images;
            const fs::path dir = require_out(g);
            as_stage("gen-data", [&] {
                labelcraft::generate_dataset(*config.scene, n, dir, gen_sigma, 4);
                out << (dir / "manifest.json").string() << '\n';
            });
        } else if (mk->parsed()) {
            const fs::path dir = require_out(g);
            as_stage("make-labels", [&] {
                const auto manifest = labelcraft::load_manifest(mk_manifest);
                if (mk_regime == "perfect") {
                    pipeline::make_perfect_labels(manifest, mk_sigma, dir);
                } else {
                    pipeline::make_missing_labels(manifest, mk_fraction, derive_seed(seed_or(g, 1), "missing"),
                                                  mk_sigma, dir);
                }
                out << (dir / "manifest.json").string() << '\n';
            });
        } else if (tr->parsed()) {
            const fs::path dir = require_out(g);
            tr_config.augment = tr_no_augment ? pipeline::AugmentOptions{false, false, false} : pipeline::AugmentOptions{};
            tr_config.threads = g.threads;
            const auto spec = modelzoo::spec_by_name(tr_model, tr_width, 1);
            const std::uint64_t seed = seed_or(g, 1);
            tr_config.seed = derive_seed(seed, "train:" + spec.name);
            tr_config.validate();
            as_stage("train", [&] {
                const auto images = labelcraft::load_manifest(tr_images);
                const auto labels = tr_labels.empty() ? images : labelcraft::load_manifest(tr_labels);
                const auto val_manifest = labelcraft::load_manifest(tr_val);
                const auto train_set = pipeline::load_labelled(images, labels);
                const auto val_set = pipeline::load_labelled(val_manifest, val_manifest);
                const auto init = engine::init_network<float>(spec, derive_seed(seed, "init:" + spec.name));
                const auto result = pipeline::train(init, train_set, val_set, tr_config, [&](const auto& r) {
                    if (progress) {
                        progress("epoch " + std::to_string(r.epoch) + " loss " + std::to_string(r.train_loss) +
                                 " val_mae " + std::to_string(r.val_mae));
                    }
                });
                engine::save_checkpoint(dir / "checkpoint.nnck", result.state);
                io::write_text(dir / "curve.csv", pipeline::curve_csv(result.curve));
                out << (dir / "checkpoint.nnck").string() << '\n';
            });
        } else if (an->parsed()) {
            const fs::path dir = require_out(g);
            as_stage("annotate", [&] {
                const auto state = engine::load_checkpoint(an_checkpoint);
                pipeline::annotate(state, labelcraft::load_manifest(an_manifest), dir);
                out << (dir / "manifest.json").string() << '\n';
            });
        } else if (ev->parsed()) {
            if (ev_pred.empty() == ev_checkpoint.empty()) throw UsageError("eval needs exactly one of --pred or --checkpoint");
            const fs::path dir = require_out(g);
            as_stage("eval", [&] {
                const auto gt = labelcraft::load_manifest(ev_gt);
                const auto gts = ground_truth(gt);
                std::vector<labelcraft::DensityMap> preds;
                std::string model = ev_model, regime = ev_regime;
                if (!ev_checkpoint.empty()) {
                    const auto state = engine::load_checkpoint(ev_checkpoint);
                    for (const auto& e : gt.images) {
                        preds.push_back(modelzoo::predict_density(state, labelcraft::read_pgm(e.image_path)));
                    }
                    if (model.empty()) model = state.spec.name;
                } else {
                    const auto pred = labelcraft::load_manifest(ev_pred);
                    for (const auto& e : gt.images) preds.push_back(labelcraft::read_density(pred.find(e.id).density_q_path));
                    if (model.empty()) model = "labels";
                    if (regime.empty()) regime = pred.regime;
                }
                if (regime.empty()) regime = "-";
                auto report = metrics::evaluate(preds, gts, metrics::GameConfig{ev_grid});
                report.model = model;
                report.regime = regime;
                report.dataset = ev_dataset;
                io::write_text(dir / "metrics.json", metrics::to_json(report).dump(2) + "\n");
                const std::vector<metrics::MetricsReport> rows{report};
                out << metrics::render_table(rows);
            });
        } else if (ex->parsed()) {
            json j = read_config(g.config);
            if (g.seed && j.is_object()) j["seed"] = *g.seed;
            const auto config = pipeline::experiment_config_from_json(j);
            const fs::path dir = require_out(g);
            const auto report = pipeline::run_experiment(config, dir, g.threads, progress);
            out << metrics::render_table(report.rows);
        }
    } catch (const UsageError& e) {
        err << "error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const InvalidArgument& e) {
        err << "error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kExitRuntime;
    }
    return kExitOk;
}

int run_cli(int argc, char** argv) {
    std::vector<std::string> args;
    for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
    return run_cli(args, std::cout, std::cerr);
}

}  // namespace crowdnoise::cli
