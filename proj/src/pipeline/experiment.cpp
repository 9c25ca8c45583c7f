#include "crowdnoise/pipeline/experiment.hpp"

#include "crowdnoise/binary_io.hpp"
#include "crowdnoise/engine/checkpoint.hpp"
#include "crowdnoise/errors.hpp"
#include "crowdnoise/labelcraft/dataset.hpp"
#include "crowdnoise/modelzoo/builders.hpp"
#include "crowdnoise/modelzoo/predict.hpp"
#include "crowdnoise/pipeline/labels.hpp"
#include "crowdnoise/pipeline/split.hpp"
#include "crowdnoise/random.hpp"

#include <chrono>
#include <type_traits>

namespace fs = std::filesystem;
using nlohmann::json;

namespace crowdnoise::pipeline {

namespace {

template <typename T>
T get_or(const json& j, const char* key, const T& fallback, const std::string& where) {
    if (!j.contains(key)) return fallback;
    if constexpr (std::is_integral_v<T> && std::is_unsigned_v<T> && !std::is_same_v<T, bool>) {
        const json& v = j.at(key);
        if (!v.is_number_integer() || (!v.is_number_unsigned() && v.get<std::int64_t>() < 0)) {
            throw InvalidArgument("config: '" + where + key + "' must be a non-negative integer, got " + j.at(key).dump());
        }
    }
    try {
        return j.at(key).get<T>();
    } catch (const json::exception& e) {
        throw InvalidArgument("config: '" + where + key + "' has the wrong type (" + e.what() + ")");
    }
}

ModelChoice model_from_json(const json& j, const std::string& where) {
    if (!j.is_object()) throw InvalidArgument("config: '" + where + "' must be an object");
    ModelChoice m;
    m.model = get_or<std::string>(j, "model", m.model, where + ".");
    m.width = get_or<double>(j, "width", m.width, where + ".");
    modelzoo::spec_by_name(m.model, m.width, 1);  // validates name and width
    return m;
}

TrainConfig train_from_json(const json& j, TrainConfig t, const std::string& where) {
    if (!j.is_object()) throw InvalidArgument("config: '" + where + "' must be an object");
    const std::string p = where + ".";
    t.lr = get_or<double>(j, "lr", t.lr, p);
    t.batch_size = get_or<std::size_t>(j, "batch_size", t.batch_size, p);
    t.max_epochs = get_or<std::size_t>(j, "max_epochs", t.max_epochs, p);
    t.patience = get_or<std::size_t>(j, "patience", t.patience, p);
    if (j.contains("augment")) {
        const json& a = j["augment"];
        t.augment.brightness = get_or<bool>(a, "brightness", t.augment.brightness, p + "augment.");
        t.augment.contrast = get_or<bool>(a, "contrast", t.augment.contrast, p + "augment.");
        t.augment.flip = get_or<bool>(a, "flip", t.augment.flip, p + "augment.");
    }
    t.validate();
    return t;
}

json train_to_json(const TrainConfig& t) {
    return {{"lr", t.lr},
            {"batch_size", t.batch_size},
            {"max_epochs", t.max_epochs},
            {"patience", t.patience},
            {"augment", {{"brightness", t.augment.brightness}, {"contrast", t.augment.contrast}, {"flip", t.augment.flip}}}};
}

std::string run_name(const std::string& model, const std::string& regime) { return model + "/" + regime; }

std::string file_stem(const std::string& model, const std::string& regime) {
    std::string s = model + "_" + regime;
    for (char& c : s)
        if (c == '/' || c == ' ') c = '_';
    return s;
}

void make_dirs(const fs::path& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw IoError(dir.string(), ec.message());
}

template <typename Fn>
auto stage(const std::string& name, const ProgressFn& progress, Fn&& fn) {
    if (progress) progress("[" + name + "]");
    try {
        return fn();
    } catch (const StageError&) {
        throw;
    } catch (const std::exception& e) {
        throw StageError(name, e.what());
    }
}

}  // namespace

ExperimentConfig experiment_config_from_json(const json& j) {
    if (!j.is_object()) throw InvalidArgument("config: top level must be an object");
    ExperimentConfig c;
    c.seed = get_or<std::uint64_t>(j, "seed", c.seed, "");
    c.dataset_name = get_or<std::string>(j, "dataset_name", c.dataset_name, "");
    c.sigma = get_or<double>(j, "sigma", c.sigma, "");
    c.train_fraction = get_or<double>(j, "train_fraction", c.train_fraction, "");
    c.missing_fraction = get_or<double>(j, "missing_fraction", c.missing_fraction, "");
    c.game_grid = get_or<std::size_t>(j, "game_grid", c.game_grid, "");

    if (j.contains("scene") == j.contains("dataset")) {
        throw InvalidArgument("config: exactly one of 'scene' or 'dataset' is required");
    }
    if (j.contains("scene")) {
        const json& s = j["scene"];
        labelcraft::SceneConfig sc;
        sc.height = get_or<std::size_t>(s, "height", sc.height, "scene.");
        sc.width = get_or<std::size_t>(s, "width", sc.width, "scene.");
        sc.count_min = get_or<std::size_t>(s, "count_min", sc.count_min, "scene.");
        sc.count_max = get_or<std::size_t>(s, "count_max", sc.count_max, "scene.");
        sc.radius_min = get_or<double>(s, "radius_min", sc.radius_min, "scene.");
        sc.radius_max = get_or<double>(s, "radius_max", sc.radius_max, "scene.");
        sc.noise = get_or<double>(s, "noise", sc.noise, "scene.");
        sc.seed = get_or<std::uint64_t>(s, "seed", derive_seed(c.seed, "scene"), "scene.");
        labelcraft::validate(sc);
        c.scene = sc;
        c.n_images = get_or<std::size_t>(s, "n_images", c.n_images, "scene.");
    } else {
        c.manifest = get_or<std::string>(j["dataset"], "manifest", "", "dataset.");
        if (c.manifest->empty()) throw InvalidArgument("config: 'dataset.manifest' is required");
    }
    if (j.contains("annotator")) c.annotator = model_from_json(j["annotator"], "annotator");
    if (j.contains("targets")) {
        if (!j["targets"].is_array() || j["targets"].empty()) {
            throw InvalidArgument("config: 'targets' must be a non-empty array");
        }
        c.targets.clear();
        for (std::size_t i = 0; i < j["targets"].size(); ++i) {
            c.targets.push_back(model_from_json(j["targets"][i], "targets[" + std::to_string(i) + "]"));
        }
    }
    if (j.contains("regimes")) {
        c.regimes = get_or<std::vector<std::string>>(j, "regimes", {}, "");
        for (const auto& r : c.regimes) {
            if (r != "perfect" && r != "imperfect" && r != "missing") {
                throw InvalidArgument("config: unknown regime '" + r + "'");
            }
        }
    }
    TrainConfig base;
    if (j.contains("train")) base = train_from_json(j["train"], base, "train");
    c.target_train = base;
    c.annotator_train = j.contains("annotator_train") ? train_from_json(j["annotator_train"], base, "annotator_train")
                                                      : base;
    return c;
}

json to_json(const ExperimentConfig& c) {
    json j;
    j["seed"] = c.seed;
    j["dataset_name"] = c.dataset_name;
    if (c.scene) {
        const auto& s = *c.scene;
        j["scene"] = {{"height", s.height},         {"width", s.width},           {"count_min", s.count_min},
                      {"count_max", s.count_max},   {"radius_min", s.radius_min}, {"radius_max", s.radius_max},
                      {"noise", s.noise},           {"seed", s.seed},             {"n_images", c.n_images}};
    } else if (c.manifest) {
        j["dataset"] = {{"manifest", c.manifest->generic_string()}};
    }
    j["sigma"] = c.sigma;
    j["train_fraction"] = c.train_fraction;
    j["annotator"] = {{"model", c.annotator.model}, {"width", c.annotator.width}};
    j["targets"] = json::array();
    for (const auto& t : c.targets) j["targets"].push_back({{"model", t.model}, {"width", t.width}});
    j["regimes"] = c.regimes;
    j["missing_fraction"] = c.missing_fraction;
    j["annotator_train"] = train_to_json(c.annotator_train);
    j["train"] = train_to_json(c.target_train);
    j["game_grid"] = c.game_grid;
    return j;
}

json to_json(const ExperimentReport& r) {
    json j;
    j["seed"] = r.seed;
    j["n_train"] = r.n_train;
    j["n_val"] = r.n_val;
    j["protocol"] = {{"imperfect_labels_generated_for", "train+val"},
                     {"training_split", "train"},
                     {"evaluation_split", "val"},
                     {"evaluation_labels", "perfect"}};
    j["annotator"] = metrics::to_json(r.annotator);
    j["rows"] = json::array();
    for (const auto& row : r.rows) j["rows"].push_back(metrics::to_json(row));
    j["curves"] = json::array();
    for (const auto& c : r.curves) {
        json epochs = json::array();
        for (const auto& e : c.curve) {
            epochs.push_back({{"epoch", e.epoch}, {"train_loss", e.train_loss}, {"val_mae", e.val_mae}});
        }
        j["curves"].push_back({{"name", c.name}, {"best_epoch", c.best_epoch}, {"epochs", std::move(epochs)}});
    }
    return j;
}

ExperimentReport run_experiment(const ExperimentConfig& config, const fs::path& out_dir, std::size_t threads,
                                const ProgressFn& progress) {
    const auto t0 = std::chrono::steady_clock::now();
    make_dirs(out_dir / "curves");
    make_dirs(out_dir / "checkpoints");
    io::write_text(out_dir / "config.json", to_json(config).dump(2) + "\n");

    ExperimentReport report;
    report.seed = config.seed;

    const labelcraft::DatasetManifest dataset = stage("data", progress, [&] {
        if (config.scene) {
            return labelcraft::generate_dataset(*config.scene, config.n_images, out_dir / "data", config.sigma, 4);
        }
        return labelcraft::load_manifest(*config.manifest);
    });

    const DatasetSplit split = stage("split", progress, [&] {
        return split_dataset(dataset, config.train_fraction, derive_seed(config.seed, "split"));
    });
    report.n_train = split.train.images.size();
    report.n_val = split.val.images.size();

    const auto val_set = stage("load-val", progress, [&] { return load_labelled(split.val, dataset); });

    auto evaluate_on_val = [&](const engine::NetworkState<float>& state, const std::string& regime) {
        std::vector<labelcraft::DensityMap> preds, gts;
        for (const auto& v : val_set) {
            preds.push_back(modelzoo::predict_density(state, v.image));
            gts.push_back(v.label);
        }
        metrics::MetricsReport m = metrics::evaluate(preds, gts, metrics::GameConfig{config.game_grid});
        m.model = state.spec.name;
        m.regime = regime;
        m.dataset = config.dataset_name;
        return m;
    };

    auto run_training = [&](const std::string& stage_name, const engine::NetworkState<float>& init,
                            const std::vector<LabelledImage>& train_set, TrainConfig tc, std::uint64_t seed,
                            const std::string& name, const std::string& stem) {
        return stage(stage_name, progress, [&] {
            tc.seed = seed;
            tc.threads = threads;
            auto result = train(init, train_set, val_set, tc, [&](const EpochRecord& r) {
                if (progress) {
                    progress("  " + name + " epoch " + std::to_string(r.epoch) + " loss " +
                             std::to_string(r.train_loss) + " val_mae " + std::to_string(r.val_mae));
                }
            });
            io::write_text(out_dir / "curves" / (stem + ".csv"), curve_csv(result.curve));
            engine::save_checkpoint(out_dir / "checkpoints" / (stem + ".nnck"), result.state);
            report.curves.push_back({name, result.curve, result.best_epoch});
            return result.state;
        });
    };

    // Annotator on perfect labels of the training split.
    const auto annotator_spec = modelzoo::spec_by_name(config.annotator.model, config.annotator.width, 1);
    const auto annotator_train_set =
        stage("load-train-perfect", progress, [&] { return load_labelled(split.train, dataset); });
    const auto annotator = run_training(
        "train-annotator", engine::init_network<float>(annotator_spec, derive_seed(config.seed, "init:annotator")),
        annotator_train_set, config.annotator_train, derive_seed(config.seed, "train:annotator"),
        run_name(annotator_spec.name, "annotator"), "annotator");
    report.annotator = evaluate_on_val(annotator, "perfect");

    const auto imperfect = stage("annotate", progress, [&] { return annotate(annotator, dataset, out_dir / "labels" / "imperfect"); });
    const auto missing = stage("missing-labels", progress, [&] {
        return make_missing_labels(dataset, config.missing_fraction, derive_seed(config.seed, "missing"), config.sigma,
                                   out_dir / "labels" / "missing");
    });

    for (const auto& target : config.targets) {
        const auto spec = modelzoo::spec_by_name(target.model, target.width, 1);
        // Same initialization and batch order across regimes: only the labels differ.
        const auto init = engine::init_network<float>(spec, derive_seed(config.seed, "init:" + spec.name));
        const std::uint64_t train_seed = derive_seed(config.seed, "train:" + spec.name);
        for (const auto& regime : config.regimes) {
            const labelcraft::DatasetManifest& labels =
                regime == "perfect" ? dataset : (regime == "imperfect" ? imperfect : missing);
            const auto train_set = stage("load-train-" + regime, progress, [&] { return load_labelled(split.train, labels); });
            const auto state = run_training("train-" + spec.name + "-" + regime, init, train_set, config.target_train,
                                            train_seed, run_name(spec.name, regime), file_stem(spec.name, regime));
            report.rows.push_back(stage("evaluate", progress, [&] { return evaluate_on_val(state, regime); }));
        }
    }

    report.wall_clock_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    stage("report", progress, [&] {
        io::write_text(out_dir / "report.json", to_json(report).dump(2) + "\n");
        io::write_text(out_dir / "report.txt", metrics::render_table(report.rows));
        io::write_text(out_dir / "timing.json", json{{"wall_clock_seconds", report.wall_clock_seconds}}.dump(2) + "\n");
        return 0;
    });
    return report;
}

}  // namespace crowdnoise::pipeline
