#pragma once

#include "crowdnoise/labelcraft/scene.hpp"
#include "crowdnoise/metrics/report.hpp"
#include "crowdnoise/pipeline/train.hpp"

#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace crowdnoise::pipeline {

struct ModelChoice {
    std::string model = "mcnn";  // csrnet_lite | mcnn
    double width = 1.0;
};

/// Full experiment description; see configs/reference.json.
struct ExperimentConfig {
    std::uint64_t seed = 1;
    std::string dataset_name = "synthetic";
    std::optional<labelcraft::SceneConfig> scene;    // synthesize ...
    std::size_t n_images = 200;
    std::optional<std::filesystem::path> manifest;    // ... or reuse a dataset
    double sigma = 7.0;
    double train_fraction = 0.7;
    ModelChoice annotator{"csrnet_lite", 0.25};
    std::vector<ModelChoice> targets{{"mcnn", 0.5}};
    std::vector<std::string> regimes{"perfect", "imperfect", "missing"};
    double missing_fraction = 0.3;
    TrainConfig annotator_train;
    TrainConfig target_train;
    std::size_t game_grid = 4;
};

/// Throws InvalidArgument naming the offending key.
ExperimentConfig experiment_config_from_json(const nlohmann::json& j);
nlohmann::json to_json(const ExperimentConfig& config);

struct RunCurve {
    std::string name;   // "<model>/<regime>"
    std::vector<EpochRecord> curve;
    std::size_t best_epoch = 0;
};

struct ExperimentReport {
    std::uint64_t seed = 0;
    std::vector<metrics::MetricsReport> rows;   // one per target x regime
    metrics::MetricsReport annotator;          // annotator vs perfect GT
    std::vector<RunCurve> curves;
    std::size_t n_train = 0, n_val = 0;
    double wall_clock_seconds = 0.0;            // kept out of the JSON
};

/// Deterministic: equal configs give byte-identical JSON.
nlohmann::json to_json(const ExperimentReport& report);

/// Raised when a stage of run_experiment fails; artifacts written so far stay on disk.
class StageError : public std::runtime_error {
public:
    StageError(std::string stage, const std::string& cause)
        : std::runtime_error("stage '" + stage + "' failed: " + cause), stage_(std::move(stage)) {}
    const std::string& stage() const noexcept { return stage_; }

private:
    std::string stage_;
};

using ProgressFn = std::function<void(const std::string&)>;

/// data -> split -> annotator on perfect labels -> annotate (train + val) ->
/// missing labels -> every target under every regime -> evaluation on the
/// validation split against perfect ground truth. Writes report.json,
/// report.txt, timing.json, curves/*.csv and checkpoints/*.nnck under out_dir.
ExperimentReport run_experiment(const ExperimentConfig& config, const std::filesystem::path& out_dir,
                                std::size_t threads = 1, const ProgressFn& progress = {});

}  // namespace crowdnoise::pipeline
