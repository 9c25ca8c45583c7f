#include "crowdnoise/pipeline/labels.hpp"

#include "crowdnoise/errors.hpp"
#include "crowdnoise/labelcraft/corruption.hpp"
#include "crowdnoise/labelcraft/density.hpp"
#include "crowdnoise/labelcraft/formats.hpp"
#include "crowdnoise/modelzoo/predict.hpp"
#include "crowdnoise/random.hpp"

namespace fs = std::filesystem;

namespace crowdnoise::pipeline {

namespace {

void make_dirs(const fs::path& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw IoError(dir.string(), ec.message());
}

DatasetManifest derived(const DatasetManifest& src, const std::string& regime) {
    DatasetManifest m;
    m.regime = regime;
    m.sigma = src.sigma;
    m.stride = src.stride;
    return m;
}

DatasetManifest render_labels(const DatasetManifest& manifest, const fs::path& out_dir, const std::string& regime,
                              double sigma, double fraction, std::uint64_t seed) {
    make_dirs(out_dir / "density");
    make_dirs(out_dir / "density_q");
    DatasetManifest out = derived(manifest, regime);
    out.sigma = sigma;
    if (regime == "missing") out.fraction = fraction;
    for (const auto& e : manifest.images) {
        const labelcraft::GrayImage image = labelcraft::read_pgm(e.image_path);
        labelcraft::DotAnnotation dots = labelcraft::read_annotation(e.annotation_path, e.id);
        if (fraction > 0.0) dots = labelcraft::drop_annotations(dots, fraction, derive_seed(seed, hash_name(e.id)));
        const auto full = labelcraft::render_density(dots, image.height, image.width, sigma);
        const auto quarter = labelcraft::downsample_sum(full, manifest.stride);

        labelcraft::ManifestEntry le = e;
        le.density_path = out_dir / "density" / (e.id + ".dmap");
        le.density_q_path = out_dir / "density_q" / (e.id + ".dmap");
        le.count = quarter.sum();
        labelcraft::write_density(le.density_path, full);
        labelcraft::write_density(le.density_q_path, quarter);
        out.images.push_back(std::move(le));
    }
    labelcraft::save_manifest(out_dir / "manifest.json", out);
    return out;
}

}  // namespace

DatasetManifest make_perfect_labels(const DatasetManifest& manifest, double sigma, const fs::path& out_dir) {
    return render_labels(manifest, out_dir, "perfect", sigma, 0.0, 0);
}

DatasetManifest make_missing_labels(const DatasetManifest& manifest, double fraction, std::uint64_t seed,
                                    double sigma, const fs::path& out_dir) {
    if (!(fraction >= 0.0 && fraction <= 1.0)) {
        throw InvalidArgument("make_missing_labels: fraction must be in [0, 1]");
    }
    return render_labels(manifest, out_dir, "missing", sigma, fraction, seed);
}

DatasetManifest annotate(const engine::NetworkState<float>& annotator, const DatasetManifest& manifest,
                         const fs::path& out_dir) {
    make_dirs(out_dir / "density_q");
    DatasetManifest out = derived(manifest, "imperfect");
    out.stride = annotator.spec.output_stride;
    for (const auto& e : manifest.images) {
        const auto image = labelcraft::read_pgm(e.image_path);
        const auto label = modelzoo::predict_density(annotator, image);
        labelcraft::ManifestEntry le = e;
        le.density_path.clear();
        le.density_q_path = out_dir / "density_q" / (e.id + ".dmap");
        le.count = label.sum();
        labelcraft::write_density(le.density_q_path, label);
        out.images.push_back(std::move(le));
    }
    labelcraft::save_manifest(out_dir / "manifest.json", out);
    return out;
}

}  // namespace crowdnoise::pipeline
