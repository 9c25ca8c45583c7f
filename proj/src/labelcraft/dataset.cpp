#include "crowdnoise/labelcraft/dataset.hpp"

#include "crowdnoise/binary_io.hpp"
#include "crowdnoise/errors.hpp"
#include "crowdnoise/labelcraft/density.hpp"
#include "crowdnoise/labelcraft/formats.hpp"

#include <json.hpp>

namespace fs = std::filesystem;
using nlohmann::json;

namespace crowdnoise::labelcraft {

namespace {

std::string relative_to(const fs::path& p, const fs::path& base) {
    if (p.empty()) return {};
    const fs::path abs = fs::absolute(p).lexically_normal();
    const fs::path rel = abs.lexically_relative(fs::absolute(base).lexically_normal());
    if (rel.empty() || *rel.begin() == "..") return abs.generic_string();
    return rel.generic_string();
}

fs::path resolve(const json& j, const char* key, const fs::path& base) {
    if (!j.contains(key) || j[key].is_null()) return {};
    const fs::path p = j[key].get<std::string>();
    if (p.empty()) return {};
    return p.is_absolute() ? p : (base / p).lexically_normal();
}

}  // namespace

const ManifestEntry& DatasetManifest::find(const std::string& id) const {
    for (const auto& e : images)
        if (e.id == id) return e;
    throw InvalidArgument("manifest has no image '" + id + "'");
}

void save_manifest(const fs::path& path, const DatasetManifest& manifest) {
    const fs::path base = path.parent_path().empty() ? fs::path(".") : path.parent_path();
    json images = json::array();
    for (const auto& e : manifest.images) {
        json item;
        item["id"] = e.id;
        item["image_path"] = relative_to(e.image_path, base);
        item["annotation_path"] = relative_to(e.annotation_path, base);
        item["density_path"] = e.density_path.empty() ? json(nullptr) : json(relative_to(e.density_path, base));
        item["density_q_path"] = relative_to(e.density_q_path, base);
        item["count"] = e.count;
        images.push_back(std::move(item));
    }
    json j;
    j["images"] = std::move(images);
    j["regime"] = manifest.regime;
    j["sigma"] = manifest.sigma;
    j["stride"] = manifest.stride;
    if (manifest.fraction) j["fraction"] = *manifest.fraction;
    io::write_text(path, j.dump(2) + "\n");
}

DatasetManifest load_manifest(const fs::path& path) {
    const std::string text = io::read_text(path);
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw IoError(path.string(), e.what());
    }
    const fs::path base = path.parent_path().empty() ? fs::path(".") : path.parent_path();
    DatasetManifest m;
    try {
        for (const auto& item : j.at("images")) {
            ManifestEntry e;
            e.id = item.at("id").get<std::string>();
            e.image_path = resolve(item, "image_path", base);
            e.annotation_path = resolve(item, "annotation_path", base);
            e.density_path = resolve(item, "density_path", base);
            e.density_q_path = resolve(item, "density_q_path", base);
            e.count = item.at("count").get<double>();
            m.images.push_back(std::move(e));
        }
        m.regime = j.value("regime", std::string("perfect"));
        m.sigma = j.value("sigma", 7.0);
        m.stride = j.value("stride", std::size_t{4});
        if (j.contains("fraction")) m.fraction = j["fraction"].get<double>();
    } catch (const json::exception& e) {
        throw IoError(path.string(), std::string("malformed manifest: ") + e.what());
    }
    return m;
}

DatasetManifest generate_dataset(const SceneConfig& config, std::size_t n_images, const fs::path& out_dir,
                                 double sigma, std::size_t stride) {
    if (n_images == 0) throw InvalidArgument("generate_dataset: n_images must be >= 1");
    validate(config);
    if (config.height % stride != 0 || config.width % stride != 0) {
        throw InvalidArgument("generate_dataset: image size must be divisible by the stride " + std::to_string(stride));
    }
    for (const char* sub : {"images", "annotations", "density", "density_q"}) {
        std::error_code ec;
        fs::create_directories(out_dir / sub, ec);
        if (ec) throw IoError((out_dir / sub).string(), ec.message());
    }

    DatasetManifest manifest;
    manifest.sigma = sigma;
    manifest.stride = stride;
    for (std::size_t i = 0; i < n_images; ++i) {
        const Scene scene = generate_scene(config, i);
        const std::string& id = scene.dots.image_id;
        ManifestEntry e;
        e.id = id;
        e.image_path = out_dir / "images" / (id + ".pgm");
        e.annotation_path = out_dir / "annotations" / (id + ".json");
        e.density_path = out_dir / "density" / (id + ".dmap");
        e.density_q_path = out_dir / "density_q" / (id + ".dmap");
        e.count = static_cast<double>(scene.dots.count());

        const DensityMap full = render_density(scene.dots, config.height, config.width, sigma);
        write_pgm(e.image_path, scene.image);
        write_annotation(e.annotation_path, scene.dots);
        write_density(e.density_path, full);
        write_density(e.density_q_path, downsample_sum(full, stride));
        manifest.images.push_back(std::move(e));
    }
    save_manifest(out_dir / "manifest.json", manifest);
    return manifest;
}

}  // namespace crowdnoise::labelcraft
