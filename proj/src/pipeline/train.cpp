#include "crowdnoise/pipeline/train.hpp"

#include "crowdnoise/errors.hpp"
#include "crowdnoise/labelcraft/formats.hpp"
#include "crowdnoise/modelzoo/predict.hpp"
#include "crowdnoise/random.hpp"

#include <cmath>
#include <numeric>
#include <sstream>
#include <thread>

namespace crowdnoise::pipeline {

using engine::NetworkState;
using engine::ParamList;
using engine::Shape4;
using engine::Tensor4;

std::vector<LabelledImage> load_labelled(const labelcraft::DatasetManifest& images,
                                         const labelcraft::DatasetManifest& labels,
                                         std::vector<std::filesystem::path>* accessed) {
    std::vector<LabelledImage> out;
    out.reserve(images.images.size());
    for (const auto& e : images.images) {
        const auto& le = labels.find(e.id);
        if (le.density_q_path.empty()) throw InvalidArgument("label manifest has no label file for '" + e.id + "'");
        if (!std::filesystem::exists(le.density_q_path)) {
            throw InvalidArgument("missing label file " + le.density_q_path.string());
        }
        LabelledImage li;
        li.id = e.id;
        li.image = labelcraft::read_pgm(e.image_path);
        li.label = labelcraft::read_density(le.density_q_path);
        if (accessed) {
            accessed->push_back(e.image_path);
            accessed->push_back(le.density_q_path);
        }
        out.push_back(std::move(li));
    }
    return out;
}

void TrainConfig::validate() const {
    if (!(lr > 0.0)) throw InvalidArgument("train: lr must be > 0");
    if (batch_size == 0) throw InvalidArgument("train: batch size must be >= 1");
    if (patience == 0) throw InvalidArgument("train: patience must be >= 1");
}

namespace {

Tensor4<float> label_tensor(const DensityMap& m) {
    Tensor4<float> t(Shape4{1, 1, m.height, m.width});
    for (std::size_t i = 0; i < m.values.size(); ++i) t[i] = static_cast<float>(m.values[i]);
    return t;
}

// Squared error of one sample; its gradient (scaled for a batch of `batch`)
// is accumulated into `grads`.
double sample_gradient(const NetworkState<float>& state, const GrayImage& image, const DensityMap& label,
                       std::size_t batch, ParamList<float>& grads) {
    engine::ForwardTrace<float> trace;
    const Tensor4<float> out = engine::forward(state, modelzoo::image_tensor(image), &trace);
    const Tensor4<float> target = label_tensor(label);
    if (out.shape() != target.shape()) {
        throw InvalidArgument("train: network output " + out.shape().str() + " but label is " + target.shape().str());
    }
    engine::Loss<float> loss = engine::mse_loss(out, target);
    const float inv_b = 1.0f / static_cast<float>(batch);
    for (float& g : loss.grad.values()) g *= inv_b;
    engine::backward(state, trace, loss.grad, grads);
    return loss.value;
}

void zero(ParamList<float>& grads) {
    for (auto& g : grads) g.fill(0.0f);
}

// Samples are processed in parallel into private gradient slots and then
// summed in batch order, so results do not depend on the thread count.
template <typename Fn>
void for_each_index(std::size_t n, std::size_t threads, Fn&& fn) {
    if (threads <= 1 || n <= 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::vector<std::exception_ptr> errors(n);
    {
        std::vector<std::jthread> pool;
        const std::size_t workers = std::min(threads, n);
        for (std::size_t w = 0; w < workers; ++w) {
            pool.emplace_back([&, w] {
                for (std::size_t i = w; i < n; i += workers) {
                    try {
                        fn(i);
                    } catch (...) {
                        errors[i] = std::current_exception();
                    }
                }
            });
        }
    }
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
}

struct Optimizer {
    engine::AdamState<float> adam;
    ParamList<float> total;
    std::vector<ParamList<float>> slots;

    Optimizer(const NetworkState<float>& state, double lr, std::size_t batch) {
        adam.hyper.lr = lr;
        total = engine::zeros_like(state.params);
        slots.assign(batch, engine::zeros_like(state.params));
    }

    void step(NetworkState<float>& state, std::size_t used) {
        zero(total);
        for (std::size_t i = 0; i < used; ++i) {
            for (std::size_t t = 0; t < total.size(); ++t) {
                auto dst = total[t].values();
                auto src = slots[i][t].values();
                for (std::size_t j = 0; j < dst.size(); ++j) dst[j] += src[j];
            }
        }
        std::vector<std::span<float>> params;
        std::vector<std::span<const float>> grads;
        for (std::size_t t = 0; t < total.size(); ++t) {
            params.push_back(state.params[t].values());
            grads.push_back(total[t].values());
        }
        engine::adam_step<float>(params, grads, adam);
    }
};

}  // namespace

double validation_mae(const NetworkState<float>& state, const std::vector<LabelledImage>& val) {
    if (val.empty()) throw InvalidArgument("validation set is empty");
    double total = 0.0;
    for (const auto& v : val) total += std::abs(modelzoo::predict_density(state, v.image).sum() - v.label.sum());
    return total / double(val.size());
}

TrainResult train(NetworkState<float> model, const std::vector<LabelledImage>& train_set,
                  const std::vector<LabelledImage>& val, const TrainConfig& config, const EpochCallback& on_epoch) {
    config.validate();
    TrainResult result;
    result.state = model;
    if (config.max_epochs == 0) return result;
    if (train_set.empty()) throw InvalidArgument("train: empty training set");

    const std::size_t n = train_set.size();
    const std::size_t batch = std::min(config.batch_size, n);
    Optimizer opt(model, config.lr, batch);
    std::vector<double> sq(batch, 0.0);
    std::vector<Augmented> work(batch);
    std::size_t since_best = 0;
    std::int64_t step = 0;

    for (std::size_t epoch = 1; epoch <= config.max_epochs; ++epoch) {
        std::vector<std::size_t> order(n);
        std::iota(order.begin(), order.end(), std::size_t{0});
        Rng shuffle(derive_seed(config.seed, "shuffle", epoch));
        for (std::size_t i = n; i > 1; --i) std::swap(order[i - 1], order[shuffle.below(i)]);

        double epoch_sq = 0.0;
        for (std::size_t start = 0; start < n; start += batch) {
            const std::size_t used = std::min(batch, n - start);
            ++step;
            for_each_index(used, config.threads, [&](std::size_t i) {
                const std::size_t idx = order[start + i];
                const LabelledImage& s = train_set[idx];
                const std::uint64_t aug_seed = derive_seed(config.seed, "augment", (epoch - 1) * n + idx);
                const Augmented a = augment(s.image, s.label, {}, aug_seed, config.augment);
                zero(opt.slots[i]);
                sq[i] = sample_gradient(model, a.image, a.density, used, opt.slots[i]);
            });
            double batch_sq = 0.0;
            for (std::size_t i = 0; i < used; ++i) batch_sq += sq[i];
            if (!std::isfinite(batch_sq)) throw TrainingDiverged(std::int64_t(epoch), step, "non-finite loss");
            try {
                opt.step(model, used);
            } catch (const TrainingDiverged& e) {
                throw TrainingDiverged(std::int64_t(epoch), step, "non-finite gradient");
            }
            epoch_sq += batch_sq;
        }

        EpochRecord rec{epoch, epoch_sq / double(n), validation_mae(model, val)};
        result.curve.push_back(rec);
        if (on_epoch) on_epoch(rec);
        if (result.best_epoch == 0 || rec.val_mae < result.best_val_mae) {
            result.best_epoch = epoch;
            result.best_val_mae = rec.val_mae;
            result.state = model;
            since_best = 0;
        } else if (++since_best >= config.patience) {
            break;
        }
    }
    return result;
}

std::vector<double> overfit_batch(NetworkState<float>& model, const std::vector<LabelledImage>& batch, double lr,
                                  std::size_t steps) {
    if (batch.empty()) throw InvalidArgument("overfit_batch: empty batch");
    Optimizer opt(model, lr, batch.size());
    std::vector<double> losses;
    for (std::size_t s = 0; s <= steps; ++s) {
        double total = 0.0;
        for (std::size_t i = 0; i < batch.size(); ++i) {
            zero(opt.slots[i]);
            total += sample_gradient(model, batch[i].image, batch[i].label, batch.size(), opt.slots[i]);
        }
        losses.push_back(total / double(batch.size()));
        if (!std::isfinite(losses.back())) throw TrainingDiverged(0, std::int64_t(s), "non-finite loss");
        if (s < steps) opt.step(model, batch.size());
    }
    return losses;
}

std::string curve_csv(const std::vector<EpochRecord>& curve) {
    std::ostringstream out;
    out.precision(17);
    out << "epoch,train_loss,val_mae\n";
    for (const auto& r : curve) out << r.epoch << "," << r.train_loss << "," << r.val_mae << "\n";
    return out.str();
}

}  // namespace crowdnoise::pipeline
