#include "crowdnoise/errors.hpp"

namespace crowdnoise {

IoError::IoError(std::string path, const std::string& what)
    : std::runtime_error(path + ": " + what), path_(std::move(path)) {}

TrainingDiverged::TrainingDiverged(std::int64_t epoch, std::int64_t step, const std::string& what)
    : std::runtime_error("training diverged at epoch " + std::to_string(epoch) + ", step " +
                         std::to_string(step) + ": " + what),
      epoch_(epoch),
      step_(step) {}

}  // namespace crowdnoise
