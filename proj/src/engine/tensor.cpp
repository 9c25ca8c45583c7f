#include "crowdnoise/engine/tensor.hpp"

#include "crowdnoise/errors.hpp"

#include <algorithm>

namespace crowdnoise::engine {

std::string Shape4::str() const {
    return std::to_string(n) + "x" + std::to_string(c) + "x" + std::to_string(h) + "x" + std::to_string(w);
}

template <typename T>
Tensor4<T>::Tensor4(Shape4 shape, const std::vector<T>& values) : shape_(shape), values_(values.begin(), values.end()) {
    if (values_.size() != shape_.size()) {
        throw InvalidArgument("Tensor4: " + std::to_string(values_.size()) + " values for shape " + shape_.str());
    }
}

template <typename T>
void Tensor4<T>::fill(T v) {
    std::fill(values_.begin(), values_.end(), v);
}

template class Tensor4<float>;
template class Tensor4<double>;

}  // namespace crowdnoise::engine
