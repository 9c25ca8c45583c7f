#pragma once

#include <algorithm>
#include <cstddef>
#include <new>
#include <span>
#include <string>
#include <vector>

namespace crowdnoise::engine {

/// (batch, channel, height, width)
struct Shape4 {
    std::size_t n = 0, c = 0, h = 0, w = 0;

    std::size_t size() const { return n * c * h * w; }
    std::string str() const;
    friend bool operator==(const Shape4&, const Shape4&) = default;
};

/// Cache-line aligned allocation. Vectorized kernels peel a prefix until the
/// data is aligned, so unaligned buffers would change the summation order and
/// make results depend on where the allocator placed them.
template <typename T>
struct AlignedAllocator {
    using value_type = T;
    static constexpr std::size_t kAlignment = 64;

    AlignedAllocator() = default;
    template <typename U>
    AlignedAllocator(const AlignedAllocator<U>&) noexcept {}

    T* allocate(std::size_t n) {
        return static_cast<T*>(::operator new(n * sizeof(T), std::align_val_t{kAlignment}));
    }
    void deallocate(T* p, std::size_t) noexcept { ::operator delete(p, std::align_val_t{kAlignment}); }

    template <typename U>
    friend bool operator==(const AlignedAllocator&, const AlignedAllocator<U>&) noexcept {
        return true;
    }
};

template <typename T>
using AlignedVector = std::vector<T, AlignedAllocator<T>>;

/// Dense rank-4 array in NCHW row-major order.
template <typename T>
class Tensor4 {
public:
    using value_type = T;

    Tensor4() = default;
    explicit Tensor4(Shape4 shape, T fill = T(0)) : shape_(shape), values_(shape.size(), fill) {}
    Tensor4(Shape4 shape, const std::vector<T>& values);

    const Shape4& shape() const { return shape_; }
    std::size_t size() const { return values_.size(); }
    bool empty() const { return values_.empty(); }

    std::span<T> values() { return values_; }
    std::span<const T> values() const { return values_; }
    T* data() { return values_.data(); }
    const T* data() const { return values_.data(); }
    AlignedVector<T>& storage() { return values_; }
    const AlignedVector<T>& storage() const { return values_; }

    std::size_t index(std::size_t n, std::size_t c, std::size_t h, std::size_t w) const {
        return ((n * shape_.c + c) * shape_.h + h) * shape_.w + w;
    }
    T& at(std::size_t n, std::size_t c, std::size_t h, std::size_t w) { return values_[index(n, c, h, w)]; }
    T at(std::size_t n, std::size_t c, std::size_t h, std::size_t w) const { return values_[index(n, c, h, w)]; }
    T& operator[](std::size_t i) { return values_[i]; }
    T operator[](std::size_t i) const { return values_[i]; }

    /// Pointer to the start of sample n.
    T* sample(std::size_t n) { return values_.data() + n * shape_.c * shape_.h * shape_.w; }
    const T* sample(std::size_t n) const { return values_.data() + n * shape_.c * shape_.h * shape_.w; }

    void fill(T v);

private:
    Shape4 shape_{};
    AlignedVector<T> values_;
};

template <typename To, typename From>
Tensor4<To> tensor_cast(const Tensor4<From>& t) {
    Tensor4<To> out(t.shape());
    std::copy(t.values().begin(), t.values().end(), out.values().begin());
    return out;
}

}  // namespace crowdnoise::engine
